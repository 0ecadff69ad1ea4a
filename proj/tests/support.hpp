#pragma once

#include <Eigen/Dense>

#include <vector>

#include "stablevar/stablevar.hpp"

// Deterministic random inputs for tests.  Everything is driven by
// stablevar::GaussianRng so a fixed seed fixes the whole test.
namespace testutil {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                                     stablevar::GaussianRng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, j) = rng.normal();
    }
  }
  return m;
}

inline Eigen::MatrixXd random_symmetric(Eigen::Index n, stablevar::GaussianRng& rng) {
  const Eigen::MatrixXd g = random_matrix(n, n, rng);
  return 0.5 * (g + g.transpose());
}

inline Eigen::MatrixXd random_spd(Eigen::Index n, stablevar::GaussianRng& rng,
                                  double ridge = 0.5) {
  const Eigen::MatrixXd g = random_matrix(n, n, rng);
  return g * g.transpose() / static_cast<double>(n) +
         ridge * Eigen::MatrixXd::Identity(n, n);
}

// Random square matrix rescaled to the requested spectral radius.
inline Eigen::MatrixXd random_stable(Eigen::Index n, stablevar::GaussianRng& rng,
                                     double radius = 0.9) {
  Eigen::MatrixXd g = random_matrix(n, n, rng);
  const double rho = stablevar::spectral_radius(g);
  return g * (radius / rho);
}

// Sample moments of iid Gaussian data blocks; a generic valid moment set
// with positive definite s00 and s11 when t_len >= n.
inline stablevar::SampleMoments random_moments(Eigen::Index n, Eigen::Index t_len,
                                               stablevar::GaussianRng& rng) {
  const Eigen::MatrixXd y0 = random_matrix(n, t_len, rng);
  const Eigen::MatrixXd y1 = random_matrix(n, t_len, rng);
  return stablevar::sample_moments(y0, y1);
}

// Sample moments of a simulated stable process; carries the realistic
// cross-correlation structure between s00, s10, and s11.
inline stablevar::SampleMoments simulated_moments(Eigen::Index n, Eigen::Index t_len,
                                                  stablevar::GaussianRng& rng,
                                                  std::uint64_t sim_seed,
                                                  double radius = 0.9) {
  const Eigen::MatrixXd f = random_stable(n, rng, radius);
  const stablevar::VarModel model(f, Eigen::MatrixXd::Identity(n, n));
  const stablevar::Trajectory traj = stablevar::simulate(model, t_len, sim_seed);
  return stablevar::sample_moments(traj);
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = b.norm();
  return (a - b).norm() / (scale > 0.0 ? scale : 1.0);
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testutil
