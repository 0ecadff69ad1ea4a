#pragma once

#include <Eigen/Dense>

#include "stablevar/errors.hpp"
#include "stablevar/linalg.hpp"
#include "stablevar/var_process.hpp"

namespace stablevar {

// Lagged data matrices: y0.col(t) = y_t and y1.col(t) = y_{t+1} for
// t = 0..T-1, so y1 = F y0 + noise column-by-column.
struct DataMatrices {
  Eigen::MatrixXd y0;
  Eigen::MatrixXd y1;
};

inline DataMatrices build_data_matrices(const Trajectory& traj) {
  if (traj.steps() < 1) {
    throw InvalidInput("build_data_matrices: trajectory needs at least one transition");
  }
  detail::require_finite(traj.y, "build_data_matrices");
  const Eigen::Index t_len = traj.steps();
  return DataMatrices{traj.y.leftCols(t_len), traj.y.rightCols(t_len)};
}

// Second-moment statistics of a lagged sample: s00 and s11 are the Gram
// matrices of the current and next states scaled by 1/T, s10 the cross
// moment of next state against current state.
struct SampleMoments {
  Eigen::MatrixXd s00;
  Eigen::MatrixXd s11;
  Eigen::MatrixXd s10;
  Eigen::Index t_len = 0;

  Eigen::Index dim() const { return s00.rows(); }
  Eigen::MatrixXd s01() const { return s10.transpose(); }
};

inline SampleMoments sample_moments(const Eigen::MatrixXd& y0, const Eigen::MatrixXd& y1) {
  if (y0.rows() != y1.rows() || y0.cols() != y1.cols()) {
    throw InvalidInput("sample_moments: lagged data matrices must have equal shapes");
  }
  if (y0.cols() < 1 || y0.rows() < 1) {
    throw InvalidInput("sample_moments: empty data");
  }
  detail::require_finite(y0, "sample_moments");
  detail::require_finite(y1, "sample_moments");
  const double inv_t = 1.0 / static_cast<double>(y0.cols());
  SampleMoments s;
  s.t_len = y0.cols();
  s.s00 = detail::symmetrize(inv_t * (y0 * y0.transpose()));
  s.s11 = detail::symmetrize(inv_t * (y1 * y1.transpose()));
  s.s10.noalias() = inv_t * (y1 * y0.transpose());
  return s;
}

inline SampleMoments sample_moments(const Trajectory& traj) {
  const DataMatrices data = build_data_matrices(traj);
  return sample_moments(data.y0, data.y1);
}

// Forwards residual covariance at a candidate transition matrix:
// s11 - F s01 - s10 F' + F s00 F'.  Always symmetric PSD.
inline Eigen::MatrixXd residual_forward(const SampleMoments& s, const Eigen::MatrixXd& f) {
  if (f.rows() != s.dim() || f.cols() != s.dim()) {
    throw InvalidInput("residual_forward: F has wrong dimensions");
  }
  detail::require_finite(f, "residual_forward");
  return detail::symmetrize(s.s11 - f * s.s01() - s.s10 * f.transpose() +
                            f * s.s00 * f.transpose());
}

// Backwards residual covariance at a candidate backwards matrix G:
// s00 - G s10 - s01 G' + G s11 G'.
inline Eigen::MatrixXd backward_residual_at(const SampleMoments& s, const Eigen::MatrixXd& g) {
  if (g.rows() != s.dim() || g.cols() != s.dim()) {
    throw InvalidInput("backward_residual_at: G has wrong dimensions");
  }
  detail::require_finite(g, "backward_residual_at");
  return detail::symmetrize(s.s00 - g * s.s10 - s.s01() * g.transpose() +
                            g * s.s11 * g.transpose());
}

// Backwards residual induced by a forwards candidate F through the
// covariance pairing P: the backwards matrix is P F' P^{-1}.
inline Eigen::MatrixXd residual_backward(const SampleMoments& s, const Eigen::MatrixXd& f,
                                         const Eigen::MatrixXd& p) {
  if (f.rows() != s.dim() || f.cols() != s.dim()) {
    throw InvalidInput("residual_backward: F has wrong dimensions");
  }
  detail::require_finite(f, "residual_backward");
  if (p.rows() != s.dim() || p.cols() != s.dim()) {
    throw InvalidInput("residual_backward: P has wrong dimensions");
  }
  require_spd(p, "residual_backward P");
  Eigen::LLT<Eigen::MatrixXd> llt(detail::symmetrize(p));
  const Eigen::MatrixXd g = llt.solve(f * p).transpose();
  return backward_residual_at(s, g);
}

// Forwards-backwards fit criterion: trace of P^{-1} applied to the sum of
// the forwards and backwards residual covariances.
inline double criterion_j(const SampleMoments& s, const Eigen::MatrixXd& f,
                          const Eigen::MatrixXd& p) {
  if (f.rows() != s.dim() || f.cols() != s.dim()) {
    throw InvalidInput("criterion_j: F has wrong dimensions");
  }
  detail::require_finite(f, "criterion_j");
  if (p.rows() != s.dim() || p.cols() != s.dim()) {
    throw InvalidInput("criterion_j: P has wrong dimensions");
  }
  require_spd(p, "criterion_j P");
  Eigen::LLT<Eigen::MatrixXd> llt(detail::symmetrize(p));
  const Eigen::MatrixXd g = llt.solve(f * p).transpose();
  const Eigen::MatrixXd total = residual_forward(s, f) + backward_residual_at(s, g);
  return llt.solve(total).trace();
}

}  // namespace stablevar
