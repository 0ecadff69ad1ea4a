#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>

#include "stablevar/errors.hpp"
#include "stablevar/linalg.hpp"
#include "stablevar/rng.hpp"

namespace stablevar {

// First-order vector autoregression y_t = F y_{t-1} + w_t with white noise
// covariance Q.  Q must be symmetric positive definite; F may have any
// spectrum (stability is checked by the operations that need it).
class VarModel {
 public:
  VarModel(Eigen::MatrixXd f, Eigen::MatrixXd q) : f_(std::move(f)), q_(std::move(q)) {
    detail::require_square(f_, "VarModel F");
    detail::require_finite(f_, "VarModel F");
    if (q_.rows() != f_.rows() || q_.cols() != f_.cols()) {
      throw InvalidInput("VarModel: F and Q must have matching dimensions");
    }
    require_spd(q_, "VarModel Q");
    q_ = detail::symmetrize(q_);
  }

  Eigen::Index dim() const { return f_.rows(); }
  const Eigen::MatrixXd& f() const { return f_; }
  const Eigen::MatrixXd& q() const { return q_; }

 private:
  Eigen::MatrixXd f_;
  Eigen::MatrixXd q_;
};

// Time-reversed representation of the same stationary process.
struct BackwardsModel {
  Eigen::MatrixXd f_b;
  Eigen::MatrixXd q_b;
};

// One simulated path stored column-wise: y.col(t) is the state at time t,
// t = 0..T.
struct Trajectory {
  Eigen::MatrixXd y;
  std::uint64_t seed = 0;

  Eigen::Index dim() const { return y.rows(); }
  Eigen::Index steps() const { return y.cols() - 1; }
};

enum class StartMode { stationary, origin };

// Stationary state covariance Pi solving Pi = F Pi F' + Q.
inline Eigen::MatrixXd stationary_covariance(const VarModel& model) {
  return solve_dlyap(model.f(), model.q());
}

// Time-reversed model: F_b = Pi F' Pi^{-1}, Q_b = Pi - F_b Pi F_b'.
inline BackwardsModel backwards_model(const VarModel& model) {
  const Eigen::MatrixXd pi = stationary_covariance(model);
  require_spd(pi, "backwards_model stationary covariance");
  Eigen::LLT<Eigen::MatrixXd> llt(pi);
  BackwardsModel out;
  out.f_b = llt.solve(model.f() * pi).transpose();
  out.q_b = detail::symmetrize(pi - out.f_b * pi * out.f_b.transpose());
  return out;
}

// Simulates T transitions.  With StartMode::stationary the initial state is
// drawn from N(0, Pi) so the whole path is a stationary sample; with
// StartMode::origin the path starts at zero.  Identical arguments give
// bit-identical output.  Normal draws are consumed state-by-state: n draws
// for the start (stationary mode only), then n per transition.
inline Trajectory simulate(const VarModel& model, Eigen::Index t_steps, std::uint64_t seed,
                           StartMode start = StartMode::stationary) {
  if (t_steps < 1) {
    throw InvalidInput("simulate: need at least one transition");
  }
  const double rho = spectral_radius(model.f());
  if (!(rho < 1.0)) {
    throw UnstableMatrix("simulate: transition matrix is not stable", rho);
  }
  const Eigen::Index n = model.dim();
  const bool unit_noise = model.q().isIdentity(0.0);
  const Eigen::MatrixXd noise_shape =
      unit_noise ? Eigen::MatrixXd() : spd_sqrt(model.q());

  Trajectory traj;
  traj.seed = seed;
  traj.y.resize(n, t_steps + 1);

  GaussianRng rng(seed);
  Eigen::VectorXd z(n);
  auto draw = [&]() {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  };

  if (start == StartMode::stationary) {
    const Eigen::MatrixXd state_shape = spd_sqrt(stationary_covariance(model));
    draw();
    traj.y.col(0) = state_shape * z;
  } else {
    traj.y.col(0).setZero();
  }
  for (Eigen::Index t = 1; t <= t_steps; ++t) {
    draw();
    traj.y.col(t).noalias() = model.f() * traj.y.col(t - 1);
    if (unit_noise) {
      traj.y.col(t) += z;
    } else {
      traj.y.col(t).noalias() += noise_shape * z;
    }
  }
  if (!traj.y.allFinite()) {
    throw Error("simulate: generated path is not finite");
  }
  return traj;
}

}  // namespace stablevar
