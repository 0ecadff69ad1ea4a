#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "stablevar/errors.hpp"
#include "stablevar/linalg.hpp"
#include "stablevar/moments.hpp"

namespace stablevar {

// ls:           unconstrained least squares, F = s10 s00^{-1}
// fb_sylvester: forwards-backwards fit for a caller-chosen SPD pairing P,
//               obtained from a Sylvester equation
// fb11:         forwards-backwards fit with P = s11 in closed form,
//               F = 2 s10 (s00 + s11)^{-1}
// rls:          reduced-rank weighted least squares
// rfb:          reduced-rank forwards-backwards fit; always stable
// bls:          backwards least squares, G = s01 s11^{-1}
enum class Method { ls, fb_sylvester, fb11, rls, rfb, bls };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::ls: return "ls";
    case Method::fb_sylvester: return "fb_sylvester";
    case Method::fb11: return "fb11";
    case Method::rls: return "rls";
    case Method::rfb: return "rfb";
    case Method::bls: return "bls";
  }
  throw InvalidInput("method_name: unknown method");
}

inline Method method_from_name(const std::string& name) {
  if (name == "ls") return Method::ls;
  if (name == "fb_sylvester") return Method::fb_sylvester;
  if (name == "fb11" || name == "fb") return Method::fb11;
  if (name == "rls") return Method::rls;
  if (name == "rfb") return Method::rfb;
  if (name == "bls") return Method::bls;
  throw InvalidInput("method_from_name: unknown method '" + name + "'");
}

// Result of one estimator run.  f_hat maps the current state to the next
// one (for bls: the next state to the current one).  rank is the imposed
// rank bound; full-rank methods report the state dimension.  q_hat is the
// estimated noise covariance for the methods that define one.
struct Estimate {
  Eigen::MatrixXd f_hat;
  Method method = Method::ls;
  Eigen::Index rank = 0;
  std::optional<Eigen::MatrixXd> q_hat;
  double spectral_radius = 0.0;
  double stability_margin = 0.0;
  double fit_seconds = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

using FitClock = std::chrono::steady_clock;

inline void finalize_estimate(Estimate& est, FitClock::time_point start) {
  est.spectral_radius = stablevar::spectral_radius(est.f_hat);
  est.stability_margin = 1.0 - est.spectral_radius;
  est.fit_seconds =
      std::chrono::duration_cast<std::chrono::duration<double>>(FitClock::now() - start)
          .count();
}

// Symmetric square root and inverse square root from one decomposition.
struct SpdRoots {
  Eigen::MatrixXd sqrt;
  Eigen::MatrixXd inv_sqrt;
};

inline SpdRoots spd_roots(const Eigen::MatrixXd& s, const char* what) {
  const SymEig eig = sym_eig(s);
  const double max_eig = eig.values(0);
  const double min_eig = eig.values(eig.values.size() - 1);
  if (!(max_eig > 0.0) || !(min_eig > kSpdFloor * max_eig)) {
    throw NotPositiveDefinite(std::string(what) + ": matrix is not positive definite",
                              min_eig);
  }
  SpdRoots roots;
  const Eigen::VectorXd root_vals = eig.values.array().sqrt().matrix();
  roots.sqrt = symmetrize(eig.vectors * root_vals.asDiagonal() * eig.vectors.transpose());
  const Eigen::VectorXd inv_vals = root_vals.cwiseInverse();
  roots.inv_sqrt = symmetrize(eig.vectors * inv_vals.asDiagonal() * eig.vectors.transpose());
  return roots;
}

inline Eigen::LLT<Eigen::MatrixXd> spd_llt(const Eigen::MatrixXd& s, const char* what) {
  require_spd(s, what);
  return Eigen::LLT<Eigen::MatrixXd>(symmetrize(s));
}

inline void require_rank(Eigen::Index rank, Eigen::Index n) {
  if (rank < 1 || rank > n) {
    throw InvalidRank("rank must lie in 1.." + std::to_string(n) + ", got " +
                      std::to_string(rank));
  }
}

inline void warn_boundary_tie(Estimate& est, const Eigen::VectorXd& values, Eigen::Index m) {
  if (m < values.size() &&
      values(m - 1) - values(m) <= 1e-12 * std::max(1.0, std::abs(values(0)))) {
    est.warnings.push_back("rank boundary tie: kept and dropped directions " +
                           std::to_string(m) + " and " + std::to_string(m + 1) +
                           " have numerically equal weights");
  }
}

}  // namespace detail

// Unconstrained least squares fit of the forwards transition matrix.
inline Estimate fit_ls(const SampleMoments& s) {
  const auto start = detail::FitClock::now();
  Estimate est;
  est.method = Method::ls;
  est.rank = s.dim();
  const auto llt00 = detail::spd_llt(s.s00, "fit_ls s00");
  est.f_hat = llt00.solve(s.s01()).transpose();
  detail::finalize_estimate(est, start);
  return est;
}

// Forwards-backwards fit for an arbitrary SPD pairing P, solving
// F (s00 P^{-1}) + (s11 P^{-1}) F = 2 s10 P^{-1}.
inline Estimate fit_fb_sylvester(const SampleMoments& s, const Eigen::MatrixXd& p) {
  const auto start = detail::FitClock::now();
  Estimate est;
  est.method = Method::fb_sylvester;
  est.rank = s.dim();
  if (p.rows() != s.dim() || p.cols() != s.dim()) {
    throw InvalidInput("fit_fb_sylvester: P has wrong dimensions");
  }
  const auto llt_p = detail::spd_llt(p, "fit_fb_sylvester P");
  const Eigen::MatrixXd a = llt_p.solve(s.s11).transpose();
  const Eigen::MatrixXd b = llt_p.solve(s.s00).transpose();
  const Eigen::MatrixXd c = llt_p.solve(2.0 * s.s01()).transpose();
  est.f_hat = solve_sylvester(a, b, c);
  detail::finalize_estimate(est, start);
  return est;
}

// Forwards-backwards fit with P = s11; closed form F = 2 s10 (s00 + s11)^{-1}.
inline Estimate fit_fb11(const SampleMoments& s) {
  const auto start = detail::FitClock::now();
  Estimate est;
  est.method = Method::fb11;
  est.rank = s.dim();
  const auto llt_sum = detail::spd_llt(s.s00 + s.s11, "fit_fb11 s00 + s11");
  est.f_hat = llt_sum.solve(2.0 * s.s01()).transpose();
  detail::finalize_estimate(est, start);
  return est;
}

// Reduced-rank weighted least squares.  The least squares fit is compressed
// onto the leading rank-m invariant subspace of the weighted squared
// regression map R* = s11^{-1/2} s10 s00^{-1} s01 s11^{-1/2}; the noise
// covariance estimate is s11^{1/2} (I - Vm Dm Vm') s11^{1/2}.
inline Estimate fit_rls(const SampleMoments& s, Eigen::Index rank) {
  const auto start = detail::FitClock::now();
  const Eigen::Index n = s.dim();
  detail::require_rank(rank, n);
  Estimate est;
  est.method = Method::rls;
  est.rank = rank;

  const auto llt00 = detail::spd_llt(s.s00, "fit_rls s00");
  const detail::SpdRoots roots = detail::spd_roots(s.s11, "fit_rls s11");
  const Eigen::MatrixXd f_ls = llt00.solve(s.s01()).transpose();
  const Eigen::MatrixXd gram = s.s10 * llt00.solve(s.s01());
  const Eigen::MatrixXd r_star =
      detail::symmetrize(roots.inv_sqrt * gram * roots.inv_sqrt);
  const SymEig eig = sym_eig(r_star);
  detail::warn_boundary_tie(est, eig.values, rank);

  const Eigen::MatrixXd vm = eig.vectors.leftCols(rank);
  const Eigen::MatrixXd lifted = roots.sqrt * vm;
  est.f_hat = lifted * (vm.transpose() * (roots.inv_sqrt * f_ls));
  const Eigen::VectorXd dm = eig.values.head(rank);
  est.q_hat = detail::symmetrize(s.s11 - lifted * dm.asDiagonal() * lifted.transpose());
  detail::finalize_estimate(est, start);
  return est;
}

// Reduced-rank forwards-backwards fit.  Compresses the fb11 solution onto
// the leading rank-m invariant subspace of
// R = 2 s11^{-1/2} s10 (s00 + s11)^{-1} s01 s11^{-1/2}; the result is
// always strictly stable.
inline Estimate fit_rfb(const SampleMoments& s, Eigen::Index rank) {
  const auto start = detail::FitClock::now();
  const Eigen::Index n = s.dim();
  detail::require_rank(rank, n);
  Estimate est;
  est.method = Method::rfb;
  est.rank = rank;

  const auto llt_sum = detail::spd_llt(s.s00 + s.s11, "fit_rfb s00 + s11");
  const detail::SpdRoots roots = detail::spd_roots(s.s11, "fit_rfb s11");
  const Eigen::MatrixXd f11 = llt_sum.solve(2.0 * s.s01()).transpose();
  const Eigen::MatrixXd gram = 2.0 * (s.s10 * llt_sum.solve(s.s01()));
  const Eigen::MatrixXd r_hat =
      detail::symmetrize(roots.inv_sqrt * gram * roots.inv_sqrt);
  const SymEig eig = sym_eig(r_hat);
  detail::warn_boundary_tie(est, eig.values, rank);

  const Eigen::MatrixXd vm = eig.vectors.leftCols(rank);
  est.f_hat = (roots.sqrt * vm) * (vm.transpose() * (roots.inv_sqrt * f11));
  detail::finalize_estimate(est, start);
  return est;
}

// Least squares fit of the backwards transition matrix, with the implied
// backwards noise covariance.
inline Estimate fit_backward_ls(const SampleMoments& s) {
  const auto start = detail::FitClock::now();
  Estimate est;
  est.method = Method::bls;
  est.rank = s.dim();
  const auto llt11 = detail::spd_llt(s.s11, "fit_backward_ls s11");
  est.f_hat = llt11.solve(s.s10).transpose();
  est.q_hat = detail::symmetrize(s.s00 - s.s01() * llt11.solve(s.s10));
  detail::finalize_estimate(est, start);
  return est;
}

}  // namespace stablevar
