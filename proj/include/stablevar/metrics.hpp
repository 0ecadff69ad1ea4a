#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "stablevar/errors.hpp"
#include "stablevar/estimators.hpp"
#include "stablevar/linalg.hpp"
#include "stablevar/moments.hpp"

namespace stablevar {

struct StabilityReport {
  bool stable = false;
  double spectral_radius = 0.0;
  double margin = 0.0;  // 1 - spectral radius
};

inline StabilityReport classify_stability(const Eigen::MatrixXd& f) {
  const double rho = spectral_radius(f);
  return StabilityReport{rho < 1.0, rho, 1.0 - rho};
}

// Relative estimation error |F_hat - F|_F / |F|_F, as a fraction.
inline double relative_estimation_error(const Eigen::MatrixXd& f_hat,
                                        const Eigen::MatrixXd& f_true) {
  if (f_hat.rows() != f_true.rows() || f_hat.cols() != f_true.cols()) {
    throw InvalidInput("relative_estimation_error: shape mismatch");
  }
  detail::require_finite(f_hat, "relative_estimation_error");
  detail::require_finite(f_true, "relative_estimation_error");
  const double denom = f_true.norm();
  if (denom == 0.0) {
    throw ZeroReference("relative_estimation_error: reference matrix is zero");
  }
  return (f_hat - f_true).norm() / denom;
}

// Excess one-step prediction residual of F_hat over the unconstrained least
// squares fit on the same data, as a fraction of the least squares residual.
inline double relative_prediction_error(const Eigen::MatrixXd& f_hat,
                                        const Eigen::MatrixXd& y0,
                                        const Eigen::MatrixXd& y1) {
  const SampleMoments s = sample_moments(y0, y1);
  if (f_hat.rows() != s.dim() || f_hat.cols() != s.dim()) {
    throw InvalidInput("relative_prediction_error: F_hat has wrong dimensions");
  }
  detail::require_finite(f_hat, "relative_prediction_error");
  const Estimate ls = fit_ls(s);
  const double r_ls = (y1 - ls.f_hat * y0).norm();
  if (r_ls <= 1e-14 * y1.norm()) {
    throw ZeroReference("relative_prediction_error: least squares residual is zero");
  }
  const double r_hat = (y1 - f_hat * y0).norm();
  return (r_hat - r_ls) / r_ls;
}

// Linear-interpolation quantile of a sample (the same convention as the
// default in R and NumPy); prob in [0,1].
inline double quantile(std::vector<double> values, double prob) {
  if (values.empty()) {
    throw InvalidInput("quantile: empty sample");
  }
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw InvalidInput("quantile: prob must lie in [0,1]");
  }
  std::sort(values.begin(), values.end());
  const double h = prob * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) {
    return values.back();
  }
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

// Distribution summary of one scalar metric across repeats, plus the share
// of runs whose fitted transition matrix was unstable.
struct SummaryStats {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double mean = 0.0;
  double unstable_rate = 0.0;  // fraction of radii >= 1
  std::size_t count = 0;
};

inline SummaryStats summarize(const std::vector<double>& values,
                              const std::vector<double>& spectral_radii) {
  if (values.empty()) {
    throw InvalidInput("summarize: empty sample");
  }
  if (values.size() != spectral_radii.size()) {
    throw InvalidInput("summarize: values and spectral radii must have equal length");
  }
  SummaryStats out;
  out.count = values.size();
  out.median = quantile(values, 0.5);
  out.q25 = quantile(values, 0.25);
  out.q75 = quantile(values, 0.75);
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  std::size_t unstable = 0;
  for (double rho : spectral_radii) {
    if (rho >= 1.0) ++unstable;
  }
  out.unstable_rate = static_cast<double>(unstable) / static_cast<double>(values.size());
  return out;
}

}  // namespace stablevar
