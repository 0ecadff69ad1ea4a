#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "stablevar/errors.hpp"
#include "stablevar/estimators.hpp"
#include "stablevar/io.hpp"
#include "stablevar/linalg.hpp"
#include "stablevar/metrics.hpp"
#include "stablevar/moments.hpp"
#include "stablevar/var_process.hpp"

namespace stablevar {

// Simulation benchmark family: block transition matrix with a lightly damped
// rotation pair, one slower real pole, and a rank-deficient remainder, each
// pole repeated p times; unit noise covariance.  State dimension is 6p and
// the transition matrix has rank 3p.
inline VarModel benchmark_model(int p) {
  if (p < 1) {
    throw InvalidInput("benchmark_model: p must be at least 1");
  }
  Eigen::MatrixXd core = Eigen::MatrixXd::Zero(6, 6);
  core(0, 0) = 0.99;
  core(0, 1) = -0.1;
  core(1, 0) = 0.1;
  core(1, 1) = 0.99;
  core(2, 2) = 0.95;
  const Eigen::Index n = 6 * p;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) {
      if (core(i, j) != 0.0) {
        f.block(i * p, j * p, p, p) =
            core(i, j) * Eigen::MatrixXd::Identity(p, p);
      }
    }
  }
  return VarModel(f, Eigen::MatrixXd::Identity(n, n));
}

// Number of worker threads to use: the caller's request (or the hardware
// count when the request is zero), capped by the STABLEVAR_THREADS
// environment variable when that is set to a positive integer.
inline int resolve_threads(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("STABLEVAR_THREADS")) {
    int cap = 0;
    const auto res = std::from_chars(env, env + std::char_traits<char>::length(env), cap);
    if (res.ec == std::errc{} && *res.ptr == '\0' && cap >= 1 && cap < n) {
      n = cap;
    }
  }
  return n;
}

// Smallest eigenvalue of s11^{-1} - F' s11^{-1} F.  Positivity certifies
// that F is strictly stable with Lyapunov matrix s11^{-1}.
inline double stability_witness_min_eig(const SampleMoments& s, const Eigen::MatrixXd& f) {
  if (f.rows() != s.dim() || f.cols() != s.dim()) {
    throw InvalidInput("stability_witness_min_eig: F has wrong dimensions");
  }
  require_spd(s.s11, "stability_witness_min_eig s11");
  Eigen::LLT<Eigen::MatrixXd> llt(detail::symmetrize(s.s11));
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(s.dim(), s.dim()));
  const Eigen::MatrixXd witness =
      detail::symmetrize(inv - f.transpose() * inv * f);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(witness, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error("stability_witness_min_eig: eigendecomposition failed to converge");
  }
  return solver.eigenvalues().minCoeff();
}

// Per-method outcome of one repeat.
struct MethodRun {
  Method method = Method::ls;
  double e = std::numeric_limits<double>::quiet_NaN();
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();
  double fit_seconds = 0.0;
  double q_min_eig = std::numeric_limits<double>::quiet_NaN();
  PoleSet poles;
};

struct RepeatResult {
  std::uint64_t seed = 0;
  std::vector<MethodRun> runs;
};

// One Monte Carlo cell: a fixed truth model, rank bound, sample length, and
// method list, repeated over consecutive seeds base_seed + 0..repeats-1.
struct CellConfig {
  Eigen::Index rank = 0;
  Eigen::Index t_len = 0;
  int repeats = 0;
  std::uint64_t base_seed = 0;
  std::vector<Method> methods;
  StartMode start = StartMode::stationary;
  int threads = 0;
  bool with_epsilon = true;
  bool with_witnesses = false;
  bool with_poles = false;
};

namespace detail {

inline Estimate dispatch_fit(Method method, const SampleMoments& s, Eigen::Index rank) {
  switch (method) {
    case Method::ls: return fit_ls(s);
    case Method::fb_sylvester: return fit_fb_sylvester(s, s.s11);
    case Method::fb11: return fit_fb11(s);
    case Method::rls: return fit_rls(s, rank);
    case Method::rfb: return fit_rfb(s, rank);
    case Method::bls: return fit_backward_ls(s);
  }
  throw InvalidInput("dispatch_fit: unknown method");
}

inline double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrize(sym),
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error("min_eigenvalue: eigendecomposition failed to converge");
  }
  return solver.eigenvalues().minCoeff();
}

inline RepeatResult run_repeat(const VarModel& truth, const CellConfig& config, int index) {
  RepeatResult result;
  result.seed = config.base_seed + static_cast<std::uint64_t>(index);
  const Trajectory traj = simulate(truth, config.t_len, result.seed, config.start);
  const DataMatrices data = build_data_matrices(traj);
  const SampleMoments s = sample_moments(data.y0, data.y1);

  double r_ls = std::numeric_limits<double>::quiet_NaN();
  Estimate ls_est;
  bool have_ls = false;
  if (config.with_epsilon) {
    ls_est = fit_ls(s);
    have_ls = true;
    r_ls = (data.y1 - ls_est.f_hat * data.y0).norm();
  }

  result.runs.reserve(config.methods.size());
  for (Method method : config.methods) {
    const Estimate est = (method == Method::ls && have_ls)
                             ? ls_est
                             : dispatch_fit(method, s, config.rank);
    MethodRun run;
    run.method = method;
    run.e = relative_estimation_error(est.f_hat, truth.f());
    if (config.with_epsilon && r_ls > 0.0) {
      const double r_hat = (data.y1 - est.f_hat * data.y0).norm();
      run.epsilon = (r_hat - r_ls) / r_ls;
    }
    run.rho = est.spectral_radius;
    run.fit_seconds = est.fit_seconds;
    if (config.with_witnesses) {
      if (method == Method::rfb) {
        run.q_min_eig = stability_witness_min_eig(s, est.f_hat);
      } else if (est.q_hat) {
        run.q_min_eig = min_eigenvalue(*est.q_hat);
      }
    }
    if (config.with_poles) {
      run.poles = eig_general(est.f_hat);
    }
    result.runs.push_back(std::move(run));
  }
  return result;
}

}  // namespace detail

inline std::vector<RepeatResult> run_cell(const VarModel& truth, const CellConfig& config) {
  if (config.repeats < 1) {
    throw InvalidInput("run_cell: need at least one repeat");
  }
  if (config.methods.empty()) {
    throw InvalidInput("run_cell: no methods selected");
  }
  const bool needs_rank =
      std::any_of(config.methods.begin(), config.methods.end(), [](Method m) {
        return m == Method::rls || m == Method::rfb;
      });
  if (needs_rank) {
    detail::require_rank(config.rank, truth.dim());
  }

  std::vector<RepeatResult> results(static_cast<std::size_t>(config.repeats));
  const int threads = std::min(resolve_threads(config.threads), config.repeats);
  if (threads <= 1) {
    for (int i = 0; i < config.repeats; ++i) {
      results[static_cast<std::size_t>(i)] = detail::run_repeat(truth, config, i);
    }
    return results;
  }

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= config.repeats) break;
      try {
        results[static_cast<std::size_t>(i)] = detail::run_repeat(truth, config, i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        break;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

// Distribution of one method's metrics across a cell.
struct CellSummary {
  SummaryStats e;
  SummaryStats epsilon;
  double median_fit_seconds = 0.0;
};

inline CellSummary summarize_cell(const std::vector<RepeatResult>& results, Method method) {
  std::vector<double> e_vals;
  std::vector<double> eps_vals;
  std::vector<double> radii;
  std::vector<double> fit_secs;
  for (const RepeatResult& r : results) {
    for (const MethodRun& run : r.runs) {
      if (run.method != method) continue;
      e_vals.push_back(run.e);
      eps_vals.push_back(run.epsilon);
      radii.push_back(run.rho);
      fit_secs.push_back(run.fit_seconds);
    }
  }
  if (e_vals.empty()) {
    throw InvalidInput("summarize_cell: method not present in results");
  }
  CellSummary out;
  out.e = summarize(e_vals, radii);
  const bool have_eps = std::none_of(eps_vals.begin(), eps_vals.end(),
                                     [](double v) { return std::isnan(v); });
  if (have_eps) {
    out.epsilon = summarize(eps_vals, radii);
  } else {
    out.epsilon = SummaryStats{};
  }
  out.median_fit_seconds = quantile(fit_secs, 0.5);
  return out;
}

// Flattens cell results into study table rows.
inline std::vector<ResultRow> to_result_rows(const std::vector<RepeatResult>& results,
                                             Eigen::Index n, Eigen::Index m,
                                             Eigen::Index t_len) {
  std::vector<ResultRow> rows;
  for (const RepeatResult& r : results) {
    for (const MethodRun& run : r.runs) {
      ResultRow row;
      row.seed = r.seed;
      row.method = run.method;
      row.n = n;
      row.m = m;
      row.t_len = t_len;
      row.e = run.e;
      row.epsilon = run.epsilon;
      row.rho = run.rho;
      row.fit_seconds = run.fit_seconds;
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::vector<PoleRow> to_pole_rows(const std::vector<RepeatResult>& results) {
  std::vector<PoleRow> rows;
  for (const RepeatResult& r : results) {
    for (const MethodRun& run : r.runs) {
      for (const auto& pole : run.poles) {
        rows.push_back(PoleRow{r.seed, run.method, pole.real(), pole.imag()});
      }
    }
  }
  return rows;
}

}  // namespace stablevar
