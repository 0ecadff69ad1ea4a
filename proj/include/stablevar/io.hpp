#pragma once

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <string_view>
#include <vector>

#include "stablevar/errors.hpp"
#include "stablevar/estimators.hpp"
#include "stablevar/var_process.hpp"

namespace stablevar {

namespace detail {

// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// Fixed 17 significant digits; always round-trips.
inline std::string format_double_17(double value) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline bool parse_double(std::string_view token, double& out) {
  token = trim(token);
  if (token.empty()) return false;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc{} && res.ptr == token.data() + token.size();
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw InvalidInput("cannot open output file '" + path + "'");
  }
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInput("cannot open input file '" + path + "'");
  }
  return in;
}

}  // namespace detail

// Writes a trajectory as CSV, one row per time point, one column per state
// coordinate, 17 significant digits.  The optional header row is
// "y1,...,yn".
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                                 bool header = true) {
  const Eigen::Index n = traj.dim();
  if (header) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out << (i ? "," : "") << "y" << (i + 1);
    }
    out << "\n";
  }
  for (Eigen::Index t = 0; t < traj.y.cols(); ++t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i) out << ",";
      out << detail::format_double_17(traj.y(i, t));
    }
    out << "\n";
  }
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                                 bool header = true) {
  auto out = detail::open_output(path);
  write_trajectory_csv(out, traj, header);
}

// Reads a trajectory written by write_trajectory_csv.  A first row whose
// fields are not all numeric is treated as a header.  Requires at least two
// data rows (one transition), a consistent column count, and finite values.
// The seed of the returned trajectory is zero (unknown provenance).
inline Trajectory read_trajectory_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  Eigen::Index n_cols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = detail::split_csv(trimmed);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!detail::parse_double(fields[i], row[i])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty() && !saw_header) {
        saw_header = true;
        n_cols = static_cast<Eigen::Index>(fields.size());
        continue;
      }
      throw ParseError("trajectory CSV: non-numeric field", line_no);
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw ParseError("trajectory CSV: non-finite value", line_no);
      }
    }
    if (n_cols < 0) {
      n_cols = static_cast<Eigen::Index>(row.size());
    } else if (static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw ParseError("trajectory CSV: inconsistent column count", line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) {
    throw ParseError("trajectory CSV: need at least two data rows", line_no);
  }
  Trajectory traj;
  traj.seed = 0;
  traj.y.resize(n_cols, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (Eigen::Index i = 0; i < n_cols; ++i) {
      traj.y(i, static_cast<Eigen::Index>(t)) = rows[t][static_cast<std::size_t>(i)];
    }
  }
  return traj;
}

inline Trajectory read_trajectory_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_trajectory_csv(in);
}

// JSON form of an Estimate.  f_hat (and q_hat when present) are flat arrays
// in row-major order; error fractions and seconds are plain numbers.
inline nlohmann::json estimate_to_json(const Estimate& est) {
  nlohmann::json j;
  j["method"] = method_name(est.method);
  j["n"] = est.f_hat.rows();
  j["rank"] = est.rank;
  std::vector<double> f_flat;
  f_flat.reserve(static_cast<std::size_t>(est.f_hat.size()));
  for (Eigen::Index i = 0; i < est.f_hat.rows(); ++i) {
    for (Eigen::Index k = 0; k < est.f_hat.cols(); ++k) {
      f_flat.push_back(est.f_hat(i, k));
    }
  }
  j["f_hat"] = f_flat;
  if (est.q_hat) {
    std::vector<double> q_flat;
    q_flat.reserve(static_cast<std::size_t>(est.q_hat->size()));
    for (Eigen::Index i = 0; i < est.q_hat->rows(); ++i) {
      for (Eigen::Index k = 0; k < est.q_hat->cols(); ++k) {
        q_flat.push_back((*est.q_hat)(i, k));
      }
    }
    j["q_hat"] = q_flat;
  }
  j["spectral_radius"] = est.spectral_radius;
  j["fit_seconds"] = est.fit_seconds;
  j["warnings"] = est.warnings;
  return j;
}

inline void write_estimate_json(const std::string& path, const Estimate& est) {
  auto out = detail::open_output(path);
  out << estimate_to_json(est).dump(2) << "\n";
}

// One row of a study results table.  e and epsilon are fractions, not
// percentages; epsilon may be NaN when a method does not define it.
struct ResultRow {
  std::uint64_t seed = 0;
  Method method = Method::ls;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index t_len = 0;
  double e = 0.0;
  double epsilon = 0.0;
  double rho = 0.0;
  double fit_seconds = 0.0;
};

inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "seed,method,n,m,T,e,epsilon,rho,fit_seconds\n";
  for (const ResultRow& r : rows) {
    out << r.seed << "," << method_name(r.method) << "," << r.n << "," << r.m << ","
        << r.t_len << "," << detail::format_double(r.e) << ","
        << detail::format_double(r.epsilon) << "," << detail::format_double(r.rho) << ","
        << detail::format_double(r.fit_seconds) << "\n";
  }
}

inline void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  auto out = detail::open_output(path);
  write_results_csv(out, rows);
}

// One estimated pole (eigenvalue of a fitted transition matrix).
struct PoleRow {
  std::uint64_t seed = 0;
  Method method = Method::ls;
  double re = 0.0;
  double im = 0.0;
};

inline void write_poles_csv(std::ostream& out, const std::vector<PoleRow>& rows) {
  out << "seed,method,re,im\n";
  for (const PoleRow& r : rows) {
    out << r.seed << "," << method_name(r.method) << "," << detail::format_double(r.re)
        << "," << detail::format_double(r.im) << "\n";
  }
}

inline void write_poles_csv(const std::string& path, const std::vector<PoleRow>& rows) {
  auto out = detail::open_output(path);
  write_poles_csv(out, rows);
}

}  // namespace stablevar
