#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stablevar/stablevar.hpp"

namespace {

using namespace stablevar;

struct KRange {
  int lo = 1;
  int hi = 7;
};

KRange parse_k_range(const std::string& text, bool full) {
  KRange range;
  const auto sep = text.find("..");
  try {
    if (sep == std::string::npos) {
      range.lo = range.hi = std::stoi(text);
    } else {
      range.lo = std::stoi(text.substr(0, sep));
      range.hi = std::stoi(text.substr(sep + 2));
    }
  } catch (const std::exception&) {
    throw InvalidInput("invalid --k-range '" + text + "', expected K or LO..HI");
  }
  if (range.lo < 1 || range.hi > 9 || range.lo > range.hi) {
    throw InvalidInput("--k-range must lie within 1..9 with LO <= HI");
  }
  if (range.hi > 7 && !full) {
    throw InvalidInput("k above 7 is expensive; pass --full to enable it");
  }
  return range;
}

nlohmann::json stats_to_json(const SummaryStats& s) {
  return nlohmann::json{{"median", s.median}, {"q25", s.q25},     {"q75", s.q75},
                        {"mean", s.mean},     {"count", s.count}};
}

nlohmann::json cell_summary_to_json(const CellSummary& c) {
  nlohmann::json j;
  j["e"] = stats_to_json(c.e);
  if (c.epsilon.count > 0) {
    j["epsilon"] = stats_to_json(c.epsilon);
  }
  j["unstable_rate"] = c.e.unstable_rate;
  j["median_fit_seconds"] = c.median_fit_seconds;
  return j;
}

void print_cell_line(std::ostream& out, Eigen::Index t_len, Method method,
                     const CellSummary& c) {
  out << "  T=" << t_len << "  " << std::left << std::setw(5) << method_name(method)
      << std::right << "  median e " << std::fixed << std::setprecision(1)
      << 100.0 * c.e.median << "%";
  if (c.epsilon.count > 0) {
    out << "  median eps " << std::setprecision(3) << 100.0 * c.epsilon.median << "%";
  }
  out << "  unstable " << std::setprecision(1) << 100.0 * c.e.unstable_rate << "%"
      << std::defaultfloat << "\n";
}

struct SimulateArgs {
  int n = 6;
  int t_len = 216;
  std::uint64_t seed = 1;
  std::string out;
  bool no_header = false;
};

int cmd_simulate(const SimulateArgs& args) {
  if (args.n < 6 || args.n % 6 != 0) {
    throw InvalidInput("--n must be a positive multiple of 6");
  }
  const VarModel model = benchmark_model(args.n / 6);
  const Trajectory traj = simulate(model, args.t_len, args.seed);
  if (args.out.empty()) {
    write_trajectory_csv(std::cout, traj, !args.no_header);
  } else {
    write_trajectory_csv(args.out, traj, !args.no_header);
  }
  return 0;
}

struct EstimateArgs {
  std::string in;
  std::string method = "rfb";
  Eigen::Index rank = 0;
  std::string out;
};

int cmd_estimate(const EstimateArgs& args) {
  const Trajectory traj = read_trajectory_csv(args.in);
  if (traj.steps() < traj.dim()) {
    std::cerr << "warning: sample length " << traj.steps()
              << " is below the state dimension " << traj.dim() << "\n";
  }
  const SampleMoments s = sample_moments(traj);
  const Method method = method_from_name(args.method);
  Eigen::Index rank = args.rank;
  if (method == Method::rls || method == Method::rfb) {
    if (rank == 0) {
      throw InvalidRank("--rank is required for reduced-rank methods");
    }
  } else {
    rank = s.dim();
  }
  const Estimate est = detail::dispatch_fit(method, s, rank);
  for (const std::string& w : est.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  if (args.out.empty()) {
    std::cout << estimate_to_json(est).dump(2) << "\n";
  } else {
    write_estimate_json(args.out, est);
  }
  if (est.spectral_radius >= 1.0) {
    std::cerr << "warning: fitted transition matrix is unstable (spectral radius "
              << est.spectral_radius << ")\n";
  }
  return 0;
}

struct LowArgs {
  int repeats = 1000;
  std::uint64_t seed = 1000;
  std::string out = "reproduce-low";
  int threads = 0;
};

int cmd_reproduce_low(const LowArgs& args) {
  namespace fs = std::filesystem;
  fs::create_directories(args.out);
  const VarModel model = benchmark_model(1);
  const std::vector<Method> methods{Method::ls, Method::fb11, Method::rls, Method::rfb};

  nlohmann::json summary;
  summary["model"] = {{"n", 6}, {"rank", 3}};
  summary["repeats"] = args.repeats;
  summary["base_seed"] = args.seed;
  summary["start"] = "origin";
  summary["cells"] = nlohmann::json::array();

  std::cout << "low-dimensional study: n=6 rank=3 repeats=" << args.repeats << "\n";
  for (const Eigen::Index t_len : {24, 216, 600}) {
    CellConfig config;
    config.rank = 3;
    config.t_len = t_len;
    config.repeats = args.repeats;
    config.base_seed = args.seed;
    config.methods = methods;
    config.start = StartMode::origin;
    config.threads = args.threads;
    config.with_witnesses = true;
    config.with_poles = true;
    const auto results = run_cell(model, config);

    const std::string tag = "T" + std::to_string(t_len);
    write_results_csv((fs::path(args.out) / ("results_" + tag + ".csv")).string(),
                      to_result_rows(results, 6, 3, t_len));
    write_poles_csv((fs::path(args.out) / ("poles_" + tag + ".csv")).string(),
                    to_pole_rows(results));

    nlohmann::json cell;
    cell["T"] = t_len;
    for (Method method : methods) {
      const CellSummary c = summarize_cell(results, method);
      cell["methods"][method_name(method)] = cell_summary_to_json(c);
      print_cell_line(std::cout, t_len, method, c);
    }
    summary["cells"].push_back(cell);
  }
  std::ofstream out((fs::path(args.out) / "summary.json").string());
  out << summary.dump(2) << "\n";
  std::cout << "wrote " << args.out << "/summary.json\n";
  return 0;
}

struct HighArgs {
  std::string k_range = "1..7";
  int t_mult = 36;
  int repeats = 50;
  std::uint64_t seed = 5000;
  std::string out = "reproduce-high";
  bool full = false;
  int threads = 0;
};

int cmd_reproduce_high(const HighArgs& args) {
  namespace fs = std::filesystem;
  if (args.t_mult != 4 && args.t_mult != 36 && args.t_mult != 100) {
    throw InvalidInput("--t-mult must be one of 4, 36, 100");
  }
  const KRange range = parse_k_range(args.k_range, args.full);
  fs::create_directories(args.out);
  const std::vector<Method> methods{Method::rls, Method::rfb};

  nlohmann::json summary;
  summary["t_mult"] = args.t_mult;
  summary["repeats"] = args.repeats;
  summary["base_seed"] = args.seed;
  summary["start"] = "origin";
  summary["cells"] = nlohmann::json::array();

  std::cout << "high-dimensional study: k=" << range.lo << ".." << range.hi
            << " T=" << args.t_mult << "n repeats=" << args.repeats << "\n";
  for (int k = range.lo; k <= range.hi; ++k) {
    const int p = 1 << k;
    const VarModel model = benchmark_model(p);
    const Eigen::Index n = model.dim();
    const Eigen::Index t_len = args.t_mult * n;
    CellConfig config;
    config.rank = n / 2;
    config.t_len = t_len;
    config.repeats = args.repeats;
    config.base_seed = args.seed;
    config.methods = methods;
    config.start = StartMode::origin;
    config.threads = args.threads;
    const auto results = run_cell(model, config);

    const std::string tag = "n" + std::to_string(n) + "_T" + std::to_string(t_len);
    write_results_csv((fs::path(args.out) / ("results_" + tag + ".csv")).string(),
                      to_result_rows(results, n, n / 2, t_len));

    nlohmann::json cell;
    cell["k"] = k;
    cell["n"] = n;
    cell["T"] = t_len;
    for (Method method : methods) {
      const CellSummary c = summarize_cell(results, method);
      cell["methods"][method_name(method)] = cell_summary_to_json(c);
      print_cell_line(std::cout, t_len, method, c);
    }
    summary["cells"].push_back(cell);
  }
  std::ofstream out((fs::path(args.out) / "summary_high.json").string());
  out << summary.dump(2) << "\n";
  std::cout << "wrote " << args.out << "/summary_high.json\n";
  return 0;
}

struct BenchArgs {
  std::string k_range = "4..7";
  int t_mult = 36;
  int repeats = 5;
  std::uint64_t seed = 9000;
  std::string out;
  bool full = false;
  int threads = 1;
};

int cmd_bench(const BenchArgs& args) {
  const KRange range = parse_k_range(args.k_range, args.full);
  const std::vector<Method> methods{Method::rls, Method::rfb};
  std::map<Method, std::vector<std::pair<double, double>>> log_points;

  std::ostringstream csv;
  csv << "method,n,T,seed,fit_seconds\n";
  for (int k = range.lo; k <= range.hi; ++k) {
    const int p = 1 << k;
    const VarModel model = benchmark_model(p);
    const Eigen::Index n = model.dim();
    const Eigen::Index t_len = args.t_mult * n;
    CellConfig config;
    config.rank = n / 2;
    config.t_len = t_len;
    config.repeats = args.repeats;
    config.base_seed = args.seed;
    config.methods = methods;
    config.start = StartMode::origin;
    config.threads = args.threads;
    config.with_epsilon = false;
    const auto results = run_cell(model, config);
    for (Method method : methods) {
      std::vector<double> secs;
      for (const auto& r : results) {
        for (const auto& run : r.runs) {
          if (run.method == method) {
            secs.push_back(run.fit_seconds);
            csv << method_name(method) << "," << n << "," << t_len << "," << r.seed << ","
                << run.fit_seconds << "\n";
          }
        }
      }
      const double med = quantile(secs, 0.5);
      log_points[method].emplace_back(std::log(static_cast<double>(n)), std::log(med));
      std::cout << "  n=" << n << "  " << method_name(method) << "  median fit "
                << med << " s\n";
    }
  }

  for (Method method : methods) {
    const auto& pts = log_points[method];
    if (pts.size() < 2) continue;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double count = static_cast<double>(pts.size());
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    std::cout << method_name(method) << " cost scaling: fit_seconds ~ n^"
              << std::fixed << std::setprecision(2) << slope << std::defaultfloat << "\n";
  }

  if (!args.out.empty()) {
    auto out = detail::open_output(args.out);
    out << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form identification of stable reduced-rank VAR(1) models"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate the benchmark process to CSV");
  sim_cmd->add_option("--n", sim.n, "State dimension (multiple of 6)");
  sim_cmd->add_option("--T", sim.t_len, "Number of transitions");
  sim_cmd->add_option("--seed", sim.seed, "Random seed");
  sim_cmd->add_option("--out", sim.out, "Output CSV path (default: stdout)");
  sim_cmd->add_flag("--no-header", sim.no_header, "Omit the header row");

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "Fit a transition matrix from CSV data");
  est_cmd->add_option("--in", est.in, "Input trajectory CSV")->required();
  est_cmd->add_option("--method", est.method, "Estimator: ls, fb, rls, rfb");
  est_cmd->add_option("--rank", est.rank, "Rank bound for rls/rfb");
  est_cmd->add_option("--out", est.out, "Output JSON path (default: stdout)");

  LowArgs low;
  auto* low_cmd =
      app.add_subcommand("reproduce-low", "Low-dimensional Monte Carlo study (n=6)");
  low_cmd->add_option("--repeats", low.repeats, "Repeats per sample length");
  low_cmd->add_option("--seed", low.seed, "Base seed");
  low_cmd->add_option("--out", low.out, "Output directory");
  low_cmd->add_option("--threads", low.threads, "Worker threads (0: auto)");

  HighArgs high;
  auto* high_cmd =
      app.add_subcommand("reproduce-high", "High-dimensional Monte Carlo study");
  high_cmd->add_option("--k-range", high.k_range, "Size exponents K or LO..HI (n = 6*2^k)");
  high_cmd->add_option("--t-mult", high.t_mult, "Sample length multiplier (4, 36, 100)");
  high_cmd->add_option("--repeats", high.repeats, "Repeats per size");
  high_cmd->add_option("--seed", high.seed, "Base seed");
  high_cmd->add_option("--out", high.out, "Output directory");
  high_cmd->add_flag("--full", high.full, "Allow k above 7");
  high_cmd->add_option("--threads", high.threads, "Worker threads (0: auto)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time the reduced-rank estimators");
  bench_cmd->add_option("--k-range", bench.k_range, "Size exponents K or LO..HI");
  bench_cmd->add_option("--t-mult", bench.t_mult, "Sample length multiplier");
  bench_cmd->add_option("--repeats", bench.repeats, "Repeats per size");
  bench_cmd->add_option("--seed", bench.seed, "Base seed");
  bench_cmd->add_option("--out", bench.out, "Optional timing CSV path");
  bench_cmd->add_flag("--full", bench.full, "Allow k above 7");
  bench_cmd->add_option("--threads", bench.threads, "Worker threads (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate(sim);
    if (est_cmd->parsed()) return cmd_estimate(est);
    if (low_cmd->parsed()) return cmd_reproduce_low(low);
    if (high_cmd->parsed()) return cmd_reproduce_high(high);
    if (bench_cmd->parsed()) return cmd_bench(bench);
  } catch (const stablevar::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const stablevar::InvalidRank& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const stablevar::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const stablevar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
