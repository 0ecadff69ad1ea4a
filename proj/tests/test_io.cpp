#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace stablevar;

TEST_CASE("trajectory CSV round-trips every double exactly") {
  GaussianRng rng(111);
  Trajectory traj;
  traj.y = testutil::random_matrix(4, 12, rng);
  traj.y(0, 0) = 1e-17;
  traj.y(1, 0) = -3.25e17;
  traj.y(2, 0) = 0.1;
  traj.y(3, 0) = -0.0;

  std::stringstream buffer;
  write_trajectory_csv(buffer, traj);
  const Trajectory back = read_trajectory_csv(buffer);
  REQUIRE(back.dim() == 4);
  REQUIRE(back.steps() == 11);
  REQUIRE(testutil::max_abs_diff(back.y, traj.y) == 0.0);
}

TEST_CASE("trajectory CSV header is optional on read") {
  std::stringstream with_header("y1,y2\n1,2\n3,4\n");
  const Trajectory a = read_trajectory_csv(with_header);
  REQUIRE(a.dim() == 2);
  REQUIRE(a.steps() == 1);
  REQUIRE(a.y(0, 0) == 1.0);
  REQUIRE(a.y(1, 1) == 4.0);

  std::stringstream without_header("1,2\n3,4\n");
  const Trajectory b = read_trajectory_csv(without_header);
  REQUIRE(testutil::max_abs_diff(a.y, b.y) == 0.0);
}

TEST_CASE("trajectory CSV writer can omit the header") {
  Trajectory traj;
  traj.y = Eigen::MatrixXd::Zero(2, 2);
  std::stringstream with_header;
  write_trajectory_csv(with_header, traj, true);
  REQUIRE(with_header.str().substr(0, 5) == "y1,y2");
  std::stringstream bare;
  write_trajectory_csv(bare, traj, false);
  REQUIRE(bare.str() == "0,0\n0,0\n");
}

TEST_CASE("malformed trajectory CSV reports the offending line") {
  std::stringstream bad_token("1,2\n3,4\nx,6\n");
  try {
    read_trajectory_csv(bad_token);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.line() == 3);
  }

  std::stringstream ragged("y1,y2\n1,2\n3,4,5\n");
  try {
    read_trajectory_csv(ragged);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.line() == 3);
  }

  std::stringstream infinite("1,2\n3,inf\n");
  try {
    read_trajectory_csv(infinite);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.line() == 2);
  }

  std::stringstream too_short("1,2\n");
  REQUIRE_THROWS_AS(read_trajectory_csv(too_short), ParseError);
  std::stringstream only_header("y1,y2\n");
  REQUIRE_THROWS_AS(read_trajectory_csv(only_header), ParseError);
}

TEST_CASE("missing files are rejected") {
  REQUIRE_THROWS_AS(read_trajectory_csv("/nonexistent/path.csv"), InvalidInput);
}

TEST_CASE("estimate JSON carries the full schema") {
  GaussianRng rng(112);
  const SampleMoments s = testutil::simulated_moments(3, 30, rng, 1400);
  const Estimate rls = fit_rls(s, 2);
  const nlohmann::json j = estimate_to_json(rls);

  REQUIRE(j.at("method") == "rls");
  REQUIRE(j.at("n") == 3);
  REQUIRE(j.at("rank") == 2);
  REQUIRE(j.at("f_hat").size() == 9);
  REQUIRE(j.at("q_hat").size() == 9);
  REQUIRE(j.at("spectral_radius").get<double>() == rls.spectral_radius);
  REQUIRE(j.at("fit_seconds").get<double>() > 0.0);
  REQUIRE(j.at("warnings").is_array());

  // row-major order
  REQUIRE(j.at("f_hat")[1].get<double>() == rls.f_hat(0, 1));
  REQUIRE(j.at("f_hat")[3].get<double>() == rls.f_hat(1, 0));

  const nlohmann::json no_q = estimate_to_json(fit_rfb(s, 2));
  REQUIRE_FALSE(no_q.contains("q_hat"));
}

TEST_CASE("results CSV layout") {
  std::vector<ResultRow> rows(2);
  rows[0] = ResultRow{7, Method::rfb, 6, 3, 24, 0.25, 0.01, 0.9, 0.001};
  rows[1].seed = 8;
  rows[1].method = Method::ls;
  rows[1].n = 6;
  rows[1].m = 6;
  rows[1].t_len = 24;
  rows[1].e = 0.5;
  rows[1].epsilon = std::nan("");
  rows[1].rho = 1.25;
  rows[1].fit_seconds = 0.002;

  std::stringstream out;
  write_results_csv(out, rows);
  std::string line;
  std::getline(out, line);
  REQUIRE(line == "seed,method,n,m,T,e,epsilon,rho,fit_seconds");
  std::getline(out, line);
  REQUIRE(line == "7,rfb,6,3,24,0.25,0.01,0.9,0.001");
  std::getline(out, line);
  REQUIRE(line.substr(0, 10) == "8,ls,6,6,2");
  REQUIRE(line.find("nan") != std::string::npos);
}

TEST_CASE("poles CSV layout") {
  std::vector<PoleRow> rows{{3, Method::rfb, 0.9, -0.05}};
  std::stringstream out;
  write_poles_csv(out, rows);
  REQUIRE(out.str() == "seed,method,re,im\n3,rfb,0.9,-0.05\n");
}

TEST_CASE("shortest formatting round-trips doubles") {
  GaussianRng rng(113);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = rng.normal() * std::pow(10.0, (trial % 61) - 30);
    REQUIRE(std::stod(detail::format_double(x)) == x);
    REQUIRE(std::stod(detail::format_double_17(x)) == x);
  }
}
