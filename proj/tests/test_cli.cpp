// End-to-end checks of the command line tool. Each case shells out to the
// built binary (path injected by the build) and inspects files and exit codes.
#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#ifndef STABLEVAR_CLI_PATH
#error "STABLEVAR_CLI_PATH must point at the built binary"
#endif

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string command = std::string(STABLEVAR_CLI_PATH) + " " + args;
  const int status = std::system(command.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("stablevar_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int value = 0;
    return value;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("simulate writes a deterministic trajectory") {
  TempDir dir;
  const std::string out = dir.file("traj.csv");
  REQUIRE(run("simulate --n 6 --T 40 --seed 3 --out " + out) == 0);
  const std::string first = slurp(out);
  REQUIRE(count_lines(first) == 42);  // header plus 41 states
  REQUIRE(first.rfind("y1,y2,y3,y4,y5,y6\n", 0) == 0);

  REQUIRE(run("simulate --n 6 --T 40 --seed 3 --out " + out) == 0);
  REQUIRE(slurp(out) == first);

  const std::string bare = dir.file("bare.csv");
  REQUIRE(run("simulate --n 6 --T 40 --seed 3 --no-header --out " + bare) == 0);
  REQUIRE(count_lines(slurp(bare)) == 41);

  REQUIRE(run("simulate --n 7 --T 40 --out " + dir.file("bad.csv")) == 2);
}

TEST_CASE("estimate emits a parseable result") {
  TempDir dir;
  const std::string traj = dir.file("traj.csv");
  REQUIRE(run("simulate --n 6 --T 300 --seed 9 --out " + traj) == 0);

  const std::string out = dir.file("est.json");
  REQUIRE(run("estimate --in " + traj + " --method rfb --rank 3 --out " + out) == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  REQUIRE(j["method"] == "rfb");
  REQUIRE(j["n"] == 6);
  REQUIRE(j["rank"] == 3);
  REQUIRE(j["f_hat"].size() == 36);
  REQUIRE(j["spectral_radius"].get<double>() < 1.0);
  REQUIRE_FALSE(j.contains("q_hat"));

  const std::string ls_out = dir.file("ls.json");
  REQUIRE(run("estimate --in " + traj + " --method ls --out " + ls_out) == 0);
  const nlohmann::json jls = nlohmann::json::parse(slurp(ls_out));
  REQUIRE(jls["method"] == "ls");
  REQUIRE(jls["rank"] == 6);
}

TEST_CASE("estimate rejects bad invocations") {
  TempDir dir;
  const std::string traj = dir.file("traj.csv");
  REQUIRE(run("simulate --n 6 --T 50 --seed 2 --out " + traj) == 0);

  REQUIRE(run("estimate --in " + traj + " --method rls 2>" + dir.file("e1")) == 2);
  REQUIRE(run("estimate --in " + traj + " --method rfb --rank 99 2>" + dir.file("e2")) == 2);
  REQUIRE(run("estimate --in " + dir.file("missing.csv") + " --method ls 2>" +
              dir.file("e3")) == 2);
  REQUIRE(run("estimate --in " + traj + " --method bogus 2>" + dir.file("e4")) == 2);
  REQUIRE(run("estimate 2>" + dir.file("e5")) == 2);  // --in is required
}

TEST_CASE("malformed input reports the offending line") {
  TempDir dir;
  const std::string bad = dir.file("bad.csv");
  {
    std::ofstream out(bad);
    out << "y1,y2\n1.0,2.0\n3.0,oops\n";
  }
  const std::string err = dir.file("err.txt");
  REQUIRE(run("estimate --in " + bad + " --method ls 2>" + err) == 2);
  REQUIRE(slurp(err).find("line 3") != std::string::npos);
}

TEST_CASE("the low-dimensional study writes its tables") {
  TempDir dir;
  const std::string out = (dir.path / "low").string();
  REQUIRE(run("reproduce-low --repeats 4 --seed 42 --threads 2 --out " + out +
              " >" + dir.file("stdout.txt")) == 0);

  for (const std::string tag : {"T24", "T216", "T600"}) {
    const std::string results = slurp(dir.path / "low" / ("results_" + tag + ".csv"));
    REQUIRE(count_lines(results) == 17);  // header plus 4 methods x 4 repeats
    REQUIRE(results.rfind("seed,method,n,m,T,e,epsilon,rho,fit_seconds\n", 0) == 0);
    REQUIRE(fs::exists(dir.path / "low" / ("poles_" + tag + ".csv")));
  }

  const nlohmann::json summary = nlohmann::json::parse(slurp(dir.path / "low" / "summary.json"));
  REQUIRE(summary["repeats"] == 4);
  REQUIRE(summary["start"] == "origin");
  REQUIRE(summary["cells"].size() == 3);
  for (const auto& cell : summary["cells"]) {
    for (const std::string method : {"ls", "fb11", "rls", "rfb"}) {
      REQUIRE(cell["methods"].contains(method));
      REQUIRE(cell["methods"][method]["e"]["count"] == 4);
    }
    // the always-stable reduction never leaves the unit disc
    REQUIRE(cell["methods"]["rfb"]["unstable_rate"].get<double>() == 0.0);
  }
}

TEST_CASE("the high-dimensional study writes its tables") {
  TempDir dir;
  const std::string out = (dir.path / "high").string();
  REQUIRE(run("reproduce-high --k-range 1..1 --t-mult 4 --repeats 3 --seed 7 --out " +
              out + " >" + dir.file("stdout.txt")) == 0);
  const std::string results = slurp(dir.path / "high" / "results_n12_T48.csv");
  REQUIRE(count_lines(results) == 7);  // header plus 2 methods x 3 repeats
  const nlohmann::json summary =
      nlohmann::json::parse(slurp(dir.path / "high" / "summary_high.json"));
  REQUIRE(summary["cells"].size() == 1);
  REQUIRE(summary["cells"][0]["n"] == 12);
  REQUIRE(summary["cells"][0]["T"] == 48);
  REQUIRE(summary["cells"][0]["methods"].contains("rls"));
  REQUIRE(summary["cells"][0]["methods"].contains("rfb"));

  REQUIRE(run("reproduce-high --k-range 8..9 --repeats 1 2>" + dir.file("err.txt")) == 2);
  REQUIRE(run("reproduce-high --t-mult 7 --repeats 1 2>" + dir.file("err2.txt")) == 2);
}

TEST_CASE("bench reports timings and scaling") {
  TempDir dir;
  const std::string csv = dir.file("bench.csv");
  const std::string log = dir.file("bench.txt");
  REQUIRE(run("bench --k-range 1..2 --t-mult 4 --repeats 2 --seed 11 --out " + csv +
              " >" + log) == 0);
  const std::string table = slurp(csv);
  REQUIRE(table.rfind("method,n,T,seed,fit_seconds\n", 0) == 0);
  REQUIRE(count_lines(table) == 9);  // header plus 2 sizes x 2 methods x 2 repeats
  const std::string printed = slurp(log);
  REQUIRE(printed.find("cost scaling") != std::string::npos);

  REQUIRE(run("bench --k-range 8..9 2>" + dir.file("err.txt")) == 2);
}

TEST_CASE("usage errors exit with the parse code") {
  TempDir dir;
  REQUIRE(run("frobnicate 2>" + dir.file("e1")) == 2);
  REQUIRE(run("2>" + dir.file("e2")) == 2);
  REQUIRE(run("--help >" + dir.file("help.txt")) == 0);
  REQUIRE(slurp(dir.file("help.txt")).find("simulate") != std::string::npos);
}
