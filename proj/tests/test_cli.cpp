#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hmpc/models.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HMPC_CLI_PATH) + " " + args +
                          " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("hmpc_cli_test_" + name);
}

struct CsvRow {
  double t;
  int j;
  std::vector<double> values;  // state then inputs (then extras)
};

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  std::stringstream ss(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(ss, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column names
      continue;
    }
    CsvRow row;
    std::stringstream ls(line);
    std::string cell;
    int idx = 0;
    while (std::getline(ls, cell, ',')) {
      const double v = std::stod(cell);
      if (idx == 0) {
        row.t = v;
      } else if (idx == 1) {
        row.j = static_cast<int>(v);
      } else {
        row.values.push_back(v);
      }
      ++idx;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("configuration errors exit with code 2") {
  CHECK(run_cli("simulate --plant bouncing-ball") == 2);  // missing --x0
  CHECK(run_cli("simulate --plant pendulum --x0 1,0") == 2);
  CHECK(run_cli("simulate --plant bouncing-ball --x0 1,0,0") == 2);
  CHECK(run_cli("simulate --plant bouncing-ball --x0 one,zero") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("verify --plant bouncing-ball --check bogus") == 2);
  CHECK(run_cli("ocp --plant bouncing-ball --x0 1,-1 --horizon 'band(x=1)'") ==
        2);
}

TEST_CASE("simulate writes a parseable, physically consistent CSV") {
  const fs::path out = temp_file("sim.csv");
  CHECK(run_cli("simulate --plant bouncing-ball --x0 1,-1 --tmax 3 --jmax 4 "
                "--out " + out.string()) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("# plant = bouncing-ball") != std::string::npos);
  CHECK(text.find("t,j,x_0,x_1,u_0,W") != std::string::npos);
  const auto rows = parse_csv(text);
  REQUIRE(rows.size() > 10);
  const hmpc::PlantBundle bundle = hmpc::bouncing_ball();
  double prev = -1.0;
  int prev_j = 0;
  for (const CsvRow& row : rows) {
    REQUIRE(row.values.size() == 4);  // x_0, x_1, u_0, W
    hmpc::State x(2);
    x << row.values[0], row.values[1];
    // Every sample lies in the flow or jump set, up to a small guard slack.
    const hmpc::Input u = hmpc::Input::Constant(1, row.values[2]);
    CHECK((bundle.plant.in_flow_set(x, u) || x(0) <= 1e-9));
    CHECK(x(0) >= -1e-9);
    // The energy column matches the state columns it sits next to.
    CHECK(row.values[3] ==
          doctest::Approx(9.81 * x(0) + 0.5 * x(1) * x(1)).epsilon(1e-12));
    // Rows come in t + j order.
    CHECK(row.t + row.j >= prev - 1e-12);
    CHECK(row.j >= prev_j);
    prev = row.t + row.j;
    prev_j = row.j;
  }
  fs::remove(out);
}

TEST_CASE("identical invocations give byte-identical CSV output") {
  const fs::path a = temp_file("det_a.csv");
  const fs::path b = temp_file("det_b.csv");
  const std::string args =
      "mpc --plant bouncing-ball --x0 1,-1 --tmax 3 --jmax 6 --out ";
  CHECK(run_cli(args + a.string()) == 0);
  CHECK(run_cli(args + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
  fs::remove(a);
  fs::remove(b);
}

TEST_CASE("ocp exit codes distinguish feasible from infeasible") {
  CHECK(run_cli("ocp --plant bouncing-ball --x0 0,0 --out /dev/null") == 0);
  // A horizon too short to pull a far-away sampled-data state into the
  // terminal sublevel set.
  CHECK(run_cli("ocp --plant sample-hold --x0 8,8,0,0 "
                "--horizon 'generic(N=1,delta=0.2)' --out /dev/null") == 1);
}

TEST_CASE("verify subcommand reports success on the stock plants") {
  CHECK(run_cli("verify --plant bouncing-ball --check clf --samples 500 "
                "--seed 7") == 0);
  CHECK(run_cli("verify --plant sample-hold --check clf --samples 500 "
                "--seed 7") == 0);
  // An absurdly large stage witness is refuted by sampling.
  CHECK(run_cli("verify --plant bouncing-ball --check stage --samples 500 "
                "--seed 7 --witness-a 1e6 --witness-p 1") == 1);
}

TEST_CASE("list-plants names all three bundles") {
  const fs::path out = temp_file("plants.txt");
  const std::string cmd = std::string(HMPC_CLI_PATH) + " list-plants > " +
                          out.string() + " 2> /dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("bouncing-ball") != std::string::npos);
  CHECK(text.find("sample-hold") != std::string::npos);
  CHECK(text.find("thermostat") != std::string::npos);
  fs::remove(out);
}

TEST_CASE("config file values apply and flags override them") {
  const fs::path cfg = temp_file("conf.ini");
  {
    std::ofstream f(cfg);
    f << "plant = bouncing-ball\n"
      << "x0 = 0.5,0  # comment\n"
      << "tmax = 2\n"
      << "jmax = 3\n"
      << "[bouncing_ball]\n"
      << "h = 3.0\n";
  }
  const fs::path out_cfg = temp_file("conf_run.csv");
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " +
                out_cfg.string()) == 0);
  const auto rows = parse_csv(slurp(out_cfg));
  REQUIRE(!rows.empty());
  CHECK(rows.front().values[0] == doctest::Approx(0.5));
  CHECK(rows.back().t <= 2.0 + 1e-9);

  // A flag overrides the file value for the same key.
  const fs::path out_flag = temp_file("conf_flag.csv");
  CHECK(run_cli("simulate --config " + cfg.string() + " --x0 1,0 --out " +
                out_flag.string()) == 0);
  const auto rows2 = parse_csv(slurp(out_flag));
  REQUIRE(!rows2.empty());
  CHECK(rows2.front().values[0] == doctest::Approx(1.0));

  CHECK(run_cli("simulate --config /nonexistent.ini --x0 1,0") == 2);
  fs::remove(cfg);
  fs::remove(out_cfg);
  fs::remove(out_flag);
}

TEST_CASE("simulate summary reports stop diagnostics") {
  const fs::path summary = temp_file("sum.json");
  CHECK(run_cli("simulate --plant bouncing-ball --x0 1,-1 --tmax 12 "
                "--jmax 50 --out /dev/null --summary " + summary.string()) ==
        0);
  const std::string text = slurp(summary);
  // From this start the impacts accumulate near t ~ 8.65 s, well before the
  // time budget, so the jump budget binds and the run is flagged as Zeno.
  CHECK(text.find("\"zeno_suspected\": true") != std::string::npos);
  CHECK(text.find("\"jumps\": 50") != std::string::npos);
  fs::remove(summary);
}
