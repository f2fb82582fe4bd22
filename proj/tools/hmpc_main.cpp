// Command-line front end: simulate / ocp / mpc / verify / list-plants.
//
// Exit codes: 0 success, 1 infeasible problem, 2 configuration error,
// 3 solver or integration failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hmpc/models.hpp"
#include "hmpc/mpc.hpp"
#include "hmpc/ocp.hpp"
#include "hmpc/simulator.hpp"
#include "hmpc/verify.hpp"

namespace {

using json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Parsing helpers

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("not a number: '" + s + "'");
  return value;
}

Eigen::VectorXd parse_vector(const std::string& s) {
  const std::vector<std::string> parts = split(s, ',');
  Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = to_double(parts[i]);
  }
  return v;
}

/// Accepts "generic(N=5, delta=0.5)", "band(mu=1.5)", "thresholds(2.5,2.5,0)"
/// or a bare comma-separated threshold list.
hmpc::PredictionHorizon parse_horizon(const std::string& raw) {
  const std::string s = trim(raw);
  const auto open = s.find('(');
  if (open != std::string::npos && s.back() == ')') {
    const std::string head = trim(s.substr(0, open));
    const std::string args = s.substr(open + 1, s.size() - open - 2);
    std::map<std::string, std::string> kv;
    std::vector<double> plain;
    for (const std::string& part : split(args, ',')) {
      const auto eq = part.find('=');
      if (eq == std::string::npos) {
        plain.push_back(to_double(part));
      } else {
        kv[trim(part.substr(0, eq))] = trim(part.substr(eq + 1));
      }
    }
    if (head == "generic") {
      if (!kv.count("N") || !kv.count("delta")) {
        throw ConfigError("generic horizon needs N and delta");
      }
      return hmpc::PredictionHorizon::generic(
          static_cast<int>(to_double(kv.at("N"))), to_double(kv.at("delta")));
    }
    if (head == "band") {
      if (!kv.count("mu")) throw ConfigError("band horizon needs mu");
      return hmpc::PredictionHorizon::band(to_double(kv.at("mu")));
    }
    if (head == "thresholds") {
      return hmpc::PredictionHorizon(plain);
    }
    throw ConfigError("unknown horizon form '" + head + "'");
  }
  std::vector<double> thresholds;
  for (const std::string& part : split(s, ',')) {
    thresholds.push_back(to_double(part));
  }
  return hmpc::PredictionHorizon(thresholds);
}

/// key = value file with [section] headers; keys are stored flat as
/// "section.key" ("key" at top level). '#' starts a comment.
std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::string section;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line without '=': '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bundle construction from config

hmpc::PlantBundle build_bundle(const std::string& plant_name,
                               const std::map<std::string, std::string>& cfg) {
  auto get = [&cfg](const std::string& key,
                    double fallback) -> double {
    const auto it = cfg.find(key);
    return it == cfg.end() ? fallback : to_double(it->second);
  };
  if (plant_name == "bouncing-ball") {
    hmpc::BouncingBallParams p;
    p.gamma = get("bouncing_ball.gamma", p.gamma);
    p.lambda = get("bouncing_ball.lambda", p.lambda);
    p.h = get("bouncing_ball.h", p.h);
    p.theta = get("bouncing_ball.theta", p.theta);
    p.u_max = get("bouncing_ball.u_max", p.u_max);
    return hmpc::bouncing_ball(p);
  }
  if (plant_name == "sample-hold") {
    hmpc::SampleHoldParams p = hmpc::SampleHoldParams::double_integrator();
    p.sigma = get("sample_hold.sigma", p.sigma);
    p.T_s = get("sample_hold.T_s", p.T_s);
    p.c = get("sample_hold.c", p.c);
    p.u_max = get("sample_hold.u_max", p.u_max);
    return hmpc::sample_hold(p);
  }
  if (plant_name == "thermostat") {
    hmpc::ThermostatParams p;
    p.z_o = get("thermostat.z_o", p.z_o);
    p.z_delta = get("thermostat.z_delta", p.z_delta);
    p.z_min = get("thermostat.z_min", p.z_min);
    p.z_max = get("thermostat.z_max", p.z_max);
    return hmpc::thermostat(p);
  }
  throw ConfigError("unknown plant '" + plant_name +
                    "' (see `hmpc list-plants`)");
}

hmpc::BouncingBallParams ball_params(
    const std::map<std::string, std::string>& cfg) {
  hmpc::BouncingBallParams p;
  const auto it_g = cfg.find("bouncing_ball.gamma");
  if (it_g != cfg.end()) p.gamma = to_double(it_g->second);
  const auto it_h = cfg.find("bouncing_ball.h");
  if (it_h != cfg.end()) p.h = to_double(it_h->second);
  return p;
}

// ---------------------------------------------------------------------------
// Output

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::string& plant_name,
               const hmpc::HybridPlant& plant, const hmpc::SolutionPair& sol,
               const std::optional<hmpc::BouncingBallParams>& energy) {
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!path.empty() && path != "-") {
    file.open(path, std::ios::trunc);
    if (!file) throw ConfigError("cannot open output file '" + path + "'");
    os = &file;
  }
  *os << "# plant = " << plant_name << "\n";
  *os << "# J = " << sol.dom.jump_count() << "\n";
  *os << "# jump_times =";
  for (double t : sol.dom.jump_times()) *os << " " << fmt(t);
  *os << "\n";
  *os << "t,j";
  for (int i = 0; i < plant.state_dim; ++i) *os << ",x_" << i;
  for (int i = 0; i < plant.input_dim; ++i) *os << ",u_" << i;
  if (energy) *os << ",W";
  *os << "\n";
  for (int j = 0; j <= sol.dom.jump_count(); ++j) {
    const hmpc::FlowArc& arc = sol.arcs[static_cast<std::size_t>(j)];
    for (std::size_t k = 0; k < arc.t.size(); ++k) {
      *os << fmt(arc.t[k]) << "," << j;
      for (int i = 0; i < plant.state_dim; ++i) {
        *os << "," << fmt(arc.x[k](i));
      }
      const hmpc::Input& u = arc.u[k];
      for (int i = 0; i < plant.input_dim; ++i) {
        *os << "," << fmt(i < u.size() ? u(i) : 0.0);
      }
      if (energy) {
        *os << "," << fmt(hmpc::bouncing_ball_energy(*energy, arc.x[k]));
      }
      *os << "\n";
    }
  }
}

void emit_summary(const std::string& path, const json& summary) {
  if (path.empty() || path == "-") {
    std::cout << summary.dump(2) << "\n";
    return;
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw ConfigError("cannot open summary file '" + path + "'");
  file << summary.dump(2) << "\n";
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---------------------------------------------------------------------------
// Shared option bag

struct CommonOpts {
  std::string plant = "bouncing-ball";
  std::string config_path;
  std::string x0_str;
  std::string horizon_str;
  std::string out_path;
  std::string summary_path;
  double t_max = 10.0;
  int j_max = 30;
  // OCP solver knobs.
  double feas_tol = 1e-6;
  int max_iters = 300;
  int penalty_rounds = 6;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts* o, bool with_solver) {
  cmd->add_option("--plant", o->plant, "bouncing-ball | sample-hold | thermostat");
  cmd->add_option("--config", o->config_path, "key = value config file");
  cmd->add_option("--x0", o->x0_str, "initial state, comma separated");
  cmd->add_option("--out", o->out_path, "trajectory CSV path ('-' = stdout)");
  cmd->add_option("--summary", o->summary_path, "JSON run-summary path");
  cmd->add_option("--tmax", o->t_max, "ordinary-time budget (s)");
  cmd->add_option("--jmax", o->j_max, "jump budget");
  if (with_solver) {
    cmd->add_option("--horizon", o->horizon_str,
                    "generic(N=..,delta=..) | band(mu=..) | threshold list");
    cmd->add_option("--feas-tol", o->feas_tol, "feasibility tolerance");
    cmd->add_option("--max-iters", o->max_iters, "inner iterations per round");
    cmd->add_option("--penalty-rounds", o->penalty_rounds, "penalty rounds");
    cmd->add_option("--threads", o->threads, "worker cap (0 = HMPC_THREADS)");
  }
}

/// Applies config-file values for every option the command line left at its
/// default (flags override file).
void merge_config(const CLI::App* cmd, CommonOpts* o,
                  std::map<std::string, std::string>* cfg_out) {
  if (o->config_path.empty()) return;
  const auto cfg = load_config(o->config_path);
  *cfg_out = cfg;
  auto untouched = [&](const char* flag) {
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    return opt != nullptr && opt->count() == 0;
  };
  auto pull_str = [&](const char* flag, const char* key, std::string* dst) {
    if (untouched(flag) && cfg.count(key)) *dst = cfg.at(key);
  };
  auto pull_num = [&](const char* flag, const char* key, auto* dst) {
    if (untouched(flag) && cfg.count(key)) {
      *dst = static_cast<std::remove_pointer_t<decltype(dst)>>(
          to_double(cfg.at(key)));
    }
  };
  pull_str("--plant", "plant", &o->plant);
  pull_str("--x0", "x0", &o->x0_str);
  pull_str("--horizon", "horizon", &o->horizon_str);
  pull_str("--out", "out", &o->out_path);
  pull_str("--summary", "summary", &o->summary_path);
  pull_num("--tmax", "tmax", &o->t_max);
  pull_num("--jmax", "jmax", &o->j_max);
  if (cmd->get_option_no_throw("--feas-tol") != nullptr) {
    pull_num("--feas-tol", "ocp.feas_tol", &o->feas_tol);
    pull_num("--max-iters", "ocp.max_iters", &o->max_iters);
    pull_num("--penalty-rounds", "ocp.penalty_rounds", &o->penalty_rounds);
    pull_num("--threads", "ocp.threads", &o->threads);
  }
}

hmpc::State require_x0(const CommonOpts& o, const hmpc::HybridPlant& plant) {
  if (o.x0_str.empty()) throw ConfigError("--x0 is required");
  const Eigen::VectorXd x0 = parse_vector(o.x0_str);
  if (x0.size() != plant.state_dim) {
    throw ConfigError("--x0 has dimension " + std::to_string(x0.size()) +
                      ", plant expects " + std::to_string(plant.state_dim));
  }
  return x0;
}

hmpc::OcpOptions make_ocp_options(const CommonOpts& o,
                                  const hmpc::PlantBundle& bundle) {
  hmpc::OcpOptions opts;
  opts.feas_tol = o.feas_tol;
  opts.max_iters = o.max_iters;
  opts.penalty_rounds = o.penalty_rounds;
  opts.threads = o.threads;
  opts.jump_input_lo = bundle.jump_input_lo;
  opts.jump_input_hi = bundle.jump_input_hi;
  return opts;
}

std::optional<hmpc::BouncingBallParams> energy_column(
    const std::string& plant_name,
    const std::map<std::string, std::string>& cfg) {
  if (plant_name != "bouncing-ball") return std::nullopt;
  return ball_params(cfg);
}

// ---------------------------------------------------------------------------
// Subcommands

int run_simulate(const CLI::App* cmd, CommonOpts& o,
                 const std::string& input_kind, const std::string& u_str) {
  std::map<std::string, std::string> cfg;
  merge_config(cmd, &o, &cfg);
  const hmpc::PlantBundle bundle = build_bundle(o.plant, cfg);
  const hmpc::State x0 = require_x0(o, bundle.plant);

  hmpc::SimBudget budget;
  budget.t_max = o.t_max;
  budget.j_max = o.j_max;

  hmpc::InputPolicy policy = bundle.plant.zero_input();
  if (input_kind == "zero") {
    policy = bundle.plant.zero_input();
  } else if (input_kind == "feedback") {
    policy = bundle.feedback;
  } else if (input_kind == "constant") {
    if (u_str.empty()) throw ConfigError("--input constant needs --u");
    policy = hmpc::Input(parse_vector(u_str));
  } else {
    throw ConfigError("unknown --input '" + input_kind + "'");
  }

  const auto t0 = std::chrono::steady_clock::now();
  const hmpc::SimResult result = hmpc::simulate(bundle.plant, x0, policy, budget);
  const double wall = seconds_since(t0);

  write_csv(o.out_path, o.plant, bundle.plant, result.sol,
            energy_column(o.plant, cfg));
  const hmpc::HybridTime end = result.sol.dom.terminal_time();
  json summary = {{"mode", "simulate"},
                  {"plant", o.plant},
                  {"stop_reason", hmpc::to_string(result.reason)},
                  {"zeno_suspected", result.zeno_suspected},
                  {"jumps", result.sol.dom.jump_count()},
                  {"terminal_t", end.t},
                  {"terminal_j", end.j},
                  {"wall_time_s", wall}};
  emit_summary(o.summary_path, summary);
  return 0;
}

int run_ocp(const CLI::App* cmd, CommonOpts& o) {
  std::map<std::string, std::string> cfg;
  merge_config(cmd, &o, &cfg);
  const hmpc::PlantBundle bundle = build_bundle(o.plant, cfg);
  const hmpc::State x0 = require_x0(o, bundle.plant);
  const hmpc::PredictionHorizon horizon =
      o.horizon_str.empty() ? bundle.horizon : parse_horizon(o.horizon_str);
  const hmpc::OcpOptions opts = make_ocp_options(o, bundle);

  const auto t0 = std::chrono::steady_clock::now();
  const hmpc::OcpSolution solution =
      hmpc::solve(bundle.plant, bundle.cost, horizon, x0, opts);
  const double wall = seconds_since(t0);

  json summary = {{"mode", "ocp"},
                  {"plant", o.plant},
                  {"feasible", solution.feasible},
                  {"cost", solution.cost},
                  {"jump_count", solution.jump_count},
                  {"iterations", solution.iterations},
                  {"max_residual", solution.report.max()},
                  {"wall_time_s", wall}};
  if (solution.sol) {
    write_csv(o.out_path, o.plant, bundle.plant, *solution.sol,
              energy_column(o.plant, cfg));
  }
  emit_summary(o.summary_path, summary);
  return solution.feasible ? 0 : 1;
}

int run_mpc(const CLI::App* cmd, CommonOpts& o, const std::string& trigger,
            int nc, double deltac, const std::string& assert_str) {
  std::map<std::string, std::string> cfg;
  merge_config(cmd, &o, &cfg);
  const hmpc::PlantBundle bundle = build_bundle(o.plant, cfg);
  const hmpc::State x0 = require_x0(o, bundle.plant);

  hmpc::MpcConfig mpc_cfg{
      o.horizon_str.empty() ? bundle.horizon : parse_horizon(o.horizon_str),
      hmpc::ControlHorizon{},
      bundle.cost,
      hmpc::SimBudget{},
      make_ocp_options(o, bundle),
      hmpc::AssertLevel::kFeasibility};
  mpc_cfg.budget.t_max = o.t_max;
  mpc_cfg.budget.j_max = o.j_max;
  if (trigger == "next-jump") {
    mpc_cfg.control.policy = hmpc::TriggerPolicy::kNextJumpOrTerminal;
  } else if (trigger == "fixed") {
    mpc_cfg.control.policy = hmpc::TriggerPolicy::kFixedBudget;
    mpc_cfg.control.jumps = nc;
    mpc_cfg.control.delta = deltac;
  } else {
    throw ConfigError("unknown --trigger '" + trigger + "'");
  }
  if (assert_str == "off") {
    mpc_cfg.assert_level = hmpc::AssertLevel::kOff;
  } else if (assert_str == "feasibility") {
    mpc_cfg.assert_level = hmpc::AssertLevel::kFeasibility;
  } else if (assert_str == "descent") {
    mpc_cfg.assert_level = hmpc::AssertLevel::kFeasibilityDescent;
  } else {
    throw ConfigError("unknown --assert '" + assert_str + "'");
  }

  const auto t0 = std::chrono::steady_clock::now();
  hmpc::MpcTrace trace;
  try {
    trace = hmpc::run(bundle.plant, mpc_cfg, x0);
  } catch (const hmpc::InfeasibleOcpError& e) {
    json summary = {{"mode", "mpc"},
                    {"plant", o.plant},
                    {"feasible", false},
                    {"error", e.what()},
                    {"wall_time_s", seconds_since(t0)}};
    emit_summary(o.summary_path, summary);
    return 1;
  }
  const double wall = seconds_since(t0);

  write_csv(o.out_path, o.plant, bundle.plant, trace.sol,
            energy_column(o.plant, cfg));

  json steps = json::array();
  for (const hmpc::MpcStep& step : trace.steps) {
    steps.push_back({{"t", step.when.t},
                     {"j", step.when.j},
                     {"value", step.value},
                     {"feasible", step.feasible},
                     {"residual", step.residual},
                     {"iterations", step.iterations},
                     {"predicted_jumps", step.jump_count}});
  }
  const hmpc::HybridTime end = trace.sol.dom.terminal_time();
  json summary = {{"mode", "mpc"},
                  {"plant", o.plant},
                  {"feasible", true},
                  {"optimizations", trace.steps.size()},
                  {"terminal_t", end.t},
                  {"terminal_j", end.j},
                  {"steps", steps},
                  {"wall_time_s", wall}};
  if (mpc_cfg.assert_level == hmpc::AssertLevel::kFeasibilityDescent) {
    const hmpc::DescentReport descent =
        hmpc::assert_descent(bundle.cost, trace, 5e-4);
    summary["descent_ok"] = descent.ok();
    if (!descent.ok()) {
      emit_summary(o.summary_path, summary);
      return 3;
    }
  }
  emit_summary(o.summary_path, summary);
  return 0;
}

Eigen::VectorXd parse_region_side(const std::string& spec, bool upper) {
  // "lo:hi,lo:hi,..." per dimension.
  const std::vector<std::string> parts = split(spec, ',');
  Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto colon = parts[i].find(':');
    if (colon == std::string::npos) {
      throw ConfigError("region entry '" + parts[i] + "' is not lo:hi");
    }
    v(static_cast<Eigen::Index>(i)) = to_double(
        upper ? parts[i].substr(colon + 1) : parts[i].substr(0, colon));
  }
  return v;
}

struct VerifyDefaults {
  Eigen::VectorXd flow_lo, flow_hi;      // state box for flow-side checks
  Eigen::VectorXd jump_lo, jump_hi;      // state box for jump-side checks
  Eigen::VectorXd flow_xu_lo, flow_xu_hi;  // joint (x, u) boxes
  Eigen::VectorXd jump_xu_lo, jump_xu_hi;
  hmpc::Witness alpha_C, alpha_D, alpha_terminal;
};

Eigen::VectorXd concat(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v(i++) = value;
  return v;
}

VerifyDefaults verify_defaults(const std::string& plant_name,
                               const hmpc::PlantBundle& bundle,
                               const std::map<std::string, std::string>& cfg) {
  VerifyDefaults d;
  if (plant_name == "bouncing-ball") {
    const hmpc::BouncingBallParams p = ball_params(cfg);
    const double s = std::sqrt(2.0 * p.gamma * p.h);
    d.flow_lo = vec({0.0, -s - 0.3});
    d.flow_hi = vec({5.0, s + 0.3});
    d.jump_lo = vec({0.0, -s - 0.3});
    d.jump_hi = vec({0.0, 0.0});
    d.flow_xu_lo = concat(d.flow_lo, vec({0.0}));
    d.flow_xu_hi = concat(d.flow_hi, vec({1.0}));
    d.jump_xu_lo = concat(d.jump_lo, vec({0.0}));
    d.jump_xu_hi = concat(d.jump_hi, vec({20.0}));
    d.alpha_C = hmpc::power_witness(0.01, 2.0);
    d.alpha_D = hmpc::power_witness(1.0, 2.0);
    d.alpha_terminal = hmpc::power_witness(300.0, 2.0);
  } else if (plant_name == "sample-hold") {
    const hmpc::SampleHoldParams p = hmpc::SampleHoldParams::double_integrator();
    d.flow_lo = vec({-2.0, -2.0, -6.0, 0.0});
    d.flow_hi = vec({2.0, 2.0, 6.0, p.T_s});
    d.jump_lo = vec({-2.0, -2.0, -6.0, p.T_s});
    d.jump_hi = vec({2.0, 2.0, 6.0, p.T_s});
    d.flow_xu_lo = concat(d.flow_lo, vec({0.0}));
    d.flow_xu_hi = concat(d.flow_hi, vec({0.0}));
    d.jump_xu_lo = concat(d.jump_lo, vec({-p.u_max}));
    d.jump_xu_hi = concat(d.jump_hi, vec({p.u_max}));
    d.alpha_C = hmpc::power_witness(1e-8, 2.0);
    // The per-jump stage cost is identically zero; only the trivial lower
    // bound holds.
    d.alpha_D = {[](double) { return 0.0; }};
    d.alpha_terminal = hmpc::power_witness(1e3, 2.0);
  } else if (plant_name == "thermostat") {
    d.flow_lo = vec({1.0, 6.0});
    d.flow_hi = vec({1.0, 14.0});
    d.jump_lo = d.flow_lo;
    d.jump_hi = d.flow_hi;
    d.flow_xu_lo = concat(d.flow_lo, vec({0.0}));
    d.flow_xu_hi = concat(d.flow_hi, vec({0.0}));
    d.jump_xu_lo = concat(d.jump_lo, vec({1.0}));
    d.jump_xu_hi = concat(d.jump_hi, vec({1.0}));
    d.alpha_C = hmpc::power_witness(1e-8, 2.0);
    d.alpha_D = {[](double) { return 0.0; }};
    d.alpha_terminal = hmpc::power_witness(1e3, 2.0);
  } else {
    throw ConfigError("unknown plant '" + plant_name + "'");
  }
  (void)bundle;
  return d;
}

int run_verify(const CLI::App* cmd, CommonOpts& o, const std::string& check,
               int samples, unsigned long long seed, const std::string& region,
               const std::string& region_jump, double fd_step, double epsilon,
               double witness_a, double witness_p) {
  std::map<std::string, std::string> cfg;
  merge_config(cmd, &o, &cfg);
  const hmpc::PlantBundle bundle = build_bundle(o.plant, cfg);
  VerifyDefaults d = verify_defaults(o.plant, bundle, cfg);
  if (!region.empty()) {
    d.flow_lo = parse_region_side(region, false);
    d.flow_hi = parse_region_side(region, true);
    if (d.flow_lo.size() == bundle.plant.state_dim) {
      d.flow_xu_lo = concat(d.flow_lo, d.flow_xu_lo.tail(bundle.plant.input_dim));
      d.flow_xu_hi = concat(d.flow_hi, d.flow_xu_hi.tail(bundle.plant.input_dim));
    } else {
      d.flow_xu_lo = d.flow_lo;
      d.flow_xu_hi = d.flow_hi;
    }
  }
  if (!region_jump.empty()) {
    d.jump_lo = parse_region_side(region_jump, false);
    d.jump_hi = parse_region_side(region_jump, true);
    if (d.jump_lo.size() == bundle.plant.state_dim) {
      d.jump_xu_lo = concat(d.jump_lo, d.jump_xu_lo.tail(bundle.plant.input_dim));
      d.jump_xu_hi = concat(d.jump_hi, d.jump_xu_hi.tail(bundle.plant.input_dim));
    } else {
      d.jump_xu_lo = d.jump_lo;
      d.jump_xu_hi = d.jump_hi;
    }
  }
  if (witness_a > 0.0) {
    const hmpc::Witness w = hmpc::power_witness(witness_a, witness_p);
    d.alpha_C = w;
    d.alpha_D = w;
    d.alpha_terminal = w;
  }

  const auto t0 = std::chrono::steady_clock::now();
  json summary = {{"mode", "verify"}, {"plant", o.plant}, {"check", check}};
  bool ok = false;

  if (check == "clf") {
    hmpc::SampleCloud flow_cloud{seed, samples, d.flow_lo, d.flow_hi};
    hmpc::SampleCloud jump_cloud{seed + 1, samples, d.jump_lo, d.jump_hi};
    const hmpc::CheckReport report = hmpc::check_clf(
        bundle.plant, bundle.cost, bundle.feedback, bundle.cost.in_X,
        flow_cloud, jump_cloud, fd_step);
    ok = report.ok();
    summary["samples_checked"] = report.samples_checked;
    summary["violations"] = report.violations.size();
    summary["result"] = report.summary();
  } else if (check == "stage") {
    hmpc::SampleCloud flow_cloud{seed, samples, d.flow_xu_lo, d.flow_xu_hi};
    hmpc::SampleCloud jump_cloud{seed + 1, samples, d.jump_xu_lo, d.jump_xu_hi};
    const hmpc::CheckReport report =
        hmpc::check_stage_bounds(bundle.plant, bundle.cost, bundle.target,
                                 d.alpha_C, d.alpha_D, flow_cloud, jump_cloud);
    ok = report.ok();
    summary["samples_checked"] = report.samples_checked;
    summary["violations"] = report.violations.size();
    summary["result"] = report.summary();
  } else if (check == "terminal") {
    hmpc::SampleCloud cloud{seed, samples, d.flow_lo, d.flow_hi};
    const hmpc::CheckReport report = hmpc::check_terminal_bound(
        bundle.cost, bundle.target, d.alpha_terminal, epsilon, cloud);
    ok = report.ok();
    summary["samples_checked"] = report.samples_checked;
    summary["violations"] = report.violations.size();
    summary["result"] = report.summary();
  } else if (check == "pd") {
    // Closed-loop solutions from a few spread-out starts, then the velocity
    // bound on flow-set samples.
    std::vector<hmpc::SolutionPair> sols;
    hmpc::SampleCloud start_cloud{seed + 2, 5, d.flow_lo, d.flow_hi};
    hmpc::SimBudget budget;
    budget.t_max = o.t_max;
    budget.j_max = std::min(o.j_max, 8);
    const hmpc::HybridPlant loop =
        hmpc::close_loop(bundle.plant, bundle.feedback);
    for (const Eigen::VectorXd& x0 : start_cloud.draw(
             [&](const Eigen::VectorXd& x) {
               return loop.in_flow_set(x, hmpc::Input()) ||
                      loop.in_jump_set(x, hmpc::Input());
             })) {
      sols.push_back(
          hmpc::simulate(loop, x0, hmpc::Input(), budget).sol);
    }
    const hmpc::Witness alpha =
        witness_a > 0.0 ? hmpc::power_witness(witness_a, witness_p)
                        : hmpc::power_witness(0.01, 1.0);
    const hmpc::Witness sigma{[](double) { return 50.0; }};
    hmpc::SampleCloud flow_cloud{seed, samples, d.flow_xu_lo, d.flow_xu_hi};
    const hmpc::PdReport report = hmpc::check_pd_conditions(
        bundle.plant, bundle.target, sols, alpha, sigma, flow_cloud);
    ok = report.velocity.ok();
    json per = json::array();
    for (const hmpc::PdSolutionResult& r : report.solutions) {
      per.push_back({{"p1", r.p1}, {"p2", r.p2}, {"p3", r.p3}, {"p4", r.p4}});
    }
    summary["solutions"] = per;
    summary["velocity_samples"] = report.velocity.samples_checked;
    summary["velocity_violations"] = report.velocity.violations.size();
    summary["result"] = report.summary();
  } else if (check == "sufficient") {
    if (o.plant != "bouncing-ball") {
      throw ConfigError(
          "sufficient defaults are only wired for bouncing-ball; supply witnesses "
          "programmatically for other plants");
    }
    const hmpc::BouncingBallParams p = ball_params(cfg);
    const double gamma = p.gamma;
    const double cstar = gamma * p.h;
    hmpc::SufficientConditionWitnesses w;
    w.vtilde = [gamma, cstar](const hmpc::State& x) {
      const double dw = gamma * x(0) + 0.5 * x(1) * x(1) - cstar;
      return dw * dw;
    };
    w.grad_vtilde = [gamma, cstar](const hmpc::State& x) {
      const double dw = gamma * x(0) + 0.5 * x(1) * x(1) - cstar;
      return hmpc::State(vec({2.0 * dw * gamma, 2.0 * dw * x(1)}));
    };
    w.alpha1 = hmpc::power_witness(1.0, 2.0);
    w.alpha2 = hmpc::power_witness(300.0, 2.0);
    w.lambda = 0.0;
    w.epsilon = epsilon;
    w.sigma = {[](double) { return 50.0; }};
    w.alpha_D = {[](double) { return 0.0; }};
    hmpc::SampleCloud flow_cloud{seed, samples, d.flow_xu_lo, d.flow_xu_hi};
    hmpc::SampleCloud jump_cloud{seed + 1, samples, d.jump_xu_lo, d.jump_xu_hi};
    const hmpc::CheckReport report = hmpc::check_sufficient_conditions(
        bundle.plant, bundle.target, w, flow_cloud, jump_cloud);
    ok = report.ok();
    summary["samples_checked"] = report.samples_checked;
    summary["violations"] = report.violations.size();
    summary["result"] = report.summary();
  } else {
    throw ConfigError("unknown --check '" + check +
                      "' (clf | stage | terminal | pd | sufficient)");
  }

  summary["ok"] = ok;
  summary["wall_time_s"] = seconds_since(t0);
  emit_summary(o.summary_path, summary);
  return ok ? 0 : 1;
}

int run_list_plants() {
  std::cout << "bouncing-ball  state (height, velocity), impact velocity "
               "injection input\n"
            << "sample-hold    state (z, held input, timer), zero-order-hold "
               "update input\n"
            << "thermostat     state (heater bit, temperature), switch-request "
               "input\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model predictive control for hybrid dynamical systems"};
  app.require_subcommand(1);

  CommonOpts sim_opts, ocp_opts, mpc_opts, verify_opts;

  CLI::App* sim_cmd = app.add_subcommand("simulate", "integrate a plant");
  add_common(sim_cmd, &sim_opts, false);
  std::string input_kind = "zero";
  std::string u_str;
  sim_cmd->add_option("--input", input_kind, "zero | feedback | constant");
  sim_cmd->add_option("--u", u_str, "constant input value(s)");

  CLI::App* ocp_cmd =
      app.add_subcommand("ocp", "solve one optimal control problem");
  add_common(ocp_cmd, &ocp_opts, true);

  CLI::App* mpc_cmd = app.add_subcommand("mpc", "receding-horizon closed loop");
  add_common(mpc_cmd, &mpc_opts, true);
  std::string trigger = "next-jump";
  int nc = 1;
  double deltac = 1.0;
  std::string assert_str = "feasibility";
  mpc_cmd->add_option("--trigger", trigger, "next-jump | fixed");
  mpc_cmd->add_option("--nc", nc, "fixed-trigger jump budget");
  mpc_cmd->add_option("--deltac", deltac, "fixed-trigger time quantum");
  mpc_cmd->add_option("--assert", assert_str, "off | feasibility | descent");

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "sampled hypothesis checks");
  add_common(verify_cmd, &verify_opts, false);
  std::string check;
  int samples = 10000;
  unsigned long long seed = 1;
  std::string region, region_jump;
  double fd_step = 1e-6;
  double epsilon = 1.0;
  double witness_a = 0.0;
  double witness_p = 2.0;
  verify_cmd->add_option("--check", check, "clf | stage | terminal | pd | sufficient")
      ->required();
  verify_cmd->add_option("--samples", samples, "sample count");
  verify_cmd->add_option("--seed", seed, "sampling seed");
  verify_cmd->add_option("--region", region, "flow-side box lo:hi,lo:hi,...");
  verify_cmd->add_option("--region-jump", region_jump, "jump-side box");
  verify_cmd->add_option("--fd-step", fd_step, "finite-difference step");
  verify_cmd->add_option("--epsilon", epsilon, "target-set neighborhood radius");
  verify_cmd->add_option("--witness-a", witness_a,
                         "witness scale a in a*r^p (0 = plant default)");
  verify_cmd->add_option("--witness-p", witness_p, "witness power p");

  CLI::App* list_cmd = app.add_subcommand("list-plants", "available plants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim_cmd->parsed()) {
      return run_simulate(sim_cmd, sim_opts, input_kind, u_str);
    }
    if (ocp_cmd->parsed()) return run_ocp(ocp_cmd, ocp_opts);
    if (mpc_cmd->parsed()) {
      return run_mpc(mpc_cmd, mpc_opts, trigger, nc, deltac, assert_str);
    }
    if (verify_cmd->parsed()) {
      return run_verify(verify_cmd, verify_opts, check, samples, seed, region,
                        region_jump, fd_step, epsilon, witness_a, witness_p);
    }
    if (list_cmd->parsed()) return run_list_plants();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hmpc::InfeasibleOcpError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
