#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "wqbm/correlation.hpp"
#include "wqbm/errors.hpp"
#include "wqbm/evolution.hpp"
#include "wqbm/kernels.hpp"
#include "wqbm/oracle.hpp"
#include "wqbm/parallel.hpp"
#include "wqbm/propagator.hpp"
#include "wqbm/trajectories.hpp"

namespace wqbm::cli {

namespace {

constexpr const char* kConfigTag = "# config: ";
constexpr std::size_t kMaxModes = 5000;

bool drude(const RunConfig& cfg) { return cfg.kernel == "drude"; }

/// Green function and noise kernel selected by the config.
struct Physics {
  SystemParams params;
  DampingSpec damping;
  GreenPair green;
  NoiseKernel noise;
};

Physics physics(const RunConfig& cfg) {
  const SystemParams params = cfg.params();
  const DampingSpec damping = cfg.damping();
  if (drude(cfg)) {
    return {params, damping, drude_green_pair(params, damping),
            NoiseKernel::exact_drude(params, damping)};
  }
  return {params, damping, make_green_pair(params, damping),
          NoiseKernel::high_temperature(params, damping)};
}

Matrix2 initial_cov(const RunConfig& cfg) {
  Matrix2 c;
  c << cfg.var_p, cfg.cov_pq, cfg.cov_pq, cfg.var_q;
  return c;
}

/// Covariance data for every grid time, computed in parallel, stored in order.
std::vector<CovarianceData> covariances(const Physics& ph, const std::vector<double>& ts) {
  std::vector<CovarianceData> out(ts.size());
  parallel_for(ts.size(), [&](std::size_t k) {
    out[k] = covariance_from_integrals(ts[k], kernel_integrals(ts[k], ph.green, ph.noise),
                                       ph.params, ph.green);
  });
  return out;
}

double json_number(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

GridWigner load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open grid file " + path);
  nlohmann::json j;
  try {
    in >> j;
    GridWigner g;
    g.p0 = j.at("p0").get<double>();
    g.dp = j.at("dp").get<double>();
    g.np = j.at("np").get<std::size_t>();
    g.q0 = j.at("q0").get<double>();
    g.dq = j.at("dq").get<double>();
    g.nq = j.at("nq").get<std::size_t>();
    g.values = j.at("values").get<std::vector<double>>();
    g.validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("malformed grid file " + path + ": " + e.what());
  }
}

nlohmann::json grid_json(const GridWigner& g) {
  return {{"p0", g.p0}, {"dp", g.dp}, {"np", g.np}, {"q0", g.q0},
          {"dq", g.dq}, {"nq", g.nq}, {"values", g.values}};
}

}  // namespace

void RunConfig::validate() const {
  params().validate();
  damping().validate();
  if (kernel != "high-t" && kernel != "drude") {
    throw ParameterError("kernel must be 'high-t' or 'drude', got '" + kernel + "'");
  }
  if (format != "csv" && format != "json") {
    throw ParameterError("format must be 'csv' or 'json', got '" + format + "'");
  }
  if (!std::isfinite(t0) || !std::isfinite(t1) || t0 < 0.0 || t1 < t0) {
    throw ParameterError("time grid needs 0 <= t0 <= t1");
  }
  if (nt < 1 || (nt > 1 && !(t1 > t0))) throw ParameterError("time grid needs nt >= 1 and t1 > t0");
  if (!(threshold > 0.0)) throw ParameterError("threshold must be positive");
  if (modes < 2 || modes > kMaxModes) {
    throw ParameterError("modes must lie in [2, " + std::to_string(kMaxModes) + "]");
  }
  for (double v : {p0, q0, qp, qtp, qpp, qtpp, cov_pq}) {
    if (!std::isfinite(v)) throw ParameterError("state and boundary data must be finite");
  }
  if (!(var_p > 0.0) || !(var_q > 0.0) || var_p * var_q - cov_pq * cov_pq <= 0.0) {
    throw ParameterError("initial covariance must be positive definite");
  }
}

SystemParams RunConfig::params() const { return {mass, omega0, hbar, beta}; }

DampingSpec RunConfig::damping() const {
  return drude(*this) ? DampingSpec::drude(gamma, omega_c) : DampingSpec::strict_ohmic(gamma);
}

std::vector<double> RunConfig::times() const {
  std::vector<double> ts(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    ts[k] = nt == 1 ? t0 : t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(nt - 1);
  }
  return ts;
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"command", c.command}, {"mass", c.mass},       {"omega0", c.omega0},
          {"hbar", c.hbar},       {"beta", c.beta},       {"gamma", c.gamma},
          {"kernel", c.kernel},   {"omega_c", c.omega_c}, {"t0", c.t0},
          {"t1", c.t1},           {"nt", c.nt},           {"format", c.format},
          {"threshold", c.threshold}, {"p0", c.p0},       {"q0", c.q0},
          {"var_p", c.var_p},     {"var_q", c.var_q},     {"cov_pq", c.cov_pq},
          {"qp", c.qp},           {"qtp", c.qtp},         {"qpp", c.qpp},
          {"qtpp", c.qtpp},       {"modes", c.modes},     {"grid_file", c.grid_file},
          {"emit_grids", c.emit_grids}};
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  const std::vector<std::string> known{
      "command", "mass",  "omega0", "hbar", "beta", "gamma", "kernel",   "omega_c",   "t0",
      "t1",      "nt",    "format", "threshold", "p0", "q0", "var_p", "var_q", "cov_pq",
      "qp",      "qtp",   "qpp",    "qtpp", "modes", "grid_file", "emit_grids"};
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ParameterError("unknown config field '" + key + "'");
    }
  }
  try {
    const auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("command", c.command);
    get("mass", c.mass);
    get("omega0", c.omega0);
    get("hbar", c.hbar);
    get("beta", c.beta);
    get("gamma", c.gamma);
    get("kernel", c.kernel);
    get("omega_c", c.omega_c);
    get("t0", c.t0);
    get("t1", c.t1);
    get("nt", c.nt);
    get("format", c.format);
    get("threshold", c.threshold);
    get("p0", c.p0);
    get("q0", c.q0);
    get("var_p", c.var_p);
    get("var_q", c.var_q);
    get("cov_pq", c.cov_pq);
    get("qp", c.qp);
    get("qtp", c.qtp);
    get("qpp", c.qpp);
    get("qtpp", c.qtpp);
    get("modes", c.modes);
    get("grid_file", c.grid_file);
    get("emit_grids", c.emit_grids);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config field has the wrong type: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::string body = text;
  const auto tag = text.find(kConfigTag);
  if (tag != std::string::npos) {
    const auto start = tag + std::string(kConfigTag).size();
    body = text.substr(start, text.find('\n', start) - start);
  } else {
    // JSON output of an earlier run carries its config under "config".
    try {
      const auto j = nlohmann::json::parse(text);
      if (j.contains("config")) return config_from_json(j.at("config"));
      return config_from_json(j);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParameterError("config file " + path + " is not JSON: " + e.what());
    }
  }
  try {
    return config_from_json(nlohmann::json::parse(body));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError("config header in " + path + " is not JSON: " + e.what());
  }
}

void write_table(std::ostream& os, const RunConfig& cfg, const Table& table) {
  if (cfg.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
      nlohmann::json row = nlohmann::json::array();
      for (double v : r) {
        if (std::isfinite(v)) {
          row.push_back(v);
        } else {
          row.push_back(nullptr);
        }
      }
      rows.push_back(std::move(row));
    }
    nlohmann::json doc{{"command", cfg.command}, {"config", to_json(cfg)},
                       {"columns", table.columns}, {"rows", rows}, {"summary", table.summary}};
    if (!table.extra.empty()) doc["extra"] = table.extra;
    os << doc.dump(2) << '\n';
    return;
  }
  os << "# wqbm " << cfg.command << '\n';
  os << kConfigTag << to_json(cfg).dump() << '\n';
  for (const auto& [key, value] : table.summary.items()) {
    os << "# " << key << ": " << value.dump() << '\n';
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << '\n';
  os << std::setprecision(17);
  for (const auto& r : table.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

Table cmd_propagator(const RunConfig& cfg) {
  const Physics ph = physics(cfg);
  const std::vector<double> ts = cfg.times();
  const double window = default_caustic_window(ph.params);
  std::vector<double> bad;
  for (double t : ts) {
    if (t <= 0.0 || near_caustic(ph.green, t, window)) bad.push_back(t);
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os.precision(17);
    os << "time grid meets zeros of G+ at t =";
    for (double t : bad) os << ' ' << t;
    throw CausticError(os.str(), bad);
  }
  const auto covs = covariances(ph, ts);
  Table table;
  table.columns = {"t",       "a",       "b",       "c",       "Lambda",  "Sigma11", "Sigma12",
                   "Sigma22", "kcov_pp", "kcov_pq", "kcov_qq", "center_p", "center_q"};
  const Vector2 rp{cfg.p0, cfg.q0};
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const CovarianceData& c = covs[k];
    const Vector2 center = classical_map(ts[k], ph.params, ph.green) * rp;
    const Matrix2& s = *c.sigma;
    table.rows.push_back({ts[k], c.abc->a, c.abc->b, c.abc->c, *c.lambda, s(0, 0), s(0, 1),
                          s(1, 1), c.kernel_cov(0, 0), c.kernel_cov(0, 1), c.kernel_cov(1, 1),
                          center(0), center(1)});
  }
  return table;
}

Table cmd_trajectories(const RunConfig& cfg) {
  if (drude(cfg)) {
    throw ParameterError("stationary pairs are defined for strict Ohmic damping (--kernel high-t)");
  }
  const Physics ph = physics(cfg);
  const TrajectoryPair pair =
      stationary_pair(cfg.qp, cfg.qtp, cfg.qpp, cfg.qtpp, cfg.t1, ph.params, ph.green);
  Table table;
  table.columns = {"s",      "q_plus", "p_plus",    "q_minus",   "p_minus",
                   "q_sum",  "p_sum",  "invariant", "separation"};
  const std::size_t n = std::max<std::size_t>(cfg.nt, 2);
  for (std::size_t k = 0; k < n; ++k) {
    const double s =
        k + 1 == n ? cfg.t1 : cfg.t1 * static_cast<double>(k) / static_cast<double>(n - 1);
    const LiftedPoints r = phase_space_lift(pair, s);
    const double sep = std::hypot(r.plus.p - r.minus.p, r.plus.q - r.minus.q);
    table.rows.push_back({s, r.plus.q, r.plus.p, r.minus.q, r.minus.p, r.sum.q, r.sum.p,
                          pair_invariant(pair, s), sep});
  }
  try {
    table.summary["separation_rate"] = separation_rate(pair);
  } catch (const FitWindowError& e) {
    table.summary["separation_rate"] = nullptr;
    table.summary["separation_note"] = e.what();
  }
  return table;
}

Table cmd_oracle(const RunConfig& cfg, bool& failed) {
  if (!drude(cfg)) throw ParameterError("the oracle needs a Drude bath (--kernel drude)");
  const Physics ph = physics(cfg);
  const BathDiscretization bath = discretize_bath(ph.damping, ph.params, cfg.modes);
  const double horizon = 0.5 * bath.recurrence_time();
  const std::vector<double> ts = cfg.times();
  if (ts.back() >= horizon) {
    std::ostringstream os;
    os << "t1 = " << ts.back() << " reaches half the bath recurrence time (" << horizon
       << "); increase --modes or shorten the grid";
    throw ParameterError(os.str());
  }
  const NormalModeFlow flow(bath, ph.params);
  const GaussianWigner system{{cfg.p0, cfg.q0}, initial_cov(cfg)};
  const FullGaussianState initial = factorized_thermal_state(system, bath, ph.params);
  const auto covs = covariances(ph, ts);
  std::vector<GaussianWigner> micro(ts.size());
  parallel_for(ts.size(), [&](std::size_t k) { micro[k] = evolve_reduced(initial, flow, ts[k]); });

  Table table;
  table.columns = {"t",         "mean_err",   "cov_err",    "micro_mean_p", "micro_mean_q",
                   "micro_pp",  "micro_pq",   "micro_qq",   "ana_mean_p",   "ana_mean_q",
                   "ana_pp",    "ana_pq",     "ana_qq",     "symplectic"};
  double worst_mean = 0.0;
  double worst_cov = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const GaussianWigner ana =
        evolve_gaussian(system, covs[k], classical_map(ts[k], ph.params, ph.green));
    const OracleDeviation d = compare_states(micro[k], ana);
    worst_mean = std::max(worst_mean, d.mean);
    worst_cov = std::max(worst_cov, d.cov);
    const GaussianWigner& m = micro[k];
    table.rows.push_back({ts[k], d.mean, d.cov, m.mean.p, m.mean.q, m.cov(0, 0), m.cov(0, 1),
                          m.cov(1, 1), ana.mean.p, ana.mean.q, ana.cov(0, 0), ana.cov(0, 1),
                          ana.cov(1, 1), symplectic_eigenvalue(m.cov)});
  }
  table.summary["max_mean_error"] = worst_mean;
  table.summary["max_cov_error"] = worst_cov;
  table.summary["recurrence_time"] = bath.recurrence_time();
  failed = std::max(worst_mean, worst_cov) >= cfg.threshold;
  table.summary["passed"] = !failed;
  return table;
}

Table cmd_evolve(const RunConfig& cfg) {
  const Physics ph = physics(cfg);
  const std::vector<double> ts = cfg.times();
  const auto covs = covariances(ph, ts);
  Table table;
  if (cfg.grid_file.empty()) {
    table.columns = {"t", "mean_p", "mean_q", "cov_pp", "cov_pq", "cov_qq", "det_cov"};
    const GaussianWigner state{{cfg.p0, cfg.q0}, initial_cov(cfg)};
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const GaussianWigner s =
          evolve_gaussian(state, covs[k], classical_map(ts[k], ph.params, ph.green));
      table.rows.push_back({ts[k], s.mean.p, s.mean.q, s.cov(0, 0), s.cov(0, 1), s.cov(1, 1),
                            s.cov.determinant()});
    }
    return table;
  }
  const GridWigner initial = load_grid(cfg.grid_file);
  table.columns = {"t", "mass", "mean_p", "mean_q", "cov_pp", "cov_pq", "cov_qq", "det_cov"};
  nlohmann::json grids = nlohmann::json::array();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const GridWigner g = evolve_grid(initial, covs[k], classical_map(ts[k], ph.params, ph.green));
    const GridMoments m = moments(g);
    table.rows.push_back({ts[k], m.mass, m.mean.p, m.mean.q, m.cov(0, 0), m.cov(0, 1),
                          m.cov(1, 1), m.cov.determinant()});
    if (cfg.emit_grids) grids.push_back(grid_json(g));
  }
  if (cfg.emit_grids) table.extra["grids"] = grids;
  return table;
}

namespace {

void add_common(CLI::App& sub, RunConfig& c, std::string& out_path) {
  sub.add_option("--mass", c.mass, "oscillator mass")->capture_default_str();
  sub.add_option("--omega0", c.omega0, "oscillator frequency")->capture_default_str();
  sub.add_option("--hbar", c.hbar, "Planck constant")->capture_default_str();
  sub.add_option("--beta", c.beta, "inverse temperature")->capture_default_str();
  sub.add_option("--gamma", c.gamma, "damping rate")->capture_default_str();
  sub.add_option("--kernel", c.kernel, "noise kernel")
      ->check(CLI::IsMember({"high-t", "drude"}))
      ->capture_default_str();
  sub.add_option("--omega-c", c.omega_c, "Drude cutoff")->capture_default_str();
  sub.add_option("--t0", c.t0, "first time")->capture_default_str();
  sub.add_option("--t1", c.t1, "last time")->capture_default_str();
  sub.add_option("--nt", c.nt, "number of times")->capture_default_str();
  sub.add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub.add_option("--out", out_path, "output file (default stdout)");
  sub.add_option("--threshold", c.threshold, "oracle pass threshold")->capture_default_str();
}

void add_state(CLI::App& sub, RunConfig& c) {
  sub.add_option("--p0", c.p0, "initial momentum")->capture_default_str();
  sub.add_option("--q0", c.q0, "initial position")->capture_default_str();
  sub.add_option("--var-p", c.var_p, "initial momentum variance")->capture_default_str();
  sub.add_option("--var-q", c.var_q, "initial position variance")->capture_default_str();
  sub.add_option("--cov-pq", c.cov_pq, "initial p-q covariance")->capture_default_str();
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Damped quantum oscillator in phase space: propagating function, stationary "
               "trajectory pairs, microscopic oracle and state evolution"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string out_path;
  std::string replay_path;

  auto* prop = app.add_subcommand("propagator", "kernel covariance, a, b, c and center vs t");
  add_common(*prop, cfg, out_path);
  add_state(*prop, cfg);

  auto* traj = app.add_subcommand("trajectories", "stationary trajectory pair on [0, t1]");
  add_common(*traj, cfg, out_path);
  traj->add_option("--qp", cfg.qp, "q at s = 0")->capture_default_str();
  traj->add_option("--qtp", cfg.qtp, "difference coordinate at s = 0")->capture_default_str();
  traj->add_option("--qpp", cfg.qpp, "q at s = t1")->capture_default_str();
  traj->add_option("--qtpp", cfg.qtpp, "difference coordinate at s = t1")->capture_default_str();

  auto* orc = app.add_subcommand("oracle", "compare with an explicit finite bath");
  add_common(*orc, cfg, out_path);
  add_state(*orc, cfg);
  orc->add_option("--modes", cfg.modes, "bath oscillators")->capture_default_str();

  auto* evo = app.add_subcommand("evolve", "propagate a Gaussian or gridded Wigner function");
  add_common(*evo, cfg, out_path);
  add_state(*evo, cfg);
  evo->add_option("--grid-file", cfg.grid_file, "JSON grid {p0,dp,np,q0,dq,nq,values}");
  evo->add_flag("--emit-grids", cfg.emit_grids, "include evolved grids in JSON output");

  auto* rep = app.add_subcommand("replay", "rerun the config echoed in an earlier output");
  rep->add_option("file", replay_path, "CSV or JSON output, or a config file")->required();
  rep->add_option("--out", out_path, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (rep->parsed()) {
      cfg = load_config(replay_path);
    } else {
      cfg.command = app.get_subcommands().front()->get_name();
    }
    cfg.validate();
    if (cfg.damping().low_cutoff(cfg.params()) && drude(cfg)) {
      err << "warning: omega_c below 10 omega0; the cutoff distorts the low-frequency bath\n";
    }
    Table table;
    bool oracle_failed = false;
    if (cfg.command == "propagator") {
      table = cmd_propagator(cfg);
    } else if (cfg.command == "trajectories") {
      table = cmd_trajectories(cfg);
    } else if (cfg.command == "oracle") {
      table = cmd_oracle(cfg, oracle_failed);
    } else if (cfg.command == "evolve") {
      table = cmd_evolve(cfg);
    } else {
      throw ParameterError("unknown command '" + cfg.command + "' in config");
    }
    if (out_path.empty()) {
      write_table(out, cfg, table);
    } else {
      std::ofstream file(out_path);
      if (!file) throw ParameterError("cannot write " + out_path);
      write_table(file, cfg, table);
    }
    if (oracle_failed) {
      err << "oracle deviation " << json_number(table.summary["max_cov_error"])
          << " (covariance), " << json_number(table.summary["max_mean_error"])
          << " (mean) reaches threshold " << cfg.threshold << '\n';
      return kOracle;
    }
    return kOk;
  } catch (const CausticError& e) {
    err << "caustic: " << e.what() << '\n';
    return kCaustic;
  } catch (const UnderresolvedKernelError& e) {
    err << "resolution: " << e.what() << '\n';
    return kResolution;
  } catch (const ParameterError& e) {
    err << "config: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace wqbm::cli
