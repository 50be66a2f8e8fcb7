#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wqbm/model.hpp"

namespace wqbm::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kCaustic = 3,
  kOracle = 4,
  kResolution = 5,
};

/// Everything a run depends on. Serialized into every output header so that
/// a run can be replayed from its own output.
struct RunConfig {
  std::string command;
  double mass = 1.0;
  double omega0 = 1.0;
  double hbar = 1.0;
  double beta = 0.2;
  double gamma = 0.3;
  std::string kernel = "high-t";  ///< "high-t" (strict Ohmic, delta noise) or "drude"
  double omega_c = 50.0;
  double t0 = 0.5;
  double t1 = 10.0;
  std::size_t nt = 20;
  std::string format = "csv";
  double threshold = 0.01;

  // Initial point / Gaussian state (p, q ordering).
  double p0 = 0.0;
  double q0 = 1.0;
  double var_p = 0.5;
  double var_q = 0.5;
  double cov_pq = 0.0;

  // Stationary-pair boundary data; the pair spans [0, t1].
  double qp = 1.0;
  double qtp = 0.2;
  double qpp = 0.5;
  double qtpp = 0.4;

  std::size_t modes = 300;
  std::string grid_file;  ///< evolve: initial grid instead of a Gaussian
  bool emit_grids = false;

  /// Throws ParameterError with the offending field.
  void validate() const;
  SystemParams params() const;
  DampingSpec damping() const;
  std::vector<double> times() const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

/// Reads a config from a JSON file or from the "# config: " header line of a
/// previous CSV output.
RunConfig load_config(const std::string& path);

/// Column table with provenance, written as CSV or JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json extra = nlohmann::json::object();
};

void write_table(std::ostream& os, const RunConfig& cfg, const Table& table);

Table cmd_propagator(const RunConfig& cfg);
Table cmd_trajectories(const RunConfig& cfg);
/// Sets `failed` when the largest deviation reaches cfg.threshold.
Table cmd_oracle(const RunConfig& cfg, bool& failed);
Table cmd_evolve(const RunConfig& cfg);

/// Full command line entry; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace wqbm::cli
