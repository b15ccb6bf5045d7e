#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "declab/constants.hpp"
#include "declab/sequence_io.hpp"

namespace declab {

const char* version();

// Everything a run depends on. `workers`, `out` and `format` only affect how
// the run is executed and stored, so they are left out of the config hash.
struct ExperimentConfig {
  std::string command = "verify";
  std::string space = "l2:2";
  std::vector<std::string> spaces;  // verify rotates through these; atlas sweeps them
  std::vector<double> p = {2.0};
  std::optional<double> q;
  std::string suite;   // empty: levy for verify, experiment for bdg
  std::string family;  // empty: paley-walsh-multipliers, or deterministic for bdg
  std::string formula = "thm41-dq";
  std::string direction = "decouple-upper";
  std::string method = "exact";
  int depth = 4;
  std::size_t trials = 100;
  std::size_t samples = 100'000;
  std::size_t restarts = 4;
  std::size_t budget = 200;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::string out;
  std::string format = "json";
  double Dp = 1.0;
  double D_R = 1.0;
  double A = 1.0;
  std::optional<double> b;
  double delta = 0.2;
  std::size_t d = 2;
  std::string khintchine = "orthogonality";
  std::size_t h_dim = 4;
  std::size_t rank = 4;
  double horizon = 1.0;
  std::size_t steps = 64;
  std::size_t intervals = 8;
  std::size_t paths = 10'000;
  std::size_t gamma_inner = 1024;
};

Json config_to_json(const ExperimentConfig& config);
// Unknown keys and wrongly typed values are config errors (ErrorCode::parse).
ExperimentConfig config_from_json(const Json& j);
std::string config_hash(const ExperimentConfig& config);

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 exact-mode violation, 2 config error
  std::string output;  // JSON document or CSV text
  std::vector<std::string> warnings;
  std::string error;
};

RunResult run(const ExperimentConfig& config);
// Parses the JSON config, applies `command`, and runs; parse failures give exit 2.
RunResult run_json(const std::string& command, const std::string& config_json);

// One CSV row per (space, p) cell with a stable column order. A repeated cell
// keeps its first position and the values of its last occurrence.
std::string emit_plot_data(const std::vector<ConstantEstimate>& estimates, std::vector<std::string>& warnings);

}  // namespace declab
