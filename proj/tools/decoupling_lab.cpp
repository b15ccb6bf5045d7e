// decoupling-lab: command-line front end. Everything goes through the C API;
// this file only turns flags into a JSON config and writes the output.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "declab/declab.h"

namespace {

using Json = nlohmann::ordered_json;

struct Flags {
  std::string config_file;
  std::optional<std::string> space, suite, family, formula, direction, method, out, format, khintchine;
  std::vector<std::string> spaces;
  std::vector<double> p;
  std::optional<double> q, Dp, D_R, A, b, delta, horizon;
  std::optional<int> depth;
  std::optional<std::size_t> trials, samples, restarts, budget, d, h_dim, rank, steps, intervals, paths, gamma_inner;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_file, "JSON config file; flags override its fields");
  cmd->add_option("--space", f.space, "space descriptor: l2:d, linf:d, lp:q:d, nested:q1xn1,...");
  cmd->add_option("--spaces", f.spaces, "several spaces (verify rotates, atlas sweeps)");
  cmd->add_option("--p", f.p, "moment exponent(s)");
  cmd->add_option("--q", f.q, "second exponent");
  cmd->add_option("--depth", f.depth, "filtration depth");
  cmd->add_option("--trials", f.trials, "randomized models per suite");
  cmd->add_option("--samples", f.samples, "Monte Carlo samples");
  cmd->add_option("--restarts", f.restarts, "search restarts");
  cmd->add_option("--budget", f.budget, "search proposals per restart");
  cmd->add_option("--seed", f.seed, "seed (falls back to DECOUPLING_LAB_SEED)");
  cmd->add_option("--workers", f.workers, "worker threads (0 = all cores)");
  cmd->add_option("--out", f.out, "output file (default stdout)");
  cmd->add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--suite", f.suite, "verify suite, or experiment/core/type2 for bdg");
  cmd->add_option("--family", f.family, "search family or step-process family");
  cmd->add_option("--formula", f.formula, "bounds formula");
  cmd->add_option("--direction", f.direction, "ratio direction");
  cmd->add_option("--method", f.method, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
  cmd->add_option("--Dp", f.Dp, "decoupling constant D_p for the closed forms");
  cmd->add_option("--D-R", f.D_R, "placeholder value of D_R");
  cmd->add_option("--A", f.A, "extrapolation parameter A");
  cmd->add_option("--b", f.b, "extrapolation parameter b");
  cmd->add_option("--delta", f.delta, "good-lambda delta");
  cmd->add_option("--d", f.d, "dimension for the l_inf formulas");
  cmd->add_option("--khintchine", f.khintchine, "K_{p,2} policy: orthogonality, unit, fixed:<v>");
  cmd->add_option("--h-dim", f.h_dim, "Brownian H dimension");
  cmd->add_option("--rank", f.rank, "step-process rank");
  cmd->add_option("--horizon", f.horizon, "time horizon T");
  cmd->add_option("--steps", f.steps, "driver grid steps");
  cmd->add_option("--intervals", f.intervals, "step-process intervals (also n for the core check)");
  cmd->add_option("--paths", f.paths, "simulated paths");
  cmd->add_option("--gamma-inner", f.gamma_inner, "inner Gaussian samples for gamma norms");
}

template <class T>
void put(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

Json build_config(const Flags& f) {
  Json j = Json::object();
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw std::runtime_error("cannot open config file " + f.config_file);
    j = Json::parse(in);
  }
  put(j, "space", f.space);
  if (!f.spaces.empty()) j["spaces"] = f.spaces;
  if (!f.p.empty()) j["p"] = f.p;
  put(j, "q", f.q);
  put(j, "depth", f.depth);
  put(j, "trials", f.trials);
  put(j, "samples", f.samples);
  put(j, "restarts", f.restarts);
  put(j, "budget", f.budget);
  put(j, "workers", f.workers);
  put(j, "out", f.out);
  put(j, "format", f.format);
  put(j, "suite", f.suite);
  put(j, "family", f.family);
  put(j, "formula", f.formula);
  put(j, "direction", f.direction);
  put(j, "method", f.method);
  put(j, "Dp", f.Dp);
  put(j, "D_R", f.D_R);
  put(j, "A", f.A);
  put(j, "b", f.b);
  put(j, "delta", f.delta);
  put(j, "d", f.d);
  put(j, "khintchine", f.khintchine);
  put(j, "h_dim", f.h_dim);
  put(j, "rank", f.rank);
  put(j, "horizon", f.horizon);
  put(j, "steps", f.steps);
  put(j, "intervals", f.intervals);
  put(j, "paths", f.paths);
  put(j, "gamma_inner", f.gamma_inner);
  if (f.seed) {
    j["seed"] = *f.seed;
  } else if (!j.contains("seed")) {
    if (const char* env = std::getenv("DECOUPLING_LAB_SEED")) j["seed"] = std::stoull(env);
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification lab for vector-valued martingale decoupling"};
  app.set_version_flag("--version", std::string(declab_version()));
  app.require_subcommand(1);
  Flags flags;
  std::string command;
  const std::pair<const char*, const char*> commands[] = {
      {"verify", "check inequalities on randomized models"},
      {"estimate", "search for worst-case decoupling ratios"},
      {"bounds", "evaluate closed-form constants"},
      {"bdg", "stochastic integral moment experiments"},
      {"atlas", "ratio estimates over a grid of spaces and exponents"},
  };
  for (const auto& [name, description] : commands) {
    auto* cmd = app.add_subcommand(name, description);
    add_flags(cmd, flags);
    cmd->callback([&command, name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string config;
  try {
    config = build_config(flags).dump();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  char* report = nullptr;
  int exit_code = 2;
  if (declab_run(command.c_str(), config.c_str(), &report, &exit_code) != DECLAB_OK) {
    std::cerr << "error: " << declab_last_error() << "\n";
    declab_string_free(report);
    return 2;
  }
  const std::string warnings = declab_last_warnings();
  if (!warnings.empty()) std::cerr << "warning: " << warnings;
  if (exit_code == 2) {
    std::cerr << "error: " << declab_last_error() << "\n";
    declab_string_free(report);
    return 2;
  }
  const std::string text = report ? report : "";
  declab_string_free(report);
  if (flags.out && !flags.out->empty()) {
    std::ofstream out(*flags.out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << *flags.out << "\n";
      return 2;
    }
    out << text;
  } else {
    std::cout << text;
  }
  return exit_code;
}
