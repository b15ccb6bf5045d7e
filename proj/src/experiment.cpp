#include "declab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "declab/bounds.hpp"
#include "declab/error.hpp"
#include "declab/inequalities.hpp"
#include "declab/parallel.hpp"
#include "declab/rng.hpp"
#include "declab/stochint.hpp"

#ifndef DECLAB_VERSION_STRING
#define DECLAB_VERSION_STRING "0.0.0"
#endif

namespace declab {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> suites = {
      "tangency", "levy", "contraction", "symsum", "revkol", "tail", "davis", "bmo",
      "goodlambda", "extrapolation", "condsym", "pest", "reverse-triangle"};
  return suites;
}

std::string resolved_suite(const ExperimentConfig& c) {
  if (!c.suite.empty()) return c.suite;
  return c.command == "bdg" ? "experiment" : "levy";
}

std::string resolved_family(const ExperimentConfig& c) {
  if (!c.family.empty()) return c.family;
  return c.command == "bdg" ? "deterministic" : "paley-walsh-multipliers";
}

std::vector<std::string> space_list(const ExperimentConfig& c) {
  return c.spaces.empty() ? std::vector<std::string>{c.space} : c.spaces;
}

// ---------------------------------------------------------------- verify

struct Trial {
  std::size_t index;
  std::string space;
  double p;
  CounterRng rng;
};

struct Model {
  std::shared_ptr<const AdaptedSequence> seq;
  TangentPair pair;
  double f_max = 0.0;
  double d_max = 0.0;
  std::string hash;
};

Model make_model(Trial& trial, int max_depth, bool symmetric) {
  RandomModelOptions options;
  options.max_depth = max_depth;
  options.symmetric = symmetric;
  options.space = trial.space;
  const auto spec = random_model(options, trial.rng);
  auto seq = std::make_shared<const AdaptedSequence>(AdaptedSequence::build(spec));
  Model m{seq, TangentPair(seq), 0.0, 0.0, hex64(fnv1a(spec_to_string(spec)))};
  const auto stars = running_max(*seq);
  const auto N = static_cast<std::size_t>(seq->depth());
  for (double v : stars.f_star[N]) m.f_max = std::max(m.f_max, v);
  for (double v : stars.d_star[N]) m.d_max = std::max(m.d_max, v);
  return m;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

std::vector<double> moment_orders(const ExperimentConfig& c) {
  if (c.q) return {*c.q};
  return {1.0, 2.0, 3.0};
}

std::vector<IneqReport> run_trial(const std::string& suite, const ExperimentConfig& c, Trial& trial) {
  std::vector<IneqReport> out;
  const int depth = std::max(1, c.depth);
  if (suite == "tangency") {
    auto m = make_model(trial, depth, trial.rng.below(2) == 0);
    const double tol = m.seq->tree().tolerance();
    const auto rep = verify_tangency(m.pair, tol);
    IneqReport r;
    r.id = "tangency";
    r.lhs = std::max(rep.max_law_gap, rep.max_factorization_gap);
    r.rhs = tol;
    r.margin = r.rhs - r.lhs;
    r.holds = rep.tangent && rep.conditionally_independent;
    r.status = r.holds ? ReportStatus::holds : ReportStatus::violated;
    r.checks = 1;
    r.violations = r.holds ? 0 : 1;
    r.params = {{"tangent", rep.tangent}, {"conditionally_independent", rep.conditionally_independent},
                {"outcomes", rep.outcomes}, {"tolerance", tol}};
    out.push_back(r);
  } else if (suite == "levy") {
    auto m = make_model(trial, depth, true);
    const double t = 1.2 * m.f_max * trial.rng.uniform();
    out.push_back(check_levy(m.pair, t, LevyMode::max_of_sums));
    out.push_back(check_levy(m.pair, t, LevyMode::max_of_terms));
  } else if (suite == "contraction") {
    auto m = make_model(trial, depth, true);
    std::vector<int> v(static_cast<std::size_t>(m.seq->depth()));
    for (int& x : v) x = static_cast<int>(trial.rng.below(2));
    const double t = 1.2 * m.f_max * trial.rng.uniform();
    out.push_back(check_contraction(m.pair, v, t));
  } else if (suite == "symsum") {
    const auto space = SpaceDescriptor::parse(trial.space);
    const std::size_t dim = space.dim();
    DiscreteLaw xi(dim), zeta(dim);
    Vec a(dim), b(dim), y(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      a[i] = trial.rng.normal();
      b[i] = trial.rng.normal();
      y[i] = trial.rng.normal();
    }
    const double w = 0.1 + 0.8 * trial.rng.uniform();
    xi.add(a, w);
    xi.add(b, 1.0 - w);
    const double z = 0.5 * trial.rng.uniform();
    zeta.add(y, z);
    zeta.add(-y, z);
    zeta.add(Vec(dim), 1.0 - 2.0 * z);
    out.push_back(check_symsum(xi, zeta, space, trial.p));
  } else if (suite == "revkol") {
    auto m = make_model(trial, depth, true);
    const double t = m.f_max * trial.rng.uniform();
    out.push_back(check_reverse_kolmogorov(m.pair, t, trial.p));
  } else if (suite == "tail") {
    auto m = make_model(trial, depth, trial.rng.below(2) == 0);
    const auto grid = linspace(0.0, 1.1 * m.d_max, 8);
    const double leaves = static_cast<double>(m.seq->tree().leaf_count());
    if (c.method == "mc" || leaves * leaves > static_cast<double>(kEnumerationCap)) {
      out.push_back(check_tail_comparison_mc(m.pair, grid, c.samples, c.seed + trial.index, 1));
    } else {
      out.push_back(check_tail_comparison(m.pair, grid));
    }
  } else if (suite == "davis") {
    auto m = make_model(trial, depth, trial.rng.below(2) == 0);
    out.push_back(check_davis(m.pair));
  } else if (suite == "bmo") {
    auto m = make_model(trial, depth, true);
    const double A = 5.0 * trial.rng.uniform();
    const auto bmo = bmo_condition(m.pair, trial.p, A);
    IneqReport r;
    r.id = "bmo.chebyshev";
    r.lhs = bmo.b_hat;
    r.rhs = bmo.chebyshev;
    r.margin = r.rhs - r.lhs;
    r.holds = bmo.chain_holds;
    r.status = r.holds ? ReportStatus::holds : ReportStatus::violated;
    r.checks = 1;
    r.violations = r.holds ? 0 : 1;
    r.params = {{"p", trial.p}, {"A", A}, {"b_hat", bmo.b_hat}, {"d_hat", bmo.d_hat},
                {"worst_window", {bmo.worst_k, bmo.worst_l}}, {"worst_atom", bmo.worst_atom}};
    out.push_back(r);
  } else if (suite == "goodlambda") {
    auto m = make_model(trial, depth, true);
    const double A = 0.5 + 3.5 * trial.rng.uniform();
    const double b_hat = bmo_condition(m.pair, trial.p, A).b_hat;
    const double b = b_hat < 1.0 ? 0.5 * (1.0 + b_hat) : 1.0 - 1e-9;
    const auto lambdas = linspace(m.f_max / 20.0, m.f_max, 20);
    auto rep = check_goodlambda(m.pair, trial.p, A, b, c.delta, lambdas);
    out.push_back(rep.displayed);
    out.push_back(rep.proof_variant);
  } else if (suite == "extrapolation") {
    auto m = make_model(trial, depth, true);
    for (double q : moment_orders(c)) {
      out.push_back(check_extrapolation(m.pair, trial.p, MomentFunctional::power(q), c.b));
    }
  } else if (suite == "condsym") {
    // the symmetrized model doubles every alphabet, so keep the tree small
    auto m = make_model(trial, std::min(depth, 4), false);
    const TangentPair sym(std::make_shared<const AdaptedSequence>(symmetrize(*m.seq)));
    for (double q : moment_orders(c)) {
      const auto phi = MomentFunctional::power(q);
      const double den = moment_phi(sym, phi, Statistic::g_norm);
      const double C = den > 0.0 ? moment_phi(sym, phi, Statistic::f_norm) / den : 0.0;
      out.push_back(check_condsym(m.pair, phi, C));
    }
  } else if (suite == "reverse-triangle") {
    out.push_back(check_reverse_triangle(SpaceDescriptor::parse(trial.space), 1000, c.seed + trial.index));
  } else {
    throw Error(ErrorCode::parse, "unknown verify suite '" + suite + "'");
  }
  return out;
}

Json report_row(const IneqReport& r, std::size_t trial, const std::string& space) {
  Json j = report_to_json(r);
  Json row;
  row["trial"] = trial;
  row["space"] = space;
  for (auto it = j.begin(); it != j.end(); ++it) row[it.key()] = it.value();
  return row;
}

struct Tally {
  std::uint64_t reports = 0, checks = 0, violations = 0, exact_violations = 0, not_applicable = 0, vacuous = 0;
  void add(const IneqReport& r) {
    ++reports;
    checks += r.checks;
    violations += r.violations;
    if (r.status == ReportStatus::violated && r.method == Method::exact) ++exact_violations;
    if (r.status == ReportStatus::not_applicable) ++not_applicable;
    if (r.status == ReportStatus::vacuous) ++vacuous;
  }
  Json to_json() const {
    return {{"reports", reports}, {"checks", checks}, {"violations", violations},
            {"exact_violations", exact_violations}, {"not_applicable", not_applicable}, {"vacuous", vacuous}};
  }
};

Json run_verify(const ExperimentConfig& c, int& exit_code, std::string& csv) {
  const std::string suite = resolved_suite(c);
  std::vector<std::string> suites;
  if (suite == "all") {
    suites = verify_suites();
  } else {
    require(std::find(verify_suites().begin(), verify_suites().end(), suite) != verify_suites().end(),
            "unknown verify suite '" + suite + "'", ErrorCode::parse);
    suites = {suite};
  }
  const auto spaces = space_list(c);
  for (const auto& s : spaces) SpaceDescriptor::parse(s);
  Json results = Json::array();
  Tally total;
  csv = "suite,trial,space,id,lhs,rhs,margin,holds,status,method\n";
  for (std::size_t si = 0; si < suites.size(); ++si) {
    const auto& name = suites[si];
    Tally tally;
    Json rows = Json::array();
    if (name == "pest") {
      const auto r = check_pest(c.samples, c.seed);
      tally.add(r);
      rows.push_back(report_row(r, 0, ""));
      csv += name + ",0,," + r.id + "," + fmt(r.lhs) + "," + fmt(r.rhs) + "," + fmt(r.margin) + "," +
             (r.holds ? "true" : "false") + "," + to_string(r.status) + "," + to_string(r.method) + "\n";
    } else {
      std::vector<std::vector<IneqReport>> per_trial(c.trials);
      std::vector<std::string> trial_space(c.trials);
      parallel_for(c.trials, c.workers, [&](std::size_t i) {
        // suite index in the stream keeps "all" runs independent across suites
        Trial trial{i, spaces[i % spaces.size()], c.p[i % c.p.size()],
                    CounterRng(c.seed, (static_cast<std::uint64_t>(si) << 32) | i, Substream::model)};
        trial_space[i] = trial.space;
        per_trial[i] = run_trial(name, c, trial);
      });
      for (std::size_t i = 0; i < c.trials; ++i) {
        for (auto& r : per_trial[i]) {
          r.params["p_trial"] = c.p[i % c.p.size()];
          tally.add(r);
          rows.push_back(report_row(r, i, trial_space[i]));
          csv += name + "," + std::to_string(i) + "," + trial_space[i] + "," + r.id + "," + fmt(r.lhs) + "," +
                 fmt(r.rhs) + "," + fmt(r.margin) + "," + (r.holds ? "true" : "false") + "," +
                 to_string(r.status) + "," + to_string(r.method) + "\n";
        }
      }
    }
    total.reports += tally.reports;
    total.checks += tally.checks;
    total.violations += tally.violations;
    total.exact_violations += tally.exact_violations;
    total.not_applicable += tally.not_applicable;
    total.vacuous += tally.vacuous;
    results.push_back({{"suite", name}, {"summary", tally.to_json()}, {"reports", rows}});
  }
  if (total.exact_violations > 0) exit_code = 1;
  return {{"suites", results}, {"summary", total.to_json()}};
}

// ---------------------------------------------------------------- estimate / atlas

SearchOptions search_options(const ExperimentConfig& c, const std::string& space, double p) {
  SearchOptions o;
  o.space = space;
  o.p = p;
  o.direction = direction_from_string(c.direction);
  o.family = search_family_from_string(resolved_family(c));
  o.depth = c.depth;
  o.budget = c.budget;
  o.restarts = c.restarts;
  o.seed = c.seed;
  o.samples = c.samples;
  o.workers = c.workers;
  return o;
}

// ---------------------------------------------------------------- bounds

Json run_bounds(const ExperimentConfig& c) {
  const double p = c.p.front();
  const double q = c.q.value_or(p);
  Json inputs;
  Json result;
  std::string note;
  const std::string& f = c.formula;
  if (f == "prop32-c") {
    const double r = SpaceDescriptor::parse(c.space).r();
    const double b = c.b.value_or(0.5 * prop32_b_limit(p, r));
    inputs = {{"p", p}, {"q", q}, {"r", r}, {"rho", std::min(r, p)}, {"A", c.A}, {"b", b},
              {"b_limit", prop32_b_limit(p, r)}};
    result = symbolic_to_json(bound_prop32_C(p, q, r, c.A, b));
  } else if (f == "thm41-k") {
    inputs = {{"p", p}, {"q", q}, {"Dp", c.Dp}};
    result = symbolic_to_json(bound_thm41_K(p, q, c.Dp));
  } else if (f == "thm41-dq") {
    inputs = {{"p", p}, {"q", q}, {"Dp", c.Dp}};
    result = symbolic_to_json(bound_thm41_Dq(p, q, c.Dp));
  } else if (f == "hilbert-phi") {
    inputs = {{"q", q}, {"D_R", c.D_R}};
    result = symbolic_to_json(bound_hilbert_phi(q, c.D_R));
    note = kDRPlaceholderNote;
  } else if (f == "linf-upper") {
    inputs = {{"d", c.d}, {"p", p}, {"D_R", c.D_R}};
    const auto v = bound_linf_upper(c.d, p, c.D_R);
    result = v ? symbolic_to_json(*v) : Json(nullptr);
    inputs["kernel_holds"] = linf_kernel(c.d, p);
    inputs["applicable"] = v.has_value();
    note = kDRPlaceholderNote;
  } else if (f == "garling-lower") {
    const auto policy = KhintchinePolicy::parse(c.khintchine);
    inputs = {{"d", c.d}, {"p", p}, {"khintchine_policy", policy.to_string()},
              {"K_p2", khintchine_constant(policy, p)}};
    result = symbolic_to_json(bound_garling_lower(c.d, p, policy));
  } else if (f == "lu") {
    const auto lu = lu_constants(p);
    inputs = {{"p", p}};
    result = {{"l", lu.l}, {"u", lu.u}};
  } else if (f == "goodlambda-beta") {
    const double rho = std::min(SpaceDescriptor::parse(c.space).r(), p);
    inputs = {{"A", c.A}, {"delta", c.delta}, {"rho", rho}};
    result = {{"beta", goodlambda_beta(c.A, c.delta, rho)}};
  } else {
    throw Error(ErrorCode::parse, "unknown formula '" + f +
                                      "' (prop32-c, thm41-k, thm41-dq, hilbert-phi, linf-upper, garling-lower, lu, "
                                      "goodlambda-beta)");
  }
  Json out = {{"formula", f}, {"inputs", inputs}, {"result", result}};
  if (!note.empty()) out["note"] = note;
  return out;
}

// ---------------------------------------------------------------- bdg

BdgConfig bdg_config(const ExperimentConfig& c) {
  BdgConfig b;
  b.space = c.space;
  b.ps = c.p;
  b.family = resolved_family(c);
  b.h_dim = c.h_dim;
  b.rank = c.rank;
  b.horizon = c.horizon;
  b.steps = c.steps;
  b.intervals = c.intervals;
  b.paths = c.paths;
  b.gamma_inner = c.gamma_inner;
  b.seed = c.seed;
  b.workers = c.workers;
  return b;
}

Json run_bdg(const ExperimentConfig& c) {
  const std::string suite = resolved_suite(c);
  const auto b = bdg_config(c);
  if (suite == "experiment") return bdg_to_json(b, bdg_experiment(b));
  Json rows = Json::array();
  if (suite == "core") {
    const auto space = SpaceDescriptor::parse(c.space);
    for (double p : c.p) {
      rows.push_back(report_to_json(bdg_core_check(space, p, b.family, c.intervals, c.paths, c.seed, c.workers)));
    }
  } else if (suite == "type2") {
    for (double p : c.p) rows.push_back(report_to_json(type2_embedding_check(b, p)));
  } else {
    throw Error(ErrorCode::parse, "unknown bdg suite '" + suite + "' (experiment, core, type2)");
  }
  return {{"reports", rows}};
}

// ---------------------------------------------------------------- config JSON

template <class T>
T get_field(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::parse, std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

const char* version() { return DECLAB_VERSION_STRING; }

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["command"] = c.command;
  j["space"] = c.space;
  j["spaces"] = c.spaces;
  j["p"] = c.p;
  j["q"] = c.q ? Json(*c.q) : Json(nullptr);
  j["suite"] = c.suite;
  j["family"] = c.family;
  j["formula"] = c.formula;
  j["direction"] = c.direction;
  j["method"] = c.method;
  j["depth"] = c.depth;
  j["trials"] = c.trials;
  j["samples"] = c.samples;
  j["restarts"] = c.restarts;
  j["budget"] = c.budget;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["out"] = c.out;
  j["format"] = c.format;
  j["Dp"] = c.Dp;
  j["D_R"] = c.D_R;
  j["A"] = c.A;
  j["b"] = c.b ? Json(*c.b) : Json(nullptr);
  j["delta"] = c.delta;
  j["d"] = c.d;
  j["khintchine"] = c.khintchine;
  j["h_dim"] = c.h_dim;
  j["rank"] = c.rank;
  j["horizon"] = c.horizon;
  j["steps"] = c.steps;
  j["intervals"] = c.intervals;
  j["paths"] = c.paths;
  j["gamma_inner"] = c.gamma_inner;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  require(j.is_object(), "config must be a JSON object", ErrorCode::parse);
  static const std::set<std::string> known = {
      "command", "space", "spaces", "p", "q", "suite", "family", "formula", "direction", "method", "depth",
      "trials", "samples", "restarts", "budget", "seed", "workers", "out", "format", "Dp", "D_R", "A", "b",
      "delta", "d", "khintchine", "h_dim", "rank", "horizon", "steps", "intervals", "paths", "gamma_inner"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    require(known.count(it.key()) == 1, "unknown config field '" + it.key() + "'", ErrorCode::parse);
  }
  ExperimentConfig c;
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) field = get_field<std::decay_t<decltype(field)>>(j, key);
  };
  opt("command", c.command);
  opt("space", c.space);
  opt("spaces", c.spaces);
  if (j.contains("p")) {
    c.p = j.at("p").is_array() ? get_field<std::vector<double>>(j, "p") : std::vector<double>{get_field<double>(j, "p")};
  }
  if (j.contains("q") && !j.at("q").is_null()) c.q = get_field<double>(j, "q");
  opt("suite", c.suite);
  opt("family", c.family);
  opt("formula", c.formula);
  opt("direction", c.direction);
  opt("method", c.method);
  opt("depth", c.depth);
  opt("trials", c.trials);
  opt("samples", c.samples);
  opt("restarts", c.restarts);
  opt("budget", c.budget);
  opt("seed", c.seed);
  opt("workers", c.workers);
  opt("out", c.out);
  opt("format", c.format);
  opt("Dp", c.Dp);
  opt("D_R", c.D_R);
  opt("A", c.A);
  if (j.contains("b") && !j.at("b").is_null()) c.b = get_field<double>(j, "b");
  opt("delta", c.delta);
  opt("d", c.d);
  opt("khintchine", c.khintchine);
  opt("h_dim", c.h_dim);
  opt("rank", c.rank);
  opt("horizon", c.horizon);
  opt("steps", c.steps);
  opt("intervals", c.intervals);
  opt("paths", c.paths);
  opt("gamma_inner", c.gamma_inner);

  static const std::set<std::string> commands = {"verify", "estimate", "bounds", "bdg", "atlas"};
  require(commands.count(c.command) == 1, "unknown command '" + c.command + "'", ErrorCode::parse);
  require(!c.p.empty(), "at least one p is required", ErrorCode::parse);
  for (double p : c.p) require(std::isfinite(p) && p > 0.0, "p must be positive", ErrorCode::parse);
  require(c.format == "json" || c.format == "csv", "format must be json or csv", ErrorCode::parse);
  require(c.method == "exact" || c.method == "mc", "method must be exact or mc", ErrorCode::parse);
  require(c.depth >= 1 && c.depth <= 24, "depth must lie in [1, 24]", ErrorCode::parse);
  return c;
}

std::string config_hash(const ExperimentConfig& config) {
  Json j = config_to_json(config);
  j.erase("workers");
  j.erase("out");
  j.erase("format");
  return hex64(fnv1a(j.dump()));
}

std::string emit_plot_data(const std::vector<ConstantEstimate>& estimates, std::vector<std::string>& warnings) {
  std::vector<std::pair<std::string, double>> order;
  std::map<std::pair<std::string, double>, const ConstantEstimate*> cells;
  for (const auto& e : estimates) {
    const auto key = std::make_pair(e.space, e.p);
    auto it = cells.find(key);
    if (it == cells.end()) {
      order.push_back(key);
      cells.emplace(key, &e);
    } else {
      warnings.push_back("duplicate cell (" + e.space + ", p=" + fmt(e.p) + "): keeping the last estimate");
      it->second = &e;
    }
  }
  std::string out = estimates_csv_header() + "\n";
  for (const auto& key : order) out += estimate_csv_row(*cells.at(key)) + "\n";
  return out;
}

RunResult run(const ExperimentConfig& config) {
  RunResult result;
  try {
    Json envelope;
    envelope["tool"] = "decoupling-lab";
    envelope["version"] = version();
    envelope["command"] = config.command;
    envelope["config_hash"] = config_hash(config);
    envelope["seed"] = config.seed;
    envelope["method"] = config.method;
    envelope["samples"] = config.samples;
    Json cfg = config_to_json(config);
    cfg.erase("workers");
    cfg.erase("out");
    cfg.erase("format");
    envelope["config"] = cfg;

    std::string csv;
    if (config.command == "verify") {
      envelope["results"] = run_verify(config, result.exit_code, csv);
    } else if (config.command == "estimate") {
      const auto est = search_worst_case(search_options(config, config.space, config.p.front()));
      envelope["method"] = est.method;
      envelope["samples"] = est.samples;
      envelope["results"] = estimate_to_json(est);
      csv = emit_plot_data({est}, result.warnings);
    } else if (config.command == "atlas") {
      std::vector<ConstantEstimate> cells;
      Json rows = Json::array();
      for (const auto& space : space_list(config)) {
        for (double p : config.p) {
          cells.push_back(search_worst_case(search_options(config, space, p)));
          rows.push_back(estimate_to_json(cells.back()));
        }
      }
      csv = emit_plot_data(cells, result.warnings);
      envelope["results"] = rows;
    } else if (config.command == "bounds") {
      envelope["results"] = run_bounds(config);
    } else if (config.command == "bdg") {
      envelope["method"] = "mc";
      envelope["samples"] = config.paths;
      envelope["results"] = run_bdg(config);
    }
    if (!result.warnings.empty()) envelope["warnings"] = result.warnings;
    if (config.format == "csv") {
      require(!csv.empty(), "csv output is available for verify, estimate and atlas", ErrorCode::parse);
      result.output = csv;
    } else {
      result.output = envelope.dump(2) + "\n";
    }
  } catch (const Error& e) {
    result.exit_code = 2;
    result.error = e.what();
    result.output.clear();
  }
  return result;
}

RunResult run_json(const std::string& command, const std::string& config_json) {
  try {
    Json j = config_json.empty() ? Json::object() : Json::parse(config_json);
    if (!command.empty()) {
      require(j.is_object(), "config must be a JSON object", ErrorCode::parse);
      j["command"] = command;
    }
    return run(config_from_json(j));
  } catch (const nlohmann::json::exception& e) {
    RunResult r;
    r.exit_code = 2;
    r.error = std::string("config is not valid JSON: ") + e.what();
    return r;
  } catch (const Error& e) {
    RunResult r;
    r.exit_code = 2;
    r.error = e.what();
    return r;
  }
}

}  // namespace declab
