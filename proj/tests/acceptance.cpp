// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.
// Tolerances are fixed here and nowhere else.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "declab/bounds.hpp"
#include "declab/constants.hpp"
#include "declab/experiment.hpp"
#include "declab/inequalities.hpp"
#include "declab/probmodel.hpp"
#include "declab/rng.hpp"
#include "declab/stochint.hpp"

using namespace declab;

namespace {

constexpr double kExactTol = 1e-12;
constexpr double kHilbertTol = 1e-10;
constexpr double kReplayTol = 1e-9;
constexpr double kItoRelTol = 0.05;
constexpr double kDoobBound = 4.0;
constexpr double kTangencyBudgetSeconds = 60.0;
constexpr double kBdgBudgetSeconds = 120.0;
// Exhaustive depth-3 sign-pattern search at p = 2 (tests/oracles/garling_bruteforce.py):
// best sup-norm ratio sqrt(5)/2 for d = 2, 3 and exactly 1 on Euclidean space.
constexpr double kGarlingBruteForce = 1.118033988749895;
constexpr std::uint64_t kSeed = 20261016;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::shared_ptr<const AdaptedSequence> random_seq(CounterRng& rng, const std::string& space, int max_depth,
                                                  bool symmetric) {
  RandomModelOptions options;
  options.space = space;
  options.max_depth = max_depth;
  options.max_alphabet = 3;
  options.symmetric = symmetric;
  return std::make_shared<const AdaptedSequence>(AdaptedSequence::build(random_model(options, rng)));
}

Outcome tangency() {
  const auto t0 = Clock::now();
  CounterRng rng(kSeed, 1, Substream::model);
  const char* spaces[] = {"lp:0.5:2", "l2:3", "linf:4", "nested:1x2,3x2"};
  int failures = 0;
  double worst_gap = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto seq = random_seq(rng, spaces[i % 4], 5, i % 2 == 0);
    const double tol = std::min(seq->tree().tolerance(), kExactTol);
    const auto rep = verify_tangency(TangentPair(seq), tol);
    worst_gap = std::max({worst_gap, rep.max_law_gap, rep.max_factorization_gap});
    if (!rep.tangent || !rep.conditionally_independent) ++failures;
  }
  const double elapsed = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf, "200 models, %d failures, worst gap %.3g, %.2f s", failures, worst_gap, elapsed);
  return {failures == 0 && elapsed < kTangencyBudgetSeconds, buf};
}

Outcome lemma_suite() {
  std::string detail;
  bool pass = true;
  for (const char* suite : {"levy", "contraction", "symsum", "revkol", "tail"}) {
    Json cfg = {{"suite", suite}, {"spaces", {"lp:0.5:2", "l2:4", "linf:4"}}, {"p", {0.5, 1.0, 2.0, 4.0}},
                {"depth", 4}, {"trials", 100}, {"seed", kSeed}, {"method", "exact"}};
    const auto r = run_json("verify", cfg.dump());
    if (r.exit_code == 2) return {false, std::string(suite) + ": " + r.error};
    const auto summary = Json::parse(r.output).at("results").at("summary");
    const auto exact_violations = summary.at("exact_violations").get<std::uint64_t>();
    const auto violations = summary.at("violations").get<std::uint64_t>();
    pass = pass && r.exit_code == 0 && exact_violations == 0 && violations == 0;
    detail += std::string(detail.empty() ? "" : ", ") + suite + " " + std::to_string(violations) + "/" +
              std::to_string(summary.at("checks").get<std::uint64_t>());
  }
  return {pass, "violations/checks: " + detail};
}

Outcome scalar_constants() {
  const auto rep = check_pest(100000, kSeed);
  // p = 0.5, a = b = 1: (a+b)^p = sqrt2 and l_p^{-1}(a^p + b^p) = 2 / sqrt2.
  const auto lu = lu_constants(0.5);
  const double lhs = std::sqrt(2.0), lower = 2.0 / lu.l;
  const bool equality = std::abs(lhs - lower) <= kExactTol;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%llu triples, %llu violations, lower-branch equality gap %.3g",
                static_cast<unsigned long long>(rep.samples), static_cast<unsigned long long>(rep.violations),
                std::abs(lhs - lower));
  return {rep.violations == 0 && rep.samples == 100000 && equality, buf};
}

Outcome hilbert_identity() {
  CounterRng rng(kSeed, 4, Substream::model);
  double worst = 0.0;
  int counted = 0, skipped = 0;
  while (counted < 50) {
    const auto d = 1 + rng.below(8);
    const auto seq = random_seq(rng, "l2:" + std::to_string(d), 5, true);
    const auto r = ratio(TangentPair(seq), 2.0, Direction::decouple_upper);
    if (!r) {
      ++skipped;  // all-zero model
      continue;
    }
    worst = std::max(worst, std::abs(*r - 1.0));
    ++counted;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "50 models (%d degenerate skipped), max |ratio - 1| = %.3g", skipped, worst);
  return {worst <= kHilbertTol, buf};
}

Outcome extrapolation() {
  CounterRng rng(kSeed, 5, Substream::model);
  int certified = 0, attempts = 0, violations = 0;
  while (certified < 20 && attempts < 400) {
    ++attempts;
    const auto seq = random_seq(rng, attempts % 2 ? "l2:2" : "linf:3", 4, true);
    const TangentPair pair(seq);
    const double p = 1.0 + static_cast<double>(rng.below(3));
    bool applicable = true;
    std::vector<IneqReport> reps;
    for (double q : {1.0, 2.0, 3.0}) {
      reps.push_back(check_extrapolation(pair, p, MomentFunctional::power(q)));
      applicable = applicable && reps.back().status != ReportStatus::not_applicable;
    }
    if (!applicable) continue;
    ++certified;
    for (const auto& r : reps) violations += r.status == ReportStatus::violated ? 1 : 0;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d certified models (%d drawn), q in {1,2,3}, %d violations", certified, attempts,
                violations);
  return {certified == 20 && violations == 0, buf};
}

Outcome davis() {
  CounterRng rng(kSeed, 6, Substream::model);
  const char* spaces[] = {"lp:0.5:2", "l2:4", "linf:4", "nested:0.5x2,2x2"};
  std::uint64_t checks = 0, violations = 0;
  for (int i = 0; i < 200; ++i) {
    const auto rep = check_davis(TangentPair(random_seq(rng, spaces[i % 4], 5, i % 2 == 1)));
    checks += rep.checks;
    violations += rep.violations;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "200 models, %llu pathwise checks, %llu violations",
                static_cast<unsigned long long>(checks), static_cast<unsigned long long>(violations));
  return {violations == 0 && checks > 0, buf};
}

// p >= log2 d decided independently of the library: for p = k/8, d <= 2^p iff d^8 <= 2^k.
bool kernel_reference(std::size_t d, int k) {
  unsigned __int128 d8 = 1;
  for (int i = 0; i < 8; ++i) d8 *= d;
  return d8 <= (static_cast<unsigned __int128>(1) << k);
}

Outcome closed_forms() {
  int dq_failures = 0, kernel_failures = 0, cases = 0;
  for (double p : {1.0, 1.25, 2.0, 3.0, 4.0, 8.0, 16.0}) {
    for (double Dp : {1.0, 1.5, 10.0, 1e3}) {
      if (!(bound_thm41_Dq(p, p, Dp).value() >= Dp)) ++dq_failures;
    }
  }
  for (std::size_t d = 2; d <= 1024; ++d) {
    for (int k = 1; k <= 96; ++k) {
      const double p = k / 8.0;
      const bool expected = kernel_reference(d, k);
      ++cases;
      if (linf_kernel(d, p) != expected || bound_linf_upper(d, p, 1.0).has_value() != expected) ++kernel_failures;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "Dq consistency failures %d; kernel predicate mismatches %d of %d", dq_failures,
                kernel_failures, cases);
  return {dq_failures == 0 && kernel_failures == 0, buf};
}

Outcome garling() {
  SearchOptions o;
  o.p = 2.0;
  o.depth = 3;
  o.family = SearchFamily::garling_linf;
  o.restarts = 8;
  o.budget = 400;
  o.seed = kSeed;
  o.workers = 0;
  o.space = "linf:4";
  const auto sup = search_worst_case(o);
  o.space = "l2:4";
  const auto euclid = search_worst_case(o);
  const double se = std::hypot(sup.standard_error, euclid.standard_error);
  const double margin = sup.ratio - euclid.ratio;
  const double replayed = replay(sup);
  const bool pass = margin > 3.0 * se && margin > 0.0 && sup.ratio >= kGarlingBruteForce - kExactTol &&
                    std::abs(replayed - sup.ratio) <= kReplayTol && sup.method == "exact";
  char buf[200];
  std::snprintf(buf, sizeof buf, "linf:4 %.12g vs l2:4 %.12g (%s, se %.3g), brute-force d=2 %.12g, replay %.12g",
                sup.ratio, euclid.ratio, sup.method.c_str(), se, kGarlingBruteForce, replayed);
  return {pass, buf};
}

Outcome stochastic() {
  const auto t0 = Clock::now();
  BdgConfig c;
  c.space = "l2:4";
  c.family = "deterministic";
  c.ps = {1.0, 2.0, 4.0, 8.0};
  c.steps = 64;
  c.paths = 100000;
  c.seed = kSeed;
  c.workers = 0;
  const auto reports = bdg_experiment(c);
  const double elapsed = seconds_since(t0);
  const BdgReport* two = nullptr;
  bool finite = true;
  std::string kappas;
  for (const auto& r : reports) {
    if (r.p == 2.0) two = &r;
    finite = finite && std::isfinite(r.kappa_over_p) && r.kappa_over_p > 0.0;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%g:%.4g", kappas.empty() ? "" : " ", r.p, r.kappa_over_p);
    kappas += buf;
  }
  const bool ito = std::abs(two->terminal_ratio - 1.0) <= kItoRelTol;
  const bool doob = two->sup_ratio <= kDoobBound * (1.0 + 3.0 * two->sup_ratio_se);
  char buf[240];
  std::snprintf(buf, sizeof buf, "Ito ratio %.4f, Doob sup ratio %.4f (se %.2g), kappa/p {%s}, %.1f s",
                two->terminal_ratio, two->sup_ratio, two->sup_ratio_se, kappas.c_str(), elapsed);
  return {ito && doob && finite && elapsed < kBdgBudgetSeconds, buf};
}

Outcome determinism() {
  const std::vector<std::pair<std::string, Json>> runs = {
      {"verify", {{"suite", "all"}, {"spaces", {"lp:0.5:2", "l2:4", "linf:4"}}, {"p", {0.5, 1.0, 2.0, 4.0}},
                  {"depth", 3}, {"trials", 20}, {"samples", 20000}, {"seed", kSeed}}},
      {"verify", {{"suite", "tail"}, {"method", "mc"}, {"depth", 4}, {"trials", 10}, {"samples", 20000},
                  {"seed", kSeed}}},
      {"estimate", {{"space", "linf:4"}, {"family", "garling-linf"}, {"depth", 3}, {"restarts", 6}, {"budget", 60},
                    {"seed", kSeed}}},
      {"estimate", {{"space", "linf:4"}, {"depth", 12}, {"restarts", 3}, {"budget", 4}, {"samples", 4000},
                    {"seed", kSeed}}},
      {"atlas", {{"spaces", {"linf:2", "lp:0.5:2"}}, {"p", {1.0, 2.0}}, {"depth", 3}, {"restarts", 2},
                 {"budget", 10}, {"seed", kSeed}}},
      {"bounds", {{"formula", "prop32-c"}, {"p", {2.0}}, {"q", 3.0}}},
      {"bdg", {{"space", "linf:3"}, {"family", "damped"}, {"p", {1.0, 2.0}}, {"paths", 3000}, {"gamma_inner", 64},
               {"seed", kSeed}}},
      {"bdg", {{"suite", "core"}, {"family", "sign-previous"}, {"paths", 5000}, {"seed", kSeed}}},
      {"bdg", {{"suite", "type2"}, {"space", "lp:3:3"}, {"paths", 3000}, {"gamma_inner", 64}, {"seed", kSeed}}},
  };
  int mismatches = 0, errors = 0;
  for (const auto& [command, cfg] : runs) {
    std::string first;
    for (unsigned workers : {1u, 2u, 5u}) {
      Json j = cfg;
      j["workers"] = workers;
      const auto r = run_json(command, j.dump());
      if (r.exit_code != 0) ++errors;
      if (workers == 1) {
        first = r.output;
      } else if (r.output != first) {
        ++mismatches;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu runs x workers {1,2,5}: %d mismatches, %d failed runs", runs.size(), mismatches,
                errors);
  return {mismatches == 0 && errors == 0, buf};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"tangency exactness", tangency},
      {"lemma suite", lemma_suite},
      {"scalar constants", scalar_constants},
      {"Hilbert p=2 identity", hilbert_identity},
      {"extrapolation end-to-end", extrapolation},
      {"Davis invariant", davis},
      {"closed-form bounds", closed_forms},
      {"Garling search", garling},
      {"stochastic integration", stochastic},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    if (!out.pass) ++failed;
    std::printf("[%s] %2zu %s: %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
