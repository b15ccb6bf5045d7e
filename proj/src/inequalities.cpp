#include "declab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "declab/bounds.hpp"
#include "declab/error.hpp"
#include "declab/parallel.hpp"
#include "declab/rng.hpp"

namespace declab {

namespace {

constexpr double kSlack = kExactSlack;

bool within(double lhs, double rhs) {
  return lhs <= rhs + kSlack * std::max(1.0, std::abs(rhs));
}

// Tracks the point with the smallest margin over a batch of comparisons.
class Worst {
 public:
  void add(double lhs, double rhs, bool ok, Json where = nullptr) {
    ++checks_;
    if (!ok) ++violations_;
    const double margin = rhs - lhs;
    if (!seen_ || margin < margin_) {
      seen_ = true;
      margin_ = margin;
      lhs_ = lhs;
      rhs_ = rhs;
      where_ = std::move(where);
    }
  }
  void vacuous() { ++vacuous_; }

  void fill(IneqReport& report) const {
    report.checks = checks_;
    report.violations = violations_;
    report.holds = violations_ == 0;
    if (seen_) {
      report.lhs = lhs_;
      report.rhs = rhs_;
      report.margin = margin_;
      if (!where_.is_null()) report.params["worst"] = where_;
      report.status = violations_ == 0 ? ReportStatus::holds : ReportStatus::violated;
    } else {
      report.status = ReportStatus::vacuous;
    }
    if (vacuous_ > 0) report.params["vacuous_points"] = vacuous_;
  }

 private:
  bool seen_ = false;
  double margin_ = 0.0, lhs_ = 0.0, rhs_ = 0.0;
  Json where_;
  std::uint64_t checks_ = 0, violations_ = 0, vacuous_ = 0;
};

void require_decoupled(const TangentPair& pair) {
  require(pair.rule() == CopyRule::decoupled, "this check needs a genuinely decoupled tangent pair",
          ErrorCode::precondition);
}

void require_symmetric(const TangentPair& pair) {
  require(pair.base().conditionally_symmetric(),
          "this check needs a model flagged conditionally symmetric", ErrorCode::precondition);
}

// Copies of the increments on levels k+1..l, conditional on an atom of depth
// atom_depth >= l-1; the levels are independent given the atom.
IndependentFamily window_family(const AdaptedSequence& seq, std::size_t atom, int atom_depth, int k, int l) {
  const auto& tree = seq.tree();
  IndependentFamily family;
  family.dim = seq.dim();
  for (int j = k + 1; j <= l; ++j) {
    const std::size_t u = tree.ancestor(atom, atom_depth, j - 1);
    std::vector<std::span<const double>> values;
    for (std::size_t s = 0; s < tree.alphabet(j); ++s) values.push_back(seq.d(j, tree.child(j, u, s)));
    family.values.push_back(std::move(values));
    family.probs.emplace_back(tree.level(j).probs);
  }
  return family;
}

// T_p of the window k < n <= l, one value per depth-(l-1) atom.
std::vector<double> window_t_p(const AdaptedSequence& seq, double p, int k, int l) {
  const auto& tree = seq.tree();
  std::vector<double> out(tree.node_count(l - 1));
  for (std::size_t u = 0; u < out.size(); ++u) {
    double acc = 0.0;
    enumerate_family(window_family(seq, u, l - 1, k, l), seq.space(),
                     [&](const FamilyOutcome& o) { acc += o.prob * std::pow(seq.space().norm(o.sum), p); });
    out[u] = std::pow(acc, 1.0 / p);
  }
  return out;
}

void enumerate_symbols(const IndependentFamily& family,
                       const std::function<void(const std::vector<std::size_t>&, double)>& visit) {
  std::vector<std::size_t> symbols(family.values.size(), 0);
  auto recurse = [&](auto&& self, std::size_t k, double prob) -> void {
    if (k == symbols.size()) {
      visit(symbols, prob);
      return;
    }
    for (std::size_t j = 0; j < family.values[k].size(); ++j) {
      symbols[k] = j;
      self(self, k + 1, prob * family.probs[k][j]);
    }
  };
  recurse(recurse, 0, 1.0);
}

std::size_t full_atoms(const TangentPair& pair) {
  return pair.base().tree().node_count(pair.depth() - 1);
}

double stat_of(const PathSample& path, Statistic statistic, const SpaceDescriptor& space) {
  switch (statistic) {
    case Statistic::f_star: return path.f_star;
    case Statistic::f_norm: return space.norm(path.f);
    case Statistic::g_norm: return space.norm(path.g);
    case Statistic::g_star: return path.g_star;
  }
  return 0.0;
}

}  // namespace

const char* to_string(Method method) { return method == Method::exact ? "exact" : "mc"; }

const char* to_string(ReportStatus status) {
  switch (status) {
    case ReportStatus::holds: return "holds";
    case ReportStatus::violated: return "violated";
    case ReportStatus::vacuous: return "vacuous";
    case ReportStatus::not_applicable: return "not_applicable";
  }
  return "holds";
}

Json report_to_json(const IneqReport& report) {
  Json j;
  j["id"] = report.id;
  j["params"] = report.params;
  j["lhs"] = report.lhs;
  j["rhs"] = report.rhs;
  j["constant"] = report.constant;
  j["holds"] = report.holds;
  j["margin"] = report.margin;
  j["status"] = to_string(report.status);
  j["method"] = to_string(report.method);
  j["samples"] = report.samples;
  j["seed"] = report.seed;
  j["checks"] = report.checks;
  j["violations"] = report.violations;
  if (!report.note.empty()) j["note"] = report.note;
  return j;
}

// ---------------------------------------------------------------- moment functionals

MomentFunctional MomentFunctional::power(double q) {
  require(std::isfinite(q) && q > 0.0, "Power(q) needs q > 0");
  return MomentFunctional(Kind::power, q, q);
}

MomentFunctional MomentFunctional::power_log(double q, std::optional<double> base) {
  require(std::isfinite(q) && q > 0.0, "PowerLog(q) needs q > 0");
  const double b = base.value_or(q - 1.0);
  require(std::isfinite(b) && b >= 0.0, "PowerLog needs a non-negative base exponent (q >= 1 by default)");
  MomentFunctional phi(Kind::power_log, q, b);
  require(phi.growth_excess() <= 1.0 + 1e-12,
          "PowerLog fails Phi(st) <= s^q Phi(t) on the sample grid for the declared q", ErrorCode::precondition);
  return phi;
}

double MomentFunctional::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  if (kind_ == Kind::power) return std::pow(t, q_);
  return std::pow(t, base_) * std::log1p(t);
}

std::string MomentFunctional::name() const {
  std::ostringstream out;
  out.precision(17);
  if (kind_ == Kind::power) {
    out << "power(" << q_ << ")";
  } else {
    out << "power_log(" << q_ << ",base=" << base_ << ")";
  }
  return out.str();
}

double MomentFunctional::growth_excess() const {
  double worst = 0.0;
  for (int i = 0; i <= 30; ++i) {
    const double s = std::pow(10.0, 3.0 * i / 30.0);
    for (int k = 0; k <= 60; ++k) {
      const double t = std::pow(10.0, -6.0 + 12.0 * k / 60.0);
      const double denom = std::pow(s, q_) * (*this)(t);
      if (denom > 0.0) worst = std::max(worst, (*this)(s * t) / denom);
    }
  }
  return worst;
}

Statistic statistic_from_string(const std::string& name) {
  for (auto s : {Statistic::f_star, Statistic::f_norm, Statistic::g_norm, Statistic::g_star}) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorCode::parse, "unknown statistic '" + name + "' (f_star, f_norm, g_norm, g_star)");
}

const char* to_string(Statistic statistic) {
  switch (statistic) {
    case Statistic::f_star: return "f_star";
    case Statistic::f_norm: return "f_norm";
    case Statistic::g_norm: return "g_norm";
    case Statistic::g_star: return "g_star";
  }
  return "f_star";
}

// ---------------------------------------------------------------- T_p

std::vector<double> t_p_paths(const TangentPair& pair, double p, int n) {
  require(p > 0.0, "T_p needs p > 0");
  require(n >= 1 && n <= pair.depth(), "T_p needs 1 <= n <= depth");
  const auto& tree = pair.base().tree();
  const double joint = static_cast<double>(tree.leaf_count()) * static_cast<double>(tree.leaf_count());
  require(joint <= static_cast<double>(kEnumerationCap), "exact T_p exceeds the enumeration cap",
          ErrorCode::budget_exceeded);
  const auto& probs = tree.node_probs(tree.depth());
  const auto& space = pair.base().space();
  std::vector<double> out(tree.leaf_count());
  Vec sum(pair.dim());
  for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    double acc = 0.0;
    for (std::size_t wt = 0; wt < tree.leaf_count(); ++wt) {
      sum = Vec(pair.dim());
      for (int k = 1; k <= n; ++k) sum += pair.e(k, leaf, wt);
      acc += probs[wt] * std::pow(space.norm(sum), p);
    }
    out[leaf] = std::pow(acc, 1.0 / p);
  }
  return out;
}

std::vector<double> t_p_atoms(const TangentPair& pair, double p, int n) {
  require(p > 0.0, "T_p needs p > 0");
  require(n >= 1 && n <= pair.depth(), "T_p needs 1 <= n <= depth");
  require_decoupled(pair);
  return window_t_p(pair.base(), p, 0, n);
}

std::vector<double> t_p_mc(const TangentPair& pair, double p, int n, std::size_t outer, std::size_t inner,
                           std::uint64_t seed, unsigned workers) {
  require(p > 0.0, "T_p needs p > 0");
  require(n >= 1 && n <= pair.depth(), "T_p needs 1 <= n <= depth");
  require(outer >= 1 && inner >= 1, "Monte Carlo T_p needs positive sample counts");
  const auto& tree = pair.base().tree();
  const auto& space = pair.base().space();
  std::vector<double> out(outer);
  parallel_for(block_count(outer), workers, [&](std::size_t block) {
    Vec sum(pair.dim());
    const std::size_t end = std::min(outer, (block + 1) * kReplicaBlock);
    for (std::size_t i = block * kReplicaBlock; i < end; ++i) {
      CounterRng path_rng(seed, i, Substream::path);
      CounterRng copy_rng(seed, i, Substream::decoupled_copy);
      const std::size_t leaf = sample_leaf(tree, path_rng);
      double acc = 0.0;
      for (std::size_t m = 0; m < inner; ++m) {
        const std::size_t wt = sample_leaf(tree, copy_rng);
        sum = Vec(pair.dim());
        for (int k = 1; k <= n; ++k) sum += pair.e(k, leaf, wt);
        acc += std::pow(space.norm(sum), p);
      }
      out[i] = std::pow(acc / static_cast<double>(inner), 1.0 / p);
    }
  });
  return out;
}

// ---------------------------------------------------------------- tail lemmas

LevyMode levy_mode_from_string(const std::string& name) {
  if (name == "max-of-sums") return LevyMode::max_of_sums;
  if (name == "max-of-terms") return LevyMode::max_of_terms;
  throw Error(ErrorCode::parse, "unknown Levy mode '" + name + "' (max-of-sums, max-of-terms)");
}

IneqReport check_levy(const TangentPair& pair, double t, LevyMode mode) {
  require_symmetric(pair);
  require_decoupled(pair);
  require(t >= 0.0, "threshold must be non-negative");
  const auto& space = pair.base().space();
  const double factor = std::exp2(1.0 - 1.0 / space.r());
  Worst worst;
  for (std::size_t u = 0; u < full_atoms(pair); ++u) {
    double lhs = 0.0, tail = 0.0;
    enumerate_family(conditional_family(pair.base(), u), space, [&](const FamilyOutcome& o) {
      const double m = mode == LevyMode::max_of_sums ? o.max_partial : o.max_term;
      if (m > t) lhs += o.prob;
      if (space.norm(o.sum) > factor * t) tail += o.prob;
    });
    worst.add(lhs, 2.0 * tail, lhs <= 2.0 * tail + kSlack, Json{{"atom", u}});
  }
  IneqReport report;
  report.id = mode == LevyMode::max_of_sums ? "levy.max_of_sums" : "levy.max_of_terms";
  report.params = {{"t", t}, {"r", space.r()}, {"threshold_factor", factor}, {"space", space.to_string()}};
  report.constant = 2.0;
  worst.fill(report);
  return report;
}

IneqReport check_contraction(const TangentPair& pair, const std::vector<int>& multipliers, double t) {
  require_symmetric(pair);
  require_decoupled(pair);
  require(multipliers.size() == static_cast<std::size_t>(pair.depth()), "one multiplier per level is required");
  for (int v : multipliers) require(v == 0 || v == 1, "multipliers must be 0 or 1");
  require(t >= 0.0, "threshold must be non-negative");
  const auto& space = pair.base().space();
  const double factor = std::exp2(1.0 - 1.0 / space.r());
  const std::size_t dim = pair.dim();
  Worst worst;
  std::vector<double> masked(dim), full(dim);
  for (std::size_t u = 0; u < full_atoms(pair); ++u) {
    const auto family = conditional_family(pair.base(), u);
    double lhs = 0.0, tail = 0.0;
    enumerate_symbols(family, [&](const std::vector<std::size_t>& symbols, double prob) {
      std::fill(masked.begin(), masked.end(), 0.0);
      std::fill(full.begin(), full.end(), 0.0);
      for (std::size_t k = 0; k < symbols.size(); ++k) {
        const auto xi = family.values[k][symbols[k]];
        for (std::size_t i = 0; i < dim; ++i) {
          full[i] += xi[i];
          if (multipliers[k]) masked[i] += xi[i];
        }
      }
      if (space.norm(masked) > t) lhs += prob;
      if (space.norm(full) > factor * t) tail += prob;
    });
    worst.add(lhs, 2.0 * tail, lhs <= 2.0 * tail + kSlack, Json{{"atom", u}});
  }
  IneqReport report;
  report.id = "contraction";
  report.params = {{"t", t}, {"r", space.r()}, {"multipliers", multipliers}, {"space", space.to_string()}};
  report.constant = 2.0;
  worst.fill(report);
  return report;
}

IneqReport check_symsum(const DiscreteLaw& xi, const DiscreteLaw& zeta, const SpaceDescriptor& space, double p) {
  require(p > 0.0, "p must be positive");
  require(xi.dim() == space.dim() && zeta.dim() == space.dim(), "law dimension does not match the space",
          ErrorCode::dimension_mismatch);
  DiscreteLaw z = zeta, negated(zeta.dim());
  z.canonicalize();
  std::vector<double> neg(zeta.dim());
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t k = 0; k < z.dim(); ++k) neg[k] = -z.value(i)[k];
    negated.add(neg, z.prob(i));
  }
  negated.canonicalize();
  require(DiscreteLaw::distance(z, negated, kSlack) <= kSlack, "zeta must be symmetric", ErrorCode::precondition);

  const double constant = std::exp2(1.0 - p) * lu_constants(p / space.r()).u;
  double lhs = 0.0, moment = 0.0;
  std::vector<double> sum(space.dim());
  for (std::size_t a = 0; a < xi.size(); ++a) {
    lhs += xi.prob(a) * std::pow(space.norm(xi.value(a)), p);
    for (std::size_t b = 0; b < z.size(); ++b) {
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = xi.value(a)[k] + z.value(b)[k];
      moment += xi.prob(a) * z.prob(b) * std::pow(space.norm(sum), p);
    }
  }
  Worst worst;
  worst.add(lhs, constant * moment, within(lhs, constant * moment));
  IneqReport report;
  report.id = "symsum";
  report.params = {{"p", p}, {"r", space.r()}, {"space", space.to_string()}};
  report.constant = constant;
  worst.fill(report);
  return report;
}

IneqReport check_reverse_kolmogorov(const TangentPair& pair, double t, double p) {
  require_symmetric(pair);
  require_decoupled(pair);
  require(p > 0.0 && t >= 0.0, "needs p > 0 and t >= 0");
  const auto& space = pair.base().space();
  const double u = lu_constants(p / space.r()).u;
  Worst worst;
  for (std::size_t a = 0; a < full_atoms(pair); ++a) {
    double tail = 0.0, moment = 0.0, term_moment = 0.0;
    enumerate_family(conditional_family(pair.base(), a), space, [&](const FamilyOutcome& o) {
      if (o.max_partial > t) tail += o.prob;
      moment += o.prob * std::pow(space.norm(o.sum), p);
      term_moment += o.prob * std::pow(o.max_term, p);
    });
    if (moment == 0.0) {
      worst.vacuous();
      continue;
    }
    const double bound = std::exp2(p - 1.0) * (1.0 / (u * u) - (std::pow(t, p) + term_moment) / moment);
    worst.add(bound, tail, bound <= tail + kSlack, Json{{"atom", a}});
  }
  IneqReport report;
  report.id = "reverse_kolmogorov";
  report.params = {{"t", t}, {"p", p}, {"r", space.r()}, {"space", space.to_string()}};
  report.constant = u;
  report.note = "lhs is the lower bound, rhs is P(max_k ||S_k|| > t)";
  worst.fill(report);
  if (report.status == ReportStatus::vacuous) report.note += "; all conditional moments vanish";
  return report;
}

IneqReport check_tail_comparison(const TangentPair& pair, const std::vector<double>& grid) {
  std::vector<double> pd(grid.size(), 0.0), pe(grid.size(), 0.0);
  enumerate_joint(pair, [&](const JointOutcome& o) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (o.path->d_star > grid[i]) pd[i] += o.prob;
      if (o.path->e_star > grid[i]) pe[i] += o.prob;
    }
  });
  Worst worst;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    worst.add(pe[i], 2.0 * pd[i], pe[i] <= 2.0 * pd[i] + kSlack, Json{{"t", grid[i]}, {"direction", "e<=2d"}});
    worst.add(pd[i], 2.0 * pe[i], pd[i] <= 2.0 * pe[i] + kSlack, Json{{"t", grid[i]}, {"direction", "d<=2e"}});
  }
  IneqReport report;
  report.id = "tail_comparison";
  report.params = {{"grid", grid}, {"space", pair.base().space().to_string()}};
  report.constant = 2.0;
  worst.fill(report);
  return report;
}

double wilson_lower(double successes, double n, double z) {
  if (n <= 0.0) return 0.0;
  const double phat = successes / n;
  const double z2 = z * z;
  const double centre = phat + z2 / (2.0 * n);
  const double spread = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  return std::max(0.0, (centre - spread) / (1.0 + z2 / n));
}

double wilson_upper(double successes, double n, double z) {
  if (n <= 0.0) return 1.0;
  const double phat = successes / n;
  const double z2 = z * z;
  const double centre = phat + z2 / (2.0 * n);
  const double spread = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  return std::min(1.0, (centre + spread) / (1.0 + z2 / n));
}

IneqReport check_tail_comparison_mc(const TangentPair& pair, const std::vector<double>& grid, std::size_t samples,
                                    std::uint64_t seed, unsigned workers) {
  const auto paths = sample_paths(pair, samples, seed, workers);
  std::vector<double> cd(grid.size(), 0.0), ce(grid.size(), 0.0);
  for (const auto& path : paths) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (path.d_star > grid[i]) cd[i] += 1.0;
      if (path.e_star > grid[i]) ce[i] += 1.0;
    }
  }
  const double n = static_cast<double>(samples);
  Worst worst;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // flag only when the one-sided intervals exclude the inequality
    const bool e_ok = wilson_lower(ce[i], n) <= 2.0 * wilson_upper(cd[i], n);
    const bool d_ok = wilson_lower(cd[i], n) <= 2.0 * wilson_upper(ce[i], n);
    worst.add(ce[i] / n, 2.0 * cd[i] / n, e_ok, Json{{"t", grid[i]}, {"direction", "e<=2d"}});
    worst.add(cd[i] / n, 2.0 * ce[i] / n, d_ok, Json{{"t", grid[i]}, {"direction", "d<=2e"}});
  }
  IneqReport report;
  report.id = "tail_comparison";
  report.params = {{"grid", grid}, {"space", pair.base().space().to_string()}, {"wilson_z", kWilsonZ}};
  report.constant = 2.0;
  report.method = Method::mc;
  report.samples = samples;
  report.seed = seed;
  report.note = "violations are flagged only when one-sided 99.9% Wilson intervals exclude the inequality";
  worst.fill(report);
  return report;
}

// ---------------------------------------------------------------- BMO and good-lambda

BmoResult bmo_condition(const TangentPair& pair, double p, double A) {
  require_decoupled(pair);
  require(p > 0.0 && A >= 0.0, "needs p > 0 and A >= 0");
  const auto& seq = pair.base();
  const auto& tree = seq.tree();
  const auto& space = seq.space();
  const std::size_t dim = seq.dim();
  const int N = seq.depth();
  const auto f = partial_sums(seq);
  BmoResult result;
  std::vector<double> w(dim);
  for (int l = 1; l <= N; ++l) {
    for (int k = 0; k < l; ++k) {
      const auto tp = window_t_p(seq, p, k, l);
      const double M = *std::max_element(tp.begin(), tp.end());
      if (M == 0.0) continue;
      const std::size_t stride = tree.node_count(l) / tree.node_count(k);
      for (std::size_t B = 0; B < tree.node_count(k); ++B) {
        const double pb = tree.node_prob(k, B);
        double exceed = 0.0, moment = 0.0;
        for (std::size_t v = B * stride; v < (B + 1) * stride; ++v) {
          for (std::size_t i = 0; i < dim; ++i) {
            w[i] = f[static_cast<std::size_t>(l)][v * dim + i] - f[static_cast<std::size_t>(k)][B * dim + i];
          }
          const double norm = space.norm(w);
          const double cond = tree.node_prob(l, v) / pb;
          if (norm > A * M) exceed += cond;
          moment += cond * std::pow(norm, p);
        }
        const double ratio = std::pow(moment, 1.0 / p) / M;
        if (exceed > result.b_hat) {
          result.b_hat = exceed;
          result.worst_k = k;
          result.worst_l = l;
          result.worst_atom = B;
        }
        result.d_hat = std::max(result.d_hat, ratio);
      }
    }
  }
  result.chebyshev = A > 0.0 ? std::pow(result.d_hat / A, p) : (result.d_hat > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  result.chain_holds = result.b_hat <= result.chebyshev + kSlack;
  return result;
}

double goodlambda_beta(double A, double delta, double rho) {
  require(A >= 0.0 && delta > 0.0 && rho > 0.0 && rho <= 1.0, "needs A >= 0, delta > 0, rho in (0, 1]");
  return std::pow(1.0 + (2.0 * std::pow(A, rho) + 1.0) * std::pow(delta, rho), 1.0 / rho);
}

GoodLambdaReport check_goodlambda(const TangentPair& pair, double p, double A, double b, double delta,
                                  const std::vector<double>& lambdas) {
  require_symmetric(pair);
  require_decoupled(pair);
  require(b > 0.0 && b < 1.0, "b must lie in (0, 1)");
  const auto& seq = pair.base();
  const auto& tree = seq.tree();
  const int N = seq.depth();
  const double rho = std::min(seq.space().r(), p);
  GoodLambdaReport out;
  out.delta = delta;
  out.beta = goodlambda_beta(A, delta, rho);
  Json params = {{"p", p}, {"A", A}, {"b", b}, {"delta", delta}, {"beta", out.beta}, {"rho", rho},
                 {"space", seq.space().to_string()}};
  out.displayed.id = "goodlambda.displayed";
  out.proof_variant.id = "goodlambda.proof_variant";

  const auto bmo = bmo_condition(pair, p, A);
  params["b_hat"] = bmo.b_hat;
  if (!(bmo.b_hat < b)) {
    for (auto* r : {&out.displayed, &out.proof_variant}) {
      r->params = params;
      r->status = ReportStatus::not_applicable;
      r->note = "BMO condition not certified: b_hat >= b";
    }
    return out;
  }

  const std::size_t L = tree.leaf_count();
  const auto stars = running_max(seq);
  std::vector<double> t_star(L, 0.0);
  for (int n = 1; n <= N; ++n) {
    const auto tp = t_p_atoms(pair, p, n);
    for (std::size_t leaf = 0; leaf < L; ++leaf) {
      t_star[leaf] = std::max(t_star[leaf], tp[tree.ancestor(leaf, N, n - 1)]);
    }
  }
  const auto& fs = stars.f_star[static_cast<std::size_t>(N)];
  const auto& ds = stars.d_star[static_cast<std::size_t>(N)];
  const auto& probs = tree.node_probs(N);

  Worst displayed, proof;
  for (double lambda : lambdas) {
    double lhs_d = 0.0, lhs_p = 0.0, tail = 0.0;
    for (std::size_t leaf = 0; leaf < L; ++leaf) {
      const double control = std::max(t_star[leaf], ds[leaf]);
      if (fs[leaf] >= out.beta * lambda && control < out.delta * lambda) lhs_d += probs[leaf];
      if (fs[leaf] > out.beta * lambda && control <= out.delta * lambda) lhs_p += probs[leaf];
      if (fs[leaf] > lambda) tail += probs[leaf];
    }
    displayed.add(lhs_d, b * tail, lhs_d <= b * tail + kSlack, Json{{"lambda", lambda}});
    proof.add(lhs_p, b * tail, lhs_p <= b * tail + kSlack, Json{{"lambda", lambda}});
  }
  out.displayed.params = params;
  out.proof_variant.params = params;
  out.displayed.constant = out.proof_variant.constant = b;
  displayed.fill(out.displayed);
  proof.fill(out.proof_variant);
  out.displayed.note = "P(f* >= beta l, T*_p v d* < delta l) <= b P(f* > l)";
  out.proof_variant.note = "P(f* > beta l, T*_p v d* <= delta l) <= b P(f* > l)";
  return out;
}

// ---------------------------------------------------------------- moments

double moment_phi(const TangentPair& pair, const MomentFunctional& phi, Statistic statistic) {
  const auto& seq = pair.base();
  const auto& tree = seq.tree();
  const auto& space = seq.space();
  const int N = seq.depth();
  if (statistic == Statistic::f_star || statistic == Statistic::f_norm) {
    const auto f = partial_sums(seq);
    const auto stars = running_max(seq);
    double acc = 0.0;
    for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
      const double value = statistic == Statistic::f_star
                               ? stars.f_star[static_cast<std::size_t>(N)][leaf]
                               : space.norm(std::span<const double>(f[static_cast<std::size_t>(N)].data() + leaf * seq.dim(), seq.dim()));
      acc += tree.node_prob(N, leaf) * phi(value);
    }
    return acc;
  }
  double acc = 0.0;
  if (pair.rule() == CopyRule::decoupled) {
    // the copy sum depends on w only through its depth-(N-1) atom
    for (std::size_t u = 0; u < tree.node_count(N - 1); ++u) {
      double inner = 0.0;
      enumerate_family(conditional_family(seq, u), space, [&](const FamilyOutcome& o) {
        inner += o.prob * phi(statistic == Statistic::g_star ? o.max_partial : space.norm(o.sum));
      });
      acc += tree.node_prob(N - 1, u) * inner;
    }
    return acc;
  }
  enumerate_joint(pair, [&](const JointOutcome& o) { acc += o.prob * phi(stat_of(*o.path, statistic, space)); });
  return acc;
}

MomentEstimate moment_phi_mc(const TangentPair& pair, const MomentFunctional& phi, Statistic statistic,
                             std::size_t samples, std::uint64_t seed, unsigned workers) {
  const auto paths = sample_paths(pair, samples, seed, workers);
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& path : paths) {
    const double v = phi(stat_of(path, statistic, pair.base().space()));
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(samples);
  MomentEstimate est;
  est.samples = samples;
  est.mean = sum / n;
  const double var = samples > 1 ? std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0)) : 0.0;
  est.standard_error = std::sqrt(var / n);
  return est;
}

// ---------------------------------------------------------------- Davis, extrapolation, symmetrization

IneqReport check_davis(const TangentPair& pair) {
  const auto& seq = pair.base();
  const auto& tree = seq.tree();
  const auto& space = seq.space();
  const int N = seq.depth();
  const double r = space.r();
  const double constant = 1.0 / (1.0 - std::exp2(-r));
  const auto parts = davis_split(pair);
  const auto& large = parts.second.base();
  const auto stars = running_max(seq);
  Worst worst;
  std::uint64_t triangle_failures = 0;
  Vec f2(seq.dim());
  for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    f2 = Vec(seq.dim());
    double sum_r = 0.0;
    for (int n = 1; n <= N; ++n) {
      const std::size_t v = tree.ancestor(leaf, N, n);
      const auto dn = large.d(n, v);
      f2 += dn;
      sum_r += std::pow(space.norm(dn), r);
      const double lhs = std::pow(space.norm(f2), r);
      const double rhs = constant * std::pow(stars.d_star[static_cast<std::size_t>(n)][v], r);
      if (!within(lhs, sum_r)) ++triangle_failures;
      worst.add(lhs, rhs, within(sum_r, rhs) && within(lhs, rhs), Json{{"leaf", leaf}, {"n", n}});
    }
  }
  IneqReport report;
  report.id = "davis";
  report.params = {{"r", r}, {"rho", r}, {"space", space.to_string()}, {"triangle_failures", triangle_failures}};
  report.constant = constant;
  worst.fill(report);
  if (triangle_failures > 0) {
    report.holds = false;
    report.status = ReportStatus::violated;
  }
  return report;
}

IneqReport check_extrapolation(const TangentPair& pair, double p, const MomentFunctional& phi,
                               std::optional<double> b_opt) {
  require_symmetric(pair);
  require_decoupled(pair);
  const auto& space = pair.base().space();
  const double r = space.r();
  const double rho = std::min(r, p);
  const double limit = prop32_b_limit(p, r);
  const double b = b_opt.value_or(0.5 * limit);
  IneqReport report;
  report.id = "extrapolation";
  report.params = {{"p", p}, {"q", phi.q()}, {"phi", phi.name()}, {"r", r}, {"rho", rho}, {"b", b},
                   {"b_limit", limit}, {"space", space.to_string()}};

  const double d_hat = bmo_condition(pair, p, 1.0).d_hat;
  if (d_hat == 0.0) {
    report.status = ReportStatus::vacuous;
    report.note = "zero sequence";
    return report;
  }
  const double A = std::pow(b, -1.0 / p) * d_hat;
  const auto bmo = bmo_condition(pair, p, A);
  report.params["A"] = A;
  report.params["d_hat"] = d_hat;
  report.params["b_hat"] = bmo.b_hat;
  if (!(bmo.b_hat < b)) {
    report.status = ReportStatus::not_applicable;
    report.note = "BMO condition not certified: b_hat >= b";
    return report;
  }
  const auto C = bound_prop32_C(p, phi.q(), r, A, b);
  const double constant = static_cast<double>(C.value());
  report.params["C"] = symbolic_to_json(C);
  const double lhs = moment_phi(pair, phi, Statistic::f_star);
  const double rhs = constant * moment_phi(pair, phi, Statistic::g_norm);
  Worst worst;
  worst.add(lhs, rhs, within(lhs, rhs));
  report.constant = constant;
  worst.fill(report);
  return report;
}

IneqReport check_condsym(const TangentPair& pair, const MomentFunctional& phi, double C) {
  require(C >= 0.0, "C must be non-negative");
  const double r = pair.base().space().r();
  const double q = phi.q();
  const double constant = std::exp2(q / r) * (std::exp2(1.0 + q / r) * C + 1.0);
  const double lhs = moment_phi(pair, phi, Statistic::f_norm);
  const double rhs = constant * moment_phi(pair, phi, Statistic::g_norm);
  IneqReport report;
  report.id = "condsym";
  report.params = {{"q", q}, {"r", r}, {"phi", phi.name()}, {"C", C}, {"space", pair.base().space().to_string()}};
  report.constant = constant;
  Worst worst;
  worst.add(lhs, rhs, within(lhs, rhs));
  worst.fill(report);
  return report;
}

IneqReport check_pest(std::size_t samples, std::uint64_t seed) {
  Worst worst;
  for (std::size_t i = 0; i < samples; ++i) {
    CounterRng rng(seed, i, Substream::model);
    const double a = 10.0 * rng.uniform();
    const double b = 10.0 * rng.uniform();
    const double p = 0.05 + 7.95 * rng.uniform();
    const auto lu = lu_constants(p);
    const double sum_pow = std::pow(a, p) + std::pow(b, p);
    const double mid = std::pow(a + b, p);
    const bool lower_ok = within(sum_pow / lu.l, mid);
    const bool upper_ok = within(mid, lu.u * sum_pow);
    // report relative margins so very different magnitudes compare
    const double scale = std::max(mid, 1e-300);
    worst.add(sum_pow / lu.l / scale, mid / scale, lower_ok, Json{{"a", a}, {"b", b}, {"p", p}, {"side", "lower"}});
    worst.add(mid / scale, lu.u * sum_pow / scale, upper_ok, Json{{"a", a}, {"b", b}, {"p", p}, {"side", "upper"}});
  }
  IneqReport report;
  report.id = "pest";
  report.params = {{"a_range", {0.0, 10.0}}, {"b_range", {0.0, 10.0}}, {"p_range", {0.05, 8.0}}};
  report.samples = samples;
  report.seed = seed;
  report.note = "lhs and rhs are relative to (a+b)^p";
  worst.fill(report);
  return report;
}

IneqReport check_reverse_triangle(const SpaceDescriptor& space, std::size_t samples, std::uint64_t seed) {
  const double r = space.r();
  Worst worst;
  Vec x(space.dim()), y(space.dim());
  for (std::size_t i = 0; i < samples; ++i) {
    CounterRng rng(seed, i, Substream::model);
    for (std::size_t k = 0; k < space.dim(); ++k) {
      x[k] = rng.normal();
      y[k] = rng.normal();
    }
    const double nx = std::pow(space.norm(x), r), ny = std::pow(space.norm(y), r);
    const double sum = std::pow(space.norm(x + y), r), diff = std::pow(space.norm(x - y), r);
    worst.add(sum, nx + ny, within(sum, nx + ny), Json{{"sample", i}, {"side", "triangle"}});
    worst.add(std::abs(nx - ny), diff, within(std::abs(nx - ny), diff), Json{{"sample", i}, {"side", "reverse"}});
  }
  IneqReport report;
  report.id = "reverse_triangle";
  report.params = {{"space", space.to_string()}, {"r", r}};
  report.samples = samples;
  report.seed = seed;
  worst.fill(report);
  return report;
}

}  // namespace declab
