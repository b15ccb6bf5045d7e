#include "declab/probmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "declab/error.hpp"
#include "declab/parallel.hpp"
#include "declab/rng.hpp"

namespace declab {

namespace {

constexpr std::size_t kNodeCap = std::size_t{1} << 26;

bool is_power_of_half(double p) {
  int exponent = 0;
  return std::frexp(p, &exponent) == 0.5;
}

bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool same_values(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

void require_joint_budget(const FiltrationTree& tree) {
  const double leaves = static_cast<double>(tree.leaf_count());
  require(leaves * leaves <= static_cast<double>(kEnumerationCap),
          "exact enumeration needs " + std::to_string(tree.leaf_count()) + "^2 joint outcomes, above the cap of " +
              std::to_string(kEnumerationCap) + "; use the Monte Carlo path",
          ErrorCode::budget_exceeded);
}

void fill_base_path(const TangentPair& pair, std::size_t leaf, PathSample& out) {
  const auto& space = pair.base().space();
  out.f = Vec(pair.dim());
  out.f_star = 0.0;
  out.d_star = 0.0;
  for (int n = 1; n <= pair.depth(); ++n) {
    const auto dn = pair.d(n, leaf);
    out.f += dn;
    out.f_star = std::max(out.f_star, space.norm(out.f));
    out.d_star = std::max(out.d_star, space.norm(dn));
  }
}

void fill_copy_path(const TangentPair& pair, std::size_t leaf, std::size_t leaf_tilde, PathSample& out) {
  const auto& space = pair.base().space();
  out.g = Vec(pair.dim());
  out.g_star = 0.0;
  out.e_star = 0.0;
  for (int n = 1; n <= pair.depth(); ++n) {
    const auto en = pair.e(n, leaf, leaf_tilde);
    out.g += en;
    out.g_star = std::max(out.g_star, space.norm(out.g));
    out.e_star = std::max(out.e_star, space.norm(en));
  }
}

std::vector<std::vector<double>> zero_tables(const FiltrationTree& tree, std::size_t dim) {
  std::vector<std::vector<double>> tables;
  for (int n = 1; n <= tree.depth(); ++n) tables.emplace_back(tree.node_count(n) * dim, 0.0);
  return tables;
}

double random_in(CounterRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

}  // namespace

// ---------------------------------------------------------------- tree

FiltrationTree::FiltrationTree(std::vector<Level> levels) : levels_(std::move(levels)) {
  require(!levels_.empty(), "a filtration tree needs at least one level");
  counts_.push_back(1);
  probs_.push_back({1.0});
  dyadic_ = true;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const auto& level = levels_[i];
    const std::string where = "level " + std::to_string(i + 1);
    require(!level.probs.empty() && level.values.size() == level.probs.size(),
            where + ": values and probabilities must be non-empty and of equal length");
    double total = 0.0;
    for (double p : level.probs) {
      require(std::isfinite(p) && p > 0.0, where + ": probabilities must be strictly positive");
      total += p;
      dyadic_ = dyadic_ && is_power_of_half(p);
    }
    require(std::abs(total - 1.0) <= kExactSlack, where + ": probabilities must sum to 1");
    const std::size_t vdim = level.values.front().dim();
    require(vdim > 0, where + ": innovation values must be non-empty");
    for (const auto& v : level.values) {
      require(v.dim() == vdim, where + ": innovation values must share one dimension");
    }
    const std::size_t next = counts_.back() * level.probs.size();
    require(next <= kNodeCap, "tree has more than 2^26 nodes at one depth", ErrorCode::budget_exceeded);
    counts_.push_back(next);
    std::vector<double> probs(next);
    const auto& prev = probs_.back();
    for (std::size_t v = 0; v < next; ++v) {
      probs[v] = prev[v / level.probs.size()] * level.probs[v % level.probs.size()];
    }
    probs_.push_back(std::move(probs));
  }
}

FiltrationTree FiltrationTree::paley_walsh(int depth) {
  require(depth >= 1, "Paley-Walsh tree needs depth >= 1");
  std::vector<Level> levels(static_cast<std::size_t>(depth), Level{{Vec{1.0}, Vec{-1.0}}, {0.5, 0.5}});
  return FiltrationTree(std::move(levels));
}

bool FiltrationTree::operator==(const FiltrationTree& other) const {
  if (depth() != other.depth()) return false;
  for (int n = 1; n <= depth(); ++n) {
    if (level(n).probs != other.level(n).probs || level(n).values != other.level(n).values) return false;
  }
  return true;
}

std::size_t sample_leaf(const FiltrationTree& tree, CounterRng& rng) {
  std::size_t node = 0;
  for (int n = 1; n <= tree.depth(); ++n) {
    const auto& probs = tree.level(n).probs;
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t j = probs.size() - 1;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) {
        j = i;
        break;
      }
    }
    node = tree.child(n, node, j);
  }
  return node;
}

// ---------------------------------------------------------------- rules

const char* to_string(IncrementRule rule) {
  return rule == IncrementRule::scalar ? "scalar" : "table";
}

const char* to_string(PredictableRule rule) {
  switch (rule) {
    case PredictableRule::none: return "none";
    case PredictableRule::constant: return "constant";
    case PredictableRule::table: return "table";
    case PredictableRule::previous_increment: return "previous-increment";
    case PredictableRule::partial_sum: return "partial-sum";
  }
  return "none";
}

IncrementRule increment_rule_from_string(const std::string& name) {
  if (name == "scalar") return IncrementRule::scalar;
  if (name == "table") return IncrementRule::table;
  throw Error(ErrorCode::parse, "unknown increment rule '" + name + "'");
}

PredictableRule predictable_rule_from_string(const std::string& name) {
  for (auto rule : {PredictableRule::none, PredictableRule::constant, PredictableRule::table,
                    PredictableRule::previous_increment, PredictableRule::partial_sum}) {
    if (name == to_string(rule)) return rule;
  }
  throw Error(ErrorCode::parse, "unknown predictable rule '" + name + "'");
}

// ---------------------------------------------------------------- sequences

AdaptedSequence::AdaptedSequence(std::shared_ptr<const FiltrationTree> tree, SpaceDescriptor space,
                                 std::vector<std::vector<double>> increments, bool conditionally_symmetric,
                                 std::string family)
    : tree_(std::move(tree)),
      space_(std::move(space)),
      increments_(std::move(increments)),
      symmetric_(conditionally_symmetric),
      family_(std::move(family)) {
  require(tree_ != nullptr, "sequence needs a tree");
  require(increments_.size() == static_cast<std::size_t>(tree_->depth()),
          "one increment table per level is required", ErrorCode::dimension_mismatch);
  for (int n = 1; n <= tree_->depth(); ++n) {
    require(table(n).size() == tree_->node_count(n) * space_.dim(),
            "increment table at level " + std::to_string(n) + " has the wrong size",
            ErrorCode::dimension_mismatch);
  }
  if (symmetric_) {
    require(check_conditional_symmetry(), "sequence is flagged conditionally symmetric but is not",
            ErrorCode::precondition);
  }
}

AdaptedSequence AdaptedSequence::build(const SequenceSpec& spec) {
  auto space = SpaceDescriptor::parse(spec.space);
  auto tree = std::make_shared<const FiltrationTree>(spec.levels);
  const std::size_t dim = space.dim();
  const int depth = tree->depth();
  auto tables = zero_tables(*tree, dim);

  auto check_dim = [dim](const Vec& v, const std::string& what) {
    require(v.dim() == dim, what + " has dimension " + std::to_string(v.dim()) + ", space has " +
                                std::to_string(dim), ErrorCode::dimension_mismatch);
  };

  if (spec.increment == IncrementRule::table) {
    require(spec.increments.size() == static_cast<std::size_t>(depth), "one increment list per level is required");
    for (int n = 1; n <= depth; ++n) {
      const auto& list = spec.increments[static_cast<std::size_t>(n - 1)];
      require(list.size() == tree->node_count(n),
              "level " + std::to_string(n) + " needs one increment per node", ErrorCode::dimension_mismatch);
      for (std::size_t v = 0; v < list.size(); ++v) {
        check_dim(list[v], "increment");
        std::copy(list[v].coords().begin(), list[v].coords().end(), tables[static_cast<std::size_t>(n - 1)].begin() + static_cast<std::ptrdiff_t>(v * dim));
      }
    }
  } else {
    const auto rule = spec.predictable;
    require(rule != PredictableRule::none, "the scalar increment rule needs a predictable rule");
    if (rule == PredictableRule::constant || rule == PredictableRule::table) {
      require(spec.labels.size() == static_cast<std::size_t>(depth), "one label list per level is required");
    } else {
      check_dim(spec.initial, "initial label");
    }
    std::vector<double> f_prev(dim, 0.0);  // f_{n-1} per depth-(n-1) node
    for (int n = 1; n <= depth; ++n) {
      const std::size_t parents = tree->node_count(n - 1);
      const std::size_t arity = tree->alphabet(n);
      auto& out = tables[static_cast<std::size_t>(n - 1)];
      std::vector<double> label(dim);
      for (std::size_t u = 0; u < parents; ++u) {
        switch (rule) {
          case PredictableRule::constant: {
            const auto& list = spec.labels[static_cast<std::size_t>(n - 1)];
            require(list.size() == 1, "constant rule needs exactly one label per level");
            check_dim(list[0], "label");
            std::copy(list[0].coords().begin(), list[0].coords().end(), label.begin());
            break;
          }
          case PredictableRule::table: {
            const auto& list = spec.labels[static_cast<std::size_t>(n - 1)];
            require(list.size() == parents, "level " + std::to_string(n) + " needs one label per depth-" +
                                                std::to_string(n - 1) + " node", ErrorCode::dimension_mismatch);
            check_dim(list[u], "label");
            std::copy(list[u].coords().begin(), list[u].coords().end(), label.begin());
            break;
          }
          case PredictableRule::previous_increment:
            for (std::size_t i = 0; i < dim; ++i) {
              label[i] = n == 1 ? spec.initial[i] : spec.scale * tables[static_cast<std::size_t>(n - 2)][u * dim + i];
            }
            break;
          case PredictableRule::partial_sum:
            for (std::size_t i = 0; i < dim; ++i) label[i] = spec.initial[i] + spec.scale * f_prev[u * dim + i];
            break;
          case PredictableRule::none:
            break;
        }
        for (std::size_t j = 0; j < arity; ++j) {
          const double xi = tree->level(n).values[j][0];
          const std::size_t v = tree->child(n, u, j);
          for (std::size_t i = 0; i < dim; ++i) out[v * dim + i] = xi * label[i];
        }
      }
      std::vector<double> f_next(tree->node_count(n) * dim);
      for (std::size_t v = 0; v < tree->node_count(n); ++v) {
        const std::size_t u = tree->parent(n, v);
        for (std::size_t i = 0; i < dim; ++i) f_next[v * dim + i] = f_prev[u * dim + i] + out[v * dim + i];
      }
      f_prev = std::move(f_next);
    }
  }

  AdaptedSequence seq(tree, space, std::move(tables), spec.conditionally_symmetric, spec.family);
  seq.recipe_ = spec;
  return seq;
}

bool AdaptedSequence::check_conditional_symmetry() const {
  const double tol = tree_->tolerance();
  for (int n = 1; n <= depth(); ++n) {
    const auto& probs = tree_->level(n).probs;
    for (std::size_t u = 0; u < tree_->node_count(n - 1); ++u) {
      DiscreteLaw law(dim()), negated(dim());
      std::vector<double> neg(dim());
      for (std::size_t j = 0; j < probs.size(); ++j) {
        const auto value = d(n, tree_->child(n, u, j));
        for (std::size_t i = 0; i < dim(); ++i) neg[i] = -value[i];
        law.add(value, probs[j]);
        negated.add(neg, probs[j]);
      }
      law.canonicalize();
      negated.canonicalize();
      if (DiscreteLaw::distance(law, negated, tol) > tol) return false;
    }
  }
  return true;
}

SequenceSpec AdaptedSequence::to_spec() const {
  if (recipe_) return *recipe_;
  SequenceSpec spec;
  spec.space = space_.to_string();
  spec.levels = tree_->levels();
  spec.increment = IncrementRule::table;
  spec.predictable = PredictableRule::none;
  spec.conditionally_symmetric = symmetric_;
  spec.family = family_;
  for (int n = 1; n <= depth(); ++n) {
    std::vector<Vec> list;
    list.reserve(tree_->node_count(n));
    for (std::size_t v = 0; v < tree_->node_count(n); ++v) list.emplace_back(d(n, v));
    spec.increments.push_back(std::move(list));
  }
  return spec;
}

// ---------------------------------------------------------------- tangent pairs

TangentPair::TangentPair(std::shared_ptr<const AdaptedSequence> base, CopyRule rule)
    : base_(std::move(base)), rule_(rule) {
  require(base_ != nullptr, "tangent pair needs a base sequence");
  if (rule_ == CopyRule::shared_innovation) {
    const auto& tree = base_->tree();
    for (int n = 2; n <= tree.depth(); ++n) {
      require(tree.level(n).probs == tree.level(1).probs,
              "shared-innovation copies need identical level probabilities", ErrorCode::precondition);
    }
  }
}

std::size_t TangentPair::e_node(int n, std::size_t leaf, std::size_t leaf_tilde) const {
  const auto& tree = base_->tree();
  const int N = tree.depth();
  switch (rule_) {
    case CopyRule::identical:
      return tree.ancestor(leaf, N, n);
    case CopyRule::shared_innovation:
      return tree.child(n, tree.ancestor(leaf, N, n - 1), tree.symbol_on_path(leaf_tilde, N, 1));
    case CopyRule::decoupled:
      break;
  }
  return tree.child(n, tree.ancestor(leaf, N, n - 1), tree.symbol_on_path(leaf_tilde, N, n));
}

std::span<const double> TangentPair::d(int n, std::size_t leaf) const {
  return base_->d(n, base_->tree().ancestor(leaf, base_->depth(), n));
}

TangentPair decouple(const AdaptedSequence& seq) {
  return TangentPair(std::make_shared<const AdaptedSequence>(seq), CopyRule::decoupled);
}

TangentPair decouple(std::shared_ptr<const AdaptedSequence> seq) {
  return TangentPair(std::move(seq), CopyRule::decoupled);
}

TangencyReport verify_tangency(const TangentPair& pair, double tol) {
  const auto& tree = pair.base().tree();
  require_joint_budget(tree);
  const int N = tree.depth();
  const std::size_t L = tree.leaf_count();
  const std::size_t dim = pair.dim();
  const auto& leaf_probs = tree.node_probs(N);

  TangencyReport report;
  report.outcomes = L * L;

  for (int n = 1; n <= N; ++n) {
    const std::size_t atoms = tree.node_count(n - 1);
    const std::size_t stride = L / atoms;
    for (std::size_t u = 0; u < atoms; ++u) {
      DiscreteLaw law_d(dim);
      for (std::size_t j = 0; j < tree.alphabet(n); ++j) {
        law_d.add(pair.base().d(n, tree.child(n, u, j)), tree.level(n).probs[j]);
      }
      law_d.canonicalize();
      for (std::size_t leaf = u * stride; leaf < (u + 1) * stride; ++leaf) {
        DiscreteLaw law_e(dim);
        for (std::size_t wt = 0; wt < L; ++wt) law_e.add(pair.e(n, leaf, wt), leaf_probs[wt]);
        law_e.canonicalize();
        report.max_law_gap = std::max(report.max_law_gap, DiscreteLaw::distance(law_d, law_e, tol));
      }
    }
  }

  std::vector<double> joint_value(static_cast<std::size_t>(N) * dim);
  for (std::size_t leaf = 0; leaf < L; ++leaf) {
    DiscreteLaw joint(joint_value.size());
    std::vector<DiscreteLaw> marginals(static_cast<std::size_t>(N), DiscreteLaw(dim));
    for (std::size_t wt = 0; wt < L; ++wt) {
      for (int n = 1; n <= N; ++n) {
        const auto en = pair.e(n, leaf, wt);
        std::copy(en.begin(), en.end(), joint_value.begin() + static_cast<std::ptrdiff_t>((n - 1) * dim));
        marginals[static_cast<std::size_t>(n - 1)].add(en, leaf_probs[wt]);
      }
      joint.add(joint_value, leaf_probs[wt]);
    }
    joint.canonicalize();
    for (auto& m : marginals) m.canonicalize();
    for (std::size_t a = 0; a < joint.size(); ++a) {
      const auto value = joint.value(a);
      double product = 1.0;
      for (int n = 1; n <= N; ++n) {
        product *= marginals[static_cast<std::size_t>(n - 1)].prob_of(value.subspan((n - 1) * dim, dim));
      }
      report.max_factorization_gap = std::max(report.max_factorization_gap, std::abs(joint.prob(a) - product));
    }
  }

  report.tangent = report.max_law_gap <= tol;
  report.conditionally_independent = report.max_factorization_gap <= tol;
  return report;
}

bool verify_conditional_independence(const TangentPair& pair, double tol) {
  return verify_tangency(pair, tol).conditionally_independent;
}

// ---------------------------------------------------------------- path functionals

std::vector<std::vector<double>> partial_sums(const AdaptedSequence& seq) {
  const auto& tree = seq.tree();
  const std::size_t dim = seq.dim();
  std::vector<std::vector<double>> f;
  f.emplace_back(dim, 0.0);
  for (int n = 1; n <= tree.depth(); ++n) {
    std::vector<double> next(tree.node_count(n) * dim);
    const auto& prev = f.back();
    for (std::size_t v = 0; v < tree.node_count(n); ++v) {
      const std::size_t u = tree.parent(n, v);
      const auto dn = seq.d(n, v);
      for (std::size_t i = 0; i < dim; ++i) next[v * dim + i] = prev[u * dim + i] + dn[i];
    }
    f.push_back(std::move(next));
  }
  return f;
}

RunningMax running_max(const AdaptedSequence& seq) {
  const auto& tree = seq.tree();
  const std::size_t dim = seq.dim();
  const auto f = partial_sums(seq);
  RunningMax out;
  out.f_star.push_back({0.0});
  out.d_star.push_back({0.0});
  for (int n = 1; n <= tree.depth(); ++n) {
    std::vector<double> fs(tree.node_count(n)), ds(tree.node_count(n));
    for (std::size_t v = 0; v < tree.node_count(n); ++v) {
      const std::size_t u = tree.parent(n, v);
      const std::span<const double> fn(f[static_cast<std::size_t>(n)].data() + v * dim, dim);
      fs[v] = std::max(out.f_star.back()[u], seq.space().norm(fn));
      ds[v] = std::max(out.d_star.back()[u], seq.space().norm(seq.d(n, v)));
    }
    out.f_star.push_back(std::move(fs));
    out.d_star.push_back(std::move(ds));
  }
  return out;
}

AdaptedSequence window(const AdaptedSequence& seq, int k, int l) {
  require(k >= 0 && l <= seq.depth(), "window bounds must satisfy 0 <= k <= l <= depth");
  require(k <= l, "window needs k <= l");
  std::vector<std::vector<double>> tables;
  for (int n = 1; n <= seq.depth(); ++n) {
    if (n > k && n <= l) {
      tables.push_back(seq.table(n));
    } else {
      tables.emplace_back(seq.table(n).size(), 0.0);
    }
  }
  return AdaptedSequence(seq.tree_ptr(), seq.space(), std::move(tables), seq.conditionally_symmetric(),
                         seq.family());
}

StoppingRule::StoppingRule(std::shared_ptr<const FiltrationTree> tree, std::vector<std::vector<bool>> stopped)
    : tree_(std::move(tree)), stopped_(std::move(stopped)) {
  require(tree_ != nullptr, "stopping rule needs a tree");
  require(stopped_.size() == static_cast<std::size_t>(tree_->depth()),
          "stopping rule needs one flag list per depth 0..N-1", ErrorCode::dimension_mismatch);
  for (int n = 0; n < tree_->depth(); ++n) {
    require(stopped_[static_cast<std::size_t>(n)].size() == tree_->node_count(n),
            "stopping rule flags have the wrong size at depth " + std::to_string(n), ErrorCode::dimension_mismatch);
    if (n == 0) continue;
    for (std::size_t v = 0; v < tree_->node_count(n); ++v) {
      require(!stopped_by(n - 1, tree_->parent(n, v)) || stopped_by(n, v),
              "stopping events {tau <= n} must be increasing in n");
    }
  }
}

StoppingRule StoppingRule::never(std::shared_ptr<const FiltrationTree> tree) {
  std::vector<std::vector<bool>> flags;
  for (int n = 0; n < tree->depth(); ++n) flags.emplace_back(tree->node_count(n), false);
  return StoppingRule(std::move(tree), std::move(flags));
}

StoppingRule StoppingRule::at_root(std::shared_ptr<const FiltrationTree> tree) {
  std::vector<std::vector<bool>> flags;
  for (int n = 0; n < tree->depth(); ++n) flags.emplace_back(tree->node_count(n), true);
  return StoppingRule(std::move(tree), std::move(flags));
}

StoppingRule StoppingRule::first_exceed(const AdaptedSequence& seq, double threshold) {
  const auto& tree = seq.tree();
  const auto f = partial_sums(seq);
  std::vector<std::vector<bool>> flags;
  flags.push_back({threshold < 0.0});
  for (int n = 1; n < tree.depth(); ++n) {
    std::vector<bool> level(tree.node_count(n));
    for (std::size_t v = 0; v < level.size(); ++v) {
      const std::span<const double> fn(f[static_cast<std::size_t>(n)].data() + v * seq.dim(), seq.dim());
      level[v] = flags.back()[tree.parent(n, v)] || seq.space().norm(fn) > threshold;
    }
    flags.push_back(std::move(level));
  }
  return StoppingRule(seq.tree_ptr(), std::move(flags));
}

namespace {

AdaptedSequence apply_stop(const AdaptedSequence& seq, const StoppingRule& rule, bool keep_before) {
  require(rule.tree() == seq.tree(), "stopping rule is defined on a different tree");
  const auto& tree = seq.tree();
  const std::size_t dim = seq.dim();
  std::vector<std::vector<double>> tables;
  for (int n = 1; n <= seq.depth(); ++n) {
    std::vector<double> table = seq.table(n);
    for (std::size_t v = 0; v < tree.node_count(n); ++v) {
      // {tau >= n} is the complement of {tau <= n-1}
      const bool running = !rule.stopped_by(n - 1, tree.parent(n, v));
      if (running != keep_before) std::fill_n(table.begin() + static_cast<std::ptrdiff_t>(v * dim), dim, 0.0);
    }
    tables.push_back(std::move(table));
  }
  return AdaptedSequence(seq.tree_ptr(), seq.space(), std::move(tables), seq.conditionally_symmetric(),
                         seq.family());
}

}  // namespace

AdaptedSequence stop(const AdaptedSequence& seq, const StoppingRule& rule) { return apply_stop(seq, rule, true); }

AdaptedSequence start(const AdaptedSequence& seq, const StoppingRule& rule) { return apply_stop(seq, rule, false); }

AdaptedSequence symmetrize(const AdaptedSequence& seq) {
  const auto& tree = seq.tree();
  const std::size_t dim = seq.dim();
  std::vector<Level> levels;
  for (const auto& level : tree.levels()) {
    Level out;
    for (std::size_t j = 0; j < level.probs.size(); ++j) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> value = level.values[j].coords();
        value.push_back(sign);
        out.values.emplace_back(std::move(value));
        out.probs.push_back(level.probs[j] / 2.0);
      }
    }
    levels.push_back(std::move(out));
  }
  auto signed_tree = std::make_shared<const FiltrationTree>(std::move(levels));
  std::vector<std::size_t> original{0};  // original node behind each new node
  std::vector<std::vector<double>> tables;
  for (int n = 1; n <= tree.depth(); ++n) {
    std::vector<std::size_t> next(signed_tree->node_count(n));
    std::vector<double> table(next.size() * dim);
    for (std::size_t v = 0; v < next.size(); ++v) {
      const std::size_t sym = signed_tree->symbol(n, v);
      next[v] = tree.child(n, original[signed_tree->parent(n, v)], sym / 2);
      const double sign = sym % 2 == 0 ? 1.0 : -1.0;
      const auto dn = seq.d(n, next[v]);
      for (std::size_t i = 0; i < dim; ++i) table[v * dim + i] = sign * dn[i];
    }
    tables.push_back(std::move(table));
    original = std::move(next);
  }
  return AdaptedSequence(std::move(signed_tree), seq.space(), std::move(tables), true, seq.family());
}

std::pair<TangentPair, TangentPair> davis_split(const TangentPair& pair) {
  const auto& seq = pair.base();
  const auto& tree = seq.tree();
  const std::size_t dim = seq.dim();
  const auto stars = running_max(seq);
  auto small = zero_tables(tree, dim);
  auto large = zero_tables(tree, dim);
  large[0] = seq.table(1);
  for (int n = 2; n <= seq.depth(); ++n) {
    const auto& bound = stars.d_star[static_cast<std::size_t>(n - 1)];
    for (std::size_t v = 0; v < tree.node_count(n); ++v) {
      const auto dn = seq.d(n, v);
      auto& target = seq.space().norm(dn) <= 2.0 * bound[tree.parent(n, v)] ? small : large;
      std::copy(dn.begin(), dn.end(), target[static_cast<std::size_t>(n - 1)].begin() + static_cast<std::ptrdiff_t>(v * dim));
    }
  }
  auto make = [&](std::vector<std::vector<double>> tables) {
    return TangentPair(std::make_shared<const AdaptedSequence>(seq.tree_ptr(), seq.space(), std::move(tables),
                                                               seq.conditionally_symmetric(), seq.family()),
                       pair.rule());
  };
  return {make(std::move(small)), make(std::move(large))};
}

std::vector<PathSample> sample_paths(const TangentPair& pair, std::size_t count, std::uint64_t seed,
                                     unsigned workers) {
  require(count >= 1, "sample_paths needs count >= 1");
  std::vector<PathSample> out(count);
  const auto& tree = pair.base().tree();
  parallel_for(block_count(count), workers, [&](std::size_t block) {
    const std::size_t end = std::min(count, (block + 1) * kReplicaBlock);
    for (std::size_t i = block * kReplicaBlock; i < end; ++i) {
      CounterRng path_rng(seed, i, Substream::path);
      CounterRng copy_rng(seed, i, Substream::decoupled_copy);
      const std::size_t leaf = sample_leaf(tree, path_rng);
      const std::size_t leaf_tilde = sample_leaf(tree, copy_rng);
      fill_base_path(pair, leaf, out[i]);
      fill_copy_path(pair, leaf, leaf_tilde, out[i]);
    }
  });
  return out;
}

IndependentFamily conditional_family(const AdaptedSequence& seq, std::size_t atom) {
  const auto& tree = seq.tree();
  const int N = tree.depth();
  require(atom < tree.node_count(N - 1), "atom index out of range");
  IndependentFamily family;
  family.dim = seq.dim();
  for (int k = 1; k <= N; ++k) {
    const std::size_t u = tree.ancestor(atom, N - 1, k - 1);
    std::vector<std::span<const double>> values;
    for (std::size_t j = 0; j < tree.alphabet(k); ++j) values.push_back(seq.d(k, tree.child(k, u, j)));
    family.values.push_back(std::move(values));
    family.probs.emplace_back(tree.level(k).probs);
  }
  return family;
}

void enumerate_family(const IndependentFamily& family, const SpaceDescriptor& space,
                      const std::function<void(const FamilyOutcome&)>& visit) {
  const std::size_t levels = family.values.size();
  const std::size_t dim = family.dim;
  std::vector<std::vector<double>> sums(levels + 1, std::vector<double>(dim, 0.0));
  auto recurse = [&](auto&& self, std::size_t k, double prob, double max_partial, double max_term) -> void {
    if (k == levels) {
      visit(FamilyOutcome{prob, sums[k], max_partial, max_term});
      return;
    }
    for (std::size_t j = 0; j < family.values[k].size(); ++j) {
      const auto xi = family.values[k][j];
      for (std::size_t i = 0; i < dim; ++i) sums[k + 1][i] = sums[k][i] + xi[i];
      self(self, k + 1, prob * family.probs[k][j], std::max(max_partial, space.norm(sums[k + 1])),
           std::max(max_term, space.norm(xi)));
    }
  };
  recurse(recurse, 0, 1.0, 0.0, 0.0);
}

void enumerate_joint(const TangentPair& pair, const std::function<void(const JointOutcome&)>& visit) {
  const auto& tree = pair.base().tree();
  require_joint_budget(tree);
  const auto& probs = tree.node_probs(tree.depth());
  PathSample path;
  for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    fill_base_path(pair, leaf, path);
    for (std::size_t wt = 0; wt < tree.leaf_count(); ++wt) {
      fill_copy_path(pair, leaf, wt, path);
      visit(JointOutcome{leaf, wt, probs[leaf] * probs[wt], &path});
    }
  }
}

SequenceSpec random_model(const RandomModelOptions& options, CounterRng& rng) {
  require(options.min_depth >= 1 && options.min_depth <= options.max_depth, "invalid depth range");
  require(options.max_alphabet >= 2, "random models need alphabets of size >= 2");
  SequenceSpec spec;
  spec.space = options.space;
  const std::size_t dim = SpaceDescriptor::parse(options.space).dim();
  const int depth = options.min_depth + static_cast<int>(rng.below(static_cast<std::uint64_t>(options.max_depth - options.min_depth + 1)));
  for (int n = 1; n <= depth; ++n) {
    const std::size_t size = 2 + rng.below(options.max_alphabet - 1);
    Level level;
    if (options.symmetric) {
      const double x = random_in(rng, 0.25, 2.0);
      if (size == 2) {
        level.values = {Vec{x}, Vec{-x}};
        level.probs = {0.5, 0.5};
      } else {
        const double q = random_in(rng, 0.1, 0.45);
        level.values = {Vec{-x}, Vec{0.0}, Vec{x}};
        level.probs = {q, 1.0 - 2.0 * q, q};
      }
    } else {
      double total = 0.0;
      for (std::size_t j = 0; j < size; ++j) {
        level.values.push_back(Vec{random_in(rng, -2.0, 2.0)});
        level.probs.push_back(random_in(rng, 0.2, 1.0));
        total += level.probs.back();
      }
      double rest = 0.0;
      for (std::size_t j = 0; j + 1 < size; ++j) {
        level.probs[j] /= total;
        rest += level.probs[j];
      }
      level.probs.back() = 1.0 - rest;
    }
    spec.levels.push_back(std::move(level));
  }
  auto random_vec = [&] {
    Vec v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = random_in(rng, -1.0, 1.0);
    return v;
  };
  const PredictableRule rules[] = {PredictableRule::constant, PredictableRule::table,
                                   PredictableRule::previous_increment, PredictableRule::partial_sum};
  spec.increment = IncrementRule::scalar;
  spec.predictable = rules[rng.below(4)];
  switch (spec.predictable) {
    case PredictableRule::constant:
      for (int n = 1; n <= depth; ++n) spec.labels.push_back({random_vec()});
      break;
    case PredictableRule::table: {
      std::size_t count = 1;
      for (int n = 1; n <= depth; ++n) {
        std::vector<Vec> list;
        for (std::size_t u = 0; u < count; ++u) list.push_back(random_vec());
        spec.labels.push_back(std::move(list));
        count *= spec.levels[static_cast<std::size_t>(n - 1)].probs.size();
      }
      break;
    }
    default:
      spec.initial = random_vec();
      spec.scale = random_in(rng, -1.0, 1.0);
      break;
  }
  spec.conditionally_symmetric = options.symmetric;
  spec.family = "random";
  return spec;
}

// ---------------------------------------------------------------- discrete laws

void DiscreteLaw::add(std::span<const double> value, double prob) {
  values_.insert(values_.end(), value.begin(), value.end());
  probs_.push_back(prob);
}

void DiscreteLaw::canonicalize() {
  std::vector<std::size_t> order(probs_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) { return lex_less(value(a), value(b)); });
  std::vector<double> values;
  std::vector<double> probs;
  for (std::size_t idx : order) {
    const auto v = value(idx);
    if (!probs.empty() && same_values({values.data() + values.size() - dim_, dim_}, v)) {
      probs.back() += probs_[idx];
    } else {
      values.insert(values.end(), v.begin(), v.end());
      probs.push_back(probs_[idx]);
    }
  }
  values_ = std::move(values);
  probs_ = std::move(probs);
}

double DiscreteLaw::prob_of(std::span<const double> value) const {
  std::size_t lo = 0, hi = probs_.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (lex_less(this->value(mid), value)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo < probs_.size() && same_values(this->value(lo), value) ? probs_[lo] : 0.0;
}

double DiscreteLaw::distance(const DiscreteLaw& a, const DiscreteLaw& b, double tol) {
  if (a.size() != b.size() || a.dim() != b.dim()) return std::numeric_limits<double>::infinity();
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto va = a.value(i);
    const auto vb = b.value(i);
    for (std::size_t k = 0; k < a.dim(); ++k) {
      const double diff = std::abs(va[k] - vb[k]);
      if (diff > tol) return std::numeric_limits<double>::infinity();
      gap = std::max(gap, diff);
    }
    gap = std::max(gap, std::abs(a.prob(i) - b.prob(i)));
  }
  return gap;
}

}  // namespace declab
