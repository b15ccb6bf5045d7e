#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "declab/spaces.hpp"

namespace declab {

class CounterRng;

// Joint outcome spaces larger than this are refused by exact enumeration.
constexpr std::size_t kEnumerationCap = 10'000'000;
// Slack for probability comparisons on trees whose probabilities are not dyadic.
constexpr double kExactSlack = 1e-12;

struct Level {
  std::vector<Vec> values;
  std::vector<double> probs;
};

// Finite product-innovation filtration. Depth-n nodes are the atoms of F_n and
// are numbered in mixed radix with level 1 as the most significant digit, so
// child(u, j) = u * |A_n| + j and every ancestor is a single integer division.
class FiltrationTree {
 public:
  explicit FiltrationTree(std::vector<Level> levels);
  static FiltrationTree paley_walsh(int depth);

  int depth() const noexcept { return static_cast<int>(levels_.size()); }
  const Level& level(int n) const { return levels_[static_cast<std::size_t>(n - 1)]; }
  const std::vector<Level>& levels() const noexcept { return levels_; }
  std::size_t alphabet(int n) const { return level(n).probs.size(); }
  std::size_t node_count(int n) const { return counts_[static_cast<std::size_t>(n)]; }
  std::size_t leaf_count() const { return counts_.back(); }

  std::size_t child(int n, std::size_t u, std::size_t j) const { return u * alphabet(n) + j; }
  std::size_t parent(int n, std::size_t v) const { return v / alphabet(n); }
  std::size_t symbol(int n, std::size_t v) const { return v % alphabet(n); }
  // Ancestor at depth `to` of node v at depth `from` (to <= from).
  std::size_t ancestor(std::size_t v, int from, int to) const {
    return v / (counts_[static_cast<std::size_t>(from)] / counts_[static_cast<std::size_t>(to)]);
  }
  // Level-n symbol along the path to node v at depth `from` (n <= from).
  std::size_t symbol_on_path(std::size_t v, int from, int n) const {
    return symbol(n, ancestor(v, from, n));
  }
  double node_prob(int n, std::size_t v) const { return probs_[static_cast<std::size_t>(n)][v]; }
  std::span<const double> node_probs(int n) const { return probs_[static_cast<std::size_t>(n)]; }

  // All level probabilities are powers of 1/2; sums of path weights are then
  // exact in double precision and comparisons can use zero tolerance.
  bool is_dyadic() const noexcept { return dyadic_; }
  double tolerance() const noexcept { return dyadic_ ? 0.0 : kExactSlack; }

  bool operator==(const FiltrationTree& other) const;

 private:
  std::vector<Level> levels_;
  std::vector<std::size_t> counts_;
  std::vector<std::vector<double>> probs_;
  bool dyadic_ = false;
};

std::size_t sample_leaf(const FiltrationTree& tree, CounterRng& rng);

enum class IncrementRule { scalar, table };
enum class PredictableRule { none, constant, table, previous_increment, partial_sum };

const char* to_string(IncrementRule rule);
const char* to_string(PredictableRule rule);
IncrementRule increment_rule_from_string(const std::string& name);
PredictableRule predictable_rule_from_string(const std::string& name);

// Serializable recipe of an adapted sequence. With the scalar increment rule,
// d_n = xi_n[0] * v_n where v_n is produced by the predictable rule; with the
// table rule the increments are listed per depth-n node.
struct SequenceSpec {
  std::string space;
  std::vector<Level> levels;
  IncrementRule increment = IncrementRule::scalar;
  PredictableRule predictable = PredictableRule::constant;
  // constant: labels[n-1] has one entry; table: labels[n-1][u] per depth-(n-1) node
  std::vector<std::vector<Vec>> labels;
  Vec initial;
  double scale = 1.0;
  // table increment rule: increments[n-1][v] per depth-n node
  std::vector<std::vector<Vec>> increments;
  bool conditionally_symmetric = false;
  std::string family;
};

class AdaptedSequence {
 public:
  // Builds the increment tables from a recipe. A declared conditional symmetry
  // is verified and construction fails if it does not hold.
  static AdaptedSequence build(const SequenceSpec& spec);
  // Wraps precomputed increment tables (one flat node_count(n) x dim array per n).
  AdaptedSequence(std::shared_ptr<const FiltrationTree> tree, SpaceDescriptor space,
                  std::vector<std::vector<double>> increments, bool conditionally_symmetric,
                  std::string family = {});

  const FiltrationTree& tree() const noexcept { return *tree_; }
  const std::shared_ptr<const FiltrationTree>& tree_ptr() const noexcept { return tree_; }
  const SpaceDescriptor& space() const noexcept { return space_; }
  int depth() const noexcept { return tree_->depth(); }
  std::size_t dim() const noexcept { return space_.dim(); }
  const std::string& family() const noexcept { return family_; }
  bool conditionally_symmetric() const noexcept { return symmetric_; }

  // d_n at depth-n node v.
  std::span<const double> d(int n, std::size_t v) const {
    return {increments_[static_cast<std::size_t>(n - 1)].data() + v * dim(), dim()};
  }
  const std::vector<double>& table(int n) const { return increments_[static_cast<std::size_t>(n - 1)]; }

  // True iff every conditional law L(d_n | atom of F_{n-1}) is invariant under negation.
  bool check_conditional_symmetry() const;
  // The original recipe, or an equivalent table recipe for derived sequences.
  SequenceSpec to_spec() const;

 private:
  std::shared_ptr<const FiltrationTree> tree_;
  SpaceDescriptor space_;
  std::vector<std::vector<double>> increments_;
  bool symmetric_ = false;
  std::string family_;
  std::optional<SequenceSpec> recipe_;
};

// How the tangent copy reads the innovation copy. `decoupled` is the genuine
// construction; the other two exist to exercise the verifiers.
enum class CopyRule {
  decoupled,          // e_n = d_n(history of w up to n-1, symbol_n(w~))
  identical,          // e_n = d_n(w): conditionally independent, not tangent
  shared_innovation,  // every e_n uses symbol_1(w~): tangent, not conditionally independent
};

class TangentPair {
 public:
  TangentPair(std::shared_ptr<const AdaptedSequence> base, CopyRule rule = CopyRule::decoupled);

  const AdaptedSequence& base() const noexcept { return *base_; }
  const std::shared_ptr<const AdaptedSequence>& base_ptr() const noexcept { return base_; }
  CopyRule rule() const noexcept { return rule_; }
  int depth() const noexcept { return base_->depth(); }
  std::size_t dim() const noexcept { return base_->dim(); }

  // Depth-n node selected by the leaves (w, w~) for the copy e_n.
  std::size_t e_node(int n, std::size_t leaf, std::size_t leaf_tilde) const;
  std::span<const double> d(int n, std::size_t leaf) const;
  std::span<const double> e(int n, std::size_t leaf, std::size_t leaf_tilde) const {
    return base_->d(n, e_node(n, leaf, leaf_tilde));
  }

 private:
  std::shared_ptr<const AdaptedSequence> base_;
  CopyRule rule_;
};

TangentPair decouple(const AdaptedSequence& seq);
TangentPair decouple(std::shared_ptr<const AdaptedSequence> seq);

struct TangencyReport {
  bool tangent = false;
  bool conditionally_independent = false;
  double max_law_gap = 0.0;
  double max_factorization_gap = 0.0;
  std::size_t outcomes = 0;
};

// Exact check of both defining properties by enumerating all (w, w~) pairs.
// Throws budget_exceeded above kEnumerationCap joint outcomes.
TangencyReport verify_tangency(const TangentPair& pair, double tol);
bool verify_conditional_independence(const TangentPair& pair, double tol);

// f_n per depth-n node, n = 0..N, flat node_count(n) x dim.
std::vector<std::vector<double>> partial_sums(const AdaptedSequence& seq);

struct RunningMax {
  // f*_n and d*_n per depth-n node, n = 0..N (zero at the root).
  std::vector<std::vector<double>> f_star;
  std::vector<std::vector<double>> d_star;
};
RunningMax running_max(const AdaptedSequence& seq);

// Started-stopped sequence with increments 1{k < n <= l} d_n.
AdaptedSequence window(const AdaptedSequence& seq, int k, int l);

// Stopping time given by the per-node events {tau <= n}, n = 0..N-1.
class StoppingRule {
 public:
  StoppingRule(std::shared_ptr<const FiltrationTree> tree, std::vector<std::vector<bool>> stopped);
  static StoppingRule never(std::shared_ptr<const FiltrationTree> tree);
  static StoppingRule at_root(std::shared_ptr<const FiltrationTree> tree);
  // tau = first n with ||f_n|| > threshold.
  static StoppingRule first_exceed(const AdaptedSequence& seq, double threshold);

  const FiltrationTree& tree() const noexcept { return *tree_; }
  bool stopped_by(int n, std::size_t v) const {
    return stopped_[static_cast<std::size_t>(n)][v];
  }

 private:
  std::shared_ptr<const FiltrationTree> tree_;
  std::vector<std::vector<bool>> stopped_;
};

AdaptedSequence stop(const AdaptedSequence& seq, const StoppingRule& rule);
AdaptedSequence start(const AdaptedSequence& seq, const StoppingRule& rule);

// Conditionally symmetric version of any sequence: every level gains an
// independent fair sign s_n (appended to the innovation value) and the
// increment becomes s_n d_n.
AdaptedSequence symmetrize(const AdaptedSequence& seq);

// Davis decomposition: d'_n = d_n 1{||d_n|| <= 2 d*_{n-1}}, d''_n the rest, d'_1 = 0.
// Because the split is a predictable function of d_n, the copies of the two
// parts are the same indicators applied to e_n.
std::pair<TangentPair, TangentPair> davis_split(const TangentPair& pair);

struct PathSample {
  Vec f;  // f_N
  Vec g;  // g_N
  double f_star = 0.0;
  double d_star = 0.0;
  double e_star = 0.0;
  double g_star = 0.0;
};

// Independent joint draws of (w, w~); replica i depends only on (seed, i).
std::vector<PathSample> sample_paths(const TangentPair& pair, std::size_t count, std::uint64_t seed,
                                     unsigned workers = 1);

// Conditional law of the copies (e_1..e_N) given the depth-(N-1) atom u: by
// construction they are independent with e_k ~ L(d_k | ancestor of u at depth k-1).
struct IndependentFamily {
  std::size_t dim = 0;
  std::vector<std::vector<std::span<const double>>> values;  // per level, per symbol
  std::vector<std::span<const double>> probs;                 // per level
};
IndependentFamily conditional_family(const AdaptedSequence& seq, std::size_t atom);

struct FamilyOutcome {
  double prob;
  std::span<const double> sum;  // S_n
  double max_partial;           // max_k ||S_k||
  double max_term;              // max_k ||xi_k||
};
// Depth-first enumeration of the product of the family's levels.
void enumerate_family(const IndependentFamily& family, const SpaceDescriptor& space,
                      const std::function<void(const FamilyOutcome&)>& visit);

struct JointOutcome {
  std::size_t leaf;
  std::size_t leaf_tilde;
  double prob;
  const PathSample* path;
};
// Visits every (w, w~) with its product weight. Throws above kEnumerationCap.
void enumerate_joint(const TangentPair& pair, const std::function<void(const JointOutcome&)>& visit);

struct RandomModelOptions {
  int min_depth = 1;
  int max_depth = 5;
  std::size_t max_alphabet = 3;
  bool symmetric = true;
  std::string space = "l2:2";
};
// Random scalar-increment model: random innovation alphabets (symmetric when
// requested) and a randomly chosen predictable rule.
SequenceSpec random_model(const RandomModelOptions& options, CounterRng& rng);

// Discrete law on R^k, canonically sorted with merged atoms.
class DiscreteLaw {
 public:
  explicit DiscreteLaw(std::size_t dim) : dim_(dim) {}
  void add(std::span<const double> value, double prob);
  void canonicalize();
  std::size_t size() const noexcept { return probs_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> value(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  double prob(std::size_t i) const { return probs_[i]; }
  // Probability of an exact value (after canonicalize); 0 if absent.
  double prob_of(std::span<const double> value) const;
  // max gap between two canonical laws (infinity if supports differ beyond tol).
  static double distance(const DiscreteLaw& a, const DiscreteLaw& b, double tol);

 private:
  std::size_t dim_;
  std::vector<double> values_;
  std::vector<double> probs_;
};

}  // namespace declab
