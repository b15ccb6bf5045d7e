#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "declab/error.hpp"
#include "declab/rng.hpp"
#include "declab/sequence_io.hpp"

using namespace declab;
using testing::build;
using testing::pw_constant;
using testing::pw_table;

namespace {

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

DiscreteLaw law_of_f(const AdaptedSequence& seq) {
  const auto sums = partial_sums(seq);
  const int N = seq.depth();
  DiscreteLaw law(seq.dim());
  for (std::size_t v = 0; v < seq.tree().leaf_count(); ++v) {
    law.add(std::span<const double>(sums[N].data() + v * seq.dim(), seq.dim()), seq.tree().node_prob(N, v));
  }
  law.canonicalize();
  return law;
}

DiscreteLaw law_of_g(const TangentPair& pair) {
  DiscreteLaw law(pair.dim());
  enumerate_joint(pair, [&](const JointOutcome& o) { law.add(o.path->g, o.prob); });
  law.canonicalize();
  return law;
}

DiscreteLaw law_of_f_star(const AdaptedSequence& seq) {
  const auto stars = running_max(seq);
  const int N = seq.depth();
  DiscreteLaw law(1);
  for (std::size_t v = 0; v < seq.tree().leaf_count(); ++v) {
    law.add(std::span<const double>(&stars.f_star[N][v], 1), seq.tree().node_prob(N, v));
  }
  law.canonicalize();
  return law;
}

// A scalar model whose predictable multipliers depend on the past.
SequenceSpec adapted_example() {
  return pw_table("l2:1", {{Vec{1.0}}, {Vec{0.5}, Vec{-2.0}}, {Vec{1.0}, Vec{0.25}, Vec{-1.0}, Vec{2.0}}});
}

}  // namespace

TEST_CASE("Paley-Walsh trees") {
  const auto t1 = FiltrationTree::paley_walsh(1);
  CHECK(t1.leaf_count() == 2);
  CHECK(t1.node_prob(1, 0) == 0.5);
  CHECK(t1.node_prob(1, 1) == 0.5);
  const auto t3 = FiltrationTree::paley_walsh(3);
  CHECK(t3.leaf_count() == 8);
  for (std::size_t v = 0; v < 8; ++v) CHECK(t3.node_prob(3, v) == 0.125);
  CHECK(t3.is_dyadic());
  CHECK(t3.tolerance() == 0.0);
  CHECK_THROWS_AS(FiltrationTree::paley_walsh(0), Error);
}

TEST_CASE("mixed radix indexing") {
  const FiltrationTree tree({Level{{Vec{1.0}, Vec{-1.0}}, {0.5, 0.5}},
                             Level{{Vec{1.0}, Vec{0.0}, Vec{-1.0}}, {0.25, 0.5, 0.25}}});
  CHECK(tree.leaf_count() == 6);
  CHECK(tree.child(2, 1, 2) == 5);
  CHECK(tree.parent(2, 5) == 1);
  CHECK(tree.symbol(2, 5) == 2);
  CHECK(tree.ancestor(4, 2, 1) == 1);
  CHECK(tree.node_prob(2, 4) == 0.25);
  CHECK_FALSE(FiltrationTree({Level{{Vec{1.0}, Vec{-1.0}}, {0.3, 0.7}}}).is_dyadic());
  CHECK_THROWS_AS(FiltrationTree({Level{{Vec{1.0}, Vec{-1.0}}, {0.3, 0.6}}}), Error);
}

TEST_CASE("deterministic multipliers give equal laws of f_N and g_N") {
  const auto seq = build(pw_constant("l2:2", {Vec{1.0, 0.0}, Vec{0.5, 1.0}, Vec{-1.0, 2.0}}));
  const TangentPair pair(seq);
  CHECK(DiscreteLaw::distance(law_of_f(*seq), law_of_g(pair), 0.0) == 0.0);
}

TEST_CASE("the decoupled copy is tangent and conditionally independent") {
  const TangentPair pair(build(adapted_example()));
  const auto rep = verify_tangency(pair, 0.0);
  CHECK(rep.tangent);
  CHECK(rep.conditionally_independent);
  CHECK(rep.outcomes == 64);
  CHECK(verify_conditional_independence(pair, 0.0));
}

TEST_CASE("broken copies are caught") {
  const auto seq = build(adapted_example());
  const auto identical = verify_tangency(TangentPair(seq, CopyRule::identical), 0.0);
  CHECK_FALSE(identical.tangent);
  CHECK(identical.conditionally_independent);
  const auto shared = verify_tangency(TangentPair(seq, CopyRule::shared_innovation), 0.0);
  CHECK(shared.tangent);
  CHECK_FALSE(shared.conditionally_independent);
}

TEST_CASE("depth one pairs are always tangent") {
  for (auto rule : {CopyRule::decoupled, CopyRule::shared_innovation}) {
    const auto rep = verify_tangency(TangentPair(build(pw_constant("l2:1", {Vec{2.0}})), rule), 0.0);
    CHECK(rep.tangent);
    CHECK(rep.conditionally_independent);
  }
}

TEST_CASE("random models decouple correctly") {
  CounterRng rng(5, 0, Substream::model);
  RandomModelOptions options;
  options.max_depth = 4;
  for (int i = 0; i < 40; ++i) {
    options.symmetric = i % 2 == 0;
    options.space = i % 3 == 0 ? "lp:0.5:2" : "linf:3";
    const auto seq = build(random_model(options, rng));
    const auto rep = verify_tangency(TangentPair(seq), seq->tree().tolerance());
    CHECK(rep.tangent);
    CHECK(rep.conditionally_independent);
    if (options.symmetric) CHECK(seq->check_conditional_symmetry());
  }
}

TEST_CASE("partial sums and running maxima") {
  const auto seq = build(pw_constant("l2:2", {Vec{1.0, 0.0}, Vec{0.0, 1.0}}));
  const auto sums = partial_sums(*seq);
  CHECK(sums[2][0] == 1.0);
  CHECK(sums[2][1] == 1.0);
  const auto stars = running_max(*seq);
  CHECK(stars.f_star[2][0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(stars.d_star[2][0] == 1.0);
  CHECK(stars.f_star[0][0] == 0.0);

  const auto single = build(pw_constant("l2:2", {Vec{3.0, 4.0}}));
  const auto s1 = running_max(*single);
  CHECK(s1.f_star[1][0] == 5.0);
  CHECK(s1.f_star[1][1] == 5.0);
}

TEST_CASE("flipping signs of deterministic multipliers keeps the law of f*") {
  const auto seq = build(pw_constant("l2:2", {Vec{1.0, 0.5}, Vec{-2.0, 1.0}, Vec{0.25, 0.25}}));
  const auto flipped = build(pw_constant("l2:2", {Vec{1.0, 0.5}, Vec{2.0, -1.0}, Vec{-0.25, -0.25}}));
  CHECK(DiscreteLaw::distance(law_of_f_star(*seq), law_of_f_star(*flipped), 0.0) == 0.0);
}

TEST_CASE("windows") {
  const auto seq = build(adapted_example());
  const auto id = window(*seq, 0, 3);
  for (int n = 1; n <= 3; ++n) CHECK(id.table(n) == seq->table(n));
  const auto empty = window(*seq, 2, 2);
  for (int n = 1; n <= 3; ++n) CHECK(all_zero(empty.table(n)));
  const auto middle = window(*seq, 1, 2);
  CHECK(all_zero(middle.table(1)));
  CHECK(middle.table(2) == seq->table(2));
  CHECK(all_zero(middle.table(3)));
  CHECK_THROWS_AS(window(*seq, 2, 1), Error);
}

TEST_CASE("stopping") {
  const auto seq = build(adapted_example());
  const auto tree = seq->tree_ptr();
  const auto never = stop(*seq, StoppingRule::never(tree));
  for (int n = 1; n <= 3; ++n) CHECK(never.table(n) == seq->table(n));
  const auto root = stop(*seq, StoppingRule::at_root(tree));
  for (int n = 1; n <= 3; ++n) CHECK(all_zero(root.table(n)));
  const auto started = start(*seq, StoppingRule::at_root(tree));
  for (int n = 1; n <= 3; ++n) CHECK(started.table(n) == seq->table(n));

  // Before tau the sums are at most 1, and one more increment is added at tau.
  const auto stopped = stop(*seq, StoppingRule::first_exceed(*seq, 1.0));
  const auto sums = partial_sums(stopped);
  double d_max = 0.0;
  for (int n = 1; n <= 3; ++n) {
    for (double x : seq->table(n)) d_max = std::max(d_max, std::abs(x));
  }
  for (int n = 0; n <= 3; ++n) {
    for (double x : sums[n]) CHECK(std::abs(x) <= 1.0 + d_max);
  }
}

TEST_CASE("Davis decomposition") {
  SUBCASE("constant norms") {
    const auto pair = testing::pair_of(pw_constant("l2:1", {Vec{2.0}, Vec{-2.0}, Vec{2.0}}));
    const auto [good, bad] = davis_split(pair);
    CHECK(bad.base().table(1) == pair.base().table(1));
    CHECK(all_zero(bad.base().table(2)));
    CHECK(all_zero(bad.base().table(3)));
    CHECK(all_zero(good.base().table(1)));
    CHECK(good.base().table(2) == pair.base().table(2));
  }
  SUBCASE("geometric growth goes entirely to the large part") {
    const auto pair = testing::pair_of(pw_constant("l2:1", {Vec{3.0}, Vec{9.0}, Vec{27.0}}));
    const auto [good, bad] = davis_split(pair);
    for (int n = 1; n <= 3; ++n) {
      CHECK(bad.base().table(n) == pair.base().table(n));
      CHECK(all_zero(good.base().table(n)));
    }
  }
}

TEST_CASE("symmetrization") {
  CounterRng rng(9, 0, Substream::model);
  RandomModelOptions options;
  options.symmetric = false;
  options.max_depth = 3;
  for (int i = 0; i < 10; ++i) {
    const auto seq = build(random_model(options, rng));
    const auto sym = symmetrize(*seq);
    CHECK(sym.conditionally_symmetric());
    CHECK(sym.check_conditional_symmetry());
    CHECK(sym.tree().leaf_count() == seq->tree().leaf_count() << seq->depth());
  }
}

TEST_CASE("declared symmetry is verified") {
  auto spec = adapted_example();
  spec.levels[1] = Level{{Vec{1.0}, Vec{-0.5}}, {0.5, 0.5}};
  CHECK_THROWS_AS(AdaptedSequence::build(spec), Error);
  spec.conditionally_symmetric = false;
  CHECK_NOTHROW(AdaptedSequence::build(spec));
}

TEST_CASE("path sampling") {
  const TangentPair pair(build(adapted_example()));
  const auto a = sample_paths(pair, 1, 17);
  const auto b = sample_paths(pair, 1, 17);
  CHECK(a[0].f == b[0].f);
  CHECK(a[0].g == b[0].g);
  const auto c = sample_paths(pair, 64, 17);
  const auto d = sample_paths(pair, 64, 18);
  bool differ = false;
  for (std::size_t i = 0; i < 64; ++i) differ |= !(c[i].f == d[i].f) || !(c[i].g == d[i].g);
  CHECK(differ);
  CHECK(sample_paths(pair, 3000, 4, 1)[2999].g == sample_paths(pair, 3000, 4, 3)[2999].g);

  // Empirical E|f_N|^3 against the exact value.
  const double p = 3.0;
  double exact = 0.0;
  enumerate_joint(pair, [&](const JointOutcome& o) { exact += o.prob * std::pow(std::abs(o.path->f[0]), p); });
  const std::size_t n = 100000;
  const auto paths = sample_paths(pair, n, 99, 2);
  double s = 0.0, s2 = 0.0;
  for (const auto& path : paths) {
    const double x = std::pow(std::abs(path.f[0]), p);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - exact) <= 4.0 * se);
}

TEST_CASE("discrete laws") {
  DiscreteLaw a(1), b(1);
  a.add(Vec{1.0}, 0.25);
  a.add(Vec{-1.0}, 0.5);
  a.add(Vec{1.0}, 0.25);
  a.canonicalize();
  CHECK(a.size() == 2);
  CHECK(a.prob_of(Vec{1.0}) == 0.5);
  b.add(Vec{-1.0}, 0.5);
  b.add(Vec{1.0}, 0.5);
  b.canonicalize();
  CHECK(DiscreteLaw::distance(a, b, 0.0) == 0.0);
  DiscreteLaw c(1);
  c.add(Vec{2.0}, 1.0);
  c.canonicalize();
  CHECK(std::isinf(DiscreteLaw::distance(a, c, 0.0)));
}

TEST_CASE("sequence recipes round trip through JSON") {
  CounterRng rng(21, 0, Substream::model);
  RandomModelOptions options;
  options.space = "nested:1x2,3x2";
  for (int i = 0; i < 20; ++i) {
    options.symmetric = i % 2 == 1;
    const auto spec = random_model(options, rng);
    const auto text = spec_to_string(spec);
    CHECK(spec_to_string(spec_from_string(text)) == text);
    const auto seq = AdaptedSequence::build(spec_from_string(text));
    const auto again = AdaptedSequence::build(seq.to_spec());
    for (int n = 1; n <= seq.depth(); ++n) CHECK(again.table(n) == seq.table(n));
  }
}

TEST_CASE("malformed recipes are parse errors") {
  for (const char* text : {"{", "[]", R"({"space":"l2:1"})", R"({"space":"l2:1","tree":{"levels":[]},"increment":"bogus"})"}) {
    try {
      AdaptedSequence::build(spec_from_string(text));
      FAIL("expected an error for " << text);
    } catch (const Error& e) {
      CHECK((e.code() == ErrorCode::parse || e.code() == ErrorCode::invalid_argument));
    }
  }
}

TEST_CASE("FNV-1a") {
  CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
}
