#include "declab/constants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "declab/error.hpp"
#include "declab/inequalities.hpp"
#include "declab/parallel.hpp"
#include "declab/rng.hpp"

namespace declab {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool randomized(Direction d) { return d == Direction::randomized_minus || d == Direction::randomized_plus; }
bool inverted(Direction d) { return d == Direction::decouple_lower || d == Direction::randomized_plus; }

// E||sum_k eps_k d_k||^p over leaves and all sign vectors.
double randomized_moment(const AdaptedSequence& seq, double p) {
  const auto& tree = seq.tree();
  const int N = seq.depth();
  const std::size_t dim = seq.dim();
  const std::size_t masks = std::size_t{1} << N;
  const double weight = 1.0 / static_cast<double>(masks);
  std::vector<double> sum(dim);
  double acc = 0.0;
  for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    double inner = 0.0;
    for (std::size_t mask = 0; mask < masks; ++mask) {
      std::fill(sum.begin(), sum.end(), 0.0);
      for (int n = 1; n <= N; ++n) {
        const double eps = (mask >> (n - 1)) & 1u ? -1.0 : 1.0;
        const auto dn = seq.d(n, tree.ancestor(leaf, N, n));
        for (std::size_t i = 0; i < dim; ++i) sum[i] += eps * dn[i];
      }
      inner += std::pow(seq.space().norm(sum), p);
    }
    acc += tree.node_prob(N, leaf) * weight * inner;
  }
  return acc;
}

std::vector<double> family_alphabet(SearchFamily family) {
  if (family == SearchFamily::garling_linf) return {-1.0, 0.0, 1.0};
  return {-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0};
}

std::vector<Level> family_levels(SearchFamily family, int depth) {
  Level level;
  if (family == SearchFamily::gaussian_multipliers) {
    // three-point Gauss-Hermite rule: matches the first five normal moments
    const double s = std::sqrt(3.0);
    level.values = {Vec{-s}, Vec{0.0}, Vec{s}};
    level.probs = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
  } else {
    level.values = {Vec{1.0}, Vec{-1.0}};
    level.probs = {0.5, 0.5};
  }
  return std::vector<Level>(static_cast<std::size_t>(depth), level);
}

struct Candidate {
  SequenceSpec spec;
  double value = -std::numeric_limits<double>::infinity();
  double standard_error = 0.0;
  std::string hash;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.hash < b.hash;
}

class Evaluator {
 public:
  explicit Evaluator(const SearchOptions& options) : options_(options) {
    require(options.depth >= 1, "search depth must be at least 1");
    require(options.p > 0.0, "p must be positive");
    const FiltrationTree tree(family_levels(options.family, options.depth));
    exact_ = ratio_exact_feasible(tree, options.direction);
  }
  bool exact() const { return exact_; }

  void operator()(Candidate& c) const {
    auto seq = std::make_shared<const AdaptedSequence>(AdaptedSequence::build(c.spec));
    const TangentPair pair(seq);
    c.hash = witness_hash(c.spec);
    if (exact_) {
      const auto r = ratio(pair, options_.p, options_.direction);
      c.value = r ? *r : -std::numeric_limits<double>::infinity();
      c.standard_error = 0.0;
    } else {
      // common random numbers across candidates: every evaluation uses the same seed
      const auto est = ratio_mc(pair, options_.p, options_.direction, options_.samples, options_.seed, 1);
      c.value = est.applicable ? est.ratio : -std::numeric_limits<double>::infinity();
      c.standard_error = est.standard_error;
    }
  }

 private:
  const SearchOptions& options_;
  bool exact_ = true;
};

}  // namespace

const char* to_string(Direction direction) {
  switch (direction) {
    case Direction::decouple_upper: return "decouple-upper";
    case Direction::decouple_lower: return "decouple-lower";
    case Direction::randomized_minus: return "randomized-minus";
    case Direction::randomized_plus: return "randomized-plus";
  }
  return "decouple-upper";
}

Direction direction_from_string(const std::string& name) {
  for (auto d : {Direction::decouple_upper, Direction::decouple_lower, Direction::randomized_minus,
                 Direction::randomized_plus}) {
    if (name == to_string(d)) return d;
  }
  throw Error(ErrorCode::parse, "unknown direction '" + name + "'");
}

bool ratio_exact_feasible(const FiltrationTree& tree, Direction direction) {
  const int N = tree.depth();
  const double leaves = static_cast<double>(tree.leaf_count());
  const double cap = static_cast<double>(kEnumerationCap);
  if (randomized(direction)) return N < 60 && leaves * std::ldexp(1.0, N) <= cap;
  return leaves * static_cast<double>(tree.node_count(N - 1)) <= cap;
}

std::optional<double> ratio(const TangentPair& pair, double p, Direction direction) {
  require(p > 0.0, "p must be positive");
  require(ratio_exact_feasible(pair.base().tree(), direction), "exact ratio exceeds the enumeration cap",
          ErrorCode::budget_exceeded);
  const auto phi = MomentFunctional::power(p);
  const double num = moment_phi(pair, phi, Statistic::f_norm);
  const double den = randomized(direction) ? randomized_moment(pair.base(), p)
                                           : moment_phi(pair, phi, Statistic::g_norm);
  const double top = inverted(direction) ? den : num;
  const double bottom = inverted(direction) ? num : den;
  if (bottom == 0.0) return std::nullopt;
  return std::pow(top / bottom, 1.0 / p);
}

RatioEstimate ratio_mc(const TangentPair& pair, double p, Direction direction, std::size_t samples,
                       std::uint64_t seed, unsigned workers) {
  require(p > 0.0, "p must be positive");
  require(samples >= 2, "Monte Carlo ratio needs at least two samples");
  const auto& seq = pair.base();
  const auto& tree = seq.tree();
  const auto& space = seq.space();
  const int N = seq.depth();
  const std::size_t dim = seq.dim();
  std::vector<double> xs(samples), ys(samples);
  if (!randomized(direction)) {
    const auto paths = sample_paths(pair, samples, seed, workers);
    for (std::size_t i = 0; i < samples; ++i) {
      xs[i] = std::pow(space.norm(paths[i].f), p);
      ys[i] = std::pow(space.norm(paths[i].g), p);
    }
  } else {
    parallel_for(block_count(samples), workers, [&](std::size_t block) {
      std::vector<double> f(dim), s(dim);
      const std::size_t end = std::min(samples, (block + 1) * kReplicaBlock);
      for (std::size_t i = block * kReplicaBlock; i < end; ++i) {
        CounterRng path_rng(seed, i, Substream::path);
        CounterRng sign_rng(seed, i, Substream::rademacher);
        const std::size_t leaf = sample_leaf(tree, path_rng);
        std::fill(f.begin(), f.end(), 0.0);
        std::fill(s.begin(), s.end(), 0.0);
        for (int n = 1; n <= N; ++n) {
          const double eps = sign_rng.rademacher();
          const auto dn = seq.d(n, tree.ancestor(leaf, N, n));
          for (std::size_t k = 0; k < dim; ++k) {
            f[k] += dn[k];
            s[k] += eps * dn[k];
          }
        }
        xs[i] = std::pow(space.norm(f), p);
        ys[i] = std::pow(space.norm(s), p);
      }
    });
  }
  if (inverted(direction)) std::swap(xs, ys);
  const double n = static_cast<double>(samples);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  RatioEstimate est;
  est.samples = samples;
  if (my == 0.0) {
    est.applicable = false;
    return est;
  }
  double vxx = 0.0, vyy = 0.0, vxy = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    vxx += (xs[i] - mx) * (xs[i] - mx);
    vyy += (ys[i] - my) * (ys[i] - my);
    vxy += (xs[i] - mx) * (ys[i] - my);
  }
  vxx /= n - 1.0;
  vyy /= n - 1.0;
  vxy /= n - 1.0;
  const double q = mx / my;
  // delta method for (mx/my)^{1/p}
  const double var_q = (vxx - 2.0 * q * vxy + q * q * vyy) / (my * my * n);
  est.ratio = std::pow(q, 1.0 / p);
  est.standard_error = q > 0.0 ? est.ratio / p * std::sqrt(std::max(0.0, var_q)) / q : 0.0;
  return est;
}

const char* to_string(SearchFamily family) {
  switch (family) {
    case SearchFamily::paley_walsh_multipliers: return "paley-walsh-multipliers";
    case SearchFamily::gaussian_multipliers: return "gaussian-multipliers";
    case SearchFamily::garling_linf: return "garling-linf";
  }
  return "paley-walsh-multipliers";
}

SearchFamily search_family_from_string(const std::string& name) {
  for (auto f : {SearchFamily::paley_walsh_multipliers, SearchFamily::gaussian_multipliers,
                 SearchFamily::garling_linf}) {
    if (name == to_string(f)) return f;
  }
  throw Error(ErrorCode::parse, "unknown search family '" + name +
                                    "' (paley-walsh-multipliers, gaussian-multipliers, garling-linf)");
}

std::string witness_hash(const SequenceSpec& spec) { return hex64(fnv1a(spec_to_string(spec))); }

SequenceSpec initial_candidate(const SearchOptions& options, std::size_t restart) {
  const auto space = SpaceDescriptor::parse(options.space);
  const std::size_t dim = space.dim();
  SequenceSpec spec;
  spec.space = space.to_string();
  spec.levels = family_levels(options.family, options.depth);
  spec.increment = IncrementRule::scalar;
  spec.predictable = PredictableRule::table;
  spec.conditionally_symmetric = true;
  spec.family = to_string(options.family);
  const FiltrationTree tree(spec.levels);
  for (int n = 1; n <= options.depth; ++n) spec.labels.emplace_back(tree.node_count(n - 1), Vec(dim));

  int garling_depth = 0;
  while ((std::size_t{1} << (garling_depth + 1)) <= dim && garling_depth < options.depth) ++garling_depth;
  if (options.family == SearchFamily::garling_linf && restart == 0 && garling_depth > 0) {
    // coordinate s in {+1,-1}^m (bit k set means s_k = -1) is switched on at
    // level k only along the path that agrees with s so far
    const std::size_t coords = std::size_t{1} << garling_depth;
    for (int k = 1; k <= garling_depth; ++k) {
      for (std::size_t u = 0; u < tree.node_count(k - 1); ++u) {
        for (std::size_t s = 0; s < coords; ++s) {
          bool prefix = true;
          for (int j = 1; j < k; ++j) {
            const std::size_t symbol = tree.symbol_on_path(u, k - 1, j);
            if (symbol != ((s >> (j - 1)) & 1u)) prefix = false;
          }
          if (prefix) spec.labels[static_cast<std::size_t>(k - 1)][u][s] = ((s >> (k - 1)) & 1u) ? -1.0 : 1.0;
        }
      }
    }
    return spec;
  }
  const auto alphabet = family_alphabet(options.family);
  CounterRng rng(options.seed, restart, Substream::model);
  for (auto& level : spec.labels) {
    for (auto& label : level) {
      for (std::size_t i = 0; i < dim; ++i) label[i] = alphabet[rng.below(alphabet.size())];
    }
  }
  return spec;
}

ConstantEstimate search_worst_case(const SearchOptions& options) {
  require(options.restarts >= 1, "search needs at least one restart");
  const Evaluator evaluate(options);
  const auto alphabet = family_alphabet(options.family);
  const std::size_t dim = SpaceDescriptor::parse(options.space).dim();
  const FiltrationTree tree(family_levels(options.family, options.depth));

  std::vector<Candidate> best(options.restarts);
  std::vector<std::size_t> evaluations(options.restarts, 0);
  parallel_for(options.restarts, options.workers, [&](std::size_t restart) {
    Candidate current;
    if (restart == 0 && options.start) {
      current.spec = *options.start;
      require(current.spec.labels.size() == static_cast<std::size_t>(options.depth) &&
                  current.spec.predictable == PredictableRule::table,
              "starting witness must be a table-labelled candidate of the same depth");
    } else {
      current.spec = initial_candidate(options, restart);
    }
    evaluate(current);
    std::size_t count = 1;
    CounterRng rng(options.seed, restart, Substream::search);
    for (std::size_t step = 0; step < options.budget; ++step) {
      const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(options.depth)));
      const std::size_t u = rng.below(tree.node_count(n - 1));
      const std::size_t i = rng.below(dim);
      const double old = current.spec.labels[static_cast<std::size_t>(n - 1)][u][i];
      // draw uniformly among the alphabet values other than the current one
      const auto pos = static_cast<std::size_t>(std::find(alphabet.begin(), alphabet.end(), old) - alphabet.begin());
      std::size_t pick = rng.below(pos < alphabet.size() ? alphabet.size() - 1 : alphabet.size());
      if (pick >= pos) ++pick;
      const double value = alphabet[pick];
      Candidate proposal = current;
      proposal.spec.labels[static_cast<std::size_t>(n - 1)][u][i] = value;
      evaluate(proposal);
      ++count;
      if (proposal.value > current.value) current = std::move(proposal);
    }
    best[restart] = std::move(current);
    evaluations[restart] = count;
  });

  std::size_t winner = 0;
  std::size_t total = 0;
  for (std::size_t r = 0; r < best.size(); ++r) {
    total += evaluations[r];
    if (better(best[r], best[winner])) winner = r;
  }
  ConstantEstimate est;
  est.space = SpaceDescriptor::parse(options.space).to_string();
  est.p = options.p;
  est.direction = options.direction;
  est.family = to_string(options.family);
  est.depth = options.depth;
  est.ratio = std::isfinite(best[winner].value) ? best[winner].value : 0.0;
  est.standard_error = best[winner].standard_error;
  est.method = evaluate.exact() ? "exact" : "mc";
  est.budget = options.budget;
  est.restarts = options.restarts;
  est.samples = evaluate.exact() ? 0 : options.samples;
  est.seed = options.seed;
  est.evaluations = total;
  est.witness = best[winner].spec;
  est.witness_hash = best[winner].hash;
  return est;
}

double replay(const ConstantEstimate& estimate, unsigned workers) {
  auto seq = std::make_shared<const AdaptedSequence>(AdaptedSequence::build(estimate.witness));
  const TangentPair pair(seq);
  if (estimate.method == "exact") {
    const auto r = ratio(pair, estimate.p, estimate.direction);
    return r ? *r : 0.0;
  }
  const auto est = ratio_mc(pair, estimate.p, estimate.direction, estimate.samples, estimate.seed, workers);
  return est.applicable ? est.ratio : 0.0;
}

SequenceSpec embed_witness(const SequenceSpec& spec, const std::string& target_space, std::size_t offset) {
  const auto source = SpaceDescriptor::parse(spec.space);
  const auto target = SpaceDescriptor::parse(target_space);
  require(offset + source.dim() <= target.dim(), "target space is too small for the witness",
          ErrorCode::dimension_mismatch);
  auto pad = [&](const Vec& v) {
    Vec out(target.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) out[offset + i] = v[i];
    return out;
  };
  SequenceSpec out = spec;
  out.space = target.to_string();
  for (auto& level : out.labels) {
    for (auto& label : level) label = pad(label);
  }
  for (auto& level : out.increments) {
    for (auto& inc : level) inc = pad(inc);
  }
  if (out.initial.dim() > 0) out.initial = pad(out.initial);
  return out;
}

Json estimate_to_json(const ConstantEstimate& e) {
  Json j;
  j["space"] = e.space;
  j["p"] = e.p;
  j["direction"] = to_string(e.direction);
  j["family"] = e.family;
  j["depth"] = e.depth;
  j["ratio"] = e.ratio;
  j["standard_error"] = e.standard_error;
  j["method"] = e.method;
  j["budget"] = e.budget;
  j["restarts"] = e.restarts;
  j["samples"] = e.samples;
  j["seed"] = e.seed;
  j["evaluations"] = e.evaluations;
  j["witness_hash"] = e.witness_hash;
  j["witness"] = spec_to_json(e.witness);
  return j;
}

ConstantEstimate estimate_from_json(const Json& j) {
  try {
    ConstantEstimate e;
    e.space = j.at("space").get<std::string>();
    e.p = j.at("p").get<double>();
    e.direction = direction_from_string(j.at("direction").get<std::string>());
    e.family = j.at("family").get<std::string>();
    e.depth = j.at("depth").get<int>();
    e.ratio = j.at("ratio").get<double>();
    e.standard_error = j.at("standard_error").get<double>();
    e.method = j.at("method").get<std::string>();
    e.budget = j.at("budget").get<std::size_t>();
    e.restarts = j.at("restarts").get<std::size_t>();
    e.samples = j.at("samples").get<std::size_t>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.evaluations = j.at("evaluations").get<std::size_t>();
    e.witness_hash = j.at("witness_hash").get<std::string>();
    e.witness = spec_from_json(j.at("witness"));
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::parse, std::string("malformed constant estimate: ") + ex.what());
  }
}

std::string estimates_csv_header() { return "space,p,direction,ratio,method,samples,seed,witness_hash"; }

std::string estimate_csv_row(const ConstantEstimate& e) {
  return e.space + "," + fmt(e.p) + "," + to_string(e.direction) + "," + fmt(e.ratio) + "," + e.method + "," +
         std::to_string(e.samples) + "," + std::to_string(e.seed) + "," + e.witness_hash;
}

}  // namespace declab
