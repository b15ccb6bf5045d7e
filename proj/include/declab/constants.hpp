#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "declab/probmodel.hpp"
#include "declab/sequence_io.hpp"

namespace declab {

enum class Direction { decouple_upper, decouple_lower, randomized_minus, randomized_plus };
const char* to_string(Direction direction);
Direction direction_from_string(const std::string& name);

// Exact ratio of p-th moments. decouple-upper: ||f_N||_p / ||g_N||_p,
// randomized-minus: ||sum d||_p / ||sum eps d||_p, the other two are reciprocals.
// Returns nothing when the denominator vanishes.
std::optional<double> ratio(const TangentPair& pair, double p, Direction direction);

struct RatioEstimate {
  double ratio = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
  bool applicable = true;
};
RatioEstimate ratio_mc(const TangentPair& pair, double p, Direction direction, std::size_t samples,
                       std::uint64_t seed, unsigned workers = 1);

// True when `ratio` can be evaluated by enumeration within kEnumerationCap.
bool ratio_exact_feasible(const FiltrationTree& tree, Direction direction);

enum class SearchFamily { paley_walsh_multipliers, gaussian_multipliers, garling_linf };
const char* to_string(SearchFamily family);
SearchFamily search_family_from_string(const std::string& name);

struct SearchOptions {
  std::string space = "linf:4";
  double p = 2.0;
  Direction direction = Direction::decouple_upper;
  SearchFamily family = SearchFamily::paley_walsh_multipliers;
  int depth = 3;
  // proposals evaluated per restart after the starting candidate
  std::size_t budget = 200;
  std::size_t restarts = 4;
  std::uint64_t seed = 0;
  // Monte Carlo sample count when the tree is too large to enumerate
  std::size_t samples = 100'000;
  unsigned workers = 1;
  // optional starting labels for restart 0 (same family and depth)
  std::optional<SequenceSpec> start;
};

struct ConstantEstimate {
  std::string space;
  double p = 0.0;
  Direction direction = Direction::decouple_upper;
  std::string family;
  int depth = 0;
  double ratio = 0.0;
  double standard_error = 0.0;
  std::string method = "exact";
  std::size_t budget = 0;
  std::size_t restarts = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t evaluations = 0;
  SequenceSpec witness;
  std::string witness_hash;
};

// The family's candidate for one restart: random labels from the family's
// alphabet (restart 0 of garling-linf starts from the Garling pattern).
SequenceSpec initial_candidate(const SearchOptions& options, std::size_t restart);

// Random restarts followed by single-coordinate ascent on the predictable
// labels. Restarts are independent given (seed, restart); the best ratio wins
// and ties go to the smallest witness hash.
ConstantEstimate search_worst_case(const SearchOptions& options);

// Re-evaluates a recorded witness with the estimate's settings.
double replay(const ConstantEstimate& estimate, unsigned workers = 1);

std::string witness_hash(const SequenceSpec& spec);

// Copies a witness into a larger space by zero-padding every label, or into
// SeqLp(p, d) by placing a scalar witness in one coordinate.
SequenceSpec embed_witness(const SequenceSpec& spec, const std::string& target_space, std::size_t offset = 0);

Json estimate_to_json(const ConstantEstimate& estimate);
ConstantEstimate estimate_from_json(const Json& j);
std::string estimates_csv_header();
std::string estimate_csv_row(const ConstantEstimate& estimate);

}  // namespace declab
