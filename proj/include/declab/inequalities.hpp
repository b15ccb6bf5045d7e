#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "declab/probmodel.hpp"
#include "declab/sequence_io.hpp"

namespace declab {

enum class Method { exact, mc };
enum class ReportStatus { holds, violated, vacuous, not_applicable };

const char* to_string(Method method);
const char* to_string(ReportStatus status);

// Outcome of one inequality check. Checks that run over many atoms or grid
// points report the point with the smallest margin and count the rest.
struct IneqReport {
  std::string id;
  Json params = Json::object();
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
  bool holds = true;
  double margin = 0.0;
  Method method = Method::exact;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  ReportStatus status = ReportStatus::holds;
  std::string note;
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;
};

Json report_to_json(const IneqReport& report);

// Phi in F_q: non-decreasing, continuous, Phi(0) = 0, Phi(st) <= s^q Phi(t) for s >= 1.
class MomentFunctional {
 public:
  static MomentFunctional power(double q);
  // Phi(t) = t^base log(1 + t); base defaults to q - 1. Fails unless the
  // growth condition passes a sampled check for the declared q.
  static MomentFunctional power_log(double q, std::optional<double> base = std::nullopt);

  double operator()(double t) const;
  double q() const noexcept { return q_; }
  std::string name() const;
  // max over the sample grid of Phi(st) / (s^q Phi(t)); <= 1 means the condition holds.
  double growth_excess() const;

 private:
  enum class Kind { power, power_log };
  MomentFunctional(Kind kind, double q, double base) : kind_(kind), q_(q), base_(base) {}
  Kind kind_;
  double q_;
  double base_;
};

enum class Statistic { f_star, f_norm, g_norm, g_star };
Statistic statistic_from_string(const std::string& name);
const char* to_string(Statistic statistic);

// T_p(f^n) for every leaf w, by enumerating the copy w~ (exact).
std::vector<double> t_p_paths(const TangentPair& pair, double p, int n);
// T_p(f^n) per depth-(n-1) atom from the independent conditional family (exact).
std::vector<double> t_p_atoms(const TangentPair& pair, double p, int n);
// Nested Monte Carlo: `outer` sampled paths, `inner` copies each. Returns
// T_p(f^n) estimates in replica order.
std::vector<double> t_p_mc(const TangentPair& pair, double p, int n, std::size_t outer, std::size_t inner,
                           std::uint64_t seed, unsigned workers = 1);

enum class LevyMode { max_of_sums, max_of_terms };
LevyMode levy_mode_from_string(const std::string& name);

// All tail checks below condition on G = F_inf, i.e. run atom by atom over
// the conditional families of the decoupled copy.
IneqReport check_levy(const TangentPair& pair, double t, LevyMode mode);
IneqReport check_contraction(const TangentPair& pair, const std::vector<int>& multipliers, double t);
IneqReport check_symsum(const DiscreteLaw& xi, const DiscreteLaw& zeta, const SpaceDescriptor& space, double p);
IneqReport check_reverse_kolmogorov(const TangentPair& pair, double t, double p);
IneqReport check_tail_comparison(const TangentPair& pair, const std::vector<double>& grid);
IneqReport check_tail_comparison_mc(const TangentPair& pair, const std::vector<double>& grid, std::size_t samples,
                                    std::uint64_t seed, unsigned workers = 1);

struct BmoResult {
  double b_hat = 0.0;   // worst conditional exceedance probability
  double d_hat = 0.0;   // worst conditional moment ratio over windows
  double chebyshev = 0.0;  // A^{-p} d_hat^p
  bool chain_holds = true;
  int worst_k = 0;
  int worst_l = 0;
  std::size_t worst_atom = 0;
};
BmoResult bmo_condition(const TangentPair& pair, double p, double A);

// Both the displayed variant (>= beta lambda, < delta lambda) and the one
// reached in the proof (> beta lambda, <= delta lambda) are checked; the
// report's lhs/rhs are the displayed variant's worst point.
struct GoodLambdaReport {
  IneqReport displayed;
  IneqReport proof_variant;
  double beta = 0.0;
  double delta = 0.0;
};
GoodLambdaReport check_goodlambda(const TangentPair& pair, double p, double A, double b, double delta,
                                  const std::vector<double>& lambdas);
double goodlambda_beta(double A, double delta, double rho);

double moment_phi(const TangentPair& pair, const MomentFunctional& phi, Statistic statistic);
struct MomentEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};
MomentEstimate moment_phi_mc(const TangentPair& pair, const MomentFunctional& phi, Statistic statistic,
                             std::size_t samples, std::uint64_t seed, unsigned workers = 1);

// Davis pathwise estimate ||f''_n||^r <= sum ||d''_k||^r <= (1-2^{-r})^{-1} (d*)^r.
IneqReport check_davis(const TangentPair& pair);

// Extrapolation conclusion E Phi(f*) <= C E Phi(||g||). A is set to
// b^{-1/p} D-hat with D-hat from bmo_condition; b defaults to half the upper limit.
IneqReport check_extrapolation(const TangentPair& pair, double p, const MomentFunctional& phi,
                               std::optional<double> b = std::nullopt);

// Non-symmetric blow-up: E Phi(||f_N||) <= 2^{q/r}(2^{1+q/r} C + 1) E Phi(||g_N||).
IneqReport check_condsym(const TangentPair& pair, const MomentFunctional& phi, double C);

// Scalar and geometric side lemmas.
IneqReport check_pest(std::size_t samples, std::uint64_t seed);
IneqReport check_reverse_triangle(const SpaceDescriptor& space, std::size_t samples, std::uint64_t seed);

// One-sided Wilson bounds at confidence z (z = 3.090 is 99.9%).
constexpr double kWilsonZ = 3.090;
double wilson_lower(double successes, double n, double z = kWilsonZ);
double wilson_upper(double successes, double n, double z = kWilsonZ);

}  // namespace declab
