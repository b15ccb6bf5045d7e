#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "declab/inequalities.hpp"
#include "declab/spaces.hpp"

namespace declab {

// Increments dW_{k,j} ~ N(0, dt) of an m-dimensional Brownian motion on a
// uniform grid of `steps` cells over [0, T]. Path i is a pure function of
// (seed, i); the independent copy uses a disjoint substream.
class BrownianDriver {
 public:
  BrownianDriver(std::size_t h_dim, double horizon, std::size_t steps, std::uint64_t seed);

  std::size_t h_dim() const noexcept { return h_dim_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
  std::uint64_t seed() const noexcept { return seed_; }

  // steps x h_dim increments, row-major by step.
  std::vector<double> increments(std::uint64_t path, bool copy = false) const;

 private:
  std::size_t h_dim_;
  double horizon_;
  std::size_t steps_;
  std::uint64_t seed_;
};

// Read-only window on the driver increments strictly before a grid index.
// Reading at or after the limit throws, which is how adaptedness is enforced.
class PastIncrements {
 public:
  PastIncrements(std::span<const double> increments, std::size_t h_dim, std::size_t limit)
      : data_(increments), h_dim_(h_dim), limit_(limit) {}
  std::size_t limit() const noexcept { return limit_; }
  std::size_t h_dim() const noexcept { return h_dim_; }
  double at(std::size_t step, std::size_t j) const;
  // W(t_limit) h_j
  double position(std::size_t j) const;

 private:
  std::span<const double> data_;
  std::size_t h_dim_;
  std::size_t limit_;
};

// xi_{nm}: writes the X-valued coefficient of interval n (1-based) along
// direction m, given the increments before the interval starts.
using CoefficientRule = std::function<void(int n, std::size_t m, const PastIncrements& past, std::span<double> out)>;

// Finite-rank adapted step process sum_n 1_(t_{n-1}, t_n] sum_m h_m (x) xi_{nm}.
class StepProcess {
 public:
  // `partition` lists grid indices 0 = k_0 < ... < k_N; rank M directions h_1..h_M.
  StepProcess(std::vector<std::size_t> partition, std::size_t rank, std::size_t dim, CoefficientRule rule);

  // Built-in families: deterministic, sign-adapted, damped (see README).
  static StepProcess family(const std::string& name, std::size_t dim, std::size_t rank,
                            std::vector<std::size_t> partition);
  // Uniform partition of `steps` grid cells into `intervals` pieces.
  static std::vector<std::size_t> uniform_partition(std::size_t steps, std::size_t intervals);

  StepProcess scaled(double factor) const;
  static StepProcess combine(double a, const StepProcess& x, double b, const StepProcess& y);

  const std::vector<std::size_t>& partition() const noexcept { return partition_; }
  std::size_t intervals() const noexcept { return partition_.size() - 1; }
  std::size_t rank() const noexcept { return rank_; }
  std::size_t dim() const noexcept { return dim_; }

  // All coefficients of a path, flat [n][m][i] with n = 0..N-1.
  std::vector<double> coefficients(std::span<const double> increments, std::size_t h_dim) const;

 private:
  std::vector<std::size_t> partition_;
  std::size_t rank_;
  std::size_t dim_;
  std::shared_ptr<const CoefficientRule> rule_;
};

// Integral path at every grid point, (steps + 1) x dim, exact on the grid.
std::vector<double> integrate(const StepProcess& psi, const BrownianDriver& driver, std::span<const double> increments);

struct GammaEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  bool exact = false;
};
// (E_gamma ||sum gamma_{nm} sqrt(dt_n) xi_{nm}||^2)^{1/2}; closed form for
// Hilbert spaces, otherwise `inner` Gaussian draws from stream (seed, path).
GammaEstimate gamma_norm(const StepProcess& psi, const BrownianDriver& driver, std::span<const double> increments,
                         const SpaceDescriptor& space, std::size_t inner, std::uint64_t seed, std::uint64_t path);

struct PathStats {
  double sup_norm = 0.0;       // max over grid points of ||int_0^t psi dW||
  double terminal_norm = 0.0;  // ||int_0^T psi dW||
  double gamma = 0.0;          // gamma-norm of psi(., w)
};
std::vector<PathStats> simulate_paths(const StepProcess& psi, const BrownianDriver& driver,
                                      const SpaceDescriptor& space, std::size_t paths, std::size_t gamma_inner,
                                      unsigned workers = 1);
std::string path_stats_csv(const std::vector<PathStats>& stats);

struct BdgConfig {
  std::string space = "l2:4";
  std::vector<double> ps = {2.0};
  std::string family = "deterministic";
  std::size_t h_dim = 4;
  std::size_t rank = 4;
  double horizon = 1.0;
  std::size_t steps = 64;
  std::size_t intervals = 8;
  std::size_t paths = 100'000;
  std::size_t gamma_inner = 1024;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct MomentStat {
  double mean = 0.0;
  double standard_error = 0.0;
};

struct BdgReport {
  double p = 0.0;
  MomentStat sup_moment;       // E sup ||int||^p
  MomentStat terminal_moment;  // E ||int_0^T||^p
  MomentStat gamma_moment;     // E ||psi||_gamma^p
  double sup_ratio = 0.0;      // E sup^p / E gamma^p
  double sup_ratio_se = 0.0;
  double terminal_ratio = 0.0;
  double terminal_ratio_se = 0.0;
  double kappa_hat = 0.0;      // sup_ratio^{1/p}
  double kappa_over_p = 0.0;
  bool gamma_exact = false;
  ReportStatus status = ReportStatus::holds;
};
std::vector<BdgReport> bdg_experiment(const BdgConfig& config);
Json bdg_to_json(const BdgConfig& config, const std::vector<BdgReport>& reports);

// Discrete core: || sup_j ||sum_{i<=j} g_i v_{i-1}|| ||_p against
// || sum g~_i v_{i-1} ||_p with g~ an independent Gaussian copy.
// Rules: deterministic, sign-previous (predictable) and sign-current (not
// predictable; rejected with a precondition error).
IneqReport bdg_core_check(const SpaceDescriptor& space, double p, const std::string& rule, std::size_t n,
                          std::size_t samples, std::uint64_t seed, unsigned workers = 1);

// E sup ||int psi dW||^p against E (sum_n dt_n ||psi(t_n)||^2_{gamma(H,X)})^{p/2}
// for spaces of type 2; reports the realized ratio.
IneqReport type2_embedding_check(const BdgConfig& config, double p);

}  // namespace declab
