#include "declab/stochint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "declab/error.hpp"
#include "declab/parallel.hpp"
#include "declab/rng.hpp"

namespace declab {

namespace {

// Bounded deterministic coefficient pattern shared by the built-in families.
double base_coefficient(int n, std::size_t m, std::size_t i) {
  return std::cos(1.0 + n + 2.0 * static_cast<double>(m) + 3.0 * static_cast<double>(i));
}

MomentStat moment(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  MomentStat out;
  for (double x : xs) out.mean += x;
  out.mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  if (xs.size() > 1) out.standard_error = std::sqrt(var / (n - 1.0) / n);
  return out;
}

// mean(xs) / mean(ys) with a delta-method standard error.
std::pair<double, double> ratio_of_means(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  if (my == 0.0) return {0.0, 0.0};
  double vxx = 0.0, vyy = 0.0, vxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    vxx += (xs[i] - mx) * (xs[i] - mx);
    vyy += (ys[i] - my) * (ys[i] - my);
    vxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double denom = std::max(n - 1.0, 1.0);
  vxx /= denom;
  vyy /= denom;
  vxy /= denom;
  const double r = mx / my;
  const double var = (vxx - 2.0 * r * vxy + r * r * vyy) / (my * my * n);
  return {r, std::sqrt(std::max(0.0, var))};
}

double squared_norm(const SpaceDescriptor& space, std::span<const double> x) {
  const double v = space.norm(x);
  return v * v;
}

// E ||sum_j gamma_j c_j||^2 for the rows c_j of `coeffs` (rows x dim).
GammaEstimate gaussian_sum_norm2(std::span<const double> coeffs, std::size_t rows, const SpaceDescriptor& space,
                                 std::size_t inner, CounterRng& rng) {
  const std::size_t dim = space.dim();
  GammaEstimate out;
  if (space.is_hilbert()) {
    for (std::size_t j = 0; j < rows; ++j) out.value += squared_norm(space, coeffs.subspan(j * dim, dim));
    out.exact = true;
    return out;
  }
  require(inner >= 2, "Monte Carlo gamma-norm needs at least two inner samples");
  std::vector<double> sum(dim), draws(inner);
  for (std::size_t s = 0; s < inner; ++s) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < rows; ++j) {
      const double g = rng.normal();
      for (std::size_t i = 0; i < dim; ++i) sum[i] += g * coeffs[j * dim + i];
    }
    draws[s] = squared_norm(space, sum);
  }
  const auto m = moment(draws);
  out.value = m.mean;
  out.standard_error = m.standard_error;
  return out;
}

}  // namespace

// ---------------------------------------------------------------- driver

BrownianDriver::BrownianDriver(std::size_t h_dim, double horizon, std::size_t steps, std::uint64_t seed)
    : h_dim_(h_dim), horizon_(horizon), steps_(steps), seed_(seed) {
  require(h_dim >= 1, "driver needs at least one H direction");
  require(std::isfinite(horizon) && horizon > 0.0, "horizon must be positive");
  require(steps >= 1, "driver grid needs at least one step");
}

std::vector<double> BrownianDriver::increments(std::uint64_t path, bool copy) const {
  CounterRng rng(seed_, path, copy ? Substream::driver_copy : Substream::driver);
  const double sd = std::sqrt(dt());
  std::vector<double> out(steps_ * h_dim_);
  for (double& x : out) x = sd * rng.normal();
  return out;
}

double PastIncrements::at(std::size_t step, std::size_t j) const {
  if (step >= limit_) {
    throw Error(ErrorCode::precondition, "coefficient rule read increment " + std::to_string(step) +
                                             " but only increments before " + std::to_string(limit_) +
                                             " are known (not adapted)");
  }
  require(j < h_dim_, "H direction out of range");
  return data_[step * h_dim_ + j];
}

double PastIncrements::position(std::size_t j) const {
  double w = 0.0;
  for (std::size_t k = 0; k < limit_; ++k) w += at(k, j);
  return w;
}

// ---------------------------------------------------------------- step processes

StepProcess::StepProcess(std::vector<std::size_t> partition, std::size_t rank, std::size_t dim, CoefficientRule rule)
    : partition_(std::move(partition)), rank_(rank), dim_(dim),
      rule_(std::make_shared<const CoefficientRule>(std::move(rule))) {
  require(partition_.size() >= 2 && partition_.front() == 0, "partition must start at grid index 0");
  for (std::size_t i = 1; i < partition_.size(); ++i) {
    require(partition_[i] > partition_[i - 1], "partition must be strictly increasing");
  }
  require(rank >= 1 && dim >= 1, "rank and dimension must be positive");
}

std::vector<std::size_t> StepProcess::uniform_partition(std::size_t steps, std::size_t intervals) {
  require(intervals >= 1 && steps % intervals == 0, "the number of intervals must divide the grid size");
  std::vector<std::size_t> out(intervals + 1);
  for (std::size_t n = 0; n <= intervals; ++n) out[n] = n * (steps / intervals);
  return out;
}

StepProcess StepProcess::family(const std::string& name, std::size_t dim, std::size_t rank,
                                std::vector<std::size_t> partition) {
  if (name == "deterministic") {
    return StepProcess(std::move(partition), rank, dim, [](int n, std::size_t m, const PastIncrements&, std::span<double> out) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = base_coefficient(n, m, i);
    });
  }
  if (name == "sign-adapted") {
    return StepProcess(std::move(partition), rank, dim, [](int n, std::size_t m, const PastIncrements& past, std::span<double> out) {
      const double s = past.position(m) >= 0.0 ? 1.0 : -1.0;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * base_coefficient(n, m, i);
    });
  }
  if (name == "damped") {
    return StepProcess(std::move(partition), rank, dim, [](int n, std::size_t m, const PastIncrements& past, std::span<double> out) {
      const double damp = 1.0 / (1.0 + std::abs(past.position(m)));
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = damp * base_coefficient(n, m, i);
    });
  }
  throw Error(ErrorCode::parse, "unknown step-process family '" + name + "' (deterministic, sign-adapted, damped)");
}

StepProcess StepProcess::scaled(double factor) const {
  auto rule = rule_;
  return StepProcess(partition_, rank_, dim_, [rule, factor](int n, std::size_t m, const PastIncrements& past, std::span<double> out) {
    (*rule)(n, m, past, out);
    for (double& x : out) x *= factor;
  });
}

StepProcess StepProcess::combine(double a, const StepProcess& x, double b, const StepProcess& y) {
  require(x.partition_ == y.partition_ && x.rank_ == y.rank_ && x.dim_ == y.dim_,
          "combined step processes must share partition, rank and dimension");
  auto rx = x.rule_, ry = y.rule_;
  return StepProcess(x.partition_, x.rank_, x.dim_, [rx, ry, a, b](int n, std::size_t m, const PastIncrements& past, std::span<double> out) {
    std::vector<double> tmp(out.size());
    (*rx)(n, m, past, out);
    (*ry)(n, m, past, tmp);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * out[i] + b * tmp[i];
  });
}

std::vector<double> StepProcess::coefficients(std::span<const double> increments, std::size_t h_dim) const {
  require(rank_ <= h_dim, "step process rank exceeds the driver's H dimension");
  std::vector<double> out(intervals() * rank_ * dim_, 0.0);
  for (std::size_t n = 1; n <= intervals(); ++n) {
    const PastIncrements past(increments, h_dim, partition_[n - 1]);
    for (std::size_t m = 0; m < rank_; ++m) {
      (*rule_)(static_cast<int>(n), m, past, std::span<double>(out).subspan(((n - 1) * rank_ + m) * dim_, dim_));
    }
  }
  return out;
}

std::vector<double> integrate(const StepProcess& psi, const BrownianDriver& driver, std::span<const double> increments) {
  require(psi.partition().back() == driver.steps(), "partition does not end on the driver's last grid point");
  require(increments.size() == driver.steps() * driver.h_dim(), "increment array does not match the driver grid",
          ErrorCode::dimension_mismatch);
  const std::size_t dim = psi.dim(), rank = psi.rank(), h = driver.h_dim();
  const auto xi = psi.coefficients(increments, h);
  std::vector<double> path((driver.steps() + 1) * dim, 0.0);
  for (std::size_t n = 1; n <= psi.intervals(); ++n) {
    for (std::size_t k = psi.partition()[n - 1]; k < psi.partition()[n]; ++k) {
      for (std::size_t i = 0; i < dim; ++i) {
        double step = 0.0;
        for (std::size_t m = 0; m < rank; ++m) step += increments[k * h + m] * xi[((n - 1) * rank + m) * dim + i];
        path[(k + 1) * dim + i] = path[k * dim + i] + step;
      }
    }
  }
  return path;
}

GammaEstimate gamma_norm(const StepProcess& psi, const BrownianDriver& driver, std::span<const double> increments,
                         const SpaceDescriptor& space, std::size_t inner, std::uint64_t seed, std::uint64_t path) {
  require(space.dim() == psi.dim(), "step process dimension does not match the space", ErrorCode::dimension_mismatch);
  auto coeffs = psi.coefficients(increments, driver.h_dim());
  const std::size_t dim = psi.dim(), rank = psi.rank();
  for (std::size_t n = 1; n <= psi.intervals(); ++n) {
    const double scale = std::sqrt(driver.dt() * static_cast<double>(psi.partition()[n] - psi.partition()[n - 1]));
    for (std::size_t j = 0; j < rank * dim; ++j) coeffs[(n - 1) * rank * dim + j] *= scale;
  }
  CounterRng rng(seed, path, Substream::gaussian_inner);
  auto est = gaussian_sum_norm2(coeffs, psi.intervals() * rank, space, inner, rng);
  const double value = std::sqrt(est.value);
  est.standard_error = value > 0.0 ? est.standard_error / (2.0 * value) : 0.0;
  est.value = value;
  return est;
}

std::vector<PathStats> simulate_paths(const StepProcess& psi, const BrownianDriver& driver,
                                      const SpaceDescriptor& space, std::size_t paths, std::size_t gamma_inner,
                                      unsigned workers) {
  require(space.dim() == psi.dim(), "step process dimension does not match the space", ErrorCode::dimension_mismatch);
  std::vector<PathStats> out(paths);
  const std::size_t dim = psi.dim();
  parallel_for(block_count(paths), workers, [&](std::size_t block) {
    const std::size_t end = std::min(paths, (block + 1) * kReplicaBlock);
    for (std::size_t i = block * kReplicaBlock; i < end; ++i) {
      const auto incs = driver.increments(i);
      const auto x = integrate(psi, driver, incs);
      PathStats s;
      for (std::size_t k = 0; k <= driver.steps(); ++k) {
        s.sup_norm = std::max(s.sup_norm, space.norm(std::span<const double>(x).subspan(k * dim, dim)));
      }
      s.terminal_norm = space.norm(std::span<const double>(x).subspan(driver.steps() * dim, dim));
      s.gamma = gamma_norm(psi, driver, incs, space, gamma_inner, driver.seed(), i).value;
      out[i] = s;
    }
  });
  return out;
}

std::string path_stats_csv(const std::vector<PathStats>& stats) {
  std::string out = "path,sup_norm,terminal_norm,gamma\n";
  char buf[128];
  for (std::size_t i = 0; i < stats.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, stats[i].sup_norm, stats[i].terminal_norm,
                  stats[i].gamma);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------- experiments

std::vector<BdgReport> bdg_experiment(const BdgConfig& config) {
  require(!config.ps.empty(), "at least one p is required");
  for (double p : config.ps) require(std::isfinite(p) && p > 0.0, "p must be positive");
  require(config.paths >= 2, "at least two paths are required");
  const auto space = SpaceDescriptor::parse(config.space);
  const BrownianDriver driver(config.h_dim, config.horizon, config.steps, config.seed);
  const auto psi = StepProcess::family(config.family, space.dim(), config.rank,
                                       StepProcess::uniform_partition(config.steps, config.intervals));
  const auto stats = simulate_paths(psi, driver, space, config.paths, config.gamma_inner, config.workers);

  std::vector<BdgReport> reports;
  std::vector<double> sup(config.paths), term(config.paths), gam(config.paths);
  for (double p : config.ps) {
    for (std::size_t i = 0; i < config.paths; ++i) {
      sup[i] = std::pow(stats[i].sup_norm, p);
      term[i] = std::pow(stats[i].terminal_norm, p);
      gam[i] = std::pow(stats[i].gamma, p);
    }
    BdgReport r;
    r.p = p;
    r.sup_moment = moment(sup);
    r.terminal_moment = moment(term);
    r.gamma_moment = moment(gam);
    r.gamma_exact = space.is_hilbert();
    if (r.gamma_moment.mean == 0.0) {
      r.status = ReportStatus::vacuous;
    } else {
      std::tie(r.sup_ratio, r.sup_ratio_se) = ratio_of_means(sup, gam);
      std::tie(r.terminal_ratio, r.terminal_ratio_se) = ratio_of_means(term, gam);
      r.kappa_hat = std::pow(r.sup_ratio, 1.0 / p);
      r.kappa_over_p = r.kappa_hat / p;
    }
    reports.push_back(r);
  }
  return reports;
}

Json bdg_to_json(const BdgConfig& config, const std::vector<BdgReport>& reports) {
  Json j;
  j["space"] = config.space;
  j["family"] = config.family;
  j["h_dim"] = config.h_dim;
  j["rank"] = config.rank;
  j["horizon"] = config.horizon;
  j["steps"] = config.steps;
  j["intervals"] = config.intervals;
  j["paths"] = config.paths;
  j["gamma_inner"] = config.gamma_inner;
  j["seed"] = config.seed;
  j["method"] = "mc";
  Json rows = Json::array();
  for (const auto& r : reports) {
    Json row;
    row["p"] = r.p;
    row["sup_moment"] = {{"mean", r.sup_moment.mean}, {"standard_error", r.sup_moment.standard_error}};
    row["terminal_moment"] = {{"mean", r.terminal_moment.mean}, {"standard_error", r.terminal_moment.standard_error}};
    row["gamma_moment"] = {{"mean", r.gamma_moment.mean}, {"standard_error", r.gamma_moment.standard_error}};
    row["sup_ratio"] = r.sup_ratio;
    row["sup_ratio_se"] = r.sup_ratio_se;
    row["terminal_ratio"] = r.terminal_ratio;
    row["terminal_ratio_se"] = r.terminal_ratio_se;
    row["kappa_hat"] = r.kappa_hat;
    row["kappa_over_p"] = r.kappa_over_p;
    row["gamma_exact"] = r.gamma_exact;
    row["status"] = to_string(r.status);
    rows.push_back(row);
  }
  j["reports"] = rows;
  j["note"] = "kappa_hat is the realized sup-moment ratio to the power 1/p; the p-sweep is descriptive only";
  return j;
}

IneqReport bdg_core_check(const SpaceDescriptor& space, double p, const std::string& rule, std::size_t n,
                          std::size_t samples, std::uint64_t seed, unsigned workers) {
  require(p > 0.0 && n >= 1 && samples >= 2, "needs p > 0, n >= 1 and at least two samples");
  require(rule == "deterministic" || rule == "sign-previous" || rule == "sign-current",
          "unknown multiplier rule '" + rule + "' (deterministic, sign-previous, sign-current)", ErrorCode::parse);
  const std::size_t dim = space.dim();
  // v_{i-1} may only look at g_1..g_{i-1}; the view enforces it
  auto multiplier = [&](std::size_t i, const PastIncrements& past, std::span<double> out) {
    double s = 1.0;
    if (rule == "sign-previous" && i > 1) s = past.at(i - 2, 0) >= 0.0 ? 1.0 : -1.0;
    if (rule == "sign-current") s = past.at(i - 1, 0) >= 0.0 ? 1.0 : -1.0;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = s * base_coefficient(static_cast<int>(i), 0, k);
  };
  std::vector<double> lhs(samples), rhs(samples);
  parallel_for(block_count(samples), workers, [&](std::size_t block) {
    std::vector<double> g(n), gt(n), v(dim), sum(dim), copy(dim);
    const std::size_t end = std::min(samples, (block + 1) * kReplicaBlock);
    for (std::size_t s = block * kReplicaBlock; s < end; ++s) {
      CounterRng rng(seed, s, Substream::driver);
      CounterRng rng_copy(seed, s, Substream::driver_copy);
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = rng.normal();
        gt[i] = rng_copy.normal();
      }
      std::fill(sum.begin(), sum.end(), 0.0);
      std::fill(copy.begin(), copy.end(), 0.0);
      double best = 0.0;
      for (std::size_t i = 1; i <= n; ++i) {
        multiplier(i, PastIncrements(g, 1, i - 1), v);
        for (std::size_t k = 0; k < dim; ++k) {
          sum[k] += g[i - 1] * v[k];
          copy[k] += gt[i - 1] * v[k];
        }
        best = std::max(best, space.norm(sum));
      }
      lhs[s] = std::pow(best, p);
      rhs[s] = std::pow(space.norm(copy), p);
    }
  });
  const auto ml = moment(lhs), mr = moment(rhs);
  IneqReport report;
  report.id = "bdg_core";
  report.params = {{"space", space.to_string()}, {"p", p}, {"rule", rule}, {"n", n}};
  report.method = Method::mc;
  report.samples = samples;
  report.seed = seed;
  report.lhs = std::pow(ml.mean, 1.0 / p);
  report.rhs = std::pow(mr.mean, 1.0 / p);
  report.margin = report.rhs - report.lhs;
  report.checks = 1;
  if (mr.mean == 0.0) {
    report.status = ReportStatus::vacuous;
    return report;
  }
  const auto [r, se] = ratio_of_means(lhs, rhs);
  report.constant = std::pow(r, 1.0 / p);
  report.params["moment_ratio"] = r;
  report.params["moment_ratio_se"] = se;
  report.note = "constant is the realized c_p; no threshold is asserted";
  return report;
}

IneqReport type2_embedding_check(const BdgConfig& config, double p) {
  const auto space = SpaceDescriptor::parse(config.space);
  require(space.has_type2(), "type-2 embedding needs a type-2 space (l2:d or lp:q:d with q >= 2)",
          ErrorCode::precondition);
  require(p > 0.0 && config.paths >= 2, "needs p > 0 and at least two paths");
  const BrownianDriver driver(config.h_dim, config.horizon, config.steps, config.seed);
  const auto psi = StepProcess::family(config.family, space.dim(), config.rank,
                                       StepProcess::uniform_partition(config.steps, config.intervals));
  const std::size_t dim = space.dim(), rank = psi.rank();
  std::vector<double> lhs(config.paths), rhs(config.paths);
  parallel_for(block_count(config.paths), config.workers, [&](std::size_t block) {
    const std::size_t end = std::min(config.paths, (block + 1) * kReplicaBlock);
    for (std::size_t i = block * kReplicaBlock; i < end; ++i) {
      const auto incs = driver.increments(i);
      const auto x = integrate(psi, driver, incs);
      double best = 0.0;
      for (std::size_t k = 0; k <= driver.steps(); ++k) {
        best = std::max(best, space.norm(std::span<const double>(x).subspan(k * dim, dim)));
      }
      const auto xi = psi.coefficients(incs, driver.h_dim());
      CounterRng rng(config.seed, i, Substream::gaussian_inner);
      double l2 = 0.0;
      for (std::size_t n = 1; n <= psi.intervals(); ++n) {
        const double dt = driver.dt() * static_cast<double>(psi.partition()[n] - psi.partition()[n - 1]);
        const auto block_coeffs = std::span<const double>(xi).subspan((n - 1) * rank * dim, rank * dim);
        l2 += dt * gaussian_sum_norm2(block_coeffs, rank, space, config.gamma_inner, rng).value;
      }
      lhs[i] = std::pow(best, p);
      rhs[i] = std::pow(l2, p / 2.0);
    }
  });
  const auto ml = moment(lhs), mr = moment(rhs);
  IneqReport report;
  report.id = "type2_embedding";
  report.params = {{"space", space.to_string()}, {"p", p}, {"family", config.family}, {"paths", config.paths},
                   {"steps", config.steps}, {"intervals", config.intervals}};
  report.method = Method::mc;
  report.samples = config.paths;
  report.seed = config.seed;
  report.lhs = ml.mean;
  report.rhs = mr.mean;
  report.margin = mr.mean - ml.mean;
  report.checks = 1;
  if (mr.mean == 0.0) {
    report.status = ReportStatus::vacuous;
    return report;
  }
  const auto [r, se] = ratio_of_means(lhs, rhs);
  report.constant = r;
  report.params["ratio_se"] = se;
  report.params["lhs_se"] = ml.standard_error;
  report.params["rhs_se"] = mr.standard_error;
  report.note = "constant is the realized ratio; the embedding constant itself is not known";
  return report;
}

}  // namespace declab
