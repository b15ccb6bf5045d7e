#include <cmath>
#include <vector>

#include "doctest.h"
#include "declab/error.hpp"
#include "declab/stochint.hpp"

using namespace declab;

namespace {

// Constant coefficients: coeffs[n-1][m] is the X-valued value on interval n, direction m.
StepProcess constant_process(std::vector<std::size_t> partition, std::vector<std::vector<Vec>> coeffs) {
  const std::size_t rank = coeffs.front().size(), dim = coeffs.front().front().dim();
  return StepProcess(std::move(partition), rank, dim,
                     [coeffs](int n, std::size_t m, const PastIncrements&, std::span<double> out) {
                       const auto& v = coeffs[static_cast<std::size_t>(n - 1)][m];
                       for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i];
                     });
}

double terminal(const std::vector<double>& path, std::size_t dim, std::size_t i = 0) {
  return path[path.size() - dim + i];
}

}  // namespace

TEST_CASE("driver increments") {
  const BrownianDriver driver(2, 1.0, 4, 9);
  CHECK(driver.dt() == 0.25);
  CHECK(driver.increments(3) == driver.increments(3));
  CHECK(driver.increments(3) != driver.increments(3, true));
  CHECK(driver.increments(3) != driver.increments(4));
  const std::size_t paths = 100000;
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < paths; ++i) {
    const double x = driver.increments(i)[5];
    s += x;
    s2 += x * x;
  }
  const double mean = s / paths, var = s2 / paths - mean * mean;
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(0.25 / paths));
  CHECK(std::abs(var - 0.25) <= 4.0 * 0.25 * std::sqrt(2.0 / paths));
  CHECK_THROWS_AS(BrownianDriver(0, 1.0, 4, 0), Error);
}

TEST_CASE("integrals of simple processes") {
  const BrownianDriver driver(2, 1.0, 8, 1);
  const auto incs = driver.increments(0);
  SUBCASE("constant coefficient") {
    const auto psi = constant_process({0, 8}, {{Vec{1.5}}});
    double w = 0.0;
    for (std::size_t k = 0; k < 8; ++k) w += incs[k * 2];
    CHECK(terminal(integrate(psi, driver, incs), 1) == doctest::Approx(1.5 * w).epsilon(1e-14));
  }
  SUBCASE("zero coefficient") {
    const auto psi = constant_process({0, 4, 8}, {{Vec{0.0, 0.0}}, {Vec{0.0, 0.0}}});
    for (double x : integrate(psi, driver, incs)) CHECK(x == 0.0);
  }
  SUBCASE("partition must end on the grid") {
    const auto psi = constant_process({0, 4}, {{Vec{1.0}}});
    CHECK_THROWS_AS(integrate(psi, driver, incs), Error);
  }
}

TEST_CASE("two-interval variance") {
  const BrownianDriver driver(1, 1.0, 4, 2);
  const auto psi = constant_process({0, 1, 4}, {{Vec{2.0}}, {Vec{-1.0}}});
  const double expected = 4.0 * 0.25 + 1.0 * 0.75;
  const std::size_t paths = 100000;
  double s2 = 0.0, s4 = 0.0;
  for (std::size_t i = 0; i < paths; ++i) {
    const double x = terminal(integrate(psi, driver, driver.increments(i)), 1);
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double var = s2 / paths;
  const double se = std::sqrt((s4 / paths - var * var) / paths);
  CHECK(std::abs(var - expected) <= 4.0 * se);
}

TEST_CASE("gamma norms") {
  const BrownianDriver unit(1, 1.0, 1, 0);
  const auto incs = unit.increments(0);
  SUBCASE("single term") {
    const auto psi = constant_process({0, 1}, {{Vec{3.0, 4.0}}});
    const auto g = gamma_norm(psi, unit, incs, SpaceDescriptor::euclid(2), 16, 0, 0);
    CHECK(g.exact);
    CHECK(g.value == doctest::Approx(5.0).epsilon(1e-15));
  }
  SUBCASE("Hilbert closed form") {
    const BrownianDriver driver(3, 2.0, 16, 4);
    const auto psi = StepProcess::family("sign-adapted", 3, 3, StepProcess::uniform_partition(16, 4));
    const auto path_incs = driver.increments(7);
    const auto xi = psi.coefficients(path_incs, 3);
    double closed = 0.0;
    for (double x : xi) closed += 0.5 * x * x;  // each interval has length 0.5
    const auto g = gamma_norm(psi, driver, path_incs, SpaceDescriptor::euclid(3), 16, 0, 7);
    CHECK(std::abs(g.value * g.value - closed) <= 1e-10 * closed);
  }
  SUBCASE("sup norm against quadrature") {
    // E max(g1^2, g2^2) = 1 + 2/pi (tests/oracles/tree_oracles.py)
    const BrownianDriver driver(1, 2.0, 2, 0);
    const auto psi = constant_process({0, 1, 2}, {{Vec{1.0, 0.0}}, {Vec{0.0, 1.0}}});
    const auto g = gamma_norm(psi, driver, driver.increments(0), SpaceDescriptor::sup_norm(2), 400000, 5, 0);
    CHECK_FALSE(g.exact);
    CHECK(std::abs(g.value - std::sqrt(1.636619772367581)) <= 4.0 * g.standard_error);
  }
}

TEST_CASE("linearity and scaling") {
  const BrownianDriver driver(3, 1.0, 32, 6);
  const auto part = StepProcess::uniform_partition(32, 4);
  const auto x = StepProcess::family("sign-adapted", 2, 3, part);
  const auto y = StepProcess::family("damped", 2, 3, part);
  const auto z = StepProcess::combine(0.7, x, -1.3, y);
  for (std::uint64_t path = 0; path < 20; ++path) {
    const auto incs = driver.increments(path);
    const auto ix = integrate(x, driver, incs), iy = integrate(y, driver, incs), iz = integrate(z, driver, incs);
    for (std::size_t k = 0; k < iz.size(); ++k) CHECK(std::abs(iz[k] - (0.7 * ix[k] - 1.3 * iy[k])) <= 1e-12);
  }
  const auto space = SpaceDescriptor::seq_lp(3.0, 2);
  const auto base = simulate_paths(x, driver, space, 50, 64);
  const auto doubled = simulate_paths(x.scaled(2.0), driver, space, 50, 64);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(doubled[i].sup_norm == doctest::Approx(2.0 * base[i].sup_norm).epsilon(1e-13));
    CHECK(doubled[i].gamma == doctest::Approx(2.0 * base[i].gamma).epsilon(1e-13));
  }
}

TEST_CASE("adaptedness is enforced") {
  const std::vector<double> incs = {0.1, -0.2, 0.3};
  const PastIncrements past(incs, 1, 2);
  CHECK(past.at(1, 0) == -0.2);
  CHECK(past.position(0) == doctest::Approx(-0.1));
  CHECK_THROWS_AS(past.at(2, 0), Error);
  const StepProcess peeking({0, 1, 3}, 1, 1, [](int, std::size_t, const PastIncrements& p, std::span<double> out) {
    out[0] = p.at(p.limit(), 0);
  });
  try {
    peeking.coefficients(incs, 1);
    FAIL("expected an adaptedness error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::precondition);
  }
  CHECK_THROWS_AS(StepProcess::family("clairvoyant", 1, 1, {0, 1}), Error);
}

TEST_CASE("Ito isometry and Doob on Euclidean space") {
  BdgConfig c;
  c.paths = 20000;
  c.seed = 3;
  c.workers = 2;
  for (const char* family : {"deterministic", "sign-adapted"}) {
    c.family = family;
    const auto r = bdg_experiment(c).front();
    CHECK(r.gamma_exact);
    CHECK(std::abs(r.terminal_ratio - 1.0) <= 4.0 * r.terminal_ratio_se);
    CHECK(r.sup_ratio <= 4.0 + 3.0 * r.sup_ratio_se);
  }
}

TEST_CASE("ratios do not depend on the horizon") {
  BdgConfig c;
  c.paths = 2000;
  c.ps = {1.0, 2.0, 4.0};
  for (const char* family : {"deterministic", "sign-adapted"}) {
    c.family = family;
    c.horizon = 1.0;
    const auto a = bdg_experiment(c);
    c.horizon = 7.5;
    const auto b = bdg_experiment(c);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(b[i].sup_ratio == doctest::Approx(a[i].sup_ratio).epsilon(1e-10));
      CHECK(b[i].terminal_ratio == doctest::Approx(a[i].terminal_ratio).epsilon(1e-10));
    }
  }
}

TEST_CASE("worker count does not change results") {
  BdgConfig c;
  c.space = "linf:3";
  c.paths = 3000;
  c.gamma_inner = 64;
  c.family = "damped";
  c.workers = 1;
  const auto serial = bdg_to_json(c, bdg_experiment(c)).dump();
  auto parallel = c;
  parallel.workers = 4;
  CHECK(bdg_to_json(c, bdg_experiment(parallel)).dump() == serial);
}

TEST_CASE("discrete core estimate") {
  const auto space = SpaceDescriptor::euclid(2);
  const auto det = bdg_core_check(space, 2.0, "deterministic", 8, 40000, 1, 2);
  const double se = det.params.at("moment_ratio_se").get<double>();
  CHECK(det.params.at("moment_ratio").get<double>() <= 4.0 + 3.0 * se);
  const auto single = bdg_core_check(space, 2.0, "deterministic", 1, 40000, 2, 2);
  CHECK(single.constant == doctest::Approx(1.0).epsilon(0.03));
  CHECK(bdg_core_check(space, 2.0, "sign-previous", 8, 5000, 3).constant > 0.0);
  try {
    bdg_core_check(space, 2.0, "sign-current", 8, 100, 1);
    FAIL("expected a precondition error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::precondition);
  }
}

TEST_CASE("type-2 embedding") {
  BdgConfig c;
  c.paths = 2000;
  c.space = "l2:4";
  const auto hilbert = type2_embedding_check(c, 2.0);
  CHECK(hilbert.constant > 0.0);
  c.space = "lp:3:4";
  c.family = "sign-adapted";
  c.gamma_inner = 128;
  const auto small = type2_embedding_check(c, 2.0);
  c.paths = 4000;
  const auto large = type2_embedding_check(c, 2.0);
  const double width = small.params.at("ratio_se").get<double>();
  CHECK(std::abs(large.constant - small.constant) <= 2.0 * 2.0 * 1.96 * width);
  c.space = "linf:4";
  CHECK_THROWS_AS(type2_embedding_check(c, 2.0), Error);
}

TEST_CASE("per-path CSV") {
  const std::vector<PathStats> stats = {{1.0, 0.5, 2.0}};
  CHECK(path_stats_csv(stats) == "path,sup_norm,terminal_norm,gamma\n0,1,0.5,2\n");
}
