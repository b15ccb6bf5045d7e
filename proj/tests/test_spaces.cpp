#include <cmath>
#include <vector>

#include "doctest.h"
#include "declab/error.hpp"
#include "declab/rng.hpp"
#include "declab/spaces.hpp"

using namespace declab;

TEST_CASE("norms of the basic spaces") {
  CHECK(norm(SpaceDescriptor::euclid(2), Vec{3.0, 4.0}) == 5.0);
  CHECK(norm(SpaceDescriptor::seq_lp(0.5, 2), Vec{1.0, 1.0}) == 4.0);
  CHECK(norm(SpaceDescriptor::sup_norm(3), Vec{-2.0, 1.0, 0.0}) == 2.0);
  CHECK(norm(SpaceDescriptor::seq_lp(3.0, 2), Vec{1.0, 2.0}) == doctest::Approx(std::cbrt(9.0)).epsilon(1e-15));
}

TEST_CASE("dimension mismatch is a hard error") {
  try {
    norm(SpaceDescriptor::euclid(3), Vec{1.0, 2.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::dimension_mismatch);
  }
}

TEST_CASE("r exponent") {
  CHECK(r_exponent(SpaceDescriptor::seq_lp(0.5, 4)) == 0.5);
  CHECK(r_exponent(SpaceDescriptor::euclid(8)) == 1.0);
  CHECK(r_exponent(SpaceDescriptor::nested({{1.0, 2}, {3.0, 2}})) == 1.0);
  CHECK(r_exponent(SpaceDescriptor::nested({{0.25, 2}, {3.0, 2}})) == 0.25);
  CHECK(r_exponent(SpaceDescriptor::sup_norm(5)) == 1.0);
}

TEST_CASE("descriptor grammar round trips") {
  for (const char* text : {"l2:8", "lp:0.5:4", "linf:16", "nested:1x2,3x2"}) {
    const auto space = SpaceDescriptor::parse(text);
    CHECK(SpaceDescriptor::parse(space.to_string()) == space);
  }
  CHECK(SpaceDescriptor::parse("nested:1x2,3x2").dim() == 4);
  CHECK(SpaceDescriptor::parse("l2:3").is_hilbert());
  CHECK_FALSE(SpaceDescriptor::parse("linf:3").has_type2());
  CHECK(SpaceDescriptor::parse("lp:3:4").has_type2());
  CHECK_THROWS_AS(SpaceDescriptor::parse("l3"), Error);
  CHECK_THROWS_AS(SpaceDescriptor::parse("lp:0:2"), Error);
  CHECK_THROWS_AS(SpaceDescriptor::parse("linf:0"), Error);
}

TEST_CASE("nested norm uses uniform weights") {
  // L^1 over 2 points of l^inf... here L^1(L^3): outer average of inner L^3 averages.
  const auto space = SpaceDescriptor::nested({{1.0, 2}, {3.0, 2}});
  const Vec x{1.0, 1.0, 2.0, 0.0};
  const double inner0 = std::cbrt(0.5 * (1.0 + 1.0));
  const double inner1 = std::cbrt(0.5 * 8.0);
  CHECK(space.norm(x) == doctest::Approx(0.5 * (inner0 + inner1)).epsilon(1e-14));
}

TEST_CASE("quasi-triangle inequality with exponent r") {
  CounterRng rng(3, 0);
  for (const char* text : {"lp:0.5:3", "l2:3", "linf:3", "nested:0.5x2,2x2"}) {
    const auto space = SpaceDescriptor::parse(text);
    for (int i = 0; i < 200; ++i) {
      Vec x(space.dim()), y(space.dim());
      for (std::size_t k = 0; k < space.dim(); ++k) {
        x[k] = rng.normal();
        y[k] = rng.normal();
      }
      const double r = space.r();
      CHECK(std::pow(space.norm(x + y), r) <= std::pow(space.norm(x), r) + std::pow(space.norm(y), r) + 1e-12);
    }
  }
}

TEST_CASE("lu constants") {
  CHECK(lu_constants(1.0).l == 1.0);
  CHECK(lu_constants(1.0).u == 1.0);
  CHECK(lu_constants(3.0).l == 1.0);
  CHECK(lu_constants(3.0).u == 4.0);
  CHECK(lu_constants(0.5).l == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(lu_constants(0.5).u == 1.0);
  for (double p : {0.3, 0.5, 1.0, 1.7, 4.0}) {
    const auto lu = lu_constants(p);
    CHECK(std::exp2(1.0 - p) * lu.u == doctest::Approx(lu.l).epsilon(1e-15));
  }
  CHECK_THROWS_AS(lu_constants(0.0), Error);
  CHECK_THROWS_AS(lu_constants(-1.0), Error);
}

TEST_CASE("compensated power sums") {
  std::vector<double> x(5000, 0.1);
  CHECK(sum_abs_powers(x, 1.0) == doctest::Approx(500.0).epsilon(1e-14));
  CHECK(sum_abs_powers(std::vector<double>{-2.0, 3.0}, 2.0) == 13.0);
}

TEST_CASE("Philox known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter streams are reproducible and separated") {
  CounterRng a(42, 7, Substream::path), b(42, 7, Substream::path), c(42, 7, Substream::decoupled_copy),
      d(42, 8, Substream::path);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs_c |= x != c();
    differs_d |= x != d();
  }
  CHECK(differs_c);
  CHECK(differs_d);
}

TEST_CASE("normal draws have unit variance") {
  CounterRng rng(11, 0, Substream::gaussian_inner);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.normal();
    s += g;
    s2 += g * g;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(3) < 3);
  }
}
