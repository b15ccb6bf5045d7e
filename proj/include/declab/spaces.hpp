#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace declab {

// Dense real vector living in a finite-dimensional (quasi-)normed space.
class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t dim, double fill = 0.0) : coords_(dim, fill) {}
  Vec(std::initializer_list<double> values) : coords_(values) {}
  explicit Vec(std::vector<double> coords) : coords_(std::move(coords)) {}
  explicit Vec(std::span<const double> coords) : coords_(coords.begin(), coords.end()) {}

  std::size_t dim() const noexcept { return coords_.size(); }
  double& operator[](std::size_t i) { return coords_[i]; }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> span() const noexcept { return coords_; }
  std::span<double> span() noexcept { return coords_; }
  const std::vector<double>& coords() const noexcept { return coords_; }
  operator std::span<const double>() const noexcept { return coords_; }

  Vec& operator+=(std::span<const double> other);
  Vec& operator-=(std::span<const double> other);
  Vec& operator*=(double scalar);

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator-(Vec a) { return a *= -1.0; }
  bool operator==(const Vec&) const = default;

 private:
  std::vector<double> coords_;
};

// Space kinds. q = infinity is only ever expressed through SupNorm.
struct SeqLp {
  double exponent;
  std::size_t dim;
};
struct SupNorm {
  std::size_t dim;
};
struct Euclid {
  std::size_t dim;
};
struct NestedLevel {
  double exponent;
  std::size_t size;
};
// Iterated L^{q_1}(L^{q_2}(...)) on finite grids with uniform weights 1/d_i.
// Coordinates are laid out row-major with the first level outermost.
struct Nested {
  std::vector<NestedLevel> levels;
};

class SpaceDescriptor {
 public:
  using Kind = std::variant<SeqLp, SupNorm, Euclid, Nested>;

  static SpaceDescriptor seq_lp(double exponent, std::size_t dim);
  static SpaceDescriptor sup_norm(std::size_t dim);
  static SpaceDescriptor euclid(std::size_t dim);
  static SpaceDescriptor nested(std::vector<NestedLevel> levels);

  // Compact grammar: `l2:8`, `lp:0.5:4`, `linf:16`, `nested:1x2,3x2`.
  static SpaceDescriptor parse(std::string_view text);
  std::string to_string() const;

  const Kind& kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  // r-normability exponent: ||x+y||^r <= ||x||^r + ||y||^r.
  double r() const noexcept { return r_; }
  bool is_hilbert() const noexcept;
  bool has_type2() const noexcept;

  double norm(std::span<const double> x) const;

  bool operator==(const SpaceDescriptor& other) const { return to_string() == other.to_string(); }

 private:
  explicit SpaceDescriptor(Kind kind);

  Kind kind_;
  std::size_t dim_ = 0;
  double r_ = 1.0;
};

double norm(const SpaceDescriptor& space, std::span<const double> x);
double r_exponent(const SpaceDescriptor& space);

struct LuConstants {
  double l;
  double u;
};

// l_p = max(2^{1-p}, 1), u_p = max(2^{p-1}, 1), so that
// l_p^{-1}(a^p + b^p) <= (a + b)^p <= u_p (a^p + b^p).
LuConstants lu_constants(double p);

// Compensated sum of |x_i|^q; switches to Kahan summation above 1000 terms.
double sum_abs_powers(std::span<const double> x, double q);

}  // namespace declab
