#include "declab/spaces.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "declab/error.hpp"

namespace declab {

namespace {

constexpr std::size_t kKahanThreshold = 1000;

double parse_positive_real(std::string_view token, std::string_view what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  require(ec == std::errc() && ptr == token.data() + token.size(),
          "cannot parse " + std::string(what) + " '" + std::string(token) + "'", ErrorCode::parse);
  require(std::isfinite(value) && value > 0.0,
          std::string(what) + " must be a positive finite number", ErrorCode::parse);
  return value;
}

std::size_t parse_dim(std::string_view token) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  require(ec == std::errc() && ptr == token.data() + token.size() && value > 0,
          "cannot parse dimension '" + std::string(token) + "'", ErrorCode::parse);
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string format_real(double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

double lq_norm(std::span<const double> x, double q) {
  if (q == 1.0) return sum_abs_powers(x, 1.0);
  if (q == 2.0) {
    // scale to avoid overflow in the squares
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0.0;
    double acc = 0.0, comp = 0.0;
    const bool kahan = x.size() > kKahanThreshold;
    for (double v : x) {
      const double term = (v / scale) * (v / scale);
      if (kahan) {
        const double y = term - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
      } else {
        acc += term;
      }
    }
    return scale * std::sqrt(acc);
  }
  return std::pow(sum_abs_powers(x, q), 1.0 / q);
}

double nested_norm(std::span<const double> x, std::span<const NestedLevel> levels) {
  const auto& level = levels.front();
  const double q = level.exponent;
  const double weight = 1.0 / static_cast<double>(level.size);
  if (levels.size() == 1) {
    return std::pow(weight * sum_abs_powers(x, q), 1.0 / q);
  }
  const std::size_t block = x.size() / level.size;
  std::vector<double> inner(level.size);
  for (std::size_t i = 0; i < level.size; ++i) {
    inner[i] = nested_norm(x.subspan(i * block, block), levels.subspan(1));
  }
  return std::pow(weight * sum_abs_powers(inner, q), 1.0 / q);
}

}  // namespace

Vec& Vec::operator+=(std::span<const double> other) {
  require(other.size() == coords_.size(), "vector dimension mismatch", ErrorCode::dimension_mismatch);
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += other[i];
  return *this;
}

Vec& Vec::operator-=(std::span<const double> other) {
  require(other.size() == coords_.size(), "vector dimension mismatch", ErrorCode::dimension_mismatch);
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= other[i];
  return *this;
}

Vec& Vec::operator*=(double scalar) {
  for (double& v : coords_) v *= scalar;
  return *this;
}

double sum_abs_powers(std::span<const double> x, double q) {
  auto power = [q](double v) {
    const double a = std::abs(v);
    if (q == 1.0) return a;
    if (q == 2.0) return a * a;
    return a == 0.0 ? 0.0 : std::pow(a, q);
  };
  if (x.size() <= kKahanThreshold) {
    double acc = 0.0;
    for (double v : x) acc += power(v);
    return acc;
  }
  double acc = 0.0, comp = 0.0;
  for (double v : x) {
    const double y = power(v) - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  return acc;
}

SpaceDescriptor::SpaceDescriptor(Kind kind) : kind_(std::move(kind)) {
  std::visit(
      [this](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SeqLp>) {
          require(k.dim > 0, "space dimension must be positive");
          require(std::isfinite(k.exponent) && k.exponent > 0.0,
                  "lp exponent must be finite and positive (use linf for q = infinity)");
          dim_ = k.dim;
          r_ = std::min(1.0, k.exponent);
        } else if constexpr (std::is_same_v<K, Nested>) {
          require(!k.levels.empty(), "nested space needs at least one level");
          dim_ = 1;
          r_ = 1.0;
          for (const auto& level : k.levels) {
            require(level.size > 0, "nested level size must be positive");
            require(std::isfinite(level.exponent) && level.exponent > 0.0,
                    "nested exponent must be finite and positive");
            dim_ *= level.size;
            r_ = std::min(r_, level.exponent);
          }
        } else {
          require(k.dim > 0, "space dimension must be positive");
          dim_ = k.dim;
          r_ = 1.0;
        }
      },
      kind_);
}

SpaceDescriptor SpaceDescriptor::seq_lp(double exponent, std::size_t dim) {
  return SpaceDescriptor(SeqLp{exponent, dim});
}
SpaceDescriptor SpaceDescriptor::sup_norm(std::size_t dim) { return SpaceDescriptor(SupNorm{dim}); }
SpaceDescriptor SpaceDescriptor::euclid(std::size_t dim) { return SpaceDescriptor(Euclid{dim}); }
SpaceDescriptor SpaceDescriptor::nested(std::vector<NestedLevel> levels) {
  return SpaceDescriptor(Nested{std::move(levels)});
}

SpaceDescriptor SpaceDescriptor::parse(std::string_view text) {
  const auto parts = split(text, ':');
  const auto& tag = parts.front();
  if (tag == "l2" && parts.size() == 2) return euclid(parse_dim(parts[1]));
  if (tag == "linf" && parts.size() == 2) return sup_norm(parse_dim(parts[1]));
  if (tag == "lp" && parts.size() == 3) {
    return seq_lp(parse_positive_real(parts[1], "lp exponent"), parse_dim(parts[2]));
  }
  if (tag == "nested" && parts.size() == 2) {
    std::vector<NestedLevel> levels;
    for (auto item : split(parts[1], ',')) {
      const auto pair = split(item, 'x');
      require(pair.size() == 2, "nested level must look like <q>x<size>", ErrorCode::parse);
      levels.push_back({parse_positive_real(pair[0], "nested exponent"), parse_dim(pair[1])});
    }
    return nested(std::move(levels));
  }
  throw Error(ErrorCode::parse, "unrecognised space descriptor '" + std::string(text) + "'");
}

std::string SpaceDescriptor::to_string() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SeqLp>) {
          return "lp:" + format_real(k.exponent) + ":" + std::to_string(k.dim);
        } else if constexpr (std::is_same_v<K, SupNorm>) {
          return "linf:" + std::to_string(k.dim);
        } else if constexpr (std::is_same_v<K, Euclid>) {
          return "l2:" + std::to_string(k.dim);
        } else {
          std::string out = "nested:";
          for (std::size_t i = 0; i < k.levels.size(); ++i) {
            if (i) out += ",";
            out += format_real(k.levels[i].exponent) + "x" + std::to_string(k.levels[i].size);
          }
          return out;
        }
      },
      kind_);
}

bool SpaceDescriptor::is_hilbert() const noexcept {
  if (std::holds_alternative<Euclid>(kind_)) return true;
  if (const auto* lp = std::get_if<SeqLp>(&kind_)) return lp->exponent == 2.0;
  if (const auto* sup = std::get_if<SupNorm>(&kind_)) return sup->dim == 1;
  return false;
}

bool SpaceDescriptor::has_type2() const noexcept {
  if (std::holds_alternative<Euclid>(kind_)) return true;
  if (const auto* lp = std::get_if<SeqLp>(&kind_)) return lp->exponent >= 2.0;
  return false;
}

double SpaceDescriptor::norm(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: vector has " + std::to_string(x.size()) +
                                                   " coordinates, space " + to_string() + " has " +
                                                   std::to_string(dim_));
  }
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SeqLp>) {
          return lq_norm(x, k.exponent);
        } else if constexpr (std::is_same_v<K, SupNorm>) {
          double m = 0.0;
          for (double v : x) m = std::max(m, std::abs(v));
          return m;
        } else if constexpr (std::is_same_v<K, Euclid>) {
          return lq_norm(x, 2.0);
        } else {
          return nested_norm(x, k.levels);
        }
      },
      kind_);
}

double norm(const SpaceDescriptor& space, std::span<const double> x) { return space.norm(x); }

double r_exponent(const SpaceDescriptor& space) { return space.r(); }

LuConstants lu_constants(double p) {
  require(std::isfinite(p) && p > 0.0, "lu_constants needs p > 0");
  return {std::max(std::exp2(1.0 - p), 1.0), std::max(std::exp2(p - 1.0), 1.0)};
}

}  // namespace declab
