#include "declab/bounds.hpp"

#include <cmath>
#include <sstream>

#include "declab/error.hpp"

namespace declab {

namespace {

// Moves exact powers of two out of the mantissa so 2 * 2^10.75 prints as 2^11.75.
SymbolicValue normalized(long double mantissa, long double pow2, long double pow_e) {
  if (mantissa > 0.0L) {
    int exponent = 0;
    const long double frac = std::frexp(mantissa, &exponent);
    if (frac == 0.5L) {
      mantissa = 1.0L;
      pow2 += exponent - 1;
    }
  }
  return {mantissa, pow2, pow_e};
}

std::string format_ld(long double v) {
  std::ostringstream out;
  out.precision(12);
  out << static_cast<double>(v);
  return out.str();
}

void require_positive(double v, const char* name) {
  require(std::isfinite(v) && v > 0.0, std::string(name) + " must be positive and finite");
}

}  // namespace

long double SymbolicValue::value() const {
  if (mantissa == 0.0L) return 0.0L;
  return mantissa * std::exp2(pow2) * std::exp(pow_e);
}

long double SymbolicValue::log2_value() const {
  return std::log2(mantissa) + pow2 + pow_e / std::log(2.0L);
}

std::string SymbolicValue::to_string() const {
  if (mantissa == 0.0L) return "0";
  std::string out;
  if (mantissa != 1.0L) out += format_ld(mantissa);
  if (pow_e != 0.0L) {
    if (!out.empty()) out += " * ";
    out += pow_e == 1.0L ? std::string("e") : "e^" + format_ld(pow_e);
  }
  if (pow2 != 0.0L) {
    if (!out.empty()) out += " * ";
    out += "2^" + format_ld(pow2);
  }
  return out.empty() ? "1" : out;
}

Json symbolic_to_json(const SymbolicValue& v) {
  Json j;
  j["symbolic"] = v.to_string();
  j["mantissa"] = static_cast<double>(v.mantissa);
  j["pow2"] = static_cast<double>(v.pow2);
  j["pow_e"] = static_cast<double>(v.pow_e);
  j["log2"] = static_cast<double>(v.log2_value());
  const long double value = v.value();
  if (std::isfinite(static_cast<double>(value))) {
    j["value"] = static_cast<double>(value);
  } else {
    j["value"] = nullptr;
  }
  return j;
}

double prop32_b_limit(double p, double r) {
  const double rho = std::min(r, p);
  return std::exp2(-2.0 * p / rho + p - 1.0);
}

long double prop32_beta_over_delta(double p, double q, double r, double A, double b) {
  require_positive(p, "p");
  require_positive(q, "q");
  require(std::isfinite(r) && r > 0.0 && r <= 1.0, "r must lie in (0, 1]");
  require(std::isfinite(A) && A >= 0.0, "A must be non-negative");
  const long double rho = std::min(r, p);
  const long double limit = prop32_b_limit(p, r);
  if (!(b > 0.0 && b < limit)) {
    throw Error(ErrorCode::invalid_argument,
                "b-out-of-range: b must lie in (0, " + format_ld(limit) + ")");
  }
  const long double base = std::exp2(2.0L * p / rho - p + 1.0L) * b;  // < 1
  const long double shrink = 1.0L - std::pow(base, rho / q);
  return std::pow(2.0L * std::pow(static_cast<long double>(A), rho) + 1.0L, 1.0L / rho) *
         std::pow(shrink, -1.0L / rho);
}

SymbolicValue bound_prop32_C(double p, double q, double r, double A, double b) {
  const long double ratio = prop32_beta_over_delta(p, q, r, A, b);
  const long double rho = std::min(r, p);
  const long double qq = q, pp = p;
  const long double front = std::exp2(2.0L * pp / rho - pp + 2.0L * qq / rho - qq + 1.0L) *
                            (std::exp2(2.0L * qq) + std::exp2(qq / rho)) * std::pow(ratio, qq / rho);
  const long double tail = std::pow(1.0L - std::exp2(-rho), -qq / rho);
  return normalized(front + tail, 2.0L * qq / rho - qq + 2.0L, 0.0L);
}

SymbolicValue bound_thm41_K(double p, double q, double Dp) {
  require(std::isfinite(p) && p >= 1.0, "the Banach-space estimate needs p >= 1");
  require_positive(q, "q");
  require(std::isfinite(Dp) && Dp >= 0.0, "D_p must be non-negative");
  const long double pp = p, qq = q;
  return normalized(std::pow(static_cast<long double>(Dp) * qq / pp, qq), 3.0L * qq / pp + pp + 7.0L * qq + 7.0L,
                    qq);
}

SymbolicValue bound_thm41_Dq(double p, double q, double Dp) {
  require(std::isfinite(p) && p >= 1.0, "the Banach-space estimate needs p >= 1");
  require_positive(q, "q");
  require(std::isfinite(Dp) && Dp >= 0.0, "D_p must be non-negative");
  const long double pp = p, qq = q;
  return normalized(static_cast<long double>(Dp) * qq / pp, 3.0L / pp + pp / qq + 7.0L + 7.0L / qq, 1.0L);
}

SymbolicValue bound_hilbert_phi(double q, double D_R) {
  require_positive(q, "q");
  require(std::isfinite(D_R) && D_R >= 0.0, "D_R must be non-negative");
  const long double qq = q;
  return normalized(std::pow(static_cast<long double>(D_R), qq), 11.0L + 8.0L * qq, qq);
}

bool linf_kernel(std::size_t d, double p) {
  require(d >= 1, "d must be at least 1");
  require_positive(p, "p");
  if (p >= 64.0) return true;
  const double whole = std::floor(p);
  if (whole == p) return d <= (std::uint64_t{1} << static_cast<unsigned>(whole));
  return static_cast<long double>(d) <= std::exp2(static_cast<long double>(p));
}

std::optional<SymbolicValue> bound_linf_upper(std::size_t d, double p, double D_R) {
  require(std::isfinite(D_R) && D_R >= 0.0, "D_R must be non-negative");
  if (!linf_kernel(d, p)) return std::nullopt;
  return normalized(D_R, 1.0L, 0.0L);
}

KhintchinePolicy KhintchinePolicy::parse(const std::string& text) {
  if (text == "orthogonality") return {Kind::orthogonality, 1.0};
  if (text == "unit") return {Kind::unit, 1.0};
  const std::string prefix = "fixed:";
  if (text.rfind(prefix, 0) == 0) {
    double value = 0.0;
    try {
      value = std::stod(text.substr(prefix.size()));
    } catch (const std::exception&) {
      throw Error(ErrorCode::parse, "cannot parse Khintchine constant '" + text + "'");
    }
    require(std::isfinite(value) && value > 0.0, "Khintchine constant must be positive", ErrorCode::parse);
    return {Kind::fixed, value};
  }
  throw Error(ErrorCode::parse, "unknown Khintchine policy '" + text + "'");
}

std::string KhintchinePolicy::to_string() const {
  switch (kind) {
    case Kind::orthogonality: return "orthogonality";
    case Kind::unit: return "unit";
    case Kind::fixed: {
      std::ostringstream out;
      out.precision(17);
      out << "fixed:" << value;
      return out.str();
    }
  }
  return "orthogonality";
}

double khintchine_constant(const KhintchinePolicy& policy, double p) {
  require(std::isfinite(p) && p >= 1.0, "Khintchine constant needs p >= 1");
  switch (policy.kind) {
    case KhintchinePolicy::Kind::unit: return 1.0;
    case KhintchinePolicy::Kind::fixed: return policy.value;
    case KhintchinePolicy::Kind::orthogonality: break;
  }
  if (p == 2.0) return 1.0;
  if (p > 2.0) return std::sqrt(p - 1.0);
  return std::exp2(1.0 / p - 0.5);
}

SymbolicValue bound_garling_lower(std::size_t d, double p, const KhintchinePolicy& policy) {
  require(d >= 2, "the lower bound needs d >= 2");
  const long double k = khintchine_constant(policy, p);
  const long double log2d = std::log2(static_cast<long double>(d));
  return normalized(std::sqrt(log2d) / k, -2.0L, 0.0L);
}

}  // namespace declab
