#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "declab/sequence_io.hpp"

namespace declab {

// mantissa * 2^pow2 * e^pow_e, kept factored so large exponents never overflow.
struct SymbolicValue {
  long double mantissa = 0.0L;
  long double pow2 = 0.0L;
  long double pow_e = 0.0L;

  long double value() const;
  long double log2_value() const;
  std::string to_string() const;
};
Json symbolic_to_json(const SymbolicValue& v);

// Constant C_{X,r,p,q} of the extrapolation step, general rho = min(r, p).
// b must lie in (0, 2^{-2p/rho + p - 1}), otherwise Error "b-out-of-range".
SymbolicValue bound_prop32_C(double p, double q, double r, double A, double b);
double prop32_b_limit(double p, double r);
// beta / delta for the choice of beta and delta made in the extrapolation proof.
long double prop32_beta_over_delta(double p, double q, double r, double A, double b);

// K <= e^q 2^{3q/p + p + 7q + 7} D_p^q (q/p)^q  (Banach, p >= 1)
SymbolicValue bound_thm41_K(double p, double q, double Dp);
// D_q <= e 2^{3/p + p/q + 7 + 7/q} D_p q/p
SymbolicValue bound_thm41_Dq(double p, double q, double Dp);
// e^q 2^{11 + 8q} D_R^q
SymbolicValue bound_hilbert_phi(double q, double D_R);

// d^{1/p} <= 2, decided exactly as d <= 2^p.
bool linf_kernel(std::size_t d, double p);
// 2 D_R when p >= log2 d, nothing otherwise.
std::optional<SymbolicValue> bound_linf_upper(std::size_t d, double p, double D_R);

struct KhintchinePolicy {
  enum class Kind { orthogonality, unit, fixed };
  Kind kind = Kind::orthogonality;
  double value = 1.0;  // used by `fixed`

  static KhintchinePolicy parse(const std::string& text);
  std::string to_string() const;
};
double khintchine_constant(const KhintchinePolicy& policy, double p);
// 4^{-1} K_{p,2}^{-1} (log2 d)^{1/2}
SymbolicValue bound_garling_lower(std::size_t d, double p, const KhintchinePolicy& policy);

// Label attached to every output that depends on D_R.
inline constexpr const char* kDRPlaceholderNote =
    "D_R is a placeholder (default 1.0); only its finiteness is known";

}  // namespace declab
