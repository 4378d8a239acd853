#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "hemlab/bigfloat.hpp"

namespace hemlab {

/// Working precision of a computation.
///
/// In native mode all arithmetic is carried out in IEEE binary64 (`double`);
/// otherwise reals are MPFR values with `significand_bits` bits.
struct PrecisionContext {
  int significand_bits = 53;
  bool native_mode = true;

  static PrecisionContext native() { return {53, true}; }
  static PrecisionContext bits(int n) {
    if (n < 53) {
      throw std::invalid_argument("precision must be at least 53 bits, got " +
                                  std::to_string(n));
    }
    return {n, false};
  }

  /// 53 means native; anything wider selects MPFR.
  static PrecisionContext from_bits(int n) {
    return n <= 53 ? native() : bits(n);
  }
};

/// Sets the default BigFloat precision for the current thread and restores
/// the previous one on destruction.
class PrecisionScope {
 public:
  explicit PrecisionScope(int bits) : saved_(BigFloat::default_precision()) {
    BigFloat::set_default_precision(bits);
  }
  explicit PrecisionScope(const PrecisionContext& ctx)
      : PrecisionScope(ctx.significand_bits) {}
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;
  ~PrecisionScope() { BigFloat::set_default_precision(saved_); }

 private:
  int saved_;
};

/// Significand width used for new values of type R on this thread.
template <class R>
int working_bits();

template <>
inline int working_bits<double>() {
  return 53;
}

template <>
inline int working_bits<BigFloat>() {
  return BigFloat::default_precision();
}

inline int bits_of(double) { return 53; }
inline int bits_of(const BigFloat& x) { return x.precision(); }

inline double to_double(double x) { return x; }

inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const BigFloat& x) { return x.is_zero(); }

/// 2^-k as a value of type R.
template <class R>
R pow2(int k) {
  using std::ldexp;
  return ldexp(R(1), k);
}

template <class R>
R pi_value() {
  if constexpr (std::is_same_v<R, double>) {
    return 3.14159265358979323846;
  } else {
    return pi_constant();
  }
}

/// Converts between real types at the destination's working precision.
template <class To, class From>
To convert_real(const From& x) {
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else if constexpr (std::is_same_v<To, double>) {
    return to_double(x);
  } else if constexpr (std::is_same_v<From, double>) {
    return To(x);
  } else {
    BigFloat r(BigFloat::WithPrecision{BigFloat::default_precision()});
    mpfr_set(r.get(), x.get(), MPFR_RNDN);
    return r;
  }
}

}  // namespace hemlab
