#pragma once

// Arbitrary-precision binary floating point backed by MPFR.
//
// Every value carries its own significand width. Binary operations produce a
// result at the wider of the two operand precisions, rounded to nearest.
// Values constructed from host numbers take the calling thread's default
// precision (see PrecisionScope in precision.hpp).

#include <mpfr.h>

#include <compare>
#include <string>
#include <string_view>

namespace hemlab {

class BigFloat {
 public:
  BigFloat();
  BigFloat(double value);  // NOLINT(google-explicit-constructor)
  BigFloat(int value);     // NOLINT(google-explicit-constructor)
  BigFloat(long value);    // NOLINT(google-explicit-constructor)
  explicit BigFloat(std::string_view decimal);

  BigFloat(const BigFloat& other);
  BigFloat(BigFloat&& other) noexcept;
  BigFloat& operator=(const BigFloat& other);
  BigFloat& operator=(BigFloat&& other) noexcept;
  ~BigFloat();

  /// Uninitialised-value constructor used by the arithmetic kernels.
  struct WithPrecision {
    int bits;
  };
  explicit BigFloat(WithPrecision p);

  int precision() const { return static_cast<int>(mpfr_get_prec(value_)); }

  mpfr_srcptr get() const { return value_; }
  mpfr_ptr get() { return value_; }

  /// Default significand width for values created on this thread.
  static int default_precision();
  static void set_default_precision(int bits);

  BigFloat& operator+=(const BigFloat& rhs);
  BigFloat& operator-=(const BigFloat& rhs);
  BigFloat& operator*=(const BigFloat& rhs);
  BigFloat& operator/=(const BigFloat& rhs);
  BigFloat operator-() const;

  friend BigFloat operator+(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator-(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator*(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator/(const BigFloat& a, const BigFloat& b);

  friend bool operator==(const BigFloat& a, const BigFloat& b) {
    return mpfr_equal_p(a.value_, b.value_) != 0;
  }
  friend std::partial_ordering operator<=>(const BigFloat& a,
                                           const BigFloat& b);

  double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
  bool is_zero() const { return mpfr_zero_p(value_) != 0; }
  bool is_finite() const { return mpfr_number_p(value_) != 0; }

  /// Scientific notation with `digits` significant decimal digits.
  std::string to_string(int digits) const;

 private:
  void release();
  mpfr_t value_;
};

BigFloat abs(const BigFloat& x);
BigFloat sqrt(const BigFloat& x);
BigFloat hypot(const BigFloat& x, const BigFloat& y);
BigFloat exp(const BigFloat& x);
BigFloat log(const BigFloat& x);
BigFloat log10(const BigFloat& x);
BigFloat sin(const BigFloat& x);
BigFloat cos(const BigFloat& x);
BigFloat atan2(const BigFloat& y, const BigFloat& x);
BigFloat ldexp(const BigFloat& x, int e);
BigFloat pow(const BigFloat& x, long n);
BigFloat fma(const BigFloat& a, const BigFloat& b, const BigFloat& c);
BigFloat pi_constant();

inline double to_double(const BigFloat& x) { return x.to_double(); }

}  // namespace hemlab
