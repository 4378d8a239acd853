#include "hemlab/bigfloat.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hemlab {

namespace {

thread_local int t_default_bits = 53;

mpfr_prec_t wider(const BigFloat& a, const BigFloat& b) {
  return std::max(mpfr_get_prec(a.get()), mpfr_get_prec(b.get()));
}

}  // namespace

int BigFloat::default_precision() { return t_default_bits; }

void BigFloat::set_default_precision(int bits) {
  if (bits < MPFR_PREC_MIN || bits > MPFR_PREC_MAX) {
    throw std::invalid_argument("BigFloat: precision out of range");
  }
  t_default_bits = bits;
}

BigFloat::BigFloat() {
  mpfr_init2(value_, t_default_bits);
  mpfr_set_zero(value_, 1);
}

BigFloat::BigFloat(double value) {
  mpfr_init2(value_, std::max(t_default_bits, 53));
  mpfr_set_d(value_, value, MPFR_RNDN);
}

BigFloat::BigFloat(int value) {
  mpfr_init2(value_, t_default_bits);
  mpfr_set_si(value_, value, MPFR_RNDN);
}

BigFloat::BigFloat(long value) {
  mpfr_init2(value_, t_default_bits);
  mpfr_set_si(value_, value, MPFR_RNDN);
}

BigFloat::BigFloat(std::string_view decimal) {
  mpfr_init2(value_, t_default_bits);
  std::string text(decimal);
  if (mpfr_set_str(value_, text.c_str(), 10, MPFR_RNDN) != 0) {
    release();
    throw std::invalid_argument("BigFloat: cannot parse '" + text + "'");
  }
}

BigFloat::BigFloat(WithPrecision p) { mpfr_init2(value_, p.bits); }

BigFloat::BigFloat(const BigFloat& other) {
  mpfr_init2(value_, mpfr_get_prec(other.value_));
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

BigFloat::BigFloat(BigFloat&& other) noexcept {
  value_[0] = other.value_[0];
  other.value_->_mpfr_d = nullptr;
}

BigFloat& BigFloat::operator=(const BigFloat& other) {
  if (this == &other) return *this;
  if (value_->_mpfr_d == nullptr) {
    mpfr_init2(value_, mpfr_get_prec(other.value_));
  } else if (mpfr_get_prec(value_) != mpfr_get_prec(other.value_)) {
    mpfr_set_prec(value_, mpfr_get_prec(other.value_));
  }
  mpfr_set(value_, other.value_, MPFR_RNDN);
  return *this;
}

BigFloat& BigFloat::operator=(BigFloat&& other) noexcept {
  if (this == &other) return *this;
  release();
  value_[0] = other.value_[0];
  other.value_->_mpfr_d = nullptr;
  return *this;
}

BigFloat::~BigFloat() { release(); }

void BigFloat::release() {
  if (value_->_mpfr_d != nullptr) {
    mpfr_clear(value_);
    value_->_mpfr_d = nullptr;
  }
}

// Compound assignment widens the target when the right operand is wider, so
// that accumulation never silently drops bits.
#define HEMLAB_COMPOUND(op, fn)                                          \
  BigFloat& BigFloat::operator op(const BigFloat& rhs) {                 \
    if (mpfr_get_prec(rhs.value_) > mpfr_get_prec(value_)) {             \
      mpfr_prec_round(value_, mpfr_get_prec(rhs.value_), MPFR_RNDN);     \
    }                                                                    \
    fn(value_, value_, rhs.value_, MPFR_RNDN);                           \
    return *this;                                                        \
  }
HEMLAB_COMPOUND(+=, mpfr_add)
HEMLAB_COMPOUND(-=, mpfr_sub)
HEMLAB_COMPOUND(*=, mpfr_mul)
HEMLAB_COMPOUND(/=, mpfr_div)
#undef HEMLAB_COMPOUND

BigFloat BigFloat::operator-() const {
  BigFloat r(WithPrecision{precision()});
  mpfr_neg(r.value_, value_, MPFR_RNDN);
  return r;
}

#define HEMLAB_BINARY(op, fn)                                    \
  BigFloat operator op(const BigFloat& a, const BigFloat& b) {   \
    BigFloat r(BigFloat::WithPrecision{static_cast<int>(wider(a, b))}); \
    fn(r.value_, a.value_, b.value_, MPFR_RNDN);                 \
    return r;                                                    \
  }
HEMLAB_BINARY(+, mpfr_add)
HEMLAB_BINARY(-, mpfr_sub)
HEMLAB_BINARY(*, mpfr_mul)
HEMLAB_BINARY(/, mpfr_div)
#undef HEMLAB_BINARY

std::partial_ordering operator<=>(const BigFloat& a, const BigFloat& b) {
  if (mpfr_unordered_p(a.value_, b.value_)) {
    return std::partial_ordering::unordered;
  }
  int c = mpfr_cmp(a.value_, b.value_);
  if (c < 0) return std::partial_ordering::less;
  if (c > 0) return std::partial_ordering::greater;
  return std::partial_ordering::equivalent;
}

std::string BigFloat::to_string(int digits) const {
  if (digits < 1) digits = 1;
  std::vector<char> buffer(static_cast<std::size_t>(digits) + 64);
  int n = mpfr_snprintf(buffer.data(), buffer.size(), "%.*Re", digits - 1,
                        value_);
  if (n >= static_cast<int>(buffer.size())) {
    buffer.resize(static_cast<std::size_t>(n) + 1);
    mpfr_snprintf(buffer.data(), buffer.size(), "%.*Re", digits - 1, value_);
  }
  return std::string(buffer.data());
}

namespace {

template <int (*Fn)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t)>
BigFloat unary(const BigFloat& x) {
  BigFloat r(BigFloat::WithPrecision{x.precision()});
  Fn(r.get(), x.get(), MPFR_RNDN);
  return r;
}

}  // namespace

BigFloat abs(const BigFloat& x) { return unary<mpfr_abs>(x); }
BigFloat sqrt(const BigFloat& x) { return unary<mpfr_sqrt>(x); }
BigFloat exp(const BigFloat& x) { return unary<mpfr_exp>(x); }
BigFloat log(const BigFloat& x) { return unary<mpfr_log>(x); }
BigFloat log10(const BigFloat& x) { return unary<mpfr_log10>(x); }
BigFloat sin(const BigFloat& x) { return unary<mpfr_sin>(x); }
BigFloat cos(const BigFloat& x) { return unary<mpfr_cos>(x); }

BigFloat hypot(const BigFloat& x, const BigFloat& y) {
  BigFloat r(BigFloat::WithPrecision{static_cast<int>(wider(x, y))});
  mpfr_hypot(r.get(), x.get(), y.get(), MPFR_RNDN);
  return r;
}

BigFloat atan2(const BigFloat& y, const BigFloat& x) {
  BigFloat r(BigFloat::WithPrecision{static_cast<int>(wider(x, y))});
  mpfr_atan2(r.get(), y.get(), x.get(), MPFR_RNDN);
  return r;
}

BigFloat ldexp(const BigFloat& x, int e) {
  BigFloat r(BigFloat::WithPrecision{x.precision()});
  mpfr_mul_2si(r.get(), x.get(), e, MPFR_RNDN);
  return r;
}

BigFloat pow(const BigFloat& x, long n) {
  BigFloat r(BigFloat::WithPrecision{x.precision()});
  mpfr_pow_si(r.get(), x.get(), n, MPFR_RNDN);
  return r;
}

BigFloat fma(const BigFloat& a, const BigFloat& b, const BigFloat& c) {
  int bits = static_cast<int>(std::max(wider(a, b), mpfr_get_prec(c.get())));
  BigFloat r(BigFloat::WithPrecision{bits});
  mpfr_fma(r.get(), a.get(), b.get(), c.get(), MPFR_RNDN);
  return r;
}

BigFloat pi_constant() {
  BigFloat r(BigFloat::WithPrecision{BigFloat::default_precision()});
  mpfr_const_pi(r.get(), MPFR_RNDN);
  return r;
}

}  // namespace hemlab
