#pragma once

#include <cmath>

#include "hemlab/precision.hpp"

namespace hemlab {

/// Complex number over an arbitrary real type.
///
/// std::complex is only specified for the built-in floating types, so the
/// same small type is used for both native and MPFR reals.
template <class R>
struct Complex {
  R re{};
  R im{};

  Complex() : re(0), im(0) {}
  Complex(R real) : re(std::move(real)), im(0) {}  // NOLINT
  Complex(R real, R imag) : re(std::move(real)), im(std::move(imag)) {}

  static Complex j() { return Complex(R(0), R(1)); }

  Complex& operator+=(const Complex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Complex& operator-=(const Complex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Complex& operator*=(const Complex& o) { return *this = *this * o; }
  Complex& operator/=(const Complex& o) { return *this = *this / o; }
  Complex& operator*=(const R& s) {
    re *= s;
    im *= s;
    return *this;
  }

  Complex operator-() const { return Complex(-re, -im); }

  friend Complex operator+(const Complex& a, const Complex& b) {
    return Complex(a.re + b.re, a.im + b.im);
  }
  friend Complex operator-(const Complex& a, const Complex& b) {
    return Complex(a.re - b.re, a.im - b.im);
  }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return Complex(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
  }
  friend Complex operator*(const Complex& a, const R& s) {
    return Complex(a.re * s, a.im * s);
  }
  friend Complex operator*(const R& s, const Complex& a) {
    return Complex(a.re * s, a.im * s);
  }
  friend Complex operator/(const Complex& a, const R& s) {
    return Complex(a.re / s, a.im / s);
  }
  // Smith's algorithm.
  friend Complex operator/(const Complex& a, const Complex& b) {
    using std::abs;
    if (abs(b.re) >= abs(b.im)) {
      if (is_zero(b.re)) {
        return Complex(a.re / b.re, a.im / b.re);  // inf/nan like double
      }
      R r = b.im / b.re;
      R d = b.re + b.im * r;
      return Complex((a.re + a.im * r) / d, (a.im - a.re * r) / d);
    }
    R r = b.re / b.im;
    R d = b.re * r + b.im;
    return Complex((a.re * r + a.im) / d, (a.im * r - a.re) / d);
  }
  friend bool operator==(const Complex& a, const Complex& b) {
    return a.re == b.re && a.im == b.im;
  }
};

template <class R>
Complex<R> conj(const Complex<R>& z) {
  return Complex<R>(z.re, -z.im);
}

/// |z|^2.
template <class R>
R norm(const Complex<R>& z) {
  return z.re * z.re + z.im * z.im;
}

template <class R>
R abs(const Complex<R>& z) {
  using std::hypot;
  return hypot(z.re, z.im);
}

template <class R>
R arg(const Complex<R>& z) {
  using std::atan2;
  return atan2(z.im, z.re);
}

template <class R>
Complex<R> polar(const R& magnitude, const R& angle) {
  using std::cos;
  using std::sin;
  return Complex<R>(magnitude * cos(angle), magnitude * sin(angle));
}

template <class R>
bool is_zero(const Complex<R>& z) {
  return is_zero(z.re) && is_zero(z.im);
}

/// Principal square root.
template <class R>
Complex<R> sqrt(const Complex<R>& z) {
  using std::abs;
  using std::sqrt;
  if (is_zero(z)) return Complex<R>();
  R m = abs(z);
  R t = sqrt((m + abs(z.re)) / R(2));
  if (z.re >= R(0)) {
    return Complex<R>(t, z.im / (R(2) * t));
  }
  R im = z.im >= R(0) ? t : -t;
  return Complex<R>(abs(z.im) / (R(2) * t), im);
}

template <class R>
Complex<R> inverse(const Complex<R>& z) {
  return Complex<R>(R(1)) / z;
}

template <class To, class From>
Complex<To> convert_complex(const Complex<From>& z) {
  return Complex<To>(convert_real<To>(z.re), convert_real<To>(z.im));
}

}  // namespace hemlab
