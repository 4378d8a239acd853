#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "hemlab/complex.hpp"
#include "hemlab/errors.hpp"

namespace hemlab {

class NetworkModel;

/// Truncated Maclaurin series; coefficient n multiplies alpha^n.
template <class R>
class PowerSeries {
 public:
  PowerSeries() : c_{Complex<R>()} {}
  explicit PowerSeries(std::vector<Complex<R>> coefficients) : c_(std::move(coefficients)) {
    if (c_.empty()) throw InsufficientLength("power series needs at least one coefficient");
  }

  std::size_t size() const { return c_.size(); }
  /// Highest stored power.
  int order() const { return static_cast<int>(c_.size()) - 1; }
  const Complex<R>& operator[](std::size_t n) const { return c_[n]; }
  Complex<R>& operator[](std::size_t n) { return c_[n]; }
  const std::vector<Complex<R>>& coefficients() const { return c_; }
  void push_back(Complex<R> value) { c_.push_back(std::move(value)); }

  /// Partial-sum evaluation.
  Complex<R> evaluate(const Complex<R>& alpha) const;

 private:
  std::vector<Complex<R>> c_;
};

/// Cauchy product truncated at `order`.
template <class R>
PowerSeries<R> convolve(const PowerSeries<R>& a, const PowerSeries<R>& b, int order);

/// 1/a through `order`; throws ZeroLeadingCoefficient when a[0] == 0.
template <class R>
PowerSeries<R> reciprocal(const PowerSeries<R>& a, int order);

/// Coefficient-wise conjugate: the series of conj(a(conj(alpha))).
template <class R>
PowerSeries<R> conjugate_reflect(const PowerSeries<R>& a);

/// Radius-of-convergence estimate: median of |c[i]/c[i+1]| over the trailing
/// `window` consecutive pairs.
template <class R>
R roc_estimate(const PowerSeries<R>& a, int window = 8);

/// Bus voltage series and PV reactive-power series sharing one order.
///
/// Series are indexed by bus position in the network. `q` holds entries only
/// for PV buses. `w` caches 1/V for every bus so that extension is O(n) per
/// order.
template <class R>
struct SeriesSet {
  int order = 0;
  std::vector<PowerSeries<R>> v;
  std::map<std::size_t, PowerSeries<R>> q;
  std::vector<PowerSeries<R>> w;
};

/// CSV with columns n,bus_id,re,im (voltage series only).
template <class R>
void write_series_csv(std::ostream& out, const NetworkModel& net, const SeriesSet<R>& set);

/// Decimal text for a real, with enough digits to round-trip at its precision.
std::string format_real(double x);
std::string format_real(const BigFloat& x);

}  // namespace hemlab
