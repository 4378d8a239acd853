#include "hemlab/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hemlab/network.hpp"

namespace hemlab {

template <class R>
Complex<R> PowerSeries<R>::evaluate(const Complex<R>& alpha) const {
  Complex<R> acc = c_.back();
  for (std::size_t i = c_.size() - 1; i-- > 0;) acc = acc * alpha + c_[i];
  return acc;
}

template <class R>
PowerSeries<R> convolve(const PowerSeries<R>& a, const PowerSeries<R>& b, int order) {
  if (order < 0 || a.order() < order || b.order() < order) {
    throw InsufficientLength("convolve: inputs shorter than order " + std::to_string(order));
  }
  std::vector<Complex<R>> c(static_cast<std::size_t>(order) + 1);
  for (int n = 0; n <= order; ++n) {
    Complex<R> acc;
    for (int m = 0; m <= n; ++m) acc += a[m] * b[n - m];
    c[n] = acc;
  }
  return PowerSeries<R>(std::move(c));
}

template <class R>
PowerSeries<R> reciprocal(const PowerSeries<R>& a, int order) {
  if (order < 0 || a.order() < order) {
    throw InsufficientLength("reciprocal: input shorter than order " + std::to_string(order));
  }
  if (is_zero(a[0])) throw ZeroLeadingCoefficient("reciprocal: a[0] is zero");
  std::vector<Complex<R>> w(static_cast<std::size_t>(order) + 1);
  w[0] = inverse(a[0]);
  for (int n = 1; n <= order; ++n) {
    Complex<R> acc;
    for (int m = 1; m <= n; ++m) acc += a[m] * w[n - m];
    w[n] = -(acc * w[0]);
  }
  return PowerSeries<R>(std::move(w));
}

template <class R>
PowerSeries<R> conjugate_reflect(const PowerSeries<R>& a) {
  std::vector<Complex<R>> c;
  c.reserve(a.size());
  for (const auto& x : a.coefficients()) c.push_back(conj(x));
  return PowerSeries<R>(std::move(c));
}

template <class R>
R roc_estimate(const PowerSeries<R>& a, int window) {
  if (window < 1) throw std::invalid_argument("roc_estimate: window must be positive");
  const int n = static_cast<int>(a.size());
  if (n < window + 2) {
    throw InsufficientLength("roc_estimate: need at least window+2 coefficients");
  }
  std::vector<R> ratios;
  ratios.reserve(static_cast<std::size_t>(window));
  for (int i = n - 1 - window; i < n - 1; ++i) {
    if (is_zero(a[i]) || is_zero(a[i + 1])) {
      throw ZeroCoefficientInWindow("roc_estimate: zero coefficient at index " +
                                    std::to_string(is_zero(a[i]) ? i : i + 1));
    }
    ratios.push_back(abs(a[i]) / abs(a[i + 1]));
  }
  std::sort(ratios.begin(), ratios.end());
  const std::size_t mid = ratios.size() / 2;
  if (ratios.size() % 2 == 1) return ratios[mid];
  return (ratios[mid - 1] + ratios[mid]) / R(2);
}

std::string format_real(double x) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

std::string format_real(const BigFloat& x) {
  // ceil(bits * log10(2)) + 1 significant digits round-trip.
  const int digits = static_cast<int>(std::ceil(x.precision() * 0.30102999566398120)) + 1;
  return x.to_string(digits);
}

template <class R>
void write_series_csv(std::ostream& out, const NetworkModel& net, const SeriesSet<R>& set) {
  out << "n,bus_id,re,im\n";
  for (int n = 0; n <= set.order; ++n) {
    for (std::size_t i = 0; i < set.v.size(); ++i) {
      const auto& c = set.v[i][n];
      out << n << ',' << net.buses()[i].id << ',' << format_real(c.re) << ','
          << format_real(c.im) << '\n';
    }
  }
}

#define HEMLAB_INSTANTIATE(R)                                                     \
  template class PowerSeries<R>;                                                  \
  template PowerSeries<R> convolve(const PowerSeries<R>&, const PowerSeries<R>&, int); \
  template PowerSeries<R> reciprocal(const PowerSeries<R>&, int);                 \
  template PowerSeries<R> conjugate_reflect(const PowerSeries<R>&);               \
  template R roc_estimate(const PowerSeries<R>&, int);                            \
  template void write_series_csv(std::ostream&, const NetworkModel&, const SeriesSet<R>&);
HEMLAB_INSTANTIATE(double)
HEMLAB_INSTANTIATE(BigFloat)
#undef HEMLAB_INSTANTIATE

}  // namespace hemlab
