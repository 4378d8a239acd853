#pragma once

// Near-diagonal [M/M+1] Padé approximants by the matrix method, root
// extraction, and detection of precision-induced pole/zero doublets.

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hemlab/numerics.hpp"
#include "hemlab/series.hpp"

namespace hemlab {

/// Hankel-structured system for the denominator b[1..m+1] of the [m/m+1]
/// approximant (b[0] = 1):
///   sum_j c[m+i-j] b[j+1] = -c[m+1+i],  i = 0..m,
/// with c[k] = 0 for k < 0. Generic so it can be built over exact rationals.
template <class T>
struct DenominatorSystem {
  Matrix<T> matrix;
  std::vector<T> rhs;
};

template <class T>
DenominatorSystem<T> denominator_system(std::span<const T> c, int m) {
  if (m < 0 || c.size() < static_cast<std::size_t>(2 * m + 2)) {
    throw InsufficientLength("denominator_system: need 2m+2 coefficients");
  }
  const std::size_t n = static_cast<std::size_t>(m) + 1;
  DenominatorSystem<T> sys{Matrix<T>(n, n), std::vector<T>(n, T(0))};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const long k = static_cast<long>(m) + static_cast<long>(i) - static_cast<long>(j);
      sys.matrix(i, j) = k >= 0 ? c[static_cast<std::size_t>(k)] : T(0);
    }
    sys.rhs[i] = -c[static_cast<std::size_t>(m) + 1 + i];
  }
  return sys;
}

/// Numerator a[0..m] from the lower-triangular convolution a[k] = sum b[j] c[k-j].
template <class T>
std::vector<T> numerator_from_denominator(std::span<const T> c, std::span<const T> b, int m) {
  std::vector<T> a(static_cast<std::size_t>(m) + 1, T(0));
  for (int k = 0; k <= m; ++k) {
    T acc(0);
    for (int j = 0; j <= k && j < static_cast<int>(b.size()); ++j) acc += b[j] * c[k - j];
    a[k] = acc;
  }
  return a;
}

template <class R>
struct PadeApproximant {
  int m = 0;
  Polynomial<R> numerator;    // a[0..m]
  Polynomial<R> denominator;  // b[0..m+1], b[0] == 1
  R condition_proxy{};
};

/// Throws SingularDenominatorSystem when the Hankel matrix is singular.
template <class R>
PadeApproximant<R> compute_pade(const PowerSeries<R>& c, int m);

/// numerator(alpha) / denominator(alpha); throws PoleHit when the
/// denominator vanishes to within 2^-(bits-8) of its term scale.
template <class R>
Complex<R> evaluate(const PadeApproximant<R>& pa, const Complex<R>& alpha);

template <class R>
struct PoleZeroSet {
  std::vector<Complex<R>> poles;
  std::vector<Complex<R>> zeros;
  /// 1/root images for the inverse-alpha plane; exact zero roots have no image.
  std::vector<Complex<R>> inverse_poles;
  std::vector<Complex<R>> inverse_zeros;
  bool converged = true;
};

template <class R>
PoleZeroSet<R> pole_zeros(const PadeApproximant<R>& pa, const RootOptions& options = {});

template <class R>
struct SpuriousPair {
  Complex<R> pole;
  Complex<R> zero;
  R separation;  // |pole - zero| / max(1, |pole|)
  std::size_t pole_index = 0;
  std::size_t zero_index = 0;
};

/// Greedy matching of the closest pole/zero pairs first; each root is used at
/// most once. Pairs with separation below `tolerance` are returned.
template <class R>
std::vector<SpuriousPair<R>> detect_spurious(std::span<const Complex<R>> poles,
                                             std::span<const Complex<R>> zeros,
                                             const R& tolerance);

/// Default doublet tolerance: 2^-(bits/2), but never below 1e-8.
/// Precision-induced doublets separate at the noise level of the coefficients.
/// The floor also catches the doublets that exact [M/M+1] approximants of
/// two-bus functions carry now and then (separation ~1e-10 at any precision),
/// while genuine pole/zero pairs along a cut stay wider than 1e-5 apart.
template <class R>
R default_spurious_tolerance() {
  const R scaled = pow2<R>(-working_bits<R>() / 2);
  const R floor(1e-8);
  return scaled > floor ? scaled : floor;
}

/// log10(max |matrix entry| / min |pivot|) of the denominator system: the
/// number of decimal digits consumed by cancellation.
template <class R>
double guard_digit_estimate(const PowerSeries<R>& c, int m);

/// One [M/M+1] approximant per tracked series, all of the same M.
template <class R>
struct PadeStep {
  int m = 0;
  std::vector<PadeApproximant<R>> approximants;
  /// True where the system at this M was singular and the approximant was
  /// carried over from the previous step.
  std::vector<bool> carried;
};

/// [m/m+1] of every series. A singular system reuses that series' entry from
/// `previous` when available and otherwise throws SingularDenominatorSystem.
template <class R>
PadeStep<R> build_step(const std::vector<const PowerSeries<R>*>& series, int m,
                       const PadeStep<R>* previous);

enum class VerdictStatus { Pass, EpsNotMet, MismatchNotMet, PrecisionExhausted };

std::string_view to_string(VerdictStatus s);

struct ConvergenceVerdict {
  VerdictStatus status = VerdictStatus::EpsNotMet;
  double eps_measure = 0.0;       // max_i |[M-1/M]_i - [M/M+1]_i| at alpha
  double mismatch_measure = 0.0;  // max |dS| reported by the mismatch function
  std::optional<int> first_eps_m;
  int spurious_count = 0;
};

template <class R>
using MismatchFunction = std::function<double(const std::vector<Complex<R>>&)>;

/// Two-stage check: successive approximants agree to `eps` at alpha for every
/// series, then the mismatch of the latest values is within `mismatch_tol`.
/// When `eps` is not met and the latest step carries doublets the verdict is
/// PrecisionExhausted.
template <class R>
ConvergenceVerdict converged(std::span<const PadeStep<R>> seq, const Complex<R>& alpha,
                             double eps, double mismatch_tol,
                             const MismatchFunction<R>& mismatch_fn, const R& spurious_tol);

/// Values of every approximant in a step at alpha.
template <class R>
std::vector<Complex<R>> evaluate_step(const PadeStep<R>& step, const Complex<R>& alpha);

/// Number of doublets over all approximants of a step.
template <class R>
int count_spurious(const PadeStep<R>& step, const R& spurious_tol);

}  // namespace hemlab
