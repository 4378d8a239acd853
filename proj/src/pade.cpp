#include "hemlab/pade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace hemlab {

template <class R>
PadeApproximant<R> compute_pade(const PowerSeries<R>& c, int m) {
  const auto& coeffs = c.coefficients();
  auto sys = denominator_system<Complex<R>>(std::span<const Complex<R>>(coeffs), m);
  LUFactors<Complex<R>> lu;
  try {
    lu = lu_factor(std::move(sys.matrix));
  } catch (const SingularMatrix&) {
    throw SingularDenominatorSystem("denominator system singular at M = " + std::to_string(m));
  }
  auto tail = lu_solve(lu, std::span<const Complex<R>>(sys.rhs));
  std::vector<Complex<R>> b;
  b.reserve(tail.size() + 1);
  b.emplace_back(R(1));
  for (auto& x : tail) b.push_back(std::move(x));
  auto a = numerator_from_denominator<Complex<R>>(std::span<const Complex<R>>(coeffs),
                                                  std::span<const Complex<R>>(b), m);
  PadeApproximant<R> pa;
  pa.m = m;
  pa.numerator = Polynomial<R>(std::move(a));
  pa.denominator = Polynomial<R>(std::move(b));
  pa.condition_proxy = lu.condition_proxy;
  return pa;
}

template <class R>
Complex<R> evaluate(const PadeApproximant<R>& pa, const Complex<R>& alpha) {
  const Complex<R> num = poly_eval(pa.numerator, alpha);
  const Complex<R> den = poly_eval(pa.denominator, alpha);
  const R r = abs(alpha);
  R scale(0);
  R power(1);
  for (const auto& b : pa.denominator.coefficients()) {
    scale += abs(b) * power;
    power *= r;
  }
  if (abs(den) < pow2<R>(-(working_bits<R>() - 8)) * scale) {
    throw PoleHit("Pade denominator vanishes at the evaluation point (M = " +
                  std::to_string(pa.m) + ")");
  }
  return num / den;
}

template <class R>
static std::vector<Complex<R>> roots_of(const Polynomial<R>& p, const RootOptions& options,
                                        bool& converged) {
  if (p.degree() < 1) return {};
  auto result = poly_roots(p, options);
  converged = converged && result.converged;
  return std::move(result.roots);
}

template <class R>
static std::vector<Complex<R>> inverse_images(const std::vector<Complex<R>>& roots) {
  std::vector<Complex<R>> out;
  out.reserve(roots.size());
  for (const auto& z : roots) {
    if (!is_zero(z)) out.push_back(inverse(z));
  }
  return out;
}

template <class R>
PoleZeroSet<R> pole_zeros(const PadeApproximant<R>& pa, const RootOptions& options) {
  PoleZeroSet<R> set;
  set.poles = roots_of(pa.denominator, options, set.converged);
  set.zeros = roots_of(pa.numerator, options, set.converged);
  set.inverse_poles = inverse_images(set.poles);
  set.inverse_zeros = inverse_images(set.zeros);
  return set;
}

template <class R>
std::vector<SpuriousPair<R>> detect_spurious(std::span<const Complex<R>> poles,
                                             std::span<const Complex<R>> zeros,
                                             const R& tolerance) {
  struct Candidate {
    R separation;
    std::size_t pole;
    std::size_t zero;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < poles.size(); ++i) {
    R denom = abs(poles[i]);
    if (denom < R(1)) denom = R(1);
    for (std::size_t k = 0; k < zeros.size(); ++k) {
      R sep = abs(poles[i] - zeros[k]) / denom;
      if (sep < tolerance) candidates.push_back({std::move(sep), i, k});
    }
  }
  // Ties broken by index so the matching is deterministic.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.separation < y.separation) return true;
    if (y.separation < x.separation) return false;
    return std::tie(x.pole, x.zero) < std::tie(y.pole, y.zero);
  });
  std::vector<bool> pole_used(poles.size(), false);
  std::vector<bool> zero_used(zeros.size(), false);
  std::vector<SpuriousPair<R>> pairs;
  for (auto& c : candidates) {
    if (pole_used[c.pole] || zero_used[c.zero]) continue;
    pole_used[c.pole] = true;
    zero_used[c.zero] = true;
    pairs.push_back({poles[c.pole], zeros[c.zero], std::move(c.separation), c.pole, c.zero});
  }
  return pairs;
}

template <class R>
double guard_digit_estimate(const PowerSeries<R>& c, int m) {
  auto sys = denominator_system<Complex<R>>(std::span<const Complex<R>>(c.coefficients()), m);
  R max_entry(0);
  for (const auto& e : sys.matrix.entries()) {
    R a = abs(e);
    if (a > max_entry) max_entry = a;
  }
  try {
    auto lu = lu_factor(std::move(sys.matrix));
    return std::log10(to_double(max_entry / lu.min_pivot));
  } catch (const SingularMatrix&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass:
      return "PASS";
    case VerdictStatus::EpsNotMet:
      return "EPS_NOT_MET";
    case VerdictStatus::MismatchNotMet:
      return "MISMATCH_NOT_MET";
    case VerdictStatus::PrecisionExhausted:
      return "PRECISION_EXHAUSTED";
  }
  return "UNKNOWN";
}

template <class R>
PadeStep<R> build_step(const std::vector<const PowerSeries<R>*>& series, int m,
                       const PadeStep<R>* previous) {
  PadeStep<R> step;
  step.m = m;
  step.approximants.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    try {
      step.approximants.push_back(compute_pade(*series[i], m));
      step.carried.push_back(false);
    } catch (const SingularDenominatorSystem&) {
      if (previous == nullptr || previous->approximants.size() != series.size()) throw;
      step.approximants.push_back(previous->approximants[i]);
      step.carried.push_back(true);
    }
  }
  return step;
}

template <class R>
std::vector<Complex<R>> evaluate_step(const PadeStep<R>& step, const Complex<R>& alpha) {
  std::vector<Complex<R>> values;
  values.reserve(step.approximants.size());
  for (const auto& pa : step.approximants) values.push_back(evaluate(pa, alpha));
  return values;
}

template <class R>
int count_spurious(const PadeStep<R>& step, const R& spurious_tol) {
  int count = 0;
  for (const auto& pa : step.approximants) {
    auto pz = pole_zeros(pa);
    count += static_cast<int>(detect_spurious<R>(pz.poles, pz.zeros, spurious_tol).size());
  }
  return count;
}

template <class R>
static double max_difference(const std::vector<Complex<R>>& a, const std::vector<Complex<R>>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, to_double(abs(a[i] - b[i])));
  }
  return worst;
}

template <class R>
ConvergenceVerdict converged(std::span<const PadeStep<R>> seq, const Complex<R>& alpha,
                             double eps, double mismatch_tol,
                             const MismatchFunction<R>& mismatch_fn, const R& spurious_tol) {
  ConvergenceVerdict verdict;
  verdict.eps_measure = std::numeric_limits<double>::infinity();
  verdict.mismatch_measure = std::numeric_limits<double>::infinity();
  if (seq.empty()) return verdict;

  // Pole hits count as disagreement rather than aborting the check.
  std::vector<std::optional<std::vector<Complex<R>>>> values;
  values.reserve(seq.size());
  for (const auto& step : seq) {
    try {
      values.emplace_back(evaluate_step(step, alpha));
    } catch (const PoleHit&) {
      values.emplace_back(std::nullopt);
    }
  }
  for (std::size_t k = 1; k < seq.size(); ++k) {
    if (!values[k] || !values[k - 1]) continue;
    const double d = max_difference(*values[k - 1], *values[k]);
    if (k + 1 == seq.size()) verdict.eps_measure = d;
    if (!verdict.first_eps_m && d <= eps) verdict.first_eps_m = seq[k].m;
  }

  const auto& last = values.back();
  if (last) verdict.mismatch_measure = mismatch_fn(*last);
  if (verdict.eps_measure <= eps) {
    verdict.status = verdict.mismatch_measure <= mismatch_tol ? VerdictStatus::Pass
                                                              : VerdictStatus::MismatchNotMet;
    return verdict;
  }
  verdict.spurious_count = count_spurious(seq.back(), spurious_tol);
  verdict.status = verdict.spurious_count > 0 ? VerdictStatus::PrecisionExhausted
                                              : VerdictStatus::EpsNotMet;
  return verdict;
}

#define HEMLAB_INSTANTIATE(R)                                                              \
  template PadeApproximant<R> compute_pade(const PowerSeries<R>&, int);                    \
  template Complex<R> evaluate(const PadeApproximant<R>&, const Complex<R>&);              \
  template PoleZeroSet<R> pole_zeros(const PadeApproximant<R>&, const RootOptions&);       \
  template std::vector<SpuriousPair<R>> detect_spurious(std::span<const Complex<R>>,       \
                                                        std::span<const Complex<R>>,       \
                                                        const R&);                         \
  template double guard_digit_estimate(const PowerSeries<R>&, int);                        \
  template PadeStep<R> build_step(const std::vector<const PowerSeries<R>*>&, int,          \
                                  const PadeStep<R>*);                                     \
  template std::vector<Complex<R>> evaluate_step(const PadeStep<R>&, const Complex<R>&);   \
  template int count_spurious(const PadeStep<R>&, const R&);                               \
  template ConvergenceVerdict converged(std::span<const PadeStep<R>>, const Complex<R>&,   \
                                        double, double, const MismatchFunction<R>&,        \
                                        const R&);
HEMLAB_INSTANTIATE(double)
HEMLAB_INSTANTIATE(BigFloat)
#undef HEMLAB_INSTANTIATE

}  // namespace hemlab
