#include "hemlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace hemlab {

namespace {

template <class F>
real_of_t<F> magnitude(const F& x) {
  using std::abs;
  return abs(x);
}

}  // namespace

template <class F>
LUFactors<F> lu_factor(Matrix<F> m) {
  using Real = real_of_t<F>;
  if (m.rows() != m.cols()) throw std::invalid_argument("lu_factor: matrix not square");
  const std::size_t n = m.rows();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  Real max_pivot(0);
  Real min_pivot(0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    Real best = magnitude2(m(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      Real v = magnitude2(m(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (is_zero(best)) {
      throw SingularMatrix("lu_factor: zero pivot in column " + std::to_string(k));
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      std::swap(perm[k], perm[p]);
    }
    const F pivot = m(k, k);
    Real pm = magnitude(pivot);
    if (k == 0) {
      max_pivot = pm;
      min_pivot = pm;
    } else {
      if (pm > max_pivot) max_pivot = pm;
      if (pm < min_pivot) min_pivot = pm;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      if (is_zero(m(i, k))) continue;
      F factor = m(i, k) / pivot;
      m(i, k) = factor;
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= factor * m(k, j);
    }
  }
  LUFactors<F> f{std::move(m), std::move(perm), Real(1), min_pivot, max_pivot};
  if (n > 0) f.condition_proxy = max_pivot / min_pivot;
  return f;
}

template <class F>
std::vector<F> lu_solve(const LUFactors<F>& f, std::span<const F> rhs) {
  const std::size_t n = f.size();
  if (rhs.size() != n) throw std::invalid_argument("lu_solve: dimension mismatch");
  std::vector<F> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[f.permutation[i]];
  for (std::size_t i = 0; i < n; ++i) {
    F acc = x[i];
    for (std::size_t j = 0; j < i; ++j) acc -= f.lu(i, j) * x[j];
    x[i] = acc;
  }
  for (std::size_t i = n; i-- > 0;) {
    F acc = x[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= f.lu(i, j) * x[j];
    x[i] = acc / f.lu(i, i);
  }
  return x;
}

template <class R>
Complex<R> poly_eval(const Polynomial<R>& p, const Complex<R>& z) {
  const auto& c = p.coefficients();
  Complex<R> acc = c.back();
  for (std::size_t i = c.size() - 1; i-- > 0;) acc = acc * z + c[i];
  return acc;
}

template <class R>
Polynomial<R> from_roots(std::span<const Complex<R>> roots) {
  std::vector<Complex<R>> c{Complex<R>(R(1))};
  for (const auto& r : roots) {
    std::vector<Complex<R>> next(c.size() + 1);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= c[i] * r;
    }
    c = std::move(next);
  }
  return Polynomial<R>(std::move(c));
}

namespace {

// Value, derivative and running-error bound of a polynomial evaluated by
// Horner's rule. For |z| > 1 the reversed polynomial is evaluated at 1/z and
// the Newton correction is assembled from it, which keeps everything in range.
template <class R>
struct NewtonData {
  Complex<R> correction;  // p(z)/p'(z)
  R residual;             // |p(z)| (scaled by |z|^-n when reversed)
  R bound;                // sum |c_i| |z|^i (scaled likewise)
  bool exact_root = false;
};

template <class R>
NewtonData<R> newton_data(const std::vector<Complex<R>>& c, const Complex<R>& z) {
  using std::abs;
  const int n = static_cast<int>(c.size()) - 1;
  NewtonData<R> out;
  R mag = abs(z);
  if (mag <= R(1)) {
    Complex<R> p = c[n];
    Complex<R> dp;
    R bound = abs(c[n]);
    for (int i = n - 1; i >= 0; --i) {
      dp = dp * z + p;
      p = p * z + c[i];
      bound = bound * mag + abs(c[i]);
    }
    out.residual = abs(p);
    out.bound = bound;
    if (is_zero(p)) {
      out.exact_root = true;
      return out;
    }
    out.correction = p / dp;
    return out;
  }
  // q(u) = sum c_{n-i} u^i, p(z) = z^n q(1/z).
  Complex<R> u = inverse(z);
  R umag = abs(u);
  Complex<R> q = c[0];
  Complex<R> dq;
  R bound = abs(c[0]);
  for (int i = 1; i <= n; ++i) {
    dq = dq * u + q;
    q = q * u + c[i];
    bound = bound * umag + abs(c[i]);
  }
  out.residual = abs(q);
  out.bound = bound;
  if (is_zero(q)) {
    out.exact_root = true;
    return out;
  }
  // p/p' = z q / (n q - u q').
  Complex<R> denom = Complex<R>(R(n)) * q - u * dq;
  out.correction = z * q / denom;
  return out;
}

}  // namespace

template <class R>
RootResult<R> poly_roots(const Polynomial<R>& poly, const RootOptions& options) {
  using std::abs;
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  if (poly.degree() < 1) throw std::invalid_argument("poly_roots: degree < 1");

  const auto& all = poly.coefficients();
  RootResult<R> result;

  // Exact zero roots.
  std::size_t zeros = 0;
  while (is_zero(all[zeros])) ++zeros;
  for (std::size_t i = 0; i < zeros; ++i) {
    result.roots.emplace_back();
    result.root_converged.push_back(true);
  }
  std::vector<Complex<R>> c(all.begin() + static_cast<std::ptrdiff_t>(zeros), all.end());
  const int n = static_cast<int>(c.size()) - 1;
  if (n == 0) {
    result.converged = true;
    return result;
  }
  if (n == 1) {
    result.roots.push_back(-c[0] / c[1]);
    result.root_converged.push_back(true);
    result.converged = true;
    return result;
  }

  const int bits = working_bits<R>();
  const R eps = pow2<R>(-bits);
  const R tol_root = pow2<R>(-bits / 2);
  R max_coeff(0);
  for (const auto& ci : c) {
    R a = abs(ci);
    if (a > max_coeff) max_coeff = a;
  }

  // Initial guesses on the circle |z| = |c0/cn|^(1/n), golden-angle spaced.
  const R radius = exp((log(abs(c[0])) - log(abs(c[n]))) / R(n));
  const R golden = pi_value<R>() * (R(3) - sqrt(R(5)));
  std::vector<Complex<R>> z(n);
  for (int k = 0; k < n; ++k) {
    R theta = R(0.25) + golden * R(k);
    z[k] = polar(radius, theta);
  }

  std::vector<bool> done(n, false);
  int active = n;
  int iter = 0;
  for (; iter < options.max_iterations && active > 0; ++iter) {
    for (int k = 0; k < n; ++k) {
      if (done[k]) continue;
      NewtonData<R> nd = newton_data(c, z[k]);
      if (nd.exact_root ||
          nd.residual <= R(4 * n) * eps * nd.bound) {
        done[k] = true;
        --active;
        continue;
      }
      Complex<R> sum;
      for (int j = 0; j < n; ++j) {
        if (j == k) continue;
        sum += inverse(z[k] - z[j]);
      }
      const Complex<R>& ratio = nd.correction;
      Complex<R> w = ratio / (Complex<R>(R(1)) - ratio * sum);
      z[k] -= w;
      if (abs(w) <= R(4) * eps * abs(z[k])) {
        done[k] = true;
        --active;
      }
    }
  }
  result.iterations = iter;

  // Acceptance test on the final iterates.
  bool all_ok = true;
  for (int k = 0; k < n; ++k) {
    NewtonData<R> nd = newton_data(c, z[k]);
    // newton_data already divides by |z|^n when |z| > 1, which is exactly the
    // max(1,|r|)^degree factor of the criterion.
    bool ok = nd.exact_root || nd.residual <= tol_root * max_coeff;
    result.roots.push_back(z[k]);
    result.root_converged.push_back(ok);
    all_ok = all_ok && ok;
  }
  result.converged = all_ok;
  return result;
}

template LUFactors<double> lu_factor(Matrix<double>);
template LUFactors<BigFloat> lu_factor(Matrix<BigFloat>);
template LUFactors<Complex<double>> lu_factor(Matrix<Complex<double>>);
template LUFactors<Complex<BigFloat>> lu_factor(Matrix<Complex<BigFloat>>);
template std::vector<double> lu_solve(const LUFactors<double>&, std::span<const double>);
template std::vector<BigFloat> lu_solve(const LUFactors<BigFloat>&, std::span<const BigFloat>);
template std::vector<Complex<double>> lu_solve(const LUFactors<Complex<double>>&,
                                               std::span<const Complex<double>>);
template std::vector<Complex<BigFloat>> lu_solve(const LUFactors<Complex<BigFloat>>&,
                                                 std::span<const Complex<BigFloat>>);
template Complex<double> poly_eval(const Polynomial<double>&, const Complex<double>&);
template Complex<BigFloat> poly_eval(const Polynomial<BigFloat>&, const Complex<BigFloat>&);
template RootResult<double> poly_roots(const Polynomial<double>&, const RootOptions&);
template RootResult<BigFloat> poly_roots(const Polynomial<BigFloat>&, const RootOptions&);
template Polynomial<double> from_roots(std::span<const Complex<double>>);
template Polynomial<BigFloat> from_roots(std::span<const Complex<BigFloat>>);

}  // namespace hemlab
