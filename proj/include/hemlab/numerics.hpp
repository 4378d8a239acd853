#pragma once

// Dense linear algebra and polynomial tools shared by every other module.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "hemlab/complex.hpp"
#include "hemlab/errors.hpp"

namespace hemlab {

template <class F>
struct RealOf {
  using type = F;
};
template <class R>
struct RealOf<Complex<R>> {
  using type = R;
};
template <class F>
using real_of_t = typename RealOf<F>::type;

/// |x|^2 for real or complex scalars.
template <class R>
R magnitude2(const R& x) {
  return x * x;
}
template <class R>
R magnitude2(const Complex<R>& z) {
  return norm(z);
}

/// Dense row-major matrix.
template <class F>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, F(0)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  F& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const F& operator()(std::size_t r, std::size_t c) const {
    return entries_[r * cols_ + c];
  }

  std::span<F> row(std::size_t r) { return {entries_.data() + r * cols_, cols_}; }
  std::span<const F> row(std::size_t r) const {
    return {entries_.data() + r * cols_, cols_};
  }

  const std::vector<F>& entries() const { return entries_; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = F(1);
    return m;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<F> entries_;
};

template <class R>
using ComplexMatrix = Matrix<Complex<R>>;

template <class F>
std::vector<F> multiply(const Matrix<F>& a, std::span<const F> x) {
  if (a.cols() != x.size()) throw std::invalid_argument("multiply: size mismatch");
  std::vector<F> y(a.rows(), F(0));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    F acc(0);
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

/// PA = LU with partial pivoting, packed in one matrix (unit-diagonal L).
template <class F>
struct LUFactors {
  Matrix<F> lu;
  std::vector<std::size_t> permutation;  // row i of PA is row permutation[i] of A
  real_of_t<F> condition_proxy;          // max |pivot| / min |pivot|
  real_of_t<F> min_pivot;
  real_of_t<F> max_pivot;

  std::size_t size() const { return lu.rows(); }
};

/// Throws SingularMatrix when a pivot is exactly zero.
template <class F>
LUFactors<F> lu_factor(Matrix<F> m);

template <class F>
std::vector<F> lu_solve(const LUFactors<F>& f, std::span<const F> rhs);

/// Polynomial in one variable; coefficient i multiplies x^i.
///
/// Exact trailing zeros are trimmed on construction, so the stored leading
/// coefficient is nonzero unless the polynomial is identically zero (in which
/// case a single zero coefficient is kept).
template <class R>
class Polynomial {
 public:
  Polynomial() : coefficients_{Complex<R>()} {}
  explicit Polynomial(std::vector<Complex<R>> coefficients)
      : coefficients_(std::move(coefficients)) {
    while (coefficients_.size() > 1 && is_zero(coefficients_.back())) {
      coefficients_.pop_back();
    }
    if (coefficients_.empty()) coefficients_.emplace_back();
  }

  int degree() const { return static_cast<int>(coefficients_.size()) - 1; }
  bool is_zero_polynomial() const {
    return coefficients_.size() == 1 && is_zero(coefficients_[0]);
  }
  const std::vector<Complex<R>>& coefficients() const { return coefficients_; }
  const Complex<R>& operator[](std::size_t i) const { return coefficients_[i]; }

 private:
  std::vector<Complex<R>> coefficients_;
};

/// Horner evaluation.
template <class R>
Complex<R> poly_eval(const Polynomial<R>& p, const Complex<R>& z);

template <class R>
struct RootResult {
  std::vector<Complex<R>> roots;
  std::vector<bool> root_converged;
  bool converged = false;
  int iterations = 0;
};

struct RootOptions {
  int max_iterations = 200;
};

/// All roots of p (degree >= 1) by Aberth-Ehrlich simultaneous iteration.
///
/// A root r counts as converged when
///   |p(r)| <= 2^-(bits/2) * max|c_i| * max(1,|r|)^degree.
/// When iteration stops at `max_iterations` the best iterates are returned
/// with `converged == false`.
template <class R>
RootResult<R> poly_roots(const Polynomial<R>& p, const RootOptions& options = {});

/// Monic polynomial with the given roots.
template <class R>
Polynomial<R> from_roots(std::span<const Complex<R>> roots);

}  // namespace hemlab
