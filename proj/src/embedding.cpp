#include "hemlab/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "hemlab/pade.hpp"

namespace hemlab {

std::string_view to_string(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::Classical:
      return "classical";
    case EmbeddingKind::Canonical:
      return "canonical";
    case EmbeddingKind::CanonicalGRhs:
      return "canonical_g_rhs";
    case EmbeddingKind::CanonicalPsRhs:
      return "canonical_ps_rhs";
  }
  return "unknown";
}

EmbeddingKind parse_embedding(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '-', '_');
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "classical") return EmbeddingKind::Classical;
  if (s == "canonical") return EmbeddingKind::Canonical;
  if (s == "canonical_g_rhs" || s == "g_rhs") return EmbeddingKind::CanonicalGRhs;
  if (s == "canonical_ps_rhs" || s == "ps_rhs") return EmbeddingKind::CanonicalPsRhs;
  throw ConfigError("unknown embedding '" + std::string(name) + "'");
}

namespace {

template <class R>
ComplexMatrix<R> sum(const ComplexMatrix<R>& a, const ComplexMatrix<R>& b) {
  ComplexMatrix<R> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) out(i, k) = a(i, k) + b(i, k);
  return out;
}

template <class R>
ComplexMatrix<R> difference(const ComplexMatrix<R>& a, const ComplexMatrix<R>& b) {
  ComplexMatrix<R> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) out(i, k) = a(i, k) - b(i, k);
  return out;
}

template <class R>
ComplexMatrix<R> diagonal(const std::vector<Complex<R>>& d) {
  ComplexMatrix<R> out(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out(i, i) = d[i];
  return out;
}

// j * m for a real matrix m.
template <class R>
ComplexMatrix<R> imaginary(const Matrix<R>& m) {
  ComplexMatrix<R> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t k = 0; k < m.cols(); ++k) out(i, k) = Complex<R>(R(0), m(i, k));
  return out;
}

template <class R>
ComplexMatrix<R> real_part(const Matrix<R>& m) {
  ComplexMatrix<R> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t k = 0; k < m.cols(); ++k) out(i, k) = Complex<R>(m(i, k));
  return out;
}

template <class R>
Complex<R> slack_voltage(const Bus& b) {
  return polar(R(b.v_setpoint), R(b.v_angle));
}

template <class R>
Complex<R> jmul(const Complex<R>& z) {
  return Complex<R>(-z.im, z.re);
}

// Real-augmented matrix of one linearised order:
//   sum_k L_ik V_k + c_i conj(V_i) + d_i Q_i   (balance rows)
//   2 Re(conj(V0_i) V_i)                       (PV magnitude rows)
template <class R>
Matrix<R> real_system(const ComplexMatrix<R>& l, const UnknownLayout& layout,
                      const std::vector<BusKind>& kinds, const std::vector<Complex<R>>& v0,
                      const std::vector<Complex<R>>& c, const std::vector<Complex<R>>& d) {
  Matrix<R> m(layout.size, layout.size);
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (kinds[i] == BusKind::Slack) continue;
    const auto re = static_cast<std::size_t>(layout.v_pos[i]);
    const auto im = re + 1;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      if (kinds[k] == BusKind::Slack) continue;
      const auto x = static_cast<std::size_t>(layout.v_pos[k]);
      const auto& a = l(i, k);
      m(re, x) += a.re;
      m(re, x + 1) -= a.im;
      m(im, x) += a.im;
      m(im, x + 1) += a.re;
    }
    if (!is_zero(c[i])) {
      m(re, re) += c[i].re;
      m(re, im) += c[i].im;
      m(im, re) += c[i].im;
      m(im, im) -= c[i].re;
    }
    if (kinds[i] == BusKind::PV) {
      const auto q = static_cast<std::size_t>(layout.q_pos[i]);
      m(re, q) += d[i].re;
      m(im, q) += d[i].im;
      m(q, re) = R(2) * v0[i].re;
      m(q, im) = R(2) * v0[i].im;
    }
  }
  return m;
}

template <class R>
SeriesSet<R> germ_from_values(const std::vector<Complex<R>>& v, const std::vector<BusKind>& kinds,
                              const std::vector<R>& q) {
  SeriesSet<R> set;
  set.order = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    set.v.emplace_back(std::vector<Complex<R>>{v[i]});
    set.w.emplace_back(std::vector<Complex<R>>{inverse(v[i])});
    if (kinds[i] == BusKind::PV) set.q.emplace(i, PowerSeries<R>({Complex<R>(q[i])}));
  }
  return set;
}

}  // namespace

UnknownLayout make_layout(const std::vector<BusKind>& kinds) {
  UnknownLayout layout;
  layout.v_pos.assign(kinds.size(), -1);
  layout.q_pos.assign(kinds.size(), -1);
  long pos = 0;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (kinds[i] == BusKind::Slack) continue;
    layout.v_pos[i] = pos;
    pos += 2;
    if (kinds[i] == BusKind::PV) layout.q_pos[i] = pos++;
  }
  layout.size = static_cast<std::size_t>(pos);
  return layout;
}

template <class R>
EmbeddedEquations<R> embedded_equations(EmbeddingKind kind, const AdmittanceDecomposition<R>& dec,
                                        const NetworkModel& net) {
  const std::size_t n = net.size();
  EmbeddedEquations<R> eq;
  eq.kind = kind;
  eq.slack = net.slack_index();
  eq.s_conj.assign(n, Complex<R>());
  eq.p.assign(n, R(0));
  eq.mag0.assign(n, R(0));
  eq.mag1.assign(n, R(0));
  const bool canonical_family = kind != EmbeddingKind::Classical;
  for (std::size_t i = 0; i < n; ++i) {
    const Bus& b = net.buses()[i];
    eq.bus_kinds.push_back(b.kind);
    switch (b.kind) {
      case BusKind::PQ:
        eq.s_conj[i] = Complex<R>(R(b.p_injection()), -R(b.q_injection()));
        break;
      case BusKind::PV: {
        eq.p[i] = R(b.p_injection());
        const R sp = R(b.v_setpoint) * R(b.v_setpoint);
        eq.mag0[i] = canonical_family ? R(1) : sp;
        eq.mag1[i] = canonical_family ? sp - R(1) : R(0);
        break;
      }
      case BusKind::Slack: {
        const Complex<R> vs = slack_voltage<R>(b);
        eq.slack0 = canonical_family ? Complex<R>(R(1)) : vs;
        eq.slack1 = canonical_family ? vs - Complex<R>(R(1)) : Complex<R>();
        break;
      }
    }
  }
  const ComplexMatrix<R> sh = diagonal(dec.y_sh);
  switch (kind) {
    case EmbeddingKind::Classical:
      eq.lhs = dec.y_full;
      eq.rhs_linear = ComplexMatrix<R>(n, n);
      break;
    case EmbeddingKind::Canonical:
      eq.lhs = dec.y_tr;
      eq.rhs_linear = sh;
      break;
    case EmbeddingKind::CanonicalGRhs:
      eq.lhs = imaginary(dec.b_tr);
      eq.rhs_linear = sum(real_part(dec.g_tr), sh);
      break;
    case EmbeddingKind::CanonicalPsRhs:
      // The symmetric part sits on the left for PV rows too; keeping the full
      // transmission matrix there would count the asymmetric part twice.
      eq.lhs = dec.y_tr_sym;
      eq.rhs_linear = sum(dec.y_tr_asym, sh);
      break;
  }
  return eq;
}

template <class R>
RecursionSystem<R> make_recursion_system(EmbeddedEquations<R> equations, SeriesSet<R> germ) {
  RecursionSystem<R> sys;
  sys.layout = make_layout(equations.bus_kinds);
  const std::size_t n = equations.size();
  std::vector<Complex<R>> v0(n), c(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    v0[i] = germ.v[i][0];
    if (equations.bus_kinds[i] == BusKind::PV) {
      const Complex<R> wc0 = conj(germ.w[i][0]);
      const R q0 = germ.q.at(i)[0].re;
      // -j Q0 conj(W0)^2 multiplies conj(V[n]); j conj(W0) multiplies Q[n].
      c[i] = jmul(wc0 * wc0) * (-q0);
      d[i] = jmul(wc0);
    }
  }
  if (sys.layout.size > 0) {
    auto m = real_system(equations.lhs, sys.layout, equations.bus_kinds, v0, c, d);
    try {
      sys.lhs_factors = lu_factor(std::move(m));
    } catch (const SingularMatrix&) {
      throw SingularRecursionMatrix(std::string("recursion matrix singular for the ") +
                                    std::string(to_string(equations.kind)) + " embedding");
    }
  }
  sys.equations = std::move(equations);
  sys.germ = std::move(germ);
  return sys;
}

template <class R>
SeriesSet<R> extend_series(const RecursionSystem<R>& sys, SeriesSet<R> set, int target_order) {
  const auto& eq = sys.equations;
  const auto& layout = sys.layout;
  const std::size_t nb = eq.size();
  std::vector<R> rhs(layout.size, R(0));
  for (int n = set.order + 1; n <= target_order; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const Complex<R> vs_n = n == 1 ? eq.slack1 : Complex<R>();
    for (std::size_t i = 0; i < nb; ++i) {
      if (eq.bus_kinds[i] == BusKind::Slack) continue;
      const auto& v = set.v[i];
      const auto& w = set.w[i];
      Complex<R> acc;
      if (eq.bus_kinds[i] == BusKind::PQ) {
        acc = eq.s_conj[i] * conj(w[un - 1]);
      } else {
        const auto& q = set.q.at(i);
        acc = conj(w[un - 1]) * eq.p[i];
        Complex<R> qw;
        for (int m = 1; m < n; ++m) qw += conj(w[un - m]) * q[m].re;
        // Part of W[n] that does not involve V[n].
        Complex<R> wk;
        for (int m = 1; m < n; ++m) wk += v[m] * w[un - m];
        wk = -(w[0] * wk);
        qw += conj(wk) * q[0].re;
        acc -= jmul(qw);
      }
      for (std::size_t k = 0; k < nb; ++k) {
        if (!is_zero(eq.rhs_linear(i, k))) acc -= eq.rhs_linear(i, k) * set.v[k][un - 1];
      }
      acc -= eq.lhs(i, eq.slack) * vs_n;
      const auto re = static_cast<std::size_t>(layout.v_pos[i]);
      rhs[re] = acc.re;
      rhs[re + 1] = acc.im;
      if (eq.bus_kinds[i] == BusKind::PV) {
        R t = n == 1 ? eq.mag1[i] : R(0);
        for (int m = 1; m < n; ++m) t -= (v[m] * conj(v[un - m])).re;
        rhs[static_cast<std::size_t>(layout.q_pos[i])] = t;
      }
    }
    std::vector<R> x;
    if (sys.lhs_factors) x = lu_solve(*sys.lhs_factors, std::span<const R>(rhs));
    for (std::size_t i = 0; i < nb; ++i) {
      if (eq.bus_kinds[i] == BusKind::Slack) {
        set.v[i].push_back(vs_n);
      } else {
        const auto re = static_cast<std::size_t>(layout.v_pos[i]);
        set.v[i].push_back(Complex<R>(x[re], x[re + 1]));
        if (eq.bus_kinds[i] == BusKind::PV) {
          set.q.at(i).push_back(Complex<R>(x[static_cast<std::size_t>(layout.q_pos[i])]));
        }
      }
      auto& w = set.w[i];
      const auto& v = set.v[i];
      Complex<R> acc;
      for (int m = 1; m <= n; ++m) acc += v[m] * w[un - m];
      w.push_back(-(w[0] * acc));
    }
    set.order = n;
  }
  return set;
}

template <class R>
EquationResidual<R> equation_residual(const EmbeddedEquations<R>& eqs,
                                      const std::vector<Complex<R>>& v, const R& alpha) {
  const std::size_t n = eqs.size();
  EquationResidual<R> out;
  out.ds.assign(n, Complex<R>());
  out.dv.assign(n, R(0));
  out.q.assign(n, R(0));
  for (std::size_t i = 0; i < n; ++i) {
    Complex<R> current;
    for (std::size_t k = 0; k < n; ++k) {
      current += eqs.lhs(i, k) * v[k];
      if (!is_zero(eqs.rhs_linear(i, k))) current += eqs.rhs_linear(i, k) * v[k] * alpha;
    }
    const Complex<R> s = v[i] * conj(current);
    out.q[i] = s.im;
    switch (eqs.bus_kinds[i]) {
      case BusKind::PQ:
        out.ds[i] = conj(eqs.s_conj[i]) * alpha - s;
        break;
      case BusKind::PV:
        out.ds[i] = Complex<R>(eqs.p[i] * alpha - s.re);
        out.dv[i] = norm(v[i]) - (eqs.mag0[i] + eqs.mag1[i] * alpha);
        break;
      case BusKind::Slack:
        out.dv[i] = abs(v[i] - (eqs.slack0 + eqs.slack1 * alpha));
        break;
    }
  }
  return out;
}

template <class R>
double max_residual(const EquationResidual<R>& r) {
  double worst = 0.0;
  for (const auto& x : r.ds) worst = std::max(worst, to_double(abs(x)));
  for (const auto& x : r.dv) worst = std::max(worst, std::fabs(to_double(x)));
  return worst;
}

namespace {

// Newton's method on the alpha = 0 equations of `eqs`. The Jacobian has the
// same shape as the recursion matrix, evaluated at the current iterate.
template <class R>
double newton_polish(const EmbeddedEquations<R>& eqs, std::vector<Complex<R>>& v,
                     std::vector<R>& q, double tol, int max_iterations) {
  const auto layout = make_layout(eqs.bus_kinds);
  const std::size_t n = eqs.size();
  const R zero(0);
  double measure = max_residual(equation_residual(eqs, v, zero));
  for (int it = 0; it < max_iterations && measure > tol; ++it) {
    std::vector<Complex<R>> c(n), d(n);
    std::vector<R> f(layout.size, R(0));
    for (std::size_t i = 0; i < n; ++i) {
      if (eqs.bus_kinds[i] == BusKind::Slack) continue;
      Complex<R> current;
      for (std::size_t k = 0; k < n; ++k) current += eqs.lhs(i, k) * v[k];
      const auto re = static_cast<std::size_t>(layout.v_pos[i]);
      if (eqs.bus_kinds[i] == BusKind::PV) {
        const Complex<R> wc = inverse(conj(v[i]));
        c[i] = jmul(wc * wc) * (-q[i]);
        d[i] = jmul(wc);
        current += jmul(wc) * q[i];
        f[static_cast<std::size_t>(layout.q_pos[i])] = norm(v[i]) - eqs.mag0[i];
      }
      f[re] = current.re;
      f[re + 1] = current.im;
    }
    for (auto& x : f) x = -x;
    std::vector<R> dx;
    try {
      auto lu = lu_factor(real_system(eqs.lhs, layout, eqs.bus_kinds, v, c, d));
      dx = lu_solve(lu, std::span<const R>(f));
    } catch (const SingularMatrix&) {
      break;
    }
    std::vector<Complex<R>> v_next = v;
    std::vector<R> q_next = q;
    for (std::size_t i = 0; i < n; ++i) {
      if (eqs.bus_kinds[i] == BusKind::Slack) continue;
      const auto re = static_cast<std::size_t>(layout.v_pos[i]);
      v_next[i] += Complex<R>(dx[re], dx[re + 1]);
      if (eqs.bus_kinds[i] == BusKind::PV) q_next[i] += dx[static_cast<std::size_t>(layout.q_pos[i])];
    }
    const double next = max_residual(equation_residual(eqs, v_next, zero));
    if (!(next < measure)) break;
    v = std::move(v_next);
    q = std::move(q_next);
    measure = next;
  }
  return measure;
}

// Largest |sum_k L_ik| over non-slack rows, relative to the row's scale.
template <class R>
bool flat_state_solves(const EmbeddedEquations<R>& eqs) {
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    if (eqs.bus_kinds[i] == BusKind::Slack) continue;
    Complex<R> row;
    R scale(0);
    for (std::size_t k = 0; k < eqs.size(); ++k) {
      row += eqs.lhs(i, k);
      scale += abs(eqs.lhs(i, k));
    }
    if (abs(row) > pow2<R>(-(working_bits<R>() - 4)) * scale) return false;
  }
  return true;
}

// The no-load problem whose alpha = 1 solution is the germ of `target`:
// zero-row-sum part on the left, the remainder and all setpoint offsets
// embedded in alpha.
template <class R>
EmbeddedEquations<R> auxiliary_equations(EmbeddingKind kind, const AdmittanceDecomposition<R>& dec,
                                         const EmbeddedEquations<R>& target) {
  EmbeddedEquations<R> aux;
  aux.kind = EmbeddingKind::Canonical;
  aux.bus_kinds = target.bus_kinds;
  aux.slack = target.slack;
  const std::size_t n = target.size();
  aux.s_conj.assign(n, Complex<R>());
  aux.p.assign(n, R(0));
  aux.mag0.assign(n, R(0));
  aux.mag1.assign(n, R(0));
  for (std::size_t i = 0; i < n; ++i) {
    if (target.bus_kinds[i] != BusKind::PV) continue;
    aux.mag0[i] = R(1);
    aux.mag1[i] = target.mag0[i] - R(1);
  }
  aux.slack0 = Complex<R>(R(1));
  aux.slack1 = target.slack0 - Complex<R>(R(1));
  if (kind == EmbeddingKind::CanonicalGRhs) {
    Matrix<R> b_sym(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) b_sym(i, k) = dec.y_tr_sym(i, k).im;
    aux.lhs = imaginary(b_sym);
  } else {
    aux.lhs = dec.y_tr_sym;
  }
  aux.rhs_linear = difference(target.lhs, aux.lhs);
  return aux;
}

template <class R>
R default_germ_tolerance(const EmbeddedEquations<R>&) {
  return pow2<R>(-(working_bits<R>() - 16));
}

}  // namespace

template <class R>
ReferenceState<R> compute_reference_state(EmbeddingKind kind,
                                          const AdmittanceDecomposition<R>& dec,
                                          const NetworkModel& net, const GermOptions& options) {
  const auto eqs = embedded_equations(kind, dec, net);
  const std::size_t n = eqs.size();
  const double tol =
      options.tol ? *options.tol : to_double(default_germ_tolerance(eqs));
  ReferenceState<R> out;

  {
    const std::vector<Complex<R>> flat(n, Complex<R>(R(1)));
    const double flat_mismatch = max_residual(equation_residual(eqs, flat, R(0)));
    const bool flat_ok = kind == EmbeddingKind::Classical ? flat_mismatch <= tol
                                                          : flat_state_solves(eqs);
    if (flat_ok) {
      out.germ = germ_from_values(flat, eqs.bus_kinds, std::vector<R>(n, R(0)));
      out.by_inspection = true;
      out.mismatch = flat_mismatch;
      return out;
    }
  }

  const auto aux = auxiliary_equations(kind, dec, eqs);
  std::vector<Complex<R>> flat(n, Complex<R>(R(1)));
  auto sys = make_recursion_system(aux, germ_from_values(flat, aux.bus_kinds, std::vector<R>(n, R(0))));

  std::vector<std::size_t> tracked;
  for (std::size_t i = 0; i < n; ++i)
    if (aux.bus_kinds[i] != BusKind::Slack) tracked.push_back(i);

  const Complex<R> one(R(1));
  const Complex<R> slack_value = aux.slack0 + aux.slack1;
  SeriesSet<R> set = sys.germ;
  std::optional<PadeStep<R>> previous;
  std::vector<Complex<R>> best_v;
  double best = std::numeric_limits<double>::infinity();
  int best_terms = 0;
  int stall = 0;
  for (int m = 0; 2 * m + 2 <= options.max_terms; ++m) {
    set = extend_series(sys, std::move(set), 2 * m + 1);
    std::vector<const PowerSeries<R>*> series;
    for (auto i : tracked) series.push_back(&set.v[i]);
    PadeStep<R> step;
    try {
      step = build_step(series, m, previous ? &*previous : nullptr);
    } catch (const SingularDenominatorSystem&) {
      continue;
    }
    double measure = std::numeric_limits<double>::infinity();
    std::vector<Complex<R>> v(n);
    try {
      auto values = evaluate_step(step, one);
      for (std::size_t t = 0; t < tracked.size(); ++t) v[tracked[t]] = values[t];
      v[aux.slack] = slack_value;
      measure = max_residual(equation_residual(eqs, v, R(0)));
    } catch (const PoleHit&) {
    }
    previous = std::move(step);
    if (measure < best) {
      best = measure;
      best_v = v;
      best_terms = 2 * m + 2;
      stall = 0;
    } else if (++stall >= 6) {
      break;
    }
    if (best <= tol) break;
  }
  if (best_v.empty()) throw GermNotConverged("no-load solve produced no usable approximant");

  std::vector<R> q = equation_residual(eqs, best_v, R(0)).q;
  for (std::size_t i = 0; i < n; ++i)
    if (eqs.bus_kinds[i] != BusKind::PV) q[i] = R(0);
  if (best > tol) {
    best = newton_polish(eqs, best_v, q, tol, 30);
    out.newton_polished = true;
  }
  if (!(best <= tol)) {
    throw GermNotConverged("no-load solve reached mismatch " + std::to_string(best) +
                           ", above the germ tolerance " + std::to_string(tol));
  }
  // Reactive germ from the final voltages.
  q = equation_residual(eqs, best_v, R(0)).q;
  for (std::size_t i = 0; i < n; ++i)
    if (eqs.bus_kinds[i] != BusKind::PV) q[i] = R(0);
  out.germ = germ_from_values(best_v, eqs.bus_kinds, q);
  out.mismatch = best;
  out.terms_used = best_terms;
  return out;
}

template <class R>
std::vector<R> residual_check(EmbeddingKind kind, const AdmittanceDecomposition<R>& dec,
                              const NetworkModel& net, const SeriesSet<R>& set) {
  const std::size_t nb = net.size();
  const int order = set.order;
  const auto uo = static_cast<std::size_t>(order);
  ComplexMatrix<R> lhs, moved;
  switch (kind) {
    case EmbeddingKind::Classical:
      lhs = dec.y_full;
      moved = ComplexMatrix<R>(nb, nb);
      break;
    case EmbeddingKind::Canonical:
      lhs = dec.y_tr;
      moved = diagonal(dec.y_sh);
      break;
    case EmbeddingKind::CanonicalGRhs:
      lhs = imaginary(dec.b_tr);
      moved = sum(real_part(dec.g_tr), diagonal(dec.y_sh));
      break;
    case EmbeddingKind::CanonicalPsRhs:
      lhs = dec.y_tr_sym;
      moved = sum(dec.y_tr_asym, diagonal(dec.y_sh));
      break;
  }
  const bool canonical_family = kind != EmbeddingKind::Classical;
  std::vector<R> worst(uo + 1, R(0));
  auto note = [&](std::size_t n, const R& r) {
    if (r > worst[n]) worst[n] = r;
  };
  for (std::size_t i = 0; i < nb; ++i) {
    const Bus& b = net.buses()[i];
    const auto& v = set.v[i];
    if (b.kind == BusKind::Slack) {
      const Complex<R> vs = slack_voltage<R>(b);
      for (std::size_t n = 0; n <= uo; ++n) {
        Complex<R> target;
        if (n == 0) target = canonical_family ? Complex<R>(R(1)) : vs;
        if (n == 1 && canonical_family) target = vs - Complex<R>(R(1));
        note(n, abs(v[n] - target));
      }
      continue;
    }
    const auto wc = conjugate_reflect(reciprocal(v, order));
    for (std::size_t n = 0; n <= uo; ++n) {
      Complex<R> left;
      for (std::size_t k = 0; k < nb; ++k) left += lhs(i, k) * set.v[k][n];
      Complex<R> right;
      if (n >= 1) {
        for (std::size_t k = 0; k < nb; ++k) right -= moved(i, k) * set.v[k][n - 1];
      }
      if (b.kind == BusKind::PQ) {
        if (n >= 1) right += Complex<R>(R(b.p_injection()), -R(b.q_injection())) * wc[n - 1];
      } else {
        const auto& q = set.q.at(i);
        if (n >= 1) right += wc[n - 1] * R(b.p_injection());
        Complex<R> qw;
        for (std::size_t m = 0; m <= n; ++m) qw += wc[n - m] * q[m];
        right -= Complex<R>(-qw.im, qw.re);
      }
      note(n, abs(left - right));
    }
    if (b.kind == BusKind::PV) {
      const auto mag = convolve(v, conjugate_reflect(v), order);
      const R sp = R(b.v_setpoint) * R(b.v_setpoint);
      for (std::size_t n = 0; n <= uo; ++n) {
        R target(0);
        if (n == 0) target = canonical_family ? R(1) : sp;
        if (n == 1 && canonical_family) target = sp - R(1);
        note(n, abs(mag[n] - Complex<R>(target)));
      }
    }
  }
  return worst;
}

#define HEMLAB_INSTANTIATE(R)                                                                 \
  template EmbeddedEquations<R> embedded_equations(EmbeddingKind,                             \
                                                   const AdmittanceDecomposition<R>&,         \
                                                   const NetworkModel&);                      \
  template RecursionSystem<R> make_recursion_system(EmbeddedEquations<R>, SeriesSet<R>);      \
  template SeriesSet<R> extend_series(const RecursionSystem<R>&, SeriesSet<R>, int);          \
  template ReferenceState<R> compute_reference_state(EmbeddingKind,                           \
                                                     const AdmittanceDecomposition<R>&,       \
                                                     const NetworkModel&, const GermOptions&); \
  template EquationResidual<R> equation_residual(const EmbeddedEquations<R>&,                 \
                                                 const std::vector<Complex<R>>&, const R&);   \
  template double max_residual(const EquationResidual<R>&);                                   \
  template std::vector<R> residual_check(EmbeddingKind, const AdmittanceDecomposition<R>&,    \
                                         const NetworkModel&, const SeriesSet<R>&);
HEMLAB_INSTANTIATE(double)
HEMLAB_INSTANTIATE(BigFloat)
#undef HEMLAB_INSTANTIATE

}  // namespace hemlab
