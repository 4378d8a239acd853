#include "hemlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hemlab {

template <class R>
MismatchReport embedded_mismatch(const NetworkModel& net, const EmbeddedEquations<R>& eqs,
                                 const std::vector<Complex<R>>& v, const R& alpha) {
  const auto r = equation_residual(eqs, v, alpha);
  MismatchReport report;
  double worst = -1.0;
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    BusMismatch b;
    b.id = net.buses()[i].id;
    b.dp = to_double(r.ds[i].re);
    b.dq = to_double(r.ds[i].im);
    const double ds = to_double(abs(r.ds[i]));
    b.ds_mva = ds * net.base_mva();
    b.dv = to_double(r.dv[i]);
    report.max_p = std::max(report.max_p, std::fabs(b.dp));
    report.max_q = std::max(report.max_q, std::fabs(b.dq));
    report.max_s = std::max(report.max_s, ds);
    report.max_v = std::max(report.max_v, std::fabs(b.dv));
    const double bus_worst = std::max(ds, std::fabs(b.dv));
    if (bus_worst > worst) {
      worst = bus_worst;
      report.worst_bus = b.id;
    }
    report.buses.push_back(std::move(b));
  }
  return report;
}

template <class R>
MismatchReport mismatch(const NetworkModel& net, const AdmittanceDecomposition<R>& dec,
                        const std::vector<Complex<R>>& v, const R& alpha) {
  return embedded_mismatch(net, embedded_equations(EmbeddingKind::Classical, dec, net), v, alpha);
}

double cf_estimate(const std::vector<double>& errors, int bits) {
  if (errors.size() < 3) throw InsufficientLength("cf_estimate: need at least 3 errors");
  const double floor = std::ldexp(1.0, -(bits - 16));
  double log_sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    const double a = errors[k];
    const double b = errors[k + 1];
    if (!std::isfinite(a) || !std::isfinite(b) || a < floor || b < floor) continue;
    log_sum += std::log(b / a);
    ++count;
  }
  if (count == 0) throw AllRatiosAtNoiseFloor("cf_estimate: every ratio touches the noise floor");
  return std::exp(log_sum / count);
}

double line_capacity(double a, double b) {
  if (a == b) throw std::invalid_argument("line_capacity: endpoints coincide");
  return std::fabs(b - a) / 4.0;
}

double bcc_estimate(CFCurve& curve) {
  constexpr double target = 0.01;
  const CFSample* below = nullptr;
  const CFSample* above = nullptr;
  for (const auto& s : curve.samples) {
    if (std::fabs(s.alpha_hat - target) <= 1e-12) {
      curve.bcc_estimate = 100.0 * s.cf;
      return *curve.bcc_estimate;
    }
    if (s.alpha_hat >= 0.005 && s.alpha_hat < target &&
        (below == nullptr || s.alpha_hat > below->alpha_hat)) {
      below = &s;
    }
    if (s.alpha_hat > target && s.alpha_hat <= 0.02 &&
        (above == nullptr || s.alpha_hat < above->alpha_hat)) {
      above = &s;
    }
  }
  if (below == nullptr || above == nullptr) {
    throw NoSampleNearAlphaHat("bcc_estimate: no samples bracketing alpha_hat = 0.01");
  }
  const double t = (target - below->alpha_hat) / (above->alpha_hat - below->alpha_hat);
  curve.bcc_estimate = 100.0 * (below->cf + t * (above->cf - below->cf));
  return *curve.bcc_estimate;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw std::invalid_argument("log_spaced: need count >= 1 and 0 < lo <= hi");
  }
  std::vector<double> out;
  if (count == 1) return {lo};
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) out.push_back(lo * std::exp(step * i));
  out.back() = hi;
  return out;
}

namespace {

template <class R>
struct SeriesRun {
  SeriesSet<R> set;
  std::vector<std::size_t> tracked;
};

template <class R>
SeriesRun<R> run_series(const NetworkModel& net, EmbeddingKind kind, int order,
                        const GermOptions& germ) {
  const auto dec = build_admittance<R>(net);
  auto rs = compute_reference_state(kind, dec, net, germ);
  auto sys = make_recursion_system(embedded_equations(kind, dec, net), rs.germ);
  SeriesRun<R> run;
  run.set = extend_series(sys, rs.germ, order);
  for (std::size_t i = 0; i < net.size(); ++i)
    if (i != net.slack_index()) run.tracked.push_back(i);
  return run;
}

template <class R>
std::vector<const PowerSeries<R>*> tracked_series(const SeriesRun<R>& run) {
  std::vector<const PowerSeries<R>*> out;
  for (auto i : run.tracked) out.push_back(&run.set.v[i]);
  return out;
}

// Worst-bus error of [M/M+1], M = 0..m_max, at each alpha against `reference`.
template <class R>
std::vector<std::vector<double>> error_table(const NetworkModel& net, EmbeddingKind kind,
                                             const std::vector<double>& alphas,
                                             const std::vector<std::vector<BigFloat>>& ref_re,
                                             const std::vector<std::vector<BigFloat>>& ref_im,
                                             const CFOptions& options) {
  auto run = run_series<R>(net, kind, 2 * options.m_max + 1, options.germ);
  const auto series = tracked_series(run);
  std::vector<std::vector<double>> errors(alphas.size());
  std::optional<PadeStep<R>> previous;
  for (int m = 0; m <= options.m_max; ++m) {
    std::optional<PadeStep<R>> step;
    try {
      step = build_step(series, m, previous ? &*previous : nullptr);
    } catch (const SingularDenominatorSystem&) {
    }
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      double worst = std::numeric_limits<double>::quiet_NaN();
      if (step) {
        try {
          const auto values = evaluate_step(*step, Complex<R>(R(alphas[a])));
          worst = 0.0;
          for (std::size_t t = 0; t < values.size(); ++t) {
            const Complex<R> ref(convert_real<R>(ref_re[a][t]), convert_real<R>(ref_im[a][t]));
            worst = std::max(worst, to_double(abs(values[t] - ref)));
          }
        } catch (const PoleHit&) {
        }
      }
      errors[a].push_back(worst);
    }
    if (step) previous = std::move(step);
  }
  return errors;
}

}  // namespace

CFCurve cf_curve(const NetworkModel& net, EmbeddingKind kind, const std::vector<double>& alpha_hats,
                 const CFOptions& options) {
  if (options.m_max < 3) throw ConfigError("cf_curve: m_max must be at least 3");
  const int bits = std::max(53, options.precision_bits);
  std::vector<double> alphas;
  for (double h : alpha_hats) alphas.push_back(h * options.scale);

  const int ref_bits = 4 * bits;
  const int m_ref = 2 * options.m_max;
  std::vector<std::vector<BigFloat>> ref_re(alphas.size()), ref_im(alphas.size());
  {
    PrecisionScope scope(ref_bits);
    GermOptions germ = options.germ;
    germ.tol.reset();
    auto run = run_series<BigFloat>(net, kind, 2 * m_ref + 1, germ);
    // A terminating series makes high orders singular; step down until usable.
    std::optional<PadeStep<BigFloat>> step;
    for (int m = m_ref; m >= 0 && !step; --m) {
      try {
        step = build_step<BigFloat>(tracked_series(run), m, nullptr);
      } catch (const SingularDenominatorSystem&) {
      }
    }
    if (!step) throw SingularDenominatorSystem("cf_curve: no usable reference approximant");
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      for (const auto& v : evaluate_step(*step, Complex<BigFloat>(BigFloat(alphas[a])))) {
        ref_re[a].push_back(v.re);
        ref_im[a].push_back(v.im);
      }
    }
  }

  std::vector<std::vector<double>> errors;
  if (bits == 53) {
    errors = error_table<double>(net, kind, alphas, ref_re, ref_im, options);
  } else {
    PrecisionScope scope(bits);
    errors = error_table<BigFloat>(net, kind, alphas, ref_re, ref_im, options);
  }

  CFCurve curve;
  curve.reference_description = "[" + std::to_string(m_ref) + "/" + std::to_string(m_ref + 1) +
                                "] approximant at " + std::to_string(ref_bits) + " bits";
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    curve.samples.push_back({alpha_hats[a], std::sqrt(cf_estimate(errors[a], bits))});
  }
  return curve;
}

namespace {


template <class R>
std::vector<Complex<R>> non_spurious_poles(const PadeApproximant<R>& pa, const R& spurious_tol) {
  auto pz = pole_zeros(pa);
  const auto pairs = detect_spurious<R>(pz.poles, pz.zeros, spurious_tol);
  std::vector<bool> drop(pz.poles.size(), false);
  for (const auto& p : pairs) drop[p.pole_index] = true;
  std::vector<Complex<R>> out;
  for (std::size_t i = 0; i < pz.poles.size(); ++i)
    if (!drop[i]) out.push_back(pz.poles[i]);
  return out;
}

template <class R>
bool on_positive_real_axis(const Complex<R>& z, double tol_angle) {
  const double re = to_double(z.re);
  const double im = to_double(z.im);
  const double r = std::hypot(re, im);
  return re > 0.0 && r > 0.0 && std::fabs(im) / r < tol_angle;
}

}  // namespace

template <class R>
std::optional<double> snbp_estimate(const std::vector<PadeApproximant<R>>& pa_set,
                                    const R& spurious_tol, double tol_angle) {
  std::optional<double> best;
  for (const auto& pa : pa_set) {
    for (const auto& p : non_spurious_poles(pa, spurious_tol)) {
      if (!on_positive_real_axis(p, tol_angle)) continue;
      const double r = to_double(abs(p));
      if (!best || r < *best) best = r;
    }
  }
  return best;
}

template <class R>
std::vector<SweepRow> sweep_profile(const NetworkModel& net, const SeriesSet<R>& set,
                                    const std::vector<std::optional<PadeApproximant<R>>>& pa_set,
                                    const std::vector<double>& alphas, const R& spurious_tol,
                                    double exclusion) {
  std::vector<double> real_poles;
  for (const auto& pa : pa_set) {
    if (!pa) continue;
    for (const auto& p : non_spurious_poles(*pa, spurious_tol)) {
      const double r = to_double(abs(p));
      if (r > 0.0 && std::fabs(to_double(p.im)) / r < kRealAxisAngle) {
        real_poles.push_back(to_double(p.re));
      }
    }
  }
  std::vector<SweepRow> rows;
  for (double a : alphas) {
    bool near_pole = false;
    for (double p : real_poles) {
      if (std::fabs(a - p) <= exclusion * std::max(1.0, std::fabs(p))) near_pole = true;
    }
    const Complex<R> alpha{R(a)};
    for (std::size_t i = 0; i < net.size(); ++i) {
      SweepRow row;
      row.alpha = a;
      row.bus = net.buses()[i].id;
      row.flagged = near_pole;
      try {
        const Complex<R> v = pa_set[i] ? evaluate(*pa_set[i], alpha) : set.v[i].evaluate(alpha);
        row.vmag = to_double(abs(v));
        row.vang = to_double(arg(v));
      } catch (const PoleHit&) {
        row.vmag = std::numeric_limits<double>::quiet_NaN();
        row.vang = std::numeric_limits<double>::quiet_NaN();
        row.flagged = true;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

template <class R>
std::vector<RootRow> root_plot_data(const std::vector<PadeApproximant<R>>& pa_set,
                                    const R& spurious_tol) {
  std::vector<RootRow> rows;
  for (const auto& pa : pa_set) {
    const auto pz = pole_zeros(pa);
    const auto pairs = detect_spurious<R>(pz.poles, pz.zeros, spurious_tol);
    std::vector<bool> pole_spurious(pz.poles.size(), false);
    std::vector<bool> zero_spurious(pz.zeros.size(), false);
    for (const auto& p : pairs) {
      pole_spurious[p.pole_index] = true;
      zero_spurious[p.zero_index] = true;
    }
    auto emit = [&](const std::vector<Complex<R>>& roots, const std::vector<bool>& flags,
                    bool pole) {
      for (std::size_t i = 0; i < roots.size(); ++i) {
        rows.push_back({pole, false, to_double(roots[i].re), to_double(roots[i].im), flags[i],
                        pa.m});
      }
      for (std::size_t i = 0; i < roots.size(); ++i) {
        if (is_zero(roots[i])) continue;
        const auto z = inverse(roots[i]);
        rows.push_back({pole, true, to_double(z.re), to_double(z.im), flags[i], pa.m});
      }
    };
    emit(pz.poles, pole_spurious, true);
    emit(pz.zeros, zero_spurious, false);
  }
  return rows;
}

void write_root_csv(std::ostream& out, const std::vector<RootRow>& rows) {
  out << "kind,plane,re,im,spurious,M\n";
  for (const auto& r : rows) {
    out << (r.pole ? "pole" : "zero") << ',' << (r.inverse_plane ? "inverse_alpha" : "alpha")
        << ',' << format_real(r.re) << ',' << format_real(r.im) << ','
        << (r.spurious ? "true" : "false") << ',' << r.m << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "alpha,bus,vmag,vang,flagged\n";
  for (const auto& r : rows) {
    out << format_real(r.alpha) << ',' << r.bus << ',' << format_real(r.vmag) << ','
        << format_real(r.vang) << ',' << (r.flagged ? "true" : "false") << '\n';
  }
}

void write_cf_csv(std::ostream& out, const CFCurve& curve) {
  out << "alpha_hat,cf\n";
  for (const auto& s : curve.samples) {
    out << format_real(s.alpha_hat) << ',' << format_real(s.cf) << '\n';
  }
}

void write_mismatch_csv(std::ostream& out, const MismatchReport& report) {
  out << "bus,dp,dq,ds_mva\n";
  for (const auto& b : report.buses) {
    out << b.id << ',' << format_real(b.dp) << ',' << format_real(b.dq) << ','
        << format_real(b.ds_mva) << '\n';
  }
}

#define HEMLAB_INSTANTIATE(R)                                                                   \
  template MismatchReport embedded_mismatch(const NetworkModel&, const EmbeddedEquations<R>&,   \
                                            const std::vector<Complex<R>>&, const R&);          \
  template MismatchReport mismatch(const NetworkModel&, const AdmittanceDecomposition<R>&,      \
                                   const std::vector<Complex<R>>&, const R&);                   \
  template std::optional<double> snbp_estimate(const std::vector<PadeApproximant<R>>&,          \
                                               const R&, double);                               \
  template std::vector<SweepRow> sweep_profile(                                                 \
      const NetworkModel&, const SeriesSet<R>&,                                                 \
      const std::vector<std::optional<PadeApproximant<R>>>&, const std::vector<double>&,        \
      const R&, double);                                                                        \
  template std::vector<RootRow> root_plot_data(const std::vector<PadeApproximant<R>>&, const R&);
HEMLAB_INSTANTIATE(double)
HEMLAB_INSTANTIATE(BigFloat)
#undef HEMLAB_INSTANTIATE

}  // namespace hemlab
