#include "hemlab/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace hemlab {

using nlohmann::json;

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged:
      return "CONVERGED";
    case SolveStatus::EpsNotMet:
      return "EPS_NOT_MET";
    case SolveStatus::MismatchNotMet:
      return "MISMATCH_NOT_MET";
    case SolveStatus::PrecisionExhausted:
      return "PRECISION_EXHAUSTED";
    case SolveStatus::NoGerm:
      return "NO_GERM";
    case SolveStatus::SingularSystem:
      return "SINGULAR_SYSTEM";
    case SolveStatus::SingularityOnPath:
      return "SINGULARITY_ON_PATH";
  }
  return "UNKNOWN";
}

void SolveConfig::validate() const {
  if (max_terms < 4) throw ConfigError("max_terms must be at least 4");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(mismatch_tol > 0.0)) throw ConfigError("mismatch_tol must be positive");
  if (spurious_tol && !(*spurious_tol > 0.0)) throw ConfigError("spurious_tol must be positive");
  if (germ_tol) {
    if (!(*germ_tol > 0.0)) throw ConfigError("germ_tol must be positive");
    if (*germ_tol > mismatch_tol) throw ConfigError("germ_tol must not exceed mismatch_tol");
  }
  if (precision_bits < 53) throw ConfigError("precision_bits must be at least 53");
  if (!std::isfinite(alpha)) throw ConfigError("alpha must be finite");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

template <class R>
R spurious_tolerance(const std::optional<double>& tol) {
  return tol ? R(*tol) : default_spurious_tolerance<R>();
}

template <class R>
std::vector<BusVoltage> bus_voltages(const NetworkModel& net, const std::vector<Complex<R>>& v) {
  std::vector<BusVoltage> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    BusVoltage b;
    b.id = net.buses()[i].id;
    b.re = to_double(v[i].re);
    b.im = to_double(v[i].im);
    b.vmag = to_double(abs(v[i]));
    b.vang = to_double(arg(v[i]));
    b.re_text = format_real(v[i].re);
    b.im_text = format_real(v[i].im);
    out.push_back(std::move(b));
  }
  return out;
}

template <class R>
double max_difference(const std::vector<Complex<R>>& a, const std::vector<Complex<R>>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, to_double(abs(a[i] - b[i])));
  return worst;
}

template <class R>
SolveReport solve_impl(const SolveConfig& cfg, const NetworkModel& net) {
  const auto start = Clock::now();
  SolveReport report;
  report.embedding = std::string(to_string(cfg.embedding));
  report.alpha = cfg.alpha;
  report.precision_bits = cfg.precision_bits;

  const auto dec = build_admittance<R>(net);
  const auto eqs = embedded_equations(cfg.embedding, dec, net);
  const R alpha_r(cfg.alpha);
  const Complex<R> alpha(alpha_r);
  const std::size_t nb = net.size();
  const std::size_t slack = net.slack_index();

  ReferenceState<R> rs;
  auto t = Clock::now();
  try {
    rs = compute_reference_state(cfg.embedding, dec, net, GermOptions{cfg.germ_tol, 120});
  } catch (const GermNotConverged& e) {
    report.status = SolveStatus::NoGerm;
    report.message = e.what();
    return report;
  } catch (const SingularRecursionMatrix& e) {
    report.status = SolveStatus::SingularSystem;
    report.message = e.what();
    return report;
  }
  report.timings.germ_s = seconds_since(t);
  report.germ_by_inspection = rs.by_inspection;
  report.germ_mismatch = rs.mismatch;
  report.germ_terms = rs.terms_used;
  report.germ_newton_polished = rs.newton_polished;

  const Complex<R> slack_value = eqs.slack0 + eqs.slack1 * alpha_r;
  if (nb == 1) {
    std::vector<Complex<R>> v{slack_value};
    report.status = SolveStatus::Converged;
    report.terms_used = 1;
    report.voltages = bus_voltages(net, v);
    report.mismatch = embedded_mismatch(net, eqs, v, alpha_r);
    report.timings.total_s = seconds_since(start);
    return report;
  }

  RecursionSystem<R> sys;
  try {
    sys = make_recursion_system(eqs, rs.germ);
  } catch (const SingularRecursionMatrix& e) {
    report.status = SolveStatus::SingularSystem;
    report.message = e.what();
    return report;
  }

  std::vector<std::size_t> tracked;
  for (std::size_t i = 0; i < nb; ++i)
    if (i != slack) tracked.push_back(i);

  const R spur_tol = spurious_tolerance<R>(cfg.spurious_tol);
  SeriesSet<R> set = rs.germ;
  std::optional<PadeStep<R>> previous;
  std::optional<std::vector<Complex<R>>> previous_values;
  std::optional<PadeStep<R>> best_step;
  std::vector<Complex<R>> best_v;
  double best = std::numeric_limits<double>::infinity();
  double last_eps = std::numeric_limits<double>::infinity();
  int stall = 0;
  bool stopped = false;

  for (int m = 0; 2 * m + 2 <= cfg.max_terms; ++m) {
    t = Clock::now();
    set = extend_series(sys, std::move(set), 2 * m + 1);
    report.timings.series_s += seconds_since(t);
    t = Clock::now();

    StepRecord rec;
    rec.m = m;
    std::optional<PadeStep<R>> step;
    try {
      std::vector<const PowerSeries<R>*> series;
      for (auto i : tracked) series.push_back(&set.v[i]);
      step = build_step(series, m, previous ? &*previous : nullptr);
    } catch (const SingularDenominatorSystem&) {
      rec.singular = true;
      rec.eps_measure = std::numeric_limits<double>::infinity();
      rec.mismatch = std::numeric_limits<double>::infinity();
      report.history.push_back(rec);
      report.timings.pade_s += seconds_since(t);
      continue;
    }

    std::optional<std::vector<Complex<R>>> values;
    try {
      const auto tracked_values = evaluate_step(*step, alpha);
      std::vector<Complex<R>> v(nb);
      for (std::size_t k = 0; k < tracked.size(); ++k) v[tracked[k]] = tracked_values[k];
      v[slack] = slack_value;
      values = std::move(v);
    } catch (const PoleHit&) {
      rec.pole_hit = true;
    }
    rec.mismatch = values ? embedded_mismatch(net, eqs, *values, alpha_r).measure()
                          : std::numeric_limits<double>::infinity();
    rec.eps_measure = values && previous_values ? max_difference(*values, *previous_values)
                                                : std::numeric_limits<double>::infinity();
    last_eps = rec.eps_measure;
    if (rec.eps_measure <= cfg.eps && !report.first_eps_m) report.first_eps_m = m;
    if (rec.mismatch < best) {
      best = rec.mismatch;
      best_v = *values;
      best_step = step;
      report.best_m = m;
      stall = 0;
    } else {
      ++stall;
    }
    if (cfg.record_spurious) rec.spurious_count = count_spurious(*step, spur_tol);

    const bool eps_met = rec.eps_measure <= cfg.eps;
    if (eps_met && rec.mismatch <= cfg.mismatch_tol) {
      report.status = SolveStatus::Converged;
      stopped = true;
    } else if (!eps_met && stall >= 3) {
      if (!rec.spurious_count) rec.spurious_count = count_spurious(*step, spur_tol);
      if (*rec.spurious_count > 0) {
        report.status = SolveStatus::PrecisionExhausted;
        stopped = true;
      }
    }
    report.history.push_back(rec);
    report.timings.pade_s += seconds_since(t);
    if (stopped) break;
    previous = std::move(step);
    previous_values = std::move(values);
  }

  report.eps_measure = last_eps;
  if (best_v.empty()) {
    report.status = SolveStatus::SingularSystem;
    report.message = "no usable approximant up to max_terms";
    report.timings.total_s = seconds_since(start);
    return report;
  }
  if (!stopped) {
    report.status =
        last_eps <= cfg.eps ? SolveStatus::MismatchNotMet : SolveStatus::EpsNotMet;
  }
  report.terms_used = 2 * *report.best_m + 2;
  report.voltages = bus_voltages(net, best_v);
  report.mismatch = embedded_mismatch(net, eqs, best_v, alpha_r);
  report.spurious_count = count_spurious(*best_step, spur_tol);
  report.real_pole = snbp_estimate(best_step->approximants, spur_tol);
  if (report.status == SolveStatus::Converged && report.real_pole && cfg.alpha > 0.0 &&
      *report.real_pole < cfg.alpha) {
    report.status = SolveStatus::SingularityOnPath;
    report.message = "real pole at alpha = " + format_real(*report.real_pole);
  }
  report.timings.total_s = seconds_since(start);
  return report;
}

}  // namespace

SolveReport solve(const SolveConfig& config, const NetworkModel& net) {
  config.validate();
  if (config.precision_bits <= 53) return solve_impl<double>(config, net);
  PrecisionScope scope(config.precision_bits);
  return solve_impl<BigFloat>(config, net);
}

namespace {

json finite_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

json mismatch_json(const MismatchReport& m) {
  json buses = json::array();
  for (const auto& b : m.buses) {
    buses.push_back({{"bus", b.id},
                     {"dp", b.dp},
                     {"dq", b.dq},
                     {"ds_mva", b.ds_mva},
                     {"dv", b.dv}});
  }
  return {{"max_p", m.max_p}, {"max_q", m.max_q},         {"max_s", m.max_s},
          {"max_v", m.max_v}, {"worst_bus", m.worst_bus}, {"buses", buses}};
}

}  // namespace

std::string report_json(const SolveReport& r, const ReportOptions& options) {
  json j;
  j["status"] = std::string(to_string(r.status));
  if (!r.message.empty()) j["message"] = r.message;
  j["embedding"] = r.embedding;
  j["alpha"] = r.alpha;
  j["precision_bits"] = r.precision_bits;
  j["terms_used"] = r.terms_used;
  j["best_m"] = r.best_m ? json(*r.best_m) : json(nullptr);
  j["eps_measure"] = finite_or_null(r.eps_measure);
  j["first_eps_m"] = r.first_eps_m ? json(*r.first_eps_m) : json(nullptr);
  j["spurious_count"] = r.spurious_count;
  j["real_pole"] = r.real_pole ? json(*r.real_pole) : json(nullptr);
  j["germ"] = {{"by_inspection", r.germ_by_inspection},
               {"mismatch", r.germ_mismatch},
               {"terms", r.germ_terms},
               {"newton_polished", r.germ_newton_polished}};
  json volts = json::array();
  for (const auto& v : r.voltages) {
    json b = {{"bus", v.id}, {"re", v.re}, {"im", v.im}, {"vmag", v.vmag}, {"vang", v.vang}};
    if (r.precision_bits > 53) {
      b["re_text"] = v.re_text;
      b["im_text"] = v.im_text;
    }
    volts.push_back(std::move(b));
  }
  j["voltages"] = std::move(volts);
  j["mismatch"] = mismatch_json(r.mismatch);
  if (options.history) {
    json h = json::array();
    for (const auto& s : r.history) {
      json e = {{"m", s.m},
                {"singular", s.singular},
                {"pole_hit", s.pole_hit},
                {"eps", finite_or_null(s.eps_measure)},
                {"mismatch", finite_or_null(s.mismatch)}};
      if (s.spurious_count) e["spurious"] = *s.spurious_count;
      h.push_back(std::move(e));
    }
    j["history"] = std::move(h);
  }
  if (options.timings) {
    j["timings"] = {{"germ_s", r.timings.germ_s},
                    {"series_s", r.timings.series_s},
                    {"pade_s", r.timings.pade_s},
                    {"total_s", r.timings.total_s}};
  }
  return j.dump(2);
}

namespace {

template <class R>
struct Prepared {
  SeriesSet<R> set;
  std::vector<std::size_t> tracked;
};

template <class R>
Prepared<R> prepare(const NetworkModel& net, const WorkflowConfig& cfg, int order) {
  const auto dec = build_admittance<R>(net);
  auto rs = compute_reference_state(cfg.embedding, dec, net, GermOptions{cfg.germ_tol, 120});
  auto sys = make_recursion_system(embedded_equations(cfg.embedding, dec, net), rs.germ);
  Prepared<R> p;
  p.set = extend_series(sys, rs.germ, order);
  for (std::size_t i = 0; i < net.size(); ++i)
    if (i != net.slack_index()) p.tracked.push_back(i);
  return p;
}

// [m/m+1] of one series, stepping m down past singular systems.
template <class R>
std::optional<PadeApproximant<R>> usable_pade(const PowerSeries<R>& s, int m) {
  for (; m >= 0; --m) {
    try {
      return compute_pade(s, m);
    } catch (const SingularDenominatorSystem&) {
    }
  }
  return std::nullopt;
}

int approximant_m(int terms) {
  if (terms < 2) throw ConfigError("terms must be at least 2");
  return terms / 2 - 1;
}

template <class R>
std::vector<PadeApproximant<R>> tracked_pades(const Prepared<R>& p, int m) {
  std::vector<PadeApproximant<R>> out;
  for (auto i : p.tracked) {
    if (auto pa = usable_pade(p.set.v[i], m)) out.push_back(std::move(*pa));
  }
  return out;
}

template <class F>
auto at_precision(int bits, F&& f) {
  if (bits <= 53) return f(0.0);
  PrecisionScope scope(bits);
  return f(BigFloat(0));
}

}  // namespace

std::string series_workflow(const NetworkModel& net, const WorkflowConfig& cfg) {
  return at_precision(cfg.precision_bits, [&](auto zero) {
    using R = decltype(zero);
    auto p = prepare<R>(net, cfg, std::max(0, cfg.terms - 1));
    std::ostringstream out;
    write_series_csv(out, net, p.set);
    return out.str();
  });
}

RootsResult roots_workflow(const NetworkModel& net, const WorkflowConfig& cfg) {
  const int m = approximant_m(cfg.terms);
  return at_precision(cfg.precision_bits, [&](auto zero) {
    using R = decltype(zero);
    auto p = prepare<R>(net, cfg, 2 * m + 1);
    const auto pas = tracked_pades(p, m);
    const R tol = spurious_tolerance<R>(cfg.spurious_tol);
    RootsResult result;
    result.m = m;
    result.rows = root_plot_data(pas, tol);
    for (const auto& pa : pas) {
      const auto pz = pole_zeros(pa);
      result.spurious_pairs += static_cast<int>(detect_spurious<R>(pz.poles, pz.zeros, tol).size());
    }
    result.roc = std::numeric_limits<double>::infinity();
    for (auto i : p.tracked) {
      try {
        result.roc = std::min(result.roc, to_double(roc_estimate(p.set.v[i])));
      } catch (const Error&) {
      }
    }
    return result;
  });
}

std::vector<SweepRow> sweep_workflow(const NetworkModel& net, const WorkflowConfig& cfg,
                                     double from, double to, int steps) {
  if (steps < 1) throw ConfigError("steps must be at least 1");
  const int m = approximant_m(cfg.terms);
  std::vector<double> alphas;
  for (int k = 0; k <= steps; ++k) alphas.push_back(from + (to - from) * k / steps);
  return at_precision(cfg.precision_bits, [&](auto zero) {
    using R = decltype(zero);
    auto p = prepare<R>(net, cfg, 2 * m + 1);
    std::vector<std::optional<PadeApproximant<R>>> pas(net.size());
    for (auto i : p.tracked) pas[i] = usable_pade(p.set.v[i], m);
    return sweep_profile(net, p.set, pas, alphas, spurious_tolerance<R>(cfg.spurious_tol));
  });
}

std::optional<double> snbp_workflow(const NetworkModel& net, const WorkflowConfig& cfg) {
  const int m = approximant_m(cfg.terms);
  return at_precision(cfg.precision_bits, [&](auto zero) {
    using R = decltype(zero);
    auto p = prepare<R>(net, cfg, 2 * m + 1);
    return snbp_estimate(tracked_pades(p, m), spurious_tolerance<R>(cfg.spurious_tol));
  });
}

CFCurve cf_workflow(const NetworkModel& net, const WorkflowConfig& cfg, int samples,
                    std::optional<double> scale) {
  if (samples < 2) throw ConfigError("cf needs at least 2 samples");
  if (!scale) {
    scale = snbp_workflow(net, cfg);
    if (!scale) throw ConfigError("no positive-real SNBP estimate to scale alpha_hat by");
  }
  CFOptions options;
  options.precision_bits = cfg.precision_bits;
  options.scale = *scale;
  options.germ.tol = cfg.germ_tol;
  auto curve = cf_curve(net, cfg.embedding, log_spaced(0.01, 0.9, samples), options);
  bcc_estimate(curve);
  return curve;
}

}  // namespace hemlab
