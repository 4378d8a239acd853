#pragma once

// Physical verification and the convergence analytics: mismatch, convergence
// factor, branch-cut capacity, SNBP estimate, profile sweeps and root plots.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hemlab/embedding.hpp"
#include "hemlab/pade.hpp"

namespace hemlab {

struct BusMismatch {
  std::string id;
  double dp = 0.0;  // per-unit
  double dq = 0.0;
  double ds_mva = 0.0;
  double dv = 0.0;  // PV: |V|^2 target deviation; slack: |V - V_slack|
};

struct MismatchReport {
  std::vector<BusMismatch> buses;
  double max_p = 0.0;
  double max_q = 0.0;
  double max_s = 0.0;  // per-unit
  double max_v = 0.0;
  std::string worst_bus;

  /// max(max_s, max_v): the figure compared against mismatch_tol.
  double measure() const { return max_s > max_v ? max_s : max_v; }
};

/// Mismatch of the physical network (full Y, loads scaled by alpha).
template <class R>
MismatchReport mismatch(const NetworkModel& net, const AdmittanceDecomposition<R>& dec,
                        const std::vector<Complex<R>>& v, const R& alpha);

/// Mismatch of an embedding's own equations at alpha. Equal to the physical
/// mismatch at alpha = 1 for every embedding, and for the classical one at any alpha.
template <class R>
MismatchReport embedded_mismatch(const NetworkModel& net, const EmbeddedEquations<R>& eqs,
                                 const std::vector<Complex<R>>& v, const R& alpha);

/// Geometric mean of e[k+1]/e[k]. Ratios touching an error below
/// 2^-(bits-16) are dropped as noise floor.
double cf_estimate(const std::vector<double>& errors, int bits);

/// Logarithmic capacity of the segment [a, b]: |b - a| / 4.
double line_capacity(double a, double b);

struct CFSample {
  double alpha_hat = 0.0;
  double cf = 0.0;
};

struct CFCurve {
  std::vector<CFSample> samples;
  std::optional<double> bcc_estimate;
  std::string reference_description;
};

/// 100 * CF(0.01), interpolating linearly between neighbours inside
/// [0.005, 0.02] when no sample sits at 0.01. Stores and returns the value.
double bcc_estimate(CFCurve& curve);

struct CFOptions {
  int m_max = 24;
  int precision_bits = 1024;
  /// Alpha of the positive-real SNBP; alpha = alpha_hat * scale.
  double scale = 1.0;
  GermOptions germ;
};

/// Per-coefficient convergence factor at each alpha_hat: the square root of
/// the cf_estimate of the worst-bus voltage errors of [0/1] .. [m_max/m_max+1]
/// (each step adds two coefficients). Errors are taken against [2 m_max/2 m_max+1]
/// computed at four times the precision.
CFCurve cf_curve(const NetworkModel& net, EmbeddingKind kind, const std::vector<double>& alpha_hats,
                 const CFOptions& options);

/// Log-spaced alpha_hat values in [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int count);

/// Relative angle below which a root counts as lying on the positive real axis.
inline constexpr double kRealAxisAngle = 0.02;

/// Smallest-magnitude non-spurious pole near the positive real axis over all
/// approximants; none when there is no such pole.
template <class R>
std::optional<double> snbp_estimate(const std::vector<PadeApproximant<R>>& pa_set,
                                    const R& spurious_tol, double tol_angle = kRealAxisAngle);

struct SweepRow {
  double alpha = 0.0;
  std::string bus;
  double vmag = 0.0;
  double vang = 0.0;
  bool flagged = false;
};

/// Approximant-evaluated voltages at each alpha. `pa_set` holds one
/// approximant per bus in bus order; buses without one (the slack) are
/// evaluated from their series. A row is flagged when alpha lies within
/// `exclusion` (relative) of a non-spurious real pole or hits a pole.
template <class R>
std::vector<SweepRow> sweep_profile(const NetworkModel& net, const SeriesSet<R>& set,
                                    const std::vector<std::optional<PadeApproximant<R>>>& pa_set,
                                    const std::vector<double>& alphas, const R& spurious_tol,
                                    double exclusion = 0.02);

struct RootRow {
  bool pole = true;
  bool inverse_plane = false;
  double re = 0.0;
  double im = 0.0;
  bool spurious = false;
  int m = 0;
};

template <class R>
std::vector<RootRow> root_plot_data(const std::vector<PadeApproximant<R>>& pa_set,
                                    const R& spurious_tol);

void write_root_csv(std::ostream& out, const std::vector<RootRow>& rows);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_cf_csv(std::ostream& out, const CFCurve& curve);
void write_mismatch_csv(std::ostream& out, const MismatchReport& report);

}  // namespace hemlab
