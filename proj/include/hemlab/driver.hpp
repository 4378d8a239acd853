#pragma once

// Solve orchestration and the export workflows behind the command-line tool
// and the Python module.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hemlab/diagnostics.hpp"

namespace hemlab {

enum class SolveStatus {
  Converged,
  EpsNotMet,
  MismatchNotMet,
  PrecisionExhausted,
  NoGerm,
  SingularSystem,
  /// A non-spurious pole of the approximants lies on the real segment
  /// (0, alpha): alpha is not reachable from the germ along the real axis.
  SingularityOnPath
};

std::string_view to_string(SolveStatus s);

struct SolveConfig {
  EmbeddingKind embedding = EmbeddingKind::Canonical;
  double alpha = 1.0;
  int max_terms = 60;
  int precision_bits = 53;  // 53 selects native doubles
  double eps = 1e-8;
  double mismatch_tol = 1e-6;
  std::optional<double> spurious_tol;  // default max(2^-(bits/2), 1e-8)
  std::optional<double> germ_tol;      // default 2^-(bits-16)
  /// Count doublets at every M (costly); otherwise only when the stopping
  /// rule needs it.
  bool record_spurious = false;

  /// Throws ConfigError.
  void validate() const;
};

struct StepRecord {
  int m = 0;
  bool singular = false;
  bool pole_hit = false;
  double eps_measure = 0.0;  // infinity for the first usable step
  double mismatch = 0.0;     // MismatchReport::measure()
  std::optional<int> spurious_count;
};

struct BusVoltage {
  std::string id;
  double re = 0.0;
  double im = 0.0;
  double vmag = 0.0;
  double vang = 0.0;
  std::string re_text;  // full working precision
  std::string im_text;
};

struct SolveTimings {
  double germ_s = 0.0;
  double series_s = 0.0;
  double pade_s = 0.0;
  double total_s = 0.0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::EpsNotMet;
  std::string message;
  std::string embedding;
  double alpha = 1.0;
  int precision_bits = 53;
  int terms_used = 0;
  std::optional<int> best_m;
  std::vector<BusVoltage> voltages;
  MismatchReport mismatch;
  int spurious_count = 0;
  /// Smallest non-spurious pole near the positive real axis at the best M.
  std::optional<double> real_pole;
  double eps_measure = 0.0;
  std::optional<int> first_eps_m;
  bool germ_by_inspection = false;
  double germ_mismatch = 0.0;
  int germ_terms = 0;
  bool germ_newton_polished = false;
  std::vector<StepRecord> history;
  SolveTimings timings;
};

/// Advances M until the two-stage check passes, terms run out, or precision
/// is exhausted; reports the state of the best-mismatch M.
SolveReport solve(const SolveConfig& config, const NetworkModel& net);

struct ReportOptions {
  bool timings = false;
  bool history = false;
};

std::string report_json(const SolveReport& report, const ReportOptions& options = {});

/// Options shared by the export workflows.
struct WorkflowConfig {
  EmbeddingKind embedding = EmbeddingKind::Canonical;
  int terms = 60;  // series coefficients; the approximant is [terms/2-1 / terms/2]
  int precision_bits = 53;
  std::optional<double> spurious_tol;
  std::optional<double> germ_tol;
};

/// CSV of n,bus_id,re,im through order terms-1.
std::string series_workflow(const NetworkModel& net, const WorkflowConfig& config);

struct RootsResult {
  std::vector<RootRow> rows;
  int m = 0;
  int spurious_pairs = 0;
  double roc = 0.0;  // smallest roc_estimate over the non-slack series
};

RootsResult roots_workflow(const NetworkModel& net, const WorkflowConfig& config);

std::vector<SweepRow> sweep_workflow(const NetworkModel& net, const WorkflowConfig& config,
                                     double from, double to, int steps);

std::optional<double> snbp_workflow(const NetworkModel& net, const WorkflowConfig& config);

/// CF curve over `samples` log-spaced alpha_hat in [0.01, 0.9], scaled by the
/// SNBP estimate unless `scale` is given, with bcc_estimate filled in.
CFCurve cf_workflow(const NetworkModel& net, const WorkflowConfig& config, int samples,
                    std::optional<double> scale = std::nullopt);

}  // namespace hemlab
