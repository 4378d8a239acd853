#pragma once

// The four embeddings: reference state and order-by-order series extension
// through one factored real-augmented linear system.

#include <optional>
#include <string_view>
#include <vector>

#include "hemlab/network.hpp"
#include "hemlab/series.hpp"

namespace hemlab {

enum class EmbeddingKind { Classical, Canonical, CanonicalGRhs, CanonicalPsRhs };

std::string_view to_string(EmbeddingKind kind);
/// Accepts classical, canonical, canonical_g_rhs, canonical_ps_rhs (also with
/// dashes); throws ConfigError otherwise.
EmbeddingKind parse_embedding(std::string_view name);

/// One embedded system written in the common form
///
///   L V = alpha conj(S) conj(W)                    (PQ rows)
///   L V = (alpha P - j Q(alpha)) conj(W)           (PV rows)
///   V conj(V) = mag0 + alpha mag1                  (PV magnitude)
///   V = slack0 + alpha slack1                      (slack)
///
/// with an extra -alpha Rm V on the right of every balance row. Every
/// embedding, and the auxiliary no-load problem, is an instance.
template <class R>
struct EmbeddedEquations {
  EmbeddingKind kind = EmbeddingKind::Classical;
  ComplexMatrix<R> lhs;
  ComplexMatrix<R> rhs_linear;
  std::vector<BusKind> bus_kinds;
  std::size_t slack = 0;
  std::vector<Complex<R>> s_conj;  // conj(S_i) on PQ buses, zero elsewhere
  std::vector<R> p;                // P_i on PV buses, zero elsewhere
  std::vector<R> mag0;             // PV buses only
  std::vector<R> mag1;
  Complex<R> slack0;
  Complex<R> slack1;

  std::size_t size() const { return bus_kinds.size(); }
};

template <class R>
EmbeddedEquations<R> embedded_equations(EmbeddingKind kind, const AdmittanceDecomposition<R>& dec,
                                        const NetworkModel& net);

/// Position of every real unknown of one order.
struct UnknownLayout {
  std::vector<long> v_pos;  // Re V_k at v_pos[k], Im V_k at v_pos[k] + 1; -1 for the slack
  std::vector<long> q_pos;  // Q_k at q_pos[k]; -1 unless PV
  std::size_t size = 0;
};

UnknownLayout make_layout(const std::vector<BusKind>& kinds);

template <class R>
struct RecursionSystem {
  EmbeddedEquations<R> equations;
  UnknownLayout layout;
  std::optional<LUFactors<R>> lhs_factors;  // empty for a slack-only network
  SeriesSet<R> germ;
};

/// Factors the order-independent matrix once. Throws SingularRecursionMatrix.
template <class R>
RecursionSystem<R> make_recursion_system(EmbeddedEquations<R> equations, SeriesSet<R> germ);

/// Extends `set` to `target_order` (no-op when already there).
template <class R>
SeriesSet<R> extend_series(const RecursionSystem<R>& sys, SeriesSet<R> set, int target_order);

struct GermOptions {
  /// Mismatch target of the no-load solve; default 2^-(bits-16).
  std::optional<double> tol;
  int max_terms = 120;
};

template <class R>
struct ReferenceState {
  SeriesSet<R> germ;
  bool by_inspection = false;
  double mismatch = 0.0;  // largest alpha = 0 equation residual of the germ
  int terms_used = 0;     // series terms of the auxiliary solve
  bool newton_polished = false;
};

/// Throws GermNotConverged when the auxiliary solve cannot reach the tolerance.
template <class R>
ReferenceState<R> compute_reference_state(EmbeddingKind kind,
                                          const AdmittanceDecomposition<R>& dec,
                                          const NetworkModel& net,
                                          const GermOptions& options = {});

template <class R>
SeriesSet<R> reference_state(EmbeddingKind kind, const AdmittanceDecomposition<R>& dec,
                             const NetworkModel& net, const GermOptions& options = {}) {
  return compute_reference_state(kind, dec, net, options).germ;
}

/// Residual of the embedded equations at a given alpha for given voltages.
/// `ds` is the complex power mismatch per bus (PV: real part only, slack: 0);
/// `dv` is the squared-magnitude deviation on PV buses and |V - V_slack| on
/// the slack.
template <class R>
struct EquationResidual {
  std::vector<Complex<R>> ds;
  std::vector<R> dv;
  std::vector<R> q;  // computed reactive injection per bus
};

template <class R>
EquationResidual<R> equation_residual(const EmbeddedEquations<R>& eqs,
                                      const std::vector<Complex<R>>& v, const R& alpha);

/// Largest |ds| and |dv| of a residual.
template <class R>
double max_residual(const EquationResidual<R>& r);

/// Per-order maximum residual of the defining equations with the truncated
/// series substituted. Works from the decomposition directly.
template <class R>
std::vector<R> residual_check(EmbeddingKind kind, const AdmittanceDecomposition<R>& dec,
                              const NetworkModel& net, const SeriesSet<R>& set);

}  // namespace hemlab
