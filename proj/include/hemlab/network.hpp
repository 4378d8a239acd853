#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hemlab/numerics.hpp"

namespace hemlab {

enum class BusKind { PQ, PV, Slack };

std::string_view to_string(BusKind kind);

/// Per-unit bus data. Net injected power is P = p_gen - p_load and, for PQ
/// buses, Q = -q_load.
struct Bus {
  std::string id;
  BusKind kind = BusKind::PQ;
  double p_load = 0.0;
  double q_load = 0.0;
  double p_gen = 0.0;
  double v_setpoint = 0.0;  // |V^sp| for PV, |V_slack| for the slack bus
  double v_angle = 0.0;     // slack angle in radians
  double shunt_g = 0.0;
  double shunt_b = 0.0;

  double p_injection() const { return p_gen - p_load; }
  double q_injection() const { return -q_load; }
};

/// Series branch from the tap side (`from`) to `to`. Stamp:
///   [[A^2 y, -A y e^{j phi}], [-A y e^{-j phi}, y]],  y = 1/(r + jx).
struct Branch {
  std::string from;
  std::string to;
  double r = 0.0;
  double x = 0.0;
  double b_charging = 0.0;
  double tap = 1.0;
  double phase_shift = 0.0;
};

class NetworkModel {
 public:
  NetworkModel() = default;
  /// Validates and indexes; throws ValidationError.
  NetworkModel(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches);

  double base_mva() const { return base_mva_; }
  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  std::size_t size() const { return buses_.size(); }

  std::size_t index_of(std::string_view id) const;
  std::size_t slack_index() const { return slack_; }
  const std::vector<std::size_t>& pq_indices() const { return pq_; }
  const std::vector<std::size_t>& pv_indices() const { return pv_; }
  /// PQ and PV buses in bus order.
  const std::vector<std::size_t>& non_slack_indices() const { return non_slack_; }

  bool has_phase_shifters() const;

  /// Copy with loads and generation removed (the no-load problem).
  NetworkModel without_load() const;

 private:
  double base_mva_ = 100.0;
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  std::size_t slack_ = 0;
  std::vector<std::size_t> pq_;
  std::vector<std::size_t> pv_;
  std::vector<std::size_t> non_slack_;
};

/// Parses the JSON case format; throws ParseError or ValidationError.
NetworkModel load_network(std::string_view json_text);
NetworkModel load_network_file(const std::filesystem::path& path);

/// Serialises back to the case format (all fields written explicitly).
std::string to_json(const NetworkModel& net);

/// Admittance matrix and the splits the embeddings need.
///
/// Identities that hold exactly by construction:
///   y_full = y_tr + diag(y_sh),  y_tr = y_tr_sym + y_tr_asym,
///   y_tr = g_tr + j b_tr.
template <class R>
struct AdmittanceDecomposition {
  ComplexMatrix<R> y_full;
  ComplexMatrix<R> y_tr;
  std::vector<Complex<R>> y_sh;
  Matrix<R> g_tr;
  Matrix<R> b_tr;
  ComplexMatrix<R> y_tr_sym;
  ComplexMatrix<R> y_tr_asym;
};

template <class R>
AdmittanceDecomposition<R> build_admittance(const NetworkModel& net);

/// Y assembled directly from the full two-port stamps, independent of the
/// decomposition; used to cross-check it.
template <class R>
ComplexMatrix<R> build_full_admittance(const NetworkModel& net);

/// Complex bus injection S_i = V_i conj(sum_k Y_ik V_k).
template <class R>
std::vector<Complex<R>> injected_power(const ComplexMatrix<R>& y,
                                       std::span<const Complex<R>> v);

}  // namespace hemlab
