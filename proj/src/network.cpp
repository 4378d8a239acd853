#include "hemlab/network.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hemlab {

using nlohmann::json;

std::string_view to_string(BusKind kind) {
  switch (kind) {
    case BusKind::PQ:
      return "pq";
    case BusKind::PV:
      return "pv";
    case BusKind::Slack:
      return "slack";
  }
  return "?";
}

NetworkModel::NetworkModel(double base_mva, std::vector<Bus> buses,
                           std::vector<Branch> branches)
    : base_mva_(base_mva), buses_(std::move(buses)), branches_(std::move(branches)) {
  if (!(base_mva_ > 0.0)) throw ValidationError("base_mva must be positive");
  if (buses_.empty()) throw ValidationError("network has no buses");

  std::map<std::string, std::size_t, std::less<>> ids;
  int slack_count = 0;
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    const Bus& b = buses_[i];
    if (b.id.empty()) throw ValidationError("bus with empty id");
    if (!ids.emplace(b.id, i).second) throw ValidationError("duplicate bus id '" + b.id + "'");
    switch (b.kind) {
      case BusKind::Slack:
        ++slack_count;
        slack_ = i;
        [[fallthrough]];
      case BusKind::PV:
        if (!(b.v_setpoint > 0.0)) {
          throw ValidationError("bus '" + b.id + "' needs a positive v_setpoint");
        }
        break;
      case BusKind::PQ:
        if (b.v_setpoint != 0.0) {
          throw ValidationError("PQ bus '" + b.id + "' must not carry a voltage setpoint");
        }
        break;
    }
  }
  if (slack_count == 0) throw ValidationError("network has no slack bus");
  if (slack_count > 1) throw ValidationError("network has more than one slack bus");

  for (const Branch& br : branches_) {
    if (ids.find(br.from) == ids.end() || ids.find(br.to) == ids.end()) {
      throw ValidationError("branch " + br.from + "-" + br.to + " references an unknown bus");
    }
    if (br.from == br.to) throw ValidationError("branch " + br.from + " is a self loop");
    if (br.r * br.r + br.x * br.x <= 0.0) {
      throw ValidationError("branch " + br.from + "-" + br.to + " has zero impedance");
    }
    if (!(br.tap > 0.0)) {
      throw ValidationError("branch " + br.from + "-" + br.to + " has a non-positive tap");
    }
  }

  // Connectivity from the slack bus.
  std::vector<std::vector<std::size_t>> adj(buses_.size());
  for (const Branch& br : branches_) {
    std::size_t a = ids.find(br.from)->second;
    std::size_t b = ids.find(br.to)->second;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(buses_.size(), false);
  std::vector<std::size_t> stack{slack_};
  seen[slack_] = true;
  while (!stack.empty()) {
    std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (!seen[i]) throw ValidationError("bus '" + buses_[i].id + "' is not connected to the slack bus");
  }

  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (buses_[i].kind == BusKind::PQ) pq_.push_back(i);
    if (buses_[i].kind == BusKind::PV) pv_.push_back(i);
    if (buses_[i].kind != BusKind::Slack) non_slack_.push_back(i);
  }
}

std::size_t NetworkModel::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (buses_[i].id == id) return i;
  }
  throw ValidationError("unknown bus id '" + std::string(id) + "'");
}

bool NetworkModel::has_phase_shifters() const {
  for (const Branch& br : branches_) {
    if (br.phase_shift != 0.0) return true;
  }
  return false;
}

NetworkModel NetworkModel::without_load() const {
  std::vector<Bus> buses = buses_;
  for (Bus& b : buses) {
    b.p_load = 0.0;
    b.q_load = 0.0;
    b.p_gen = 0.0;
  }
  return NetworkModel(base_mva_, std::move(buses), branches_);
}

namespace {

double number_field(const json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number()) {
    throw ParseError(std::string("field '") + key + "' must be a number");
  }
  return it->get<double>();
}

std::string id_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw ParseError(std::string("field '") + key + "' must be a string or integer");
}

}  // namespace

NetworkModel load_network(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed case document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("case document must be a JSON object");
  auto buses_it = doc.find("buses");
  auto branches_it = doc.find("branches");
  if (buses_it == doc.end() || !buses_it->is_array()) throw ParseError("'buses' must be an array");
  if (branches_it != doc.end() && !branches_it->is_array()) {
    throw ParseError("'branches' must be an array");
  }

  std::vector<Bus> buses;
  for (const json& jb : *buses_it) {
    if (!jb.is_object()) throw ParseError("bus entries must be objects");
    Bus b;
    b.id = id_field(jb, "id");
    auto kind_it = jb.find("kind");
    if (kind_it == jb.end() || !kind_it->is_string()) {
      throw ParseError("bus '" + b.id + "' needs a string 'kind'");
    }
    const std::string kind = kind_it->get<std::string>();
    if (kind == "pq") {
      b.kind = BusKind::PQ;
    } else if (kind == "pv") {
      b.kind = BusKind::PV;
    } else if (kind == "slack") {
      b.kind = BusKind::Slack;
    } else {
      throw ParseError("bus '" + b.id + "' has unknown kind '" + kind + "'");
    }
    b.p_load = number_field(jb, "p_load", 0.0);
    b.q_load = number_field(jb, "q_load", 0.0);
    b.p_gen = number_field(jb, "p_gen", 0.0);
    b.v_setpoint = number_field(jb, "v_setpoint", 0.0);
    b.v_angle = number_field(jb, "v_angle", 0.0);
    b.shunt_g = number_field(jb, "shunt_g", 0.0);
    b.shunt_b = number_field(jb, "shunt_b", 0.0);
    buses.push_back(std::move(b));
  }

  std::vector<Branch> branches;
  if (branches_it != doc.end()) {
    for (const json& jr : *branches_it) {
      if (!jr.is_object()) throw ParseError("branch entries must be objects");
      Branch br;
      br.from = id_field(jr, "from");
      br.to = id_field(jr, "to");
      br.r = number_field(jr, "r", 0.0);
      br.x = number_field(jr, "x", 0.0);
      br.b_charging = number_field(jr, "b_charging", 0.0);
      br.tap = number_field(jr, "tap", 1.0);
      br.phase_shift = number_field(jr, "phase_shift_rad", 0.0);
      branches.push_back(std::move(br));
    }
  }
  return NetworkModel(number_field(doc, "base_mva", 100.0), std::move(buses), std::move(branches));
}

NetworkModel load_network_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_network(buffer.str());
}

std::string to_json(const NetworkModel& net) {
  json doc;
  doc["base_mva"] = net.base_mva();
  doc["buses"] = json::array();
  for (const Bus& b : net.buses()) {
    doc["buses"].push_back({{"id", b.id},
                            {"kind", std::string(to_string(b.kind))},
                            {"p_load", b.p_load},
                            {"q_load", b.q_load},
                            {"p_gen", b.p_gen},
                            {"v_setpoint", b.v_setpoint},
                            {"v_angle", b.v_angle},
                            {"shunt_g", b.shunt_g},
                            {"shunt_b", b.shunt_b}});
  }
  doc["branches"] = json::array();
  for (const Branch& br : net.branches()) {
    doc["branches"].push_back({{"from", br.from},
                               {"to", br.to},
                               {"r", br.r},
                               {"x", br.x},
                               {"b_charging", br.b_charging},
                               {"tap", br.tap},
                               {"phase_shift_rad", br.phase_shift}});
  }
  return doc.dump(2);
}

template <class R>
AdmittanceDecomposition<R> build_admittance(const NetworkModel& net) {
  const std::size_t n = net.size();
  AdmittanceDecomposition<R> d;
  d.y_tr_sym = ComplexMatrix<R>(n, n);
  d.y_tr_asym = ComplexMatrix<R>(n, n);
  d.y_sh.assign(n, Complex<R>());

  for (const Branch& br : net.branches()) {
    const std::size_t i = net.index_of(br.from);
    const std::size_t k = net.index_of(br.to);
    const Complex<R> y = inverse(Complex<R>(R(br.r), R(br.x)));
    const R a(br.tap);
    const Complex<R> ay = y * a;
    const Complex<R> e_plus = polar(R(1), R(br.phase_shift));
    const Complex<R> e_minus = conj(e_plus);

    d.y_tr_sym(i, i) += ay;
    d.y_tr_sym(k, k) += ay;
    d.y_tr_sym(i, k) -= ay;
    d.y_tr_sym(k, i) -= ay;

    if (br.phase_shift != 0.0) {
      d.y_tr_asym(i, k) += ay - ay * e_plus;
      d.y_tr_asym(k, i) += ay - ay * e_minus;
    }

    if (br.tap != 1.0) {
      d.y_sh[i] += ay * (a - R(1));
      d.y_sh[k] += y * (R(1) - a);
    }

    if (br.b_charging != 0.0) {
      const Complex<R> half(R(0), R(br.b_charging) / R(2));
      d.y_sh[i] += half;
      d.y_sh[k] += half;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Bus& b = net.buses()[i];
    if (b.shunt_g != 0.0 || b.shunt_b != 0.0) d.y_sh[i] += Complex<R>(R(b.shunt_g), R(b.shunt_b));
  }

  d.y_tr = ComplexMatrix<R>(n, n);
  d.y_full = ComplexMatrix<R>(n, n);
  d.g_tr = Matrix<R>(n, n);
  d.b_tr = Matrix<R>(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      d.y_tr(i, k) = d.y_tr_sym(i, k) + d.y_tr_asym(i, k);
      d.g_tr(i, k) = d.y_tr(i, k).re;
      d.b_tr(i, k) = d.y_tr(i, k).im;
      d.y_full(i, k) = d.y_tr(i, k);
    }
    d.y_full(i, i) += d.y_sh[i];
  }
  return d;
}

template <class R>
ComplexMatrix<R> build_full_admittance(const NetworkModel& net) {
  const std::size_t n = net.size();
  ComplexMatrix<R> y_full(n, n);
  for (const Branch& br : net.branches()) {
    const std::size_t i = net.index_of(br.from);
    const std::size_t k = net.index_of(br.to);
    const Complex<R> y = inverse(Complex<R>(R(br.r), R(br.x)));
    const R a(br.tap);
    const Complex<R> half(R(0), R(br.b_charging) / R(2));
    y_full(i, i) += y * (a * a) + half;
    y_full(k, k) += y + half;
    y_full(i, k) -= y * a * polar(R(1), R(br.phase_shift));
    y_full(k, i) -= y * a * polar(R(1), R(-br.phase_shift));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Bus& b = net.buses()[i];
    y_full(i, i) += Complex<R>(R(b.shunt_g), R(b.shunt_b));
  }
  return y_full;
}

template <class R>
std::vector<Complex<R>> injected_power(const ComplexMatrix<R>& y,
                                       std::span<const Complex<R>> v) {
  std::vector<Complex<R>> current = multiply(y, v);
  std::vector<Complex<R>> s(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) s[i] = v[i] * conj(current[i]);
  return s;
}

template AdmittanceDecomposition<double> build_admittance(const NetworkModel&);
template AdmittanceDecomposition<BigFloat> build_admittance(const NetworkModel&);
template ComplexMatrix<double> build_full_admittance(const NetworkModel&);
template ComplexMatrix<BigFloat> build_full_admittance(const NetworkModel&);
template std::vector<Complex<double>> injected_power(const ComplexMatrix<double>&,
                                                     std::span<const Complex<double>>);
template std::vector<Complex<BigFloat>> injected_power(const ComplexMatrix<BigFloat>&,
                                                       std::span<const Complex<BigFloat>>);

}  // namespace hemlab
