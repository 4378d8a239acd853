#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

using namespace hemlab;
using testing_support::load_case;
using C = Complex<double>;
using CB = Complex<BigFloat>;

namespace {

constexpr EmbeddingKind kAllKinds[] = {EmbeddingKind::Classical, EmbeddingKind::Canonical,
                                       EmbeddingKind::CanonicalGRhs,
                                       EmbeddingKind::CanonicalPsRhs};

template <class R>
SeriesSet<R> series_for(EmbeddingKind kind, const NetworkModel& net, int order) {
  const auto dec = build_admittance<R>(net);
  auto rs = compute_reference_state(kind, dec, net);
  auto sys = make_recursion_system(embedded_equations(kind, dec, net), rs.germ);
  return extend_series(sys, rs.germ, order);
}

}  // namespace

TEST_CASE("parse_embedding: names and errors") {
  CHECK(parse_embedding("classical") == EmbeddingKind::Classical);
  CHECK(parse_embedding("canonical") == EmbeddingKind::Canonical);
  CHECK(parse_embedding("canonical_g_rhs") == EmbeddingKind::CanonicalGRhs);
  CHECK(parse_embedding("canonical-ps-rhs") == EmbeddingKind::CanonicalPsRhs);
  CHECK_THROWS_AS(parse_embedding("holomorphic"), ConfigError);
  for (auto k : kAllKinds) CHECK(parse_embedding(to_string(k)) == k);
}

TEST_CASE("reference state: classical germ of a 1.05 slack is 1.05 everywhere") {
  Bus s{"1", BusKind::Slack};
  s.v_setpoint = 1.05;
  Bus l{"2", BusKind::PQ};
  l.p_load = 0.5;
  l.q_load = 0.2;
  const NetworkModel net(100.0, {s, l}, {Branch{"1", "2", 0.0, 0.2}});
  const auto dec = build_admittance<double>(net);
  const auto rs = compute_reference_state(EmbeddingKind::Classical, dec, net);
  CHECK(abs(rs.germ.v[1][0] - C(1.05)) < 1e-13);
  CHECK(rs.mismatch < 1e-13);
}

TEST_CASE("reference state: flat germ is found by inspection when it solves the no-load problem") {
  const auto net = load_case("two_bus.json");
  const auto dec = build_admittance<double>(net);
  for (auto k : kAllKinds) {
    CAPTURE(to_string(k));
    const auto rs = compute_reference_state(k, dec, net);
    CHECK(rs.by_inspection);
    CHECK(rs.germ.v[1][0] == C(1.0));
  }
}

TEST_CASE("reference state: shunted network germ solves the alpha = 0 equations") {
  PrecisionScope scope(256);
  const auto net = load_case("five_bus_lossy.json");
  const auto dec = build_admittance<BigFloat>(net);
  for (auto k : kAllKinds) {
    CAPTURE(to_string(k));
    const auto rs = compute_reference_state(k, dec, net);
    const auto eqs = embedded_equations(k, dec, net);
    std::vector<CB> v0;
    for (const auto& s : rs.germ.v) v0.push_back(s[0]);
    CHECK(max_residual(equation_residual(eqs, v0, BigFloat(0))) <= std::ldexp(1.0, -240));
  }
}

TEST_CASE("residual_check: every order of every embedding satisfies its equations") {
  PrecisionScope scope(256);
  for (const char* name : {"two_bus.json", "five_bus_ps.json", "five_bus_lossy.json"}) {
    const auto net = load_case(name);
    const auto dec = build_admittance<BigFloat>(net);
    for (auto k : kAllKinds) {
      CAPTURE(name);
      CAPTURE(to_string(k));
      const auto set = series_for<BigFloat>(k, net, 30);
      const auto res = residual_check(k, dec, net, set);
      REQUIRE(res.size() == 31);
      for (const auto& r : res) {
        // Coefficients grow geometrically; compare against the working precision.
        CHECK(to_double(r) <= std::ldexp(1.0, -180));
      }
    }
  }
}

TEST_CASE("residual_check: a corrupted coefficient shows up at its order") {
  PrecisionScope scope(256);
  const auto net = load_case("five_bus_ps.json");
  const auto dec = build_admittance<BigFloat>(net);
  auto set = series_for<BigFloat>(EmbeddingKind::Canonical, net, 6);
  const std::size_t bus = net.pq_indices().front();
  std::vector<CB> c = set.v[bus].coefficients();
  c[3] += CB(BigFloat(1e-3));
  set.v[bus] = PowerSeries<BigFloat>(c);
  const auto res = residual_check(EmbeddingKind::Canonical, dec, net, set);
  for (int n = 0; n < 3; ++n) CHECK(to_double(res[n]) < 1e-60);
  CHECK(to_double(res[3]) > 1e-4);
}

TEST_CASE("G_RHS and PS_RHS coincide with canonical when there is nothing to move") {
  // two_bus has no resistance and no phase shifter.
  PrecisionScope scope(128);
  const auto net = load_case("two_bus.json");
  const auto base = series_for<BigFloat>(EmbeddingKind::Canonical, net, 20);
  for (auto k : {EmbeddingKind::CanonicalGRhs, EmbeddingKind::CanonicalPsRhs}) {
    const auto other = series_for<BigFloat>(k, net, 20);
    for (std::size_t i = 0; i < net.size(); ++i)
      for (int n = 0; n <= 20; ++n) CHECK(to_double(abs(other.v[i][n] - base.v[i][n])) < 1e-30);
  }
  // PS_RHS differs from canonical only through shifters: none in the lossy case.
  const auto lossy = load_case("five_bus_lossy.json");
  const auto a = series_for<BigFloat>(EmbeddingKind::Canonical, lossy, 12);
  const auto b = series_for<BigFloat>(EmbeddingKind::CanonicalPsRhs, lossy, 12);
  for (std::size_t i = 0; i < lossy.size(); ++i)
    for (int n = 0; n <= 12; ++n) CHECK(to_double(abs(a.v[i][n] - b.v[i][n])) < 1e-30);
}

TEST_CASE("series property: PV buses hold V(a) V*(a) = mag0 + a mag1 order by order") {
  PrecisionScope scope(200);
  for (const char* name : {"five_bus_ps.json", "five_bus_lossy.json"}) {
    const auto net = load_case(name);
    const auto dec = build_admittance<BigFloat>(net);
    for (auto k : kAllKinds) {
      CAPTURE(name);
      CAPTURE(to_string(k));
      const auto eqs = embedded_equations(k, dec, net);
      const auto set = series_for<BigFloat>(k, net, 16);
      for (auto i : net.pv_indices()) {
        const auto prod = convolve(set.v[i], conjugate_reflect(set.v[i]), 16);
        CHECK(to_double(abs(prod[0] - CB(eqs.mag0[i]))) < 1e-50);
        CHECK(to_double(abs(prod[1] - CB(eqs.mag1[i]))) < 1e-50);
        for (int n = 2; n <= 16; ++n) CHECK(to_double(abs(prod[n])) < 1e-40);
      }
    }
  }
}

TEST_CASE("series property: two-bus classical series matches the closed form inside its disc") {
  oracle::Gen g(5);
  PrecisionScope scope(256);
  for (int trial = 0; trial < 8; ++trial) {
    const double p = g.uniform(0.1, 1.5), q = g.uniform(-0.3, 0.6);
    const auto net = testing_support::two_bus(p, q);
    const auto [plus, minus] = oracle::two_bus_branch_points(1.0, {0.0, 0.2}, {p, q});
    const double radius = std::min(std::fabs(plus), std::fabs(minus));
    const double alpha = 0.4 * radius;
    const auto set = series_for<BigFloat>(EmbeddingKind::Classical, net, 120);
    const auto v = testing_support::to_std(set.v[1].evaluate(CB(BigFloat(alpha))));
    const auto expect = oracle::two_bus_voltage(1.0, {0.0, 0.2}, {p, q}, alpha);
    CAPTURE(p);
    CAPTURE(q);
    CHECK(std::abs(v - expect) < 1e-12);
  }
}
