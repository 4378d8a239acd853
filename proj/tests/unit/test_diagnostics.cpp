#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

using namespace hemlab;
using testing_support::load_case;
using C = Complex<double>;
using CB = Complex<BigFloat>;

namespace {

template <class R>
struct Prepared {
  SeriesSet<R> set;
  std::vector<PadeApproximant<R>> approximants;  // non-slack buses
};

template <class R>
Prepared<R> prepare(const NetworkModel& net, EmbeddingKind kind, int m) {
  const auto dec = build_admittance<R>(net);
  auto rs = compute_reference_state(kind, dec, net);
  auto sys = make_recursion_system(embedded_equations(kind, dec, net), rs.germ);
  Prepared<R> out{extend_series(sys, rs.germ, 2 * m + 1), {}};
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (i == net.slack_index()) continue;
    out.approximants.push_back(compute_pade(out.set.v[i], m));
  }
  return out;
}

NetworkModel split_two_bus(double p, double q) {
  Bus s{"1", BusKind::Slack};
  s.v_setpoint = 1.0;
  Bus l{"2", BusKind::PQ};
  l.p_load = p;
  l.q_load = q;
  return NetworkModel(100.0, {s, l}, {Branch{"1", "2", 0.0, 0.4}, Branch{"1", "2", 0.0, 0.4}});
}

}  // namespace

TEST_CASE("cf_estimate: examples") {
  CHECK(cf_estimate({1.0, 0.5, 0.25, 0.125}, 53) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cf_estimate({1.0, 1.0, 1.0}, 53) == 1.0);
  CHECK_THROWS_AS(cf_estimate({1.0, 0.5}, 53), InsufficientLength);
  CHECK_THROWS_AS(cf_estimate({1e-30, 1e-31, 1e-32}, 53), AllRatiosAtNoiseFloor);
  // Ratios touching the floor are dropped.
  CHECK(cf_estimate({1.0, 0.1, 0.01, 1e-30}, 53) == doctest::Approx(0.1));
}

TEST_CASE("cf_estimate property: geometric errors give their ratio") {
  oracle::Gen g(17);
  for (int trial = 0; trial < 50; ++trial) {
    const double r = g.uniform(0.05, 0.95);
    const int n = g.integer(3, 25);
    std::vector<double> e;
    for (int k = 0; k < n; ++k) e.push_back(std::pow(r, k));
    CHECK(cf_estimate(e, 1024) == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("line_capacity: examples and properties") {
  CHECK(line_capacity(0.0, 4.0) == 1.0);
  CHECK(line_capacity(-1.0, 1.0) == 0.5);
  CHECK_THROWS(line_capacity(2.0, 2.0));
  oracle::Gen g(23);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = g.uniform(-5, 5), b = g.uniform(-5, 5), t = g.uniform(-3, 3), s = g.uniform(0.1, 4);
    if (a == b) continue;
    CHECK(line_capacity(a + t, b + t) == doctest::Approx(line_capacity(a, b)));
    CHECK(line_capacity(s * a, s * b) == doctest::Approx(s * line_capacity(a, b)));
    CHECK(line_capacity(a, b) == line_capacity(b, a));
  }
}

TEST_CASE("bcc_estimate: direct sample, interpolation and missing samples") {
  CFCurve direct{{{0.005, 0.2}, {0.01, 0.00451}, {0.05, 0.3}}, std::nullopt, ""};
  CHECK(bcc_estimate(direct) == doctest::Approx(0.451));
  CHECK(direct.bcc_estimate.has_value());

  // cf linear in alpha_hat: interpolation is exact.
  CFCurve lin{{{0.008, 0.008 * 0.3}, {0.015, 0.015 * 0.3}}, std::nullopt, ""};
  CHECK(bcc_estimate(lin) == doctest::Approx(0.3));

  CFCurve far{{{0.001, 0.1}, {0.5, 0.2}}, std::nullopt, ""};
  CHECK_THROWS_AS(bcc_estimate(far), NoSampleNearAlphaHat);
}

TEST_CASE("log_spaced: endpoints and ratio") {
  const auto v = log_spaced(0.01, 1.0, 3);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(0.01));
  CHECK(v[1] == doctest::Approx(0.1));
  CHECK(v[2] == doctest::Approx(1.0));
}

TEST_CASE("mismatch: flat start and the exact two-bus solution") {
  const auto net = load_case("two_bus.json");
  const auto dec = build_admittance<double>(net);
  const std::vector<C> flat{C(1.0), C(1.0)};
  const auto r = mismatch(net, dec, flat, 1.0);
  CHECK(std::fabs(r.buses[1].dp) == doctest::Approx(0.5));
  CHECK(std::fabs(r.buses[1].dq) == doctest::Approx(0.2));
  CHECK(r.buses[1].ds_mva == doctest::Approx(100.0 * std::sqrt(0.29)));
  CHECK(r.worst_bus == "2");
  CHECK(r.max_s == doctest::Approx(std::sqrt(0.29)));

  const auto v2 = oracle::two_bus_voltage(1.0, {0.0, 0.2}, {0.5, 0.2}, 1.0);
  const std::vector<C> exact{C(1.0), testing_support::from_std<double>(v2)};
  CHECK(mismatch(net, dec, exact, 1.0).measure() < 1e-14);

  std::ostringstream out;
  write_mismatch_csv(out, r);
  CHECK(out.str().rfind("bus,dp,dq,ds_mva\n", 0) == 0);
}

TEST_CASE("embedded_mismatch equals physical mismatch at alpha = 1") {
  PrecisionScope scope(128);
  const auto net = load_case("five_bus_lossy.json");
  const auto dec = build_admittance<BigFloat>(net);
  oracle::Gen g(2);
  std::vector<CB> v;
  for (std::size_t i = 0; i < net.size(); ++i)
    v.push_back(testing_support::from_std<BigFloat>(std::complex<double>(1.0, 0.0) + g.complex(0.05)));
  const auto phys = mismatch(net, dec, v, BigFloat(1));
  for (auto k : {EmbeddingKind::Classical, EmbeddingKind::Canonical, EmbeddingKind::CanonicalGRhs,
                 EmbeddingKind::CanonicalPsRhs}) {
    CAPTURE(to_string(k));
    const auto emb = embedded_mismatch(net, embedded_equations(k, dec, net), v, BigFloat(1));
    CHECK(emb.max_s == doctest::Approx(phys.max_s).epsilon(1e-12));
  }
}

TEST_CASE("snbp_estimate: two-bus within 2% at M = 20") {
  PrecisionScope scope(256);
  const auto net = load_case("two_bus_cf.json");
  const auto [plus, minus] = oracle::two_bus_branch_points(1.0, {0.0, 0.2}, {1.0, 0.1});
  const auto p = prepare<BigFloat>(net, EmbeddingKind::Classical, 20);
  const auto s = snbp_estimate(p.approximants, default_spurious_tolerance<BigFloat>());
  REQUIRE(s.has_value());
  CHECK(*s == doctest::Approx(plus).epsilon(0.02));
  CHECK(minus < 0.0);
}

TEST_CASE("snbp_estimate: none for a network without load") {
  const auto net = load_case("two_bus.json").without_load();
  const auto p = prepare<double>(net, EmbeddingKind::Classical, 0);
  CHECK_FALSE(snbp_estimate(p.approximants, default_spurious_tolerance<double>()).has_value());
}

TEST_CASE("snbp_estimate property: splitting a branch into two parallel halves changes nothing") {
  oracle::Gen g(41);
  PrecisionScope scope(200);
  for (int trial = 0; trial < 5; ++trial) {
    const double p = g.uniform(0.3, 1.5), q = g.uniform(-0.2, 0.4);
    const auto a = prepare<BigFloat>(testing_support::two_bus(p, q), EmbeddingKind::Classical, 15);
    const auto b = prepare<BigFloat>(split_two_bus(p, q), EmbeddingKind::Classical, 15);
    const auto tol = default_spurious_tolerance<BigFloat>();
    const auto sa = snbp_estimate(a.approximants, tol), sb = snbp_estimate(b.approximants, tol);
    REQUIRE(sa.has_value());
    REQUIRE(sb.has_value());
    CHECK(*sa == doctest::Approx(*sb).epsilon(1e-12));
  }
}

TEST_CASE("sweep_profile: germ at zero, monotone fall towards the nose") {
  PrecisionScope scope(256);
  const auto net = load_case("two_bus_cf.json");
  const auto [plus, minus] = oracle::two_bus_branch_points(1.0, {0.0, 0.2}, {1.0, 0.1});
  const auto p = prepare<BigFloat>(net, EmbeddingKind::Classical, 20);
  std::vector<std::optional<PadeApproximant<BigFloat>>> pa{std::nullopt, p.approximants[0]};
  std::vector<double> alphas;
  for (int k = 0; k <= 20; ++k) alphas.push_back(0.9 * plus * k / 20.0);
  const auto rows = sweep_profile(net, p.set, pa, alphas, default_spurious_tolerance<BigFloat>());
  std::vector<double> load_bus;
  for (const auto& r : rows) {
    if (r.bus != "2") continue;
    load_bus.push_back(r.vmag);
    CHECK_FALSE(r.flagged);
    const auto v = oracle::two_bus_voltage(1.0, {0.0, 0.2}, {1.0, 0.1}, r.alpha);
    CHECK(std::fabs(r.vmag - std::abs(v)) < 1e-6);
  }
  REQUIRE(load_bus.size() == alphas.size());
  CHECK(load_bus.front() == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t k = 1; k < load_bus.size(); ++k) CHECK(load_bus[k] < load_bus[k - 1]);

  const auto near = sweep_profile(net, p.set, pa, {plus}, default_spurious_tolerance<BigFloat>());
  CHECK(near[1].flagged);
  std::ostringstream out;
  write_sweep_csv(out, rows);
  CHECK(out.str().rfind("alpha,bus,vmag,vang,flagged\n0,1,1,0,false\n", 0) == 0);
}

TEST_CASE("root_plot_data: geometric [0/1]") {
  const auto pa = compute_pade(PowerSeries<double>({C(1.0), C(1.0)}), 0);
  const auto rows = root_plot_data<double>({pa}, 1e-8);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].pole);
  CHECK_FALSE(rows[0].inverse_plane);
  CHECK(rows[0].re == 1.0);
  CHECK(rows[1].inverse_plane);
  CHECK(rows[1].re == 1.0);
  CHECK(rows[1].m == 0);
  std::ostringstream out;
  write_root_csv(out, rows);
  CHECK(out.str() == "kind,plane,re,im,spurious,M\npole,alpha,1,0,false,0\npole,inverse_alpha,1,0,false,0\n");
}
