#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

using namespace hemlab;
using testing_support::load_case;

TEST_CASE("solve: two-bus converges for every embedding and matches the closed form") {
  const auto net = load_case("two_bus.json");
  const auto expect = oracle::two_bus_voltage(1.0, {0.0, 0.2}, {0.5, 0.2}, 1.0);
  for (auto k : {EmbeddingKind::Classical, EmbeddingKind::Canonical, EmbeddingKind::CanonicalGRhs,
                 EmbeddingKind::CanonicalPsRhs}) {
    CAPTURE(to_string(k));
    SolveConfig cfg;
    cfg.embedding = k;
    const auto r = solve(cfg, net);
    CHECK(r.status == SolveStatus::Converged);
    CHECK(r.mismatch.max_s < 1e-6);
    CHECK(r.terms_used <= 60);
    CHECK(std::abs(std::complex<double>(r.voltages[1].re, r.voltages[1].im) - expect) < 1e-7);
  }
}

TEST_CASE("solve: slack-only network needs one term") {
  const auto r = solve(SolveConfig{}, load_case("slack_only.json"));
  CHECK(r.status == SolveStatus::Converged);
  CHECK(r.terms_used == 1);
  CHECK(r.voltages[0].vmag == doctest::Approx(1.05));
  CHECK(r.voltages[0].vang == doctest::Approx(0.1));
}

TEST_CASE("solve: beyond the nose the status is not converged") {
  auto net = load_case("two_bus_cf.json");
  SolveConfig cfg;
  cfg.embedding = EmbeddingKind::Classical;
  cfg.alpha = 2.5;  // nose at 2.2625
  const auto r = solve(cfg, net);
  CHECK(r.status != SolveStatus::Converged);
}

TEST_CASE("solve: the physical answer does not depend on the embedding") {
  PrecisionScope scope(128);
  const auto net = load_case("five_bus_ps.json");
  SolveConfig base;
  base.precision_bits = 128;
  base.eps = 1e-14;
  base.mismatch_tol = 1e-12;
  base.embedding = EmbeddingKind::Classical;
  const auto ref = solve(base, net);
  REQUIRE(ref.status == SolveStatus::Converged);
  for (auto k : {EmbeddingKind::Canonical, EmbeddingKind::CanonicalGRhs, EmbeddingKind::CanonicalPsRhs}) {
    auto cfg = base;
    cfg.embedding = k;
    const auto r = solve(cfg, net);
    REQUIRE(r.status == SolveStatus::Converged);
    for (std::size_t i = 0; i < net.size(); ++i) {
      CHECK(r.voltages[i].re == doctest::Approx(ref.voltages[i].re).epsilon(1e-10));
      CHECK(r.voltages[i].im == doctest::Approx(ref.voltages[i].im).epsilon(1e-10));
    }
  }
  // Against an independent Newton solve.
  const auto nr = oracle::newton_power_flow(net, 1.0, {});
  for (std::size_t i = 0; i < net.size(); ++i)
    CHECK(std::abs(nr[i] - std::complex<double>(ref.voltages[i].re, ref.voltages[i].im)) < 1e-8);
}

TEST_CASE("solve property: deterministic, and more terms never hurt once converged") {
  oracle::Gen g(77);
  for (int trial = 0; trial < 6; ++trial) {
    const double p = g.uniform(0.2, 1.2), q = g.uniform(-0.2, 0.4);
    const auto net = testing_support::two_bus(p, q);
    const auto [plus, minus] = oracle::two_bus_branch_points(1.0, {0.0, 0.2}, {p, q});
    SolveConfig cfg;
    cfg.embedding = EmbeddingKind::Classical;
    cfg.alpha = 0.6 * plus;
    const auto a = solve(cfg, net), b = solve(cfg, net);
    CHECK(report_json(a) == report_json(b));
    REQUIRE(a.status == SolveStatus::Converged);
    auto more = cfg;
    more.max_terms = a.terms_used + 2;
    const auto c = solve(more, net);
    CHECK(c.status == SolveStatus::Converged);
    CHECK(c.terms_used == a.terms_used);
  }
}

TEST_CASE("SolveConfig::validate rejects bad settings") {
  auto bad = [](auto edit) {
    SolveConfig c;
    edit(c);
    return c;
  };
  CHECK_NOTHROW(SolveConfig{}.validate());
  CHECK_THROWS_AS(bad([](SolveConfig& c) { c.max_terms = 2; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SolveConfig& c) { c.eps = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SolveConfig& c) { c.mismatch_tol = -1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SolveConfig& c) { c.precision_bits = 32; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SolveConfig& c) { c.alpha = NAN; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SolveConfig& c) { c.spurious_tol = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SolveConfig& c) { c.germ_tol = 1e-3; }).validate(), ConfigError);
  CHECK_THROWS_AS(solve(bad([](SolveConfig& c) { c.max_terms = 1; }), load_case("two_bus.json")),
                  ConfigError);
}

TEST_CASE("report_json: schema") {
  SolveConfig cfg;
  cfg.precision_bits = 128;
  const auto r = solve(cfg, load_case("two_bus.json"));
  const auto j = nlohmann::json::parse(report_json(r, {true, true}));
  CHECK(j["status"] == "CONVERGED");
  CHECK(j["precision_bits"] == 128);
  CHECK(j["voltages"].size() == 2);
  CHECK(j["voltages"][1].contains("re_text"));
  CHECK(j["mismatch"]["buses"].size() == 2);
  CHECK(j.contains("history"));
  CHECK(j.contains("timings"));
  const auto plain = nlohmann::json::parse(report_json(r));
  CHECK_FALSE(plain.contains("history"));
  CHECK_FALSE(plain.contains("timings"));
}

TEST_CASE("workflows: series, roots and snbp") {
  const auto net = load_case("two_bus_cf.json");
  WorkflowConfig w;
  w.embedding = EmbeddingKind::Classical;
  w.terms = 10;
  const auto csv = series_workflow(net, w);
  CHECK(csv.rfind("n,bus_id,re,im\n0,1,1,0\n0,2,1,0\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);

  w.terms = 60;
  w.precision_bits = 256;
  const auto roots = roots_workflow(net, w);
  CHECK(roots.m == 29);
  const auto [plus, minus] = oracle::two_bus_branch_points(1.0, {0.0, 0.2}, {1.0, 0.1});
  CHECK(roots.roc == doctest::Approx(plus).epsilon(0.1));
  const auto s = snbp_workflow(net, w);
  REQUIRE(s);
  CHECK(*s == doctest::Approx(plus).epsilon(0.02));
}
