// hemlab command-line driver.
//
//   hemlab solve  CASE [--embedding K] [--precision-bits N] [--alpha A] ...
//   hemlab roots  CASE [--terms N]
//   hemlab sweep  CASE --from A --to B --steps N
//   hemlab cf     CASE [--samples N]
//   hemlab snbp   CASE
//   hemlab series CASE [--terms N]
//
// Exit codes: 0 success, 1 numeric or case failure (JSON on stderr), 2 usage.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hemlab/driver.hpp"
#include "json.hpp"

namespace {

struct Common {
  std::string case_path;
  std::string embedding = "canonical";
  std::optional<int> precision_bits;
  std::optional<double> spurious_tol;
  std::optional<double> germ_tol;
  std::string out;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("case", c.case_path, "case file (JSON)")->required();
  cmd->add_option("--embedding", c.embedding,
                  "classical | canonical | canonical_g_rhs | canonical_ps_rhs");
  cmd->add_option("--precision-bits", c.precision_bits, "significand bits (53 = native)");
  cmd->add_option("--spurious-tol", c.spurious_tol, "pole-zero pairing distance");
  cmd->add_option("--germ-tol", c.germ_tol, "reference-state mismatch tolerance");
  cmd->add_option("--out", c.out, "output path (default stdout)");
}

int precision_or(const Common& c, int fallback) {
  if (c.precision_bits) return *c.precision_bits;
  if (const char* env = std::getenv("HEMLAB_PRECISION_BITS")) {
    try {
      std::size_t used = 0;
      const int bits = std::stoi(env, &used);
      if (used == std::string(env).size()) return bits;
    } catch (const std::exception&) {
    }
    throw UsageError("HEMLAB_PRECISION_BITS is not an integer");
  }
  return fallback;
}

hemlab::WorkflowConfig workflow(const Common& c, int terms, int default_bits = 53) {
  hemlab::WorkflowConfig cfg;
  cfg.embedding = hemlab::parse_embedding(c.embedding);
  cfg.terms = terms;
  cfg.precision_bits = precision_or(c, default_bits);
  if (cfg.precision_bits < 53) throw hemlab::ConfigError("precision_bits must be at least 53");
  cfg.spurious_tol = c.spurious_tol;
  cfg.germ_tol = c.germ_tol;
  return cfg;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw hemlab::ParseError("cannot open output file " + c.out);
  f << text;
}

void fail_json(const std::string& code, const std::string& message) {
  nlohmann::json j = {{"error", code}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

std::string format_number(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holomorphic-embedding power flow with Pade diagnostics", "hemlab"};
  app.require_subcommand(1);

  Common common;
  hemlab::SolveConfig solve_cfg;
  bool timings = false;
  bool history = false;
  std::string dump_series;
  int terms = 60;
  double from = 0.0, to = 1.0;
  int steps = 20;
  int samples = 12;
  std::optional<double> scale;

  auto* solve = app.add_subcommand("solve", "solve the case and print a JSON report");
  add_common(solve, common);
  solve->add_option("--alpha", solve_cfg.alpha, "embedding parameter to evaluate at");
  solve->add_option("--max-terms", solve_cfg.max_terms, "series coefficients allowed");
  solve->add_option("--eps", solve_cfg.eps, "Pade sequence tolerance");
  solve->add_option("--mismatch-tol", solve_cfg.mismatch_tol, "power mismatch tolerance");
  solve->add_flag("--record-spurious", solve_cfg.record_spurious, "count doublets at every M");
  solve->add_flag("--timings", timings, "include wall-clock timings");
  solve->add_flag("--history", history, "include the per-M history");
  solve->add_option("--dump-series", dump_series, "also write the series CSV to this path");

  auto* roots = app.add_subcommand("roots", "pole/zero CSV in both planes");
  add_common(roots, common);
  roots->add_option("--terms", terms, "series coefficients; approximant [terms/2-1 / terms/2]");

  auto* sweep = app.add_subcommand("sweep", "approximant voltage profile CSV");
  add_common(sweep, common);
  sweep->add_option("--terms", terms, "series coefficients");
  sweep->add_option("--from", from, "first alpha")->required();
  sweep->add_option("--to", to, "last alpha")->required();
  sweep->add_option("--steps", steps, "intervals between from and to")->required();

  auto* cf = app.add_subcommand("cf", "convergence-factor curve and branch-cut capacity");
  add_common(cf, common);
  cf->add_option("--samples", samples, "alpha_hat samples in [0.01, 0.9]");
  cf->add_option("--scale", scale, "alpha of the positive SNBP (default: estimated)");

  auto* snbp = app.add_subcommand("snbp", "saddle-node bifurcation point estimate");
  add_common(snbp, common);
  snbp->add_option("--terms", terms, "series coefficients");

  auto* series = app.add_subcommand("series", "voltage coefficient CSV");
  add_common(series, common);
  series->add_option("--terms", terms, "series coefficients");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto net = hemlab::load_network_file(common.case_path);

    if (*solve) {
      solve_cfg.embedding = hemlab::parse_embedding(common.embedding);
      solve_cfg.precision_bits = precision_or(common, 53);
      solve_cfg.spurious_tol = common.spurious_tol;
      solve_cfg.germ_tol = common.germ_tol;
      const auto report = hemlab::solve(solve_cfg, net);
      emit(common, hemlab::report_json(report, {timings, history}) + "\n");
      if (!dump_series.empty()) {
        auto cfg = workflow(common, solve_cfg.max_terms);
        std::ofstream f(dump_series, std::ios::binary);
        if (!f) throw hemlab::ParseError("cannot open " + dump_series);
        f << hemlab::series_workflow(net, cfg);
      }
      if (report.status != hemlab::SolveStatus::Converged) {
        fail_json(std::string(hemlab::to_string(report.status)),
                  report.message.empty() ? "solve did not converge" : report.message);
        return 1;
      }
      return 0;
    }

    std::ostringstream out;
    if (*roots) {
      const auto result = hemlab::roots_workflow(net, workflow(common, terms));
      hemlab::write_root_csv(out, result.rows);
    } else if (*sweep) {
      hemlab::write_sweep_csv(out, hemlab::sweep_workflow(net, workflow(common, terms), from, to, steps));
    } else if (*cf) {
      const auto curve = hemlab::cf_workflow(net, workflow(common, 60, 1024), samples, scale);
      hemlab::write_cf_csv(out, curve);
      out << "# bcc_estimate," << format_number(*curve.bcc_estimate) << '\n';
    } else if (*snbp) {
      const auto estimate = hemlab::snbp_workflow(net, workflow(common, terms));
      if (!estimate) {
        fail_json("NoRealPole", "no non-spurious pole near the positive real axis");
        return 1;
      }
      out << "snbp," << format_number(*estimate) << '\n';
    } else if (*series) {
      out << hemlab::series_workflow(net, workflow(common, terms));
    }
    emit(common, out.str());
    return 0;
  } catch (const UsageError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const hemlab::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const hemlab::Error& e) {
    fail_json(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    fail_json("InternalError", e.what());
    return 1;
  }
}
