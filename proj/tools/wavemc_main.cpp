// wavemc: config-driven Monte Carlo solver for hyperbolic PDE
// (1/2) u_tt = L u via complexified exit-time sampling, with deterministic
// finite-difference cross-checks.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selftest.hpp"
#include "wavemc/errors.hpp"
#include "wavemc/format.hpp"
#include "wavemc/reference_solvers.hpp"
#include "wavemc/run_config.hpp"
#include "wavemc/table_io.hpp"

namespace {

using namespace wavemc;

int exit_code_for(const std::string& event_code) {
  if (event_code == "E_CONFIG") return 2;
  if (event_code == "E_COMPARE") return 4;
  return 3;  // E_TRUNC, E_TAIL, E_CFL, E_NUMERIC
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << text;
}

int run_solve(const RunConfig& rc, bool derivative) {
  const GridTable table = grid_evaluate(rc.f, rc.sde, rc.domain, rc.t_grid, rc.x_grid,
                                        rc.estimator, derivative);
  const std::string text = rc.format == OutputFormat::csv
                               ? solution_csv(table, rc.dim, rc.echo)
                               : solution_json(table, rc.dim, rc.echo).dump(2) + "\n";
  write_output(rc.output_path, text);

  bool tail = false;
  for (const auto& cell : table.cells) tail = tail || cell.est.diag.integrability_suspect;
  if (tail) {
    std::cerr << "E_TAIL: integrability suspect (top-1% of |f| carries more than half "
                 "the mass) on at least one grid cell\n";
    return 3;
  }
  return 0;
}

int run_exit_stats(const RunConfig& rc, const std::string& dump_path) {
  std::vector<ExitStatsEntry> entries;
  bool truncation_flag = false;

  std::optional<GridFunction1D> oracle;
  if (rc.dim == 1 && !rc.domain.is_generic()) {
    try {
      oracle = solve_mean_exit_ode(rc.sde, rc.domain.bounding_box().lo[0],
                                   rc.domain.bounding_box().hi[0], 401);
    } catch (const NumericalError&) {
      // degenerate diffusion: no oracle column
    }
  }

  bool dumped = false;
  for (const auto& x : rc.x_grid) {
    const auto batch = sample_exit_batch(rc.sde, rc.domain, x, rc.estimator.step,
                                         rc.estimator.seed, rc.estimator.n_samples,
                                         rc.estimator.threads);
    ExitStatsEntry e;
    e.x = x;
    double sum = 0.0;
    std::int64_t used = 0;
    for (const auto& s : batch) {
      if (s.truncated) {
        ++e.truncated;
        continue;
      }
      sum += s.tau;
      e.tau_max = std::max(e.tau_max, s.tau);
      ++used;
    }
    e.n = used;
    e.tau_mean = used > 0 ? sum / static_cast<double>(used) : 0.0;
    double ss = 0.0;
    for (const auto& s : batch)
      if (!s.truncated) ss += (s.tau - e.tau_mean) * (s.tau - e.tau_mean);
    e.tau_stderr = used > 1 ? std::sqrt(ss / (static_cast<double>(used) *
                                              static_cast<double>(used - 1)))
                            : 0.0;
    if (oracle) e.oracle_tau = (*oracle)(x[0]);

    // 50-bin histogram for the JSON output.
    if (used > 0 && e.tau_max > 0.0) {
      const int bins = 50;
      e.hist_edges.resize(bins);
      e.hist_counts.assign(bins, 0);
      for (int b = 0; b < bins; ++b)
        e.hist_edges[static_cast<std::size_t>(b)] = e.tau_max * (b + 1) / bins;
      for (const auto& s : batch) {
        if (s.truncated) continue;
        const auto b = std::min<std::int64_t>(
            static_cast<std::int64_t>(s.tau / e.tau_max * bins), bins - 1);
        ++e.hist_counts[static_cast<std::size_t>(b)];
      }
    }

    if (static_cast<double>(e.truncated) >
        1e-4 * static_cast<double>(rc.estimator.n_samples))
      truncation_flag = true;

    if (!dump_path.empty() && !dumped) {
      std::ofstream dump(dump_path, std::ios::binary);
      if (!dump) throw ConfigError("cannot open exit dump file '" + dump_path + "'");
      dump << exit_dump_csv(batch, rc.dim);
      dumped = true;
    }
    entries.push_back(std::move(e));
  }

  const std::string text = rc.format == OutputFormat::csv
                               ? exit_stats_csv(entries, rc.dim, rc.echo)
                               : exit_stats_json(entries, rc.dim, rc.echo).dump(2) + "\n";
  write_output(rc.output_path, text);

  if (truncation_flag) {
    std::cerr << "E_TRUNC: truncated exit fraction above 1e-4 at one or more points\n";
    return 3;
  }
  return 0;
}

int run_reference(const RunConfig& rc) {
  if (rc.dim != 1) throw ConfigError("reference mode is 1D only");
  const double a = rc.domain.bounding_box().lo[0];
  const double b = rc.domain.bounding_box().hi[0];
  const DataFunction& f = rc.f;

  WaveData data;
  data.left = [&f, a](double t) { return f.eval(Complex(t, 0.0), std::span{&a, 1}); };
  data.right = [&f, b](double t) { return f.eval(Complex(t, 0.0), std::span{&b, 1}); };
  data.position = [&f](double x) { return f.eval(Complex(0.0, 0.0), std::span{&x, 1}); };
  data.velocity = [&f](double x) { return f.eval_dz(Complex(0.0, 0.0), std::span{&x, 1}); };

  WaveFdConfig cfg;
  cfg.nx = rc.ref_nx;
  cfg.dt = rc.ref_dt;
  cfg.T = rc.ref_t;
  const WaveGrid grid = wave_fd_solve(rc.sde, a, b, data, cfg);
  write_output(rc.output_path, wave_grid_csv(grid, rc.t_grid, rc.echo));
  return 0;
}

int run_compare(const RunConfig& rc) {
  if (rc.dim != 1) throw ConfigError("compare mode is 1D only");
  WaveFdConfig fd_cfg;
  fd_cfg.nx = rc.ref_nx;
  fd_cfg.dt = rc.ref_dt;

  nlohmann::json doc;
  doc["config"] = rc.echo;
  nlohmann::json reports = nlohmann::json::array();

  const ContinuationReport cont =
      fd_continuation_check(rc.f, rc.sde, rc.domain, rc.ref_t0, rc.ref_t1, rc.estimator,
                            fd_cfg);
  reports.push_back(continuation_report_json(cont));
  bool pass = cont.pass;

  if (rc.f.f_expr().has_value() && !rc.f.f_expr()->contains_z()) {
    std::vector<double> probes;
    for (const auto& x : rc.x_grid)
      if (rc.domain.contains(x)) probes.push_back(x[0]);
    if (!probes.empty()) {
      const HarmonicReport h = harmonic_check(rc.f, rc.sde, rc.domain, probes, rc.estimator);
      reports.push_back(harmonic_report_json(h));
      pass = pass && h.pass;
    }
  }

  doc["reports"] = std::move(reports);
  doc["pass"] = pass;
  write_output(rc.output_path, doc.dump(2) + "\n");

  if (!pass) {
    std::cerr << "E_COMPARE: reference comparison failed (max_abs_error "
              << format_double(cont.max_abs_error) << ", budget "
              << format_double(cont.stderr_budget) << ")\n";
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo solver for (1/2) u_tt = L u via exit-time sampling"};
  app.allow_extras();

  std::string config_path, mode, output, dump_exits;
  std::string seed_text, threads_text;
  app.add_option("--config", config_path, "problem config (JSON)");
  app.add_option("--mode", mode, "solve | dt | exit-stats | reference | compare | selftest");
  app.add_option("--seed", seed_text, "override estimator.seed");
  app.add_option("--threads", threads_text,
                 "worker threads (0 = hardware); never changes the numbers");
  app.add_option("--output", output, "output path ('-' for stdout)");
  app.add_option("--dump-exits", dump_exits,
                 "exit-stats: write the per-sample CSV dump to this path");

  CLI11_PARSE(app, argc, argv);

  std::vector<std::string> overrides;
  for (std::string extra : app.remaining()) {
    if (extra.rfind("--", 0) == 0) extra = extra.substr(2);
    if (extra.find('=') == std::string::npos) {
      std::cerr << "E_CONFIG: unrecognized argument '" << extra
                << "' (overrides use --key.path=value)\n";
      return 2;
    }
    overrides.push_back(extra);
  }
  if (!mode.empty()) overrides.push_back("mode=" + mode);
  if (!seed_text.empty()) overrides.push_back("estimator.seed=" + seed_text);
  if (!threads_text.empty()) overrides.push_back("estimator.threads=" + threads_text);
  if (!output.empty()) overrides.push_back("output.path=" + output);

  try {
    if (config_path.empty()) {
      if (mode == "selftest") {
        unsigned threads = 0;
        if (!threads_text.empty()) threads = static_cast<unsigned>(std::stoul(threads_text));
        return run_selftest(threads) == 0 ? 0 : 3;
      }
      std::cerr << "E_CONFIG: --config is required (except for --mode selftest)\n";
      return 2;
    }

    const RunConfig rc = load_run_config(config_path, overrides);
    for (const auto& w : rc.warnings) std::cerr << "warning: " << w << "\n";

    switch (rc.mode) {
      case RunMode::solve:
        return run_solve(rc, /*derivative=*/false);
      case RunMode::dt:
        return run_solve(rc, /*derivative=*/true);
      case RunMode::exit_stats:
        return run_exit_stats(rc, dump_exits);
      case RunMode::reference:
        return run_reference(rc);
      case RunMode::compare:
        return run_compare(rc);
      case RunMode::selftest:
        return run_selftest(rc.estimator.threads) == 0 ? 0 : 3;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "E_NUMERIC: " << e.what() << "\n";
    return 3;
  }
}
