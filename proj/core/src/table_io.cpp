#include "wavemc/table_io.hpp"

#include <algorithm>
#include <cmath>

#include "wavemc/format.hpp"

namespace wavemc {

using nlohmann::json;

namespace {

std::string cell_flags(const Estimate& e) {
  std::string flags;
  if (e.exact) flags += "exact";
  if (e.diag.integrability_suspect) {
    if (!flags.empty()) flags += ';';
    flags += "tail";
  }
  return flags;
}

std::string header_comment(const json& config_echo) {
  return "# wavemc\n# config: " + config_echo.dump() + "\n";
}

json estimate_fields(const GridCell& cell, int dim) {
  json c;
  c["t"] = cell.t;
  json xs = json::array();
  for (int i = 0; i < dim; ++i) xs.push_back(cell.x[static_cast<std::size_t>(i)]);
  c["x"] = xs;
  c["u_re"] = cell.est.mean.real();
  c["u_im"] = cell.est.mean.imag();
  c["stderr_re"] = cell.est.stderr_re;
  c["stderr_im"] = cell.est.stderr_im;
  c["n"] = cell.est.n_effective;
  c["tau_mean"] = cell.est.tau_mean;
  c["tau_max"] = cell.est.tau_max;
  c["flags"] = cell_flags(cell.est);
  return c;
}

}  // namespace

std::string solution_csv(const GridTable& table, int dim, const json& config_echo) {
  std::string out = header_comment(config_echo);
  out += "t";
  for (int i = 1; i <= dim; ++i) out += ",x" + std::to_string(i);
  out += ",u_re,u_im,stderr_re,stderr_im,n,tau_mean,tau_max,flags\n";
  for (const auto& cell : table.cells) {
    out += format_double(cell.t);
    for (int i = 0; i < dim; ++i)
      out += "," + format_double(cell.x[static_cast<std::size_t>(i)]);
    out += "," + format_double(cell.est.mean.real());
    out += "," + format_double(cell.est.mean.imag());
    out += "," + format_double(cell.est.stderr_re);
    out += "," + format_double(cell.est.stderr_im);
    out += "," + std::to_string(cell.est.n_effective);
    out += "," + format_double(cell.est.tau_mean);
    out += "," + format_double(cell.est.tau_max);
    out += "," + cell_flags(cell.est);
    out += "\n";
  }
  return out;
}

json solution_json(const GridTable& table, int dim, const json& config_echo) {
  json doc;
  doc["config"] = config_echo;
  json cells = json::array();
  for (const auto& cell : table.cells) cells.push_back(estimate_fields(cell, dim));
  doc["cells"] = std::move(cells);
  return doc;
}

std::string exit_stats_csv(std::span<const ExitStatsEntry> entries, int dim,
                           const json& config_echo) {
  std::string out = header_comment(config_echo);
  for (int i = 1; i <= dim; ++i) out += (i == 1 ? "x1" : ",x" + std::to_string(i));
  out += ",n,tau_mean,tau_stderr,tau_max,truncated,oracle_tau\n";
  for (const auto& e : entries) {
    for (int i = 0; i < dim; ++i)
      out += (i == 0 ? "" : ",") + format_double(e.x[static_cast<std::size_t>(i)]);
    out += "," + std::to_string(e.n);
    out += "," + format_double(e.tau_mean);
    out += "," + format_double(e.tau_stderr);
    out += "," + format_double(e.tau_max);
    out += "," + std::to_string(e.truncated);
    out += ",";
    if (e.oracle_tau) out += format_double(*e.oracle_tau);
    out += "\n";
  }
  return out;
}

json exit_stats_json(std::span<const ExitStatsEntry> entries, int dim,
                     const json& config_echo) {
  json doc;
  doc["config"] = config_echo;
  json rows = json::array();
  for (const auto& e : entries) {
    json r;
    json xs = json::array();
    for (int i = 0; i < dim; ++i) xs.push_back(e.x[static_cast<std::size_t>(i)]);
    r["x"] = xs;
    r["n"] = e.n;
    r["tau_mean"] = e.tau_mean;
    r["tau_stderr"] = e.tau_stderr;
    r["tau_max"] = e.tau_max;
    r["truncated"] = e.truncated;
    if (e.oracle_tau) r["oracle_tau"] = *e.oracle_tau;
    if (!e.hist_edges.empty()) {
      r["hist_edges"] = e.hist_edges;
      r["hist_counts"] = e.hist_counts;
    }
    rows.push_back(std::move(r));
  }
  doc["points"] = std::move(rows);
  return doc;
}

std::string exit_dump_csv(std::span<const ExitSample> samples, int dim) {
  std::string out = "sample_index,tau";
  for (int i = 1; i <= dim; ++i) out += ",x_exit_" + std::to_string(i);
  out += ",n_steps,truncated\n";
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    out += std::to_string(k) + "," + format_double(s.tau);
    for (int i = 0; i < dim; ++i)
      out += "," + format_double(s.x_exit[static_cast<std::size_t>(i)]);
    out += "," + std::to_string(s.n_steps);
    out += "," + std::to_string(s.truncated ? 1 : 0);
    out += "\n";
  }
  return out;
}

std::string wave_grid_csv(const WaveGrid& grid, std::span<const double> t_slices,
                          const json& config_echo) {
  std::string out = header_comment(config_echo);
  out += "t,x,u_re,u_im\n";
  std::vector<std::size_t> levels;
  if (t_slices.empty()) {
    levels.push_back(grid.t.size() - 1);
  } else {
    for (double ts : t_slices) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < grid.t.size(); ++k)
        if (std::abs(grid.t[k] - ts) < std::abs(grid.t[best] - ts)) best = k;
      levels.push_back(best);
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  }
  for (std::size_t k : levels) {
    for (std::size_t i = 0; i < grid.x.size(); ++i) {
      const Complex u = grid.at(k, i);
      out += format_double(grid.t[k]) + "," + format_double(grid.x[i]) + "," +
             format_double(u.real()) + "," + format_double(u.imag()) + "\n";
    }
  }
  return out;
}

json continuation_report_json(const ContinuationReport& report) {
  json r;
  r["check"] = "fd_continuation";
  r["t0"] = report.t0;
  r["t1"] = report.t1;
  r["nx"] = report.nx;
  r["dt"] = report.dt;
  r["max_abs_error"] = report.max_abs_error;
  r["stderr_budget"] = report.stderr_budget;
  r["rel_floor"] = report.rel_floor;
  r["pass"] = report.pass;
  json probes = json::array();
  for (std::size_t k = 0; k < report.probe_x.size(); ++k) {
    json p;
    p["x"] = report.probe_x[k];
    p["u_fd_re"] = report.u_fd[k].real();
    p["u_fd_im"] = report.u_fd[k].imag();
    p["u_mc_re"] = report.u_mc[k].real();
    p["u_mc_im"] = report.u_mc[k].imag();
    p["budget"] = report.probe_budget[k];
    probes.push_back(std::move(p));
  }
  r["probes"] = std::move(probes);
  return r;
}

json harmonic_report_json(const HarmonicReport& report) {
  json r;
  r["check"] = "harmonic";
  r["t_independent"] = report.t_independent;
  r["linear_check_applicable"] = report.linear_check_applicable;
  r["max_abs_error"] = report.max_abs_deviation;
  r["stderr_budget"] = report.max_allowed;
  r["pass"] = report.pass;
  json probes = json::array();
  for (std::size_t k = 0; k < report.probe_x.size(); ++k) {
    json p;
    p["x"] = report.probe_x[k];
    p["u_re"] = report.estimates[k].real();
    p["u_im"] = report.estimates[k].imag();
    if (k < report.expected.size()) {
      p["expected_re"] = report.expected[k].real();
      p["expected_im"] = report.expected[k].imag();
    }
    probes.push_back(std::move(p));
  }
  r["probes"] = std::move(probes);
  return r;
}

}  // namespace wavemc
