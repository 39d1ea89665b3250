#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavemc/estimator.hpp"
#include "wavemc/exit_sampler.hpp"
#include "wavemc/reference_solvers.hpp"

namespace wavemc {

// Solution tables. CSV header (bit-exact):
//   t,x1..xd,u_re,u_im,stderr_re,stderr_im,n,tau_mean,tau_max,flags
// preceded by '#' comment lines carrying the mode and the effective
// config. Doubles print in shortest round-trip form, so identical runs
// produce byte-identical files.
std::string solution_csv(const GridTable& table, int dim, const nlohmann::json& config_echo);
nlohmann::json solution_json(const GridTable& table, int dim,
                             const nlohmann::json& config_echo);

struct ExitStatsEntry {
  std::vector<double> x;
  std::int64_t n = 0;
  double tau_mean = 0.0;
  double tau_stderr = 0.0;
  double tau_max = 0.0;
  std::int64_t truncated = 0;
  std::optional<double> oracle_tau;  // BVP mean exit time, when computable
  std::vector<double> hist_edges;    // bin upper edges (JSON output only)
  std::vector<std::int64_t> hist_counts;
};

std::string exit_stats_csv(std::span<const ExitStatsEntry> entries, int dim,
                           const nlohmann::json& config_echo);
nlohmann::json exit_stats_json(std::span<const ExitStatsEntry> entries, int dim,
                               const nlohmann::json& config_echo);

// Raw per-sample debug dump: sample_index,tau,x_exit_1..d,n_steps,truncated
std::string exit_dump_csv(std::span<const ExitSample> samples, int dim);

// Wave solver output restricted to the requested time slices (nearest grid
// level each). Header: t,x,u_re,u_im.
std::string wave_grid_csv(const WaveGrid& grid, std::span<const double> t_slices,
                          const nlohmann::json& config_echo);

nlohmann::json continuation_report_json(const ContinuationReport& report);
nlohmann::json harmonic_report_json(const HarmonicReport& report);

}  // namespace wavemc
