#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavemc/data_function.hpp"
#include "wavemc/domain.hpp"
#include "wavemc/estimator.hpp"
#include "wavemc/sde.hpp"

namespace wavemc {

enum class RunMode { solve, dt, exit_stats, reference, compare, selftest };
enum class OutputFormat { csv, json };

const char* to_string(RunMode mode);
const char* to_string(OutputFormat format);
const char* to_string(RaoBlackwellMode mode);

// A fully validated problem description: domain, dynamics, data function
// (with phi folded in when present), estimator settings, grids and output
// destination, plus the normalized config document for echoing into
// output headers.
struct RunConfig {
  int dim = 1;
  DomainSpec domain;
  SdeSpec sde;
  DataFunction f;
  std::optional<Expr> phi;

  EstimatorConfig estimator;

  std::vector<double> t_grid;
  std::vector<std::vector<double>> x_grid;
  OutputFormat format = OutputFormat::csv;
  std::string output_path;  // empty or "-": stdout

  RunMode mode = RunMode::solve;

  // reference / compare settings
  int ref_nx = 81;
  double ref_dt = 0.0;  // 0: half the CFL bound (or exact landing for compare)
  double ref_t = 1.0;   // march duration in reference mode
  double ref_t0 = 0.25, ref_t1 = 0.75;

  nlohmann::json echo;  // normalized effective config
  std::vector<std::string> warnings;
};

// "a.b.c=value" assignments applied to the JSON document before parsing;
// values are parsed as JSON when possible, else taken as strings.
void apply_override(nlohmann::json& doc, const std::string& assignment);

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides = {});

}  // namespace wavemc
