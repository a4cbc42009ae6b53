#pragma once

#include <string>
#include <vector>

#include "airfl/config.hpp"
#include "airfl/fl_train.hpp"

namespace airfl {

/// One sweep cell: a complete training run at fixed (N, P_s, seed).
struct CellSpec {
  int num_antennas = 0;
  double server_power_dbw = 0.0;
  std::uint64_t seed = 0;

  std::string name() const;  // e.g. "N4_Ps20dBW_seed1"
};

struct CellSummary {
  CellSpec spec;
  double final_loss = 0.0;
  double final_accuracy = 0.0;
  double mse_avg_analytic_mean = 0.0;   // mean over rounds
  double mse_avg_empirical_mean = 0.0;
  int rounds = 0;
};

/// Runs one cell: builds the task and geometry from the config, trains, and
/// writes rounds.csv / traces.csv / resolved_config.json into
/// <output.dir>/<cell name>/ (atomically, via temp-file rename).
/// Geometry and shards depend only on the seed, so cells with the same seed
/// are directly comparable across N and P_s.
CellSummary run_cell(const ExperimentConfig& config, const CellSpec& spec);

/// `run` entry point: single cell from fl.num_antennas / power.server_dbw /
/// seeds[0]. Returns the summary after writing artifacts.
CellSummary run_experiment(const ExperimentConfig& config);

/// `sweep` entry point: the cross product of sweep.num_antennas x
/// sweep.server_power_dbw x seeds (falling back to the scalar fields when a
/// sweep axis is empty), executed on a worker pool. Writes per-cell artifacts
/// plus summary.csv in output.dir.
std::vector<CellSummary> run_sweep(const ExperimentConfig& config);

/// Self-contained checks that need no dataset: algebraic identities on
/// designed transceivers, solver-versus-enumeration spot checks, and a
/// Monte-Carlo error-statistics probe. Prints one line per check to `os`;
/// returns the number of failed checks.
int run_selftest(std::ostream& os, bool quick = true);

}  // namespace airfl
