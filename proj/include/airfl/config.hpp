#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "airfl/channel.hpp"
#include "airfl/dc_solver.hpp"

namespace airfl {

/// dB-value helpers; every config file carries dB, every internal quantity
/// is linear. Conversion happens exactly once, at parse time.
inline double dbw_to_watt(double dbw) { return std::pow(10.0, dbw / 10.0); }
inline double db_loss_to_gain(double db) { return std::pow(10.0, -db / 10.0); }

struct RidgeTaskConfig {
  int dim = 32;
  int shard_size = 64;
  double ridge_weight = 0.1;
};

/// Fully resolved experiment description. Power/noise fields are stored in
/// linear units; the *_dbw originals are kept for echoing.
struct ExperimentConfig {
  // geometry
  Eigen::Vector3d server_position{-50.0, 0.0, 10.0};
  PlacementRegion region;

  // channel
  double c0_db = 30.0;
  double kappa = 2.2;
  double rician_chi = 1.0;
  bool reciprocal = false;

  // noise and power (dB as configured, linear as resolved)
  double sigma_s_dbw = -50.0;
  double sigma_k_dbw = -50.0;
  double node_power_dbw = 0.0;
  double server_power_dbw = 10.0;

  // federated learning
  int num_nodes = 20;        // K
  int num_antennas = 4;      // N
  int rounds = 50;           // L
  double eta = 0.01;
  std::string task = "mnist";  // "mnist" | "ridge"
  int shard_size = 3000;       // D (mnist task)
  RidgeTaskConfig ridge;
  double noise_scale = 1.0;
  bool shuffle_within_label = false;

  std::vector<std::uint64_t> seeds{1};
  SolverOptions solver;

  // data paths (mnist task)
  std::string train_images, train_labels, test_images, test_labels;

  // sweep axes
  std::vector<int> sweep_num_antennas;
  std::vector<double> sweep_server_power_dbw;

  std::string output_dir = "out";
  int workers = 0;  // sweep worker pool; 0 = hardware concurrency

  // resolved linear units
  double c0() const { return db_loss_to_gain(c0_db); }
  double sigma_s_sq() const { return dbw_to_watt(sigma_s_dbw); }
  double sigma_k_sq() const { return dbw_to_watt(sigma_k_dbw); }
  double node_power() const { return dbw_to_watt(node_power_dbw); }
  double server_power() const { return dbw_to_watt(server_power_dbw); }

  ChannelConfig channel_config(int antennas, double server_power_dbw_override) const;
};

/// Loads a JSON config file and applies dotted-key overrides of the form
/// "channel.kappa=2.0". Unknown keys are rejected.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

/// Parses config text (JSON) directly; used by load_config and tests.
ExperimentConfig parse_config(const std::string& json_text,
                              const std::vector<std::string>& overrides = {});

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> resolved;  // human-readable linear-unit echo
  bool ok() const { return errors.empty(); }
};

/// Structural checks (K >= N, positive powers, seeds present, dataset paths
/// for the mnist task) plus a linear-unit echo of every dB field.
ValidationReport validate_config(const ExperimentConfig& config);

/// JSON echo of the fully resolved config (deterministic field order).
std::string config_to_json(const ExperimentConfig& config);

}  // namespace airfl
