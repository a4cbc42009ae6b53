#pragma once

#include <Eigen/Dense>
#include <vector>

#include "airfl/channel.hpp"
#include "airfl/dc_solver.hpp"
#include "airfl/tasks.hpp"

namespace airfl {

/// One row of the per-round training log (CSV schema in this order).
struct RoundLog {
  int round = 0;
  double train_loss_avg = 0.0;      // global loss averaged over node models
  double test_accuracy_avg = 0.0;   // NaN for tasks without a test split
  double mse_avg_analytic = 0.0;    // (1/K) sum_k node_mse_k / K^2, complex error
  double mse_avg_empirical = 0.0;   // (1/K) sum_k ||e_k||^2 / d, complex error
  double mse_max = 0.0;             // max_k node_mse_k / K^2
  double phi = 0.0;
  double beta = 0.0;
  int sca_iters_u = 0;
  int sca_iters_v = 0;
};

struct TrainOptions {
  int rounds = 50;
  double eta = 0.01;
  std::uint64_t seed = 1;
  double noise_scale = 1.0;  // 0 disables channel noise
  bool evaluate_test = true;
  int eval_workers = 0;  // 0 = hardware concurrency
  SolverOptions solver;
};

struct TrainResult {
  std::vector<RoundLog> rounds;
  Eigen::MatrixXd theta;  // K x d final per-node parameters
  std::vector<SolverTrace> traces_u;  // one per round
  std::vector<SolverTrace> traces_v;
};

/// Runs L federated rounds over the simulated channel: local full-batch
/// gradients, symbol normalization, per-round transceiver design, analog
/// aggregation, per-node denormalization, and the gradient step
/// theta_k <- theta_k - eta * real(z_k). Each node updates with its own
/// noisy estimate, so models drift apart under noise and coincide without it.
TrainResult train(const TrainingTask& task, const Geometry& geometry,
                  const ChannelConfig& channel_cfg, const TrainOptions& opts);

/// Ideal-aggregation trajectory: one model following the exact average
/// gradient. Returns the parameter vector after each of `rounds` steps.
std::vector<Eigen::VectorXd> centralized_descent(const TrainingTask& task,
                                                 int rounds, double eta);

/// Loss-gap upper bound for strongly convex smooth descent with learning
/// rate 1/rho and per-round gradient error energies E||e^[l]||^2:
///   bound[L] = gap0 * lambda^L + sum_{l=1..L} lambda^(L-l) / (2 rho) * err[l],
/// lambda = 1 - mu/rho. Returns the bound for every L = 1..err.size().
std::vector<double> convergence_bound(double gap0, double mu, double rho,
                                      const std::vector<double>& error_norms);

}  // namespace airfl
