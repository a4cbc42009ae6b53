#include "airfl/fl_train.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "airfl/air_sim.hpp"
#include "airfl/gradient_codec.hpp"
#include "airfl/transceiver.hpp"

namespace airfl {

namespace {

constexpr std::uint64_t kChannelStream = 0x11;
constexpr std::uint64_t kNoiseStream = 0x22;

// Runs fn(node) for every node on a small worker pool. Results go into
// caller-owned slots, so the outcome is independent of scheduling order.
void for_each_node(int num_nodes, int workers,
                   const std::function<void(int)>& fn) {
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
  }
  workers = std::max(1, std::min(workers, num_nodes));
  if (workers == 1) {
    for (int node = 0; node < num_nodes; ++node) fn(node);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int node = next.fetch_add(1); node < num_nodes;
           node = next.fetch_add(1)) {
        fn(node);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

TrainResult train(const TrainingTask& task, const Geometry& geometry,
                  const ChannelConfig& channel_cfg, const TrainOptions& opts) {
  const int k = task.num_nodes();
  const int d = task.dim();
  if (channel_cfg.num_nodes != k || geometry.num_nodes() != k) {
    throw std::invalid_argument("train: node count mismatch across components");
  }
  if (opts.rounds < 1) throw std::invalid_argument("train: rounds must be >= 1");

  TrainResult result;
  result.theta = Eigen::MatrixXd::Zero(k, d);
  result.rounds.reserve(static_cast<std::size_t>(opts.rounds));

  const Rng base(opts.seed);
  Eigen::MatrixXd gradients(k, d);

  for (int round = 1; round <= opts.rounds; ++round) {
    // Local computation happens before the uplink so the round's gradient
    // statistics are available to the transceiver design.
    for_each_node(k, opts.eval_workers, [&](int node) {
      gradients.row(node) =
          task.local_gradient(node, result.theta.row(node).transpose());
    });

    NormalizedGradients coded = normalize(gradients);

    Rng chan_rng = base.fork(Rng::derive_seed(kChannelStream, round));
    ChannelRealization channel =
        draw_realization(chan_rng, geometry, channel_cfg);
    DesignResult designed = design(channel, coded.stats, opts.solver);

    Rng noise_rng = base.fork(Rng::derive_seed(kNoiseStream, round));
    RoundTransmission tx =
        transmit_round(coded.symbols, coded.stats, designed.design, channel,
                       noise_rng, opts.noise_scale);

    // Per-node update with the node's own estimate. received_z is already
    // denormalized; the model consumes its real part.
    for (int node = 0; node < k; ++node) {
      result.theta.row(node) -= opts.eta * tx.received_z.row(node).real();
    }

    RoundLog log;
    log.round = round;
    log.phi = designed.design.phi;
    log.beta = designed.design.beta;
    log.sca_iters_u = designed.trace_u.iteration_count();
    log.sca_iters_v = designed.trace_v.iteration_count();

    const double k_sq = static_cast<double>(k) * k;
    double analytic_sum = 0.0;
    double analytic_max = 0.0;
    double empirical_sum = 0.0;
    for (int node = 0; node < k; ++node) {
      const double per_symbol = designed.design.mse(node) / k_sq;
      analytic_sum += per_symbol;
      analytic_max = std::max(analytic_max, per_symbol);
      empirical_sum += tx.error.row(node).squaredNorm() / d;
    }
    log.mse_avg_analytic = analytic_sum / k;
    log.mse_avg_empirical = empirical_sum / k;
    log.mse_max = analytic_max;

    std::vector<double> losses(static_cast<std::size_t>(k), 0.0);
    std::vector<double> metrics(static_cast<std::size_t>(k), 0.0);
    for_each_node(k, opts.eval_workers, [&](int node) {
      const Eigen::VectorXd theta_node = result.theta.row(node).transpose();
      losses[static_cast<std::size_t>(node)] = task.global_loss(theta_node);
      metrics[static_cast<std::size_t>(node)] =
          opts.evaluate_test ? task.test_metric(theta_node)
                             : std::numeric_limits<double>::quiet_NaN();
    });
    double loss_sum = 0.0;
    double metric_sum = 0.0;
    for (int node = 0; node < k; ++node) {
      loss_sum += losses[static_cast<std::size_t>(node)];
      metric_sum += metrics[static_cast<std::size_t>(node)];
    }
    log.train_loss_avg = loss_sum / k;
    log.test_accuracy_avg = metric_sum / k;

    result.rounds.push_back(log);
    result.traces_u.push_back(std::move(designed.trace_u));
    result.traces_v.push_back(std::move(designed.trace_v));
  }
  return result;
}

std::vector<Eigen::VectorXd> centralized_descent(const TrainingTask& task,
                                                 int rounds, double eta) {
  const int k = task.num_nodes();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(task.dim());
  std::vector<Eigen::VectorXd> trajectory;
  trajectory.reserve(static_cast<std::size_t>(rounds));
  for (int round = 0; round < rounds; ++round) {
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(task.dim());
    for (int node = 0; node < k; ++node) {
      avg += task.local_gradient(node, theta);
    }
    theta -= eta * avg / k;
    trajectory.push_back(theta);
  }
  return trajectory;
}

std::vector<double> convergence_bound(double gap0, double mu, double rho,
                                      const std::vector<double>& error_norms) {
  if (!(mu > 0.0) || !(rho >= mu)) {
    throw std::domain_error("convergence_bound: needs 0 < mu <= rho");
  }
  if (gap0 < 0.0) {
    throw std::domain_error("convergence_bound: gap0 must be >= 0");
  }
  for (double e : error_norms) {
    if (e < 0.0) {
      throw std::domain_error("convergence_bound: error norms must be >= 0");
    }
  }
  const double lambda = 1.0 - mu / rho;
  std::vector<double> bounds;
  bounds.reserve(error_norms.size());
  double decayed_gap = gap0;
  double error_term = 0.0;
  for (double e : error_norms) {
    decayed_gap *= lambda;
    error_term = lambda * error_term + e / (2.0 * rho);
    bounds.push_back(decayed_gap + error_term);
  }
  return bounds;
}

}  // namespace airfl
