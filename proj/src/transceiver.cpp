#include "airfl/transceiver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace airfl {

double beta_for_power_budget(double phi, double c, double sigma_s_sq,
                             double server_power) {
  if (!(phi > 0.0) || c < 0.0 || !(sigma_s_sq > 0.0) || !(server_power > 0.0)) {
    throw std::domain_error(
        "beta_for_power_budget: needs phi, sigma_s_sq, server_power > 0 and "
        "c >= 0");
  }
  return server_power / (phi * c + sigma_s_sq);
}

TransceiverDesign assemble_design(const Eigen::VectorXcd& u,
                                  const Eigen::VectorXcd& v, double phi,
                                  double beta,
                                  const ChannelRealization& channel,
                                  const Eigen::VectorXd& delta) {
  const int k = channel.num_nodes();
  if (delta.size() != k) {
    throw std::invalid_argument("assemble_design: delta size mismatch");
  }
  if (!(phi > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("assemble_design: phi and beta must be > 0");
  }

  TransceiverDesign design;
  design.u = u;
  design.v = v;
  design.phi = phi;
  design.beta = beta;
  design.M = std::sqrt(beta) * u * v.adjoint();
  design.b.resize(k);
  design.a.resize(k);
  design.mse.resize(k);

  const double inv_sqrt_beta_phi = 1.0 / std::sqrt(beta * phi);
  const double sqrt_phi = std::sqrt(phi);
  for (int j = 0; j < k; ++j) {
    // v^H h_j * b_j / delta_j = sqrt(phi) for every transmitting node.
    const std::complex<double> uplink_gain = (v.adjoint() * channel.H.col(j))(0);
    design.b(j) = (delta(j) > 0.0)
                      ? sqrt_phi * delta(j) / uplink_gain
                      : std::complex<double>(0.0, 0.0);
    // sqrt(beta) a_j q_j^H u = 1 / sqrt(phi) for every node.
    const std::complex<double> downlink_gain =
        (channel.Q.col(j).adjoint() * u)(0);
    design.a(j) = inv_sqrt_beta_phi / downlink_gain;
    design.mse(j) = channel.sigma_s_sq / phi +
                    channel.sigma_k_sq(j) /
                        (beta * phi * std::norm(downlink_gain));
  }
  return design;
}

DesignResult design(const ChannelRealization& channel,
                    const GradientBatch& stats, const SolverOptions& opts) {
  const int n = channel.num_antennas();
  const int k = channel.num_nodes();
  if (k < n) {
    throw std::invalid_argument(
        "design: unsupported configuration, needs num_nodes >= num_antennas "
        "(got K=" +
        std::to_string(k) + ", N=" + std::to_string(n) +
        "); the uniform-forcing constraints admit a solution only then");
  }
  if (stats.delta.size() != k) {
    throw std::invalid_argument("design: stats node count mismatch");
  }

  DesignResult result;

  // Downlink direction: worst-case noise amplification over all nodes.
  LiftedProblem downlink;
  downlink.c = channel.Q;
  downlink.w = channel.sigma_k_sq;
  SolverResult sol_u = solve(downlink, opts);
  result.trace_u = sol_u.trace;

  // Uplink direction: only transmitting nodes constrain the power scale.
  std::vector<int> active;
  for (int j = 0; j < k; ++j) {
    if (stats.delta(j) > 0.0) active.push_back(j);
  }

  Eigen::VectorXcd v;
  double phi = 1.0;
  if (active.empty()) {
    // Nothing is transmitted this round; any unit v works and phi = 1 keeps
    // the assembly well defined.
    Eigen::MatrixXcd gram = channel.H * channel.H.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
    v = canonicalize_phase(eig.eigenvectors().col(n - 1));
    v.normalize();
    result.trace_v.converged = true;
  } else {
    LiftedProblem uplink;
    uplink.c.resize(n, static_cast<int>(active.size()));
    uplink.w.resize(static_cast<int>(active.size()));
    for (std::size_t idx = 0; idx < active.size(); ++idx) {
      const int j = active[idx];
      uplink.c.col(static_cast<int>(idx)) = channel.H.col(j);
      uplink.w(static_cast<int>(idx)) =
          stats.delta(j) * stats.delta(j) / channel.node_power(j);
    }
    SolverResult sol_v = solve(uplink, opts);
    result.trace_v = sol_v.trace;
    v = sol_v.x;
    // phi = min_k P_k |v^H h_k|^2 / delta_k^2 over transmitting nodes.
    phi = std::numeric_limits<double>::infinity();
    for (int j : active) {
      const double gain = std::norm((v.adjoint() * channel.H.col(j))(0));
      phi = std::min(phi,
                     channel.node_power(j) * gain / (stats.delta(j) * stats.delta(j)));
    }
  }

  const double beta =
      beta_for_power_budget(phi, stats.c, channel.sigma_s_sq,
                            channel.server_power);
  result.design =
      assemble_design(sol_u.x, v, phi, beta, channel, stats.delta);
  return result;
}

double node_mse(const TransceiverDesign& design,
                const ChannelRealization& channel, int k) {
  const Eigen::VectorXcd q = channel.Q.col(k);
  const double forwarded_noise_gain =
      (q.adjoint() * design.M * design.M.adjoint() * q)(0).real();
  return std::norm(design.a(k)) *
         (channel.sigma_s_sq * forwarded_noise_gain + channel.sigma_k_sq(k));
}

double expected_error_norm(const TransceiverDesign& design,
                           const ChannelRealization& channel, int k, int d) {
  const double nodes = static_cast<double>(channel.num_nodes());
  return static_cast<double>(d) / (nodes * nodes) *
         node_mse(design, channel, k);
}

double server_broadcast_power(const TransceiverDesign& design,
                              const ChannelRealization& channel,
                              const Eigen::MatrixXd& symbol_correlation) {
  const Eigen::MatrixXcd forwarded =
      design.M * channel.H * design.b.asDiagonal();
  const double signal_part =
      (forwarded * symbol_correlation.cast<std::complex<double>>() *
       forwarded.adjoint())
          .trace()
          .real();
  const double noise_part =
      channel.sigma_s_sq * (design.M * design.M.adjoint()).trace().real();
  return signal_part + noise_part;
}

}  // namespace airfl
