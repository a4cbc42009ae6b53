#pragma once

#include <Eigen/Dense>

#include "airfl/channel.hpp"
#include "airfl/dc_solver.hpp"
#include "airfl/gradient_codec.hpp"

namespace airfl {

/// Complete transceiver for one round: forwarding matrix, per-node transmit
/// and receive equalization coefficients, and the analytic per-node MSE.
struct TransceiverDesign {
  Eigen::VectorXcd u;   // unit-norm downlink beam direction
  Eigen::VectorXcd v;   // unit-norm uplink combining direction
  double beta = 0.0;    // server power scale; M = sqrt(beta) u v^H
  double phi = 0.0;     // node power scale
  Eigen::VectorXcd b;   // K transmit equalization coefficients, |b_k|^2 <= P_k
  Eigen::VectorXcd a;   // K receive equalization coefficients
  Eigen::MatrixXcd M;   // N x N rank-one forwarding matrix
  Eigen::VectorXd mse;  // K per-symbol complex MSE, sigma_s^2/phi + ...

  int num_antennas() const { return static_cast<int>(u.size()); }
  int num_nodes() const { return static_cast<int>(b.size()); }
};

struct DesignResult {
  TransceiverDesign design;
  SolverTrace trace_u;  // downlink direction subproblem
  SolverTrace trace_v;  // uplink direction / node power subproblem
};

/// Joint uplink-downlink design for one channel realization:
///   - u minimizes the worst node's noise amplification max_k sigma_k^2/|q_k^H u|^2;
///   - v maximizes the node power scale phi = min_k P_k |v^H h_k|^2 / delta_k^2;
///   - beta saturates the server power budget;
///   - a, b, M are assembled so every end-to-end gain is exactly one.
/// Degenerate nodes (delta_k = 0) transmit nothing and are excluded from the
/// phi minimum but still receive the downlink.
/// Requires K >= N (the uniform-forcing constraint set forces a rank-one
/// forwarding matrix only in that regime); throws std::invalid_argument
/// otherwise. Propagates SolverError on subproblem non-convergence.
DesignResult design(const ChannelRealization& channel,
                    const GradientBatch& stats, const SolverOptions& opts = {});

/// Assembles coefficients and analytic MSE for given directions and scales.
/// Exposed separately so tests can probe the algebraic identities on
/// arbitrary (u, v, phi, beta).
TransceiverDesign assemble_design(const Eigen::VectorXcd& u,
                                  const Eigen::VectorXcd& v, double phi,
                                  double beta,
                                  const ChannelRealization& channel,
                                  const Eigen::VectorXd& delta);

/// Server power scale that makes the broadcast power equal the budget:
/// server_power / (phi * c + sigma_s_sq). All inputs positive (c >= 0).
double beta_for_power_budget(double phi, double c, double sigma_s_sq,
                             double server_power);

/// Per-symbol complex MSE of node k evaluated directly from the assembled
/// matrices: |a_k|^2 (sigma_s^2 q_k^H M M^H q_k + sigma_k^2).
double node_mse(const TransceiverDesign& design,
                const ChannelRealization& channel, int k);

/// Expected squared error norm of node k's d-dimensional gradient estimate:
/// (d / K^2) * node_mse.
double expected_error_norm(const TransceiverDesign& design,
                           const ChannelRealization& channel, int k, int d);

/// Analytic broadcast power Tr(M H B S B^H H^H M^H) + sigma_s^2 Tr(M M^H)
/// for the given design and symbol correlation matrix.
double server_broadcast_power(const TransceiverDesign& design,
                              const ChannelRealization& channel,
                              const Eigen::MatrixXd& symbol_correlation);

}  // namespace airfl
