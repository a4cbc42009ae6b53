#pragma once

#include <Eigen/Dense>
#include <vector>

#include "airfl/channel.hpp"
#include "airfl/gradient_codec.hpp"
#include "airfl/rng.hpp"
#include "airfl/transceiver.hpp"

namespace airfl {

/// Result of simulating one round's uplink superposition, forwarding, and
/// downlink reception for all K nodes and d symbols.
struct RoundTransmission {
  Eigen::MatrixXcd received_z;  // K x d complex per-node estimates (pre real part)
  Eigen::MatrixXcd error;       // K x d deviation from the true average
  double measured_server_power = 0.0;   // (1/d) sum_i ||x_i||^2
  Eigen::VectorXd measured_node_power;  // K, (1/d) sum_i |b_k s_{k,i}|^2
};

/// Runs the analog aggregation pipeline: per symbol index i the server
/// receives sum_k h_k b_k s_{k,i} plus noise, forwards through M, and each
/// node equalizes with a_k, adds its own noise, and denormalizes.
/// noise_scale multiplies both noise standard deviations (0 disables noise).
/// Server noise is drawn column-by-column before node noise row-by-row, so a
/// fixed rng seed fixes the transmission exactly.
RoundTransmission transmit_round(const Eigen::MatrixXd& symbols,
                                 const GradientBatch& stats,
                                 const TransceiverDesign& design,
                                 const ChannelRealization& channel, Rng& rng,
                                 double noise_scale = 1.0);

/// End-to-end gain audit: residual(k, j) = |a_k q_k^H M h_j b_j / delta_j - 1|.
/// Columns of nodes that transmit nothing (delta_j = 0) are reported as exact
/// zeros and flagged.
struct ForcingAudit {
  Eigen::MatrixXd residual;  // K x K
  std::vector<bool> degenerate_column;
  double max_residual = 0.0;
};

ForcingAudit audit_uniform_forcing(const TransceiverDesign& design,
                                   const ChannelRealization& channel,
                                   const Eigen::VectorXd& delta);

}  // namespace airfl
