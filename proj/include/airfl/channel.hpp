#pragma once

#include <Eigen/Dense>
#include <vector>

#include "airfl/rng.hpp"

namespace airfl {

/// Fixed node/server placement for one experiment. Positions are in meters;
/// fading is redrawn per round, geometry is not.
struct Geometry {
  Eigen::Vector3d server;
  std::vector<Eigen::Vector3d> nodes;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  double distance_to_server(int node) const {
    return (nodes.at(static_cast<std::size_t>(node)) - server).norm();
  }
};

/// Region the nodes are placed in: a rectangle in the z = height plane.
struct PlacementRegion {
  double x_min = 0.0, x_max = 20.0;
  double y_min = -10.0, y_max = 10.0;
  double height = 0.0;
};

/// Physical-layer parameters, all in linear units (conversions from dB
/// happen at config-parse time).
struct ChannelConfig {
  int num_antennas = 1;      // N
  int num_nodes = 1;         // K
  double c0 = 1e-3;          // path gain at the reference distance
  double gamma0 = 1.0;       // reference distance, meters
  double kappa = 2.2;        // path loss exponent
  double rician_chi = 1.0;   // Rician factor
  double sigma_s_sq = 1e-5;  // server noise power, watts
  double sigma_k_sq = 1e-5;  // per-node noise power, watts
  double node_power = 1.0;   // P_k, watts
  double server_power = 10.0;  // P_s, watts
  bool reciprocal = false;   // force downlink = uplink fades
};

/// One training round's channel state. Immutable after construction.
struct ChannelRealization {
  Eigen::MatrixXcd H;          // N x K uplink; column k is h_k
  Eigen::MatrixXcd Q;          // N x K downlink; column k is q_k
  double sigma_s_sq = 0.0;     // server noise power, watts
  Eigen::VectorXd sigma_k_sq;  // K node noise powers, watts
  Eigen::VectorXd node_power;  // K per-node power budgets P_k, watts
  double server_power = 0.0;   // P_s, watts

  int num_antennas() const { return static_cast<int>(H.rows()); }
  int num_nodes() const { return static_cast<int>(H.cols()); }
};

/// Power-law path gain c0 * (distance / gamma0)^(-kappa), linear.
/// Throws std::domain_error for non-positive distance or gamma0.
double path_loss(double distance, double c0, double gamma0, double kappa);

/// Unit-second-moment Rician fade: sqrt(chi/(1+chi)) + sqrt(1/(1+chi)) * w,
/// w ~ CN(0,1). chi >= 1e12 is treated as the pure line-of-sight limit and
/// returns exactly 1 without consuming generator state.
std::complex<double> sample_rician(Rng& rng, double chi);

/// Node placement: uniform i.i.d. over the region, server position fixed.
Geometry sample_geometry(Rng& rng, const Eigen::Vector3d& server,
                         const PlacementRegion& region, int num_nodes);

/// Draws H and Q entry-wise as sqrt(path_loss) * independent Rician fades.
/// Uplink is drawn first (column-major), then downlink, unless
/// cfg.reciprocal is set, in which case Q = H.
/// Throws std::invalid_argument when geometry and config disagree on K.
ChannelRealization draw_realization(Rng& rng, const Geometry& geometry,
                                    const ChannelConfig& cfg);

}  // namespace airfl
