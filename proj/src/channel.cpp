#include "airfl/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace airfl {

double path_loss(double distance, double c0, double gamma0, double kappa) {
  if (!(distance > 0.0)) {
    throw std::domain_error("path_loss: distance must be positive, got " +
                            std::to_string(distance));
  }
  if (!(gamma0 > 0.0)) {
    throw std::domain_error("path_loss: reference distance must be positive");
  }
  if (!(c0 > 0.0)) {
    throw std::domain_error("path_loss: reference gain must be positive");
  }
  return c0 * std::pow(distance / gamma0, -kappa);
}

std::complex<double> sample_rician(Rng& rng, double chi) {
  if (chi < 0.0) {
    throw std::domain_error("sample_rician: Rician factor must be >= 0");
  }
  if (chi >= 1e12) return {1.0, 0.0};  // line-of-sight limit, deterministic
  const double los = std::sqrt(chi / (1.0 + chi));
  const double scatter = std::sqrt(1.0 / (1.0 + chi));
  return los + scatter * rng.complex_normal();
}

Geometry sample_geometry(Rng& rng, const Eigen::Vector3d& server,
                         const PlacementRegion& region, int num_nodes) {
  if (num_nodes < 1) {
    throw std::invalid_argument("sample_geometry: need at least one node");
  }
  Geometry geo;
  geo.server = server;
  geo.nodes.reserve(static_cast<std::size_t>(num_nodes));
  for (int k = 0; k < num_nodes; ++k) {
    const double x = rng.uniform(region.x_min, region.x_max);
    const double y = rng.uniform(region.y_min, region.y_max);
    geo.nodes.emplace_back(x, y, region.height);
  }
  return geo;
}

namespace {

void fill_faded_column(Rng& rng, double amplitude_gain, double chi,
                       Eigen::MatrixXcd& mat, int col) {
  for (int n = 0; n < mat.rows(); ++n) {
    mat(n, col) = amplitude_gain * sample_rician(rng, chi);
  }
}

}  // namespace

ChannelRealization draw_realization(Rng& rng, const Geometry& geometry,
                                    const ChannelConfig& cfg) {
  if (geometry.num_nodes() != cfg.num_nodes) {
    throw std::invalid_argument(
        "draw_realization: geometry has " +
        std::to_string(geometry.num_nodes()) + " nodes, config expects " +
        std::to_string(cfg.num_nodes));
  }
  if (cfg.num_antennas < 1 || cfg.num_nodes < 1) {
    throw std::invalid_argument("draw_realization: N and K must be >= 1");
  }
  if (!(cfg.sigma_s_sq > 0.0) || !(cfg.sigma_k_sq > 0.0) ||
      !(cfg.node_power > 0.0) || !(cfg.server_power > 0.0)) {
    throw std::invalid_argument(
        "draw_realization: noise powers and power budgets must be positive");
  }

  const int n = cfg.num_antennas;
  const int k = cfg.num_nodes;
  ChannelRealization out;
  out.H.resize(n, k);
  out.Q.resize(n, k);
  out.sigma_s_sq = cfg.sigma_s_sq;
  out.sigma_k_sq = Eigen::VectorXd::Constant(k, cfg.sigma_k_sq);
  out.node_power = Eigen::VectorXd::Constant(k, cfg.node_power);
  out.server_power = cfg.server_power;

  Eigen::VectorXd gain(k);
  for (int j = 0; j < k; ++j) {
    const double d = geometry.distance_to_server(j);
    gain(j) = std::sqrt(path_loss(d, cfg.c0, cfg.gamma0, cfg.kappa));
  }
  for (int j = 0; j < k; ++j) {
    fill_faded_column(rng, gain(j), cfg.rician_chi, out.H, j);
  }
  if (cfg.reciprocal) {
    out.Q = out.H;
  } else {
    for (int j = 0; j < k; ++j) {
      fill_faded_column(rng, gain(j), cfg.rician_chi, out.Q, j);
    }
  }
  return out;
}

}  // namespace airfl
