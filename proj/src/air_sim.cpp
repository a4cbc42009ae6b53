#include "airfl/air_sim.hpp"

#include <cmath>
#include <stdexcept>

namespace airfl {

RoundTransmission transmit_round(const Eigen::MatrixXd& symbols,
                                 const GradientBatch& stats,
                                 const TransceiverDesign& design,
                                 const ChannelRealization& channel, Rng& rng,
                                 double noise_scale) {
  const int k = channel.num_nodes();
  const int n = channel.num_antennas();
  const int d = static_cast<int>(symbols.cols());
  if (symbols.rows() != k || stats.g.rows() != k || stats.g.cols() != d) {
    throw std::invalid_argument("transmit_round: dimension mismatch");
  }
  if (design.num_nodes() != k || design.num_antennas() != n) {
    throw std::invalid_argument("transmit_round: design does not fit channel");
  }

  // Uplink superposition: column i is sum_k h_k b_k s_{k,i} + n_i.
  Eigen::MatrixXcd received =
      channel.H * (design.b.asDiagonal() * symbols.cast<std::complex<double>>());
  const double server_noise_std = noise_scale * std::sqrt(channel.sigma_s_sq);
  if (server_noise_std > 0.0) {
    for (int i = 0; i < d; ++i) {
      for (int ant = 0; ant < n; ++ant) {
        received(ant, i) += server_noise_std * rng.complex_normal();
      }
    }
  }

  // Forwarding and broadcast.
  const Eigen::MatrixXcd broadcast = design.M * received;

  RoundTransmission out;
  out.measured_server_power = broadcast.squaredNorm() / d;
  out.measured_node_power.resize(k);
  for (int j = 0; j < k; ++j) {
    out.measured_node_power(j) =
        std::norm(design.b(j)) * symbols.row(j).squaredNorm() / d;
  }

  // Per-node reception, equalization, and denormalization.
  const Eigen::RowVectorXd truth = stats.g.colwise().mean();
  out.received_z.resize(k, d);
  out.error.resize(k, d);
  for (int j = 0; j < k; ++j) {
    Eigen::RowVectorXcd equalized =
        design.a(j) * (channel.Q.col(j).adjoint() * broadcast);
    const double node_noise_std =
        noise_scale * std::sqrt(channel.sigma_k_sq(j));
    if (node_noise_std > 0.0) {
      for (int i = 0; i < d; ++i) {
        equalized(i) += design.a(j) * (node_noise_std * rng.complex_normal());
      }
    }
    out.received_z.row(j) =
        denormalize_complex(equalized.transpose(), stats.g_bar).transpose();
    out.error.row(j) =
        out.received_z.row(j) - truth.cast<std::complex<double>>();
  }
  return out;
}

ForcingAudit audit_uniform_forcing(const TransceiverDesign& design,
                                   const ChannelRealization& channel,
                                   const Eigen::VectorXd& delta) {
  const int k = channel.num_nodes();
  if (delta.size() != k) {
    throw std::invalid_argument("audit_uniform_forcing: delta size mismatch");
  }
  ForcingAudit audit;
  audit.residual = Eigen::MatrixXd::Zero(k, k);
  audit.degenerate_column.assign(static_cast<std::size_t>(k), false);

  for (int col = 0; col < k; ++col) {
    if (!(delta(col) > 0.0)) {
      audit.degenerate_column[static_cast<std::size_t>(col)] = true;
      continue;  // column stays exactly zero
    }
    const Eigen::VectorXcd forwarded =
        design.M * channel.H.col(col) * (design.b(col) / delta(col));
    for (int row = 0; row < k; ++row) {
      const std::complex<double> gain =
          design.a(row) * (channel.Q.col(row).adjoint() * forwarded)(0);
      audit.residual(row, col) = std::abs(gain - 1.0);
    }
  }
  audit.max_residual = audit.residual.maxCoeff();
  return audit;
}

}  // namespace airfl
