#include "airfl/gradient_codec.hpp"

#include <cmath>
#include <stdexcept>

namespace airfl {

NormalizedGradients normalize(const Eigen::MatrixXd& gradients) {
  const int k = static_cast<int>(gradients.rows());
  const int d = static_cast<int>(gradients.cols());
  if (k < 1) throw std::invalid_argument("normalize: need at least one row");
  if (d < 2) throw std::invalid_argument("normalize: need dimension >= 2");
  if (!gradients.allFinite()) {
    throw std::invalid_argument("normalize: gradients contain NaN/Inf");
  }

  NormalizedGradients out;
  out.stats.g = gradients;
  out.stats.g_bar.resize(k);
  out.stats.delta.resize(k);
  out.stats.degenerate.assign(static_cast<std::size_t>(k), false);
  out.symbols.resize(k, d);

  for (int row = 0; row < k; ++row) {
    const double mean = gradients.row(row).mean();
    const Eigen::RowVectorXd centered =
        gradients.row(row).array() - mean;
    const double variance = centered.squaredNorm() / d;  // population variance
    const double deviation = std::sqrt(variance);
    const double eps =
        1e-12 * std::max(1.0, gradients.row(row).cwiseAbs().maxCoeff());
    out.stats.g_bar(row) = mean;
    if (deviation < eps) {
      // Constant gradient row: nothing to transmit, mean still enters the
      // denormalization sum.
      out.stats.degenerate[static_cast<std::size_t>(row)] = true;
      out.stats.delta(row) = 0.0;
      out.symbols.row(row).setZero();
    } else {
      out.stats.delta(row) = deviation;
      out.symbols.row(row) = centered / deviation;
    }
  }

  out.stats.S = (out.symbols * out.symbols.transpose()) / d;
  out.stats.c = out.stats.delta.dot(out.stats.S * out.stats.delta);
  return out;
}

Eigen::VectorXcd denormalize_complex(const Eigen::VectorXcd& received,
                                     const Eigen::VectorXd& g_bar) {
  const int k = static_cast<int>(g_bar.size());
  if (k < 1) throw std::invalid_argument("denormalize: empty g_bar");
  const double mean_sum = g_bar.sum();
  return (received.array() + mean_sum) / static_cast<double>(k);
}

Eigen::VectorXd denormalize(const Eigen::VectorXcd& received,
                            const Eigen::VectorXd& g_bar) {
  return denormalize_complex(received, g_bar).real();
}

}  // namespace airfl
