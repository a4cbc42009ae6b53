#pragma once

#include <Eigen/Dense>
#include <vector>

namespace airfl {

/// Per-round gradient statistics: the raw local gradients, their first/second
/// order statistics, and the empirical symbol correlation matrix.
struct GradientBatch {
  Eigen::MatrixXd g;       // K x d local gradients
  Eigen::VectorXd g_bar;   // K per-node means
  Eigen::VectorXd delta;   // K per-node standard deviations (0 when degenerate)
  std::vector<bool> degenerate;  // delta below threshold: node transmits zeros
  Eigen::MatrixXd S;       // K x K empirical symbol correlation (1/d) sum s_i s_i^T
  double c = 0.0;          // delta^T S delta, >= 0

  int num_nodes() const { return static_cast<int>(g.rows()); }
  int dim() const { return static_cast<int>(g.cols()); }
};

struct NormalizedGradients {
  Eigen::MatrixXd symbols;  // K x d zero-mean unit-variance rows
  GradientBatch stats;
};

/// Normalizes each gradient row to zero-mean unit-variance symbols using
/// population statistics over the d entries. Rows whose deviation falls
/// below 1e-12 * max(1, ||g_k||_inf) are flagged degenerate; their symbols
/// are all zeros and their stored delta is exactly 0. Requires d >= 2.
NormalizedGradients normalize(const Eigen::MatrixXd& gradients);

/// (received + sum(g_bar)) / K, entrywise; the complex-valued estimate a
/// node holds before taking the real part.
Eigen::VectorXcd denormalize_complex(const Eigen::VectorXcd& received,
                                     const Eigen::VectorXd& g_bar);

/// Real part of denormalize_complex: the global-gradient estimate that the
/// model update consumes. The discarded imaginary part carries half the
/// complex noise energy, so the real-part error variance is half of the
/// complex one.
Eigen::VectorXd denormalize(const Eigen::VectorXcd& received,
                            const Eigen::VectorXd& g_bar);

}  // namespace airfl
