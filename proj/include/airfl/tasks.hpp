#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "airfl/data_io.hpp"

namespace airfl {

/// A distributed learning problem: K equally sized shards, full-batch local
/// gradients, and a global loss that is the average of the local ones.
class TrainingTask {
 public:
  virtual ~TrainingTask() = default;
  virtual int dim() const = 0;
  virtual int num_nodes() const = 0;
  /// Full-batch gradient of node's local loss at theta. Throws on an empty
  /// shard.
  virtual Eigen::VectorXd local_gradient(int node,
                                         const Eigen::VectorXd& theta) const = 0;
  virtual double global_loss(const Eigen::VectorXd& theta) const = 0;
  /// Held-out metric: classification accuracy in [0,1], or NaN when the task
  /// has no test split.
  virtual double test_metric(const Eigen::VectorXd& theta) const = 0;
};

/// Multinomial logistic regression, 784 inputs x 10 classes, no bias,
/// softmax cross-entropy. Parameters are stored column-major: theta block c
/// (entries c*784 .. c*784+783) is the weight vector of class c.
class LogisticTask final : public TrainingTask {
 public:
  LogisticTask(std::shared_ptr<const LabeledDataset> train,
               std::shared_ptr<const LabeledDataset> test,
               std::vector<Shard> shards);

  int dim() const override { return feature_dim_ * kClasses; }
  int num_nodes() const override { return static_cast<int>(shards_.size()); }
  Eigen::VectorXd local_gradient(int node,
                                 const Eigen::VectorXd& theta) const override;
  double global_loss(const Eigen::VectorXd& theta) const override;
  double test_metric(const Eigen::VectorXd& theta) const override;

  static constexpr int kClasses = 10;

 private:
  // Mean cross-entropy and optional gradient over a block of rows.
  double loss_and_grad(const Eigen::MatrixXd& features,
                       const std::vector<int>& labels,
                       const Eigen::VectorXd& theta,
                       Eigen::VectorXd* grad) const;

  std::shared_ptr<const LabeledDataset> train_;
  std::shared_ptr<const LabeledDataset> test_;
  std::vector<Shard> shards_;
  std::vector<Eigen::MatrixXd> shard_features_;  // cached per-node rows
  std::vector<std::vector<int>> shard_labels_;
  int feature_dim_ = 0;
};

/// Synthetic ridge regression with known curvature: local loss of node k is
/// (1/2D) ||A_k theta - y_k||^2 + (ridge/2) ||theta||^2. The global Hessian
/// A^T A / (K D) + ridge I gives exact strong-convexity and smoothness
/// constants and a closed-form optimum, which is what makes this task usable
/// for validating convergence bounds.
class RidgeTask final : public TrainingTask {
 public:
  RidgeTask(Eigen::MatrixXd design_matrix, Eigen::VectorXd targets,
            double ridge_weight, int num_nodes);

  /// Random well-conditioned instance: Gaussian design matrix, targets from
  /// a planted parameter vector plus noise.
  static RidgeTask random(int num_nodes, int shard_size, int dim,
                          double ridge_weight, std::uint64_t seed);

  int dim() const override { return static_cast<int>(design_.cols()); }
  int num_nodes() const override { return num_nodes_; }
  Eigen::VectorXd local_gradient(int node,
                                 const Eigen::VectorXd& theta) const override;
  double global_loss(const Eigen::VectorXd& theta) const override;
  double test_metric(const Eigen::VectorXd&) const override;

  double strong_convexity() const { return mu_; }   // min Hessian eigenvalue
  double smoothness() const { return rho_; }        // max Hessian eigenvalue
  double contraction() const { return 1.0 - mu_ / rho_; }
  double optimal_loss() const { return optimal_loss_; }
  const Eigen::VectorXd& optimum() const { return optimum_; }

 private:
  Eigen::MatrixXd design_;
  Eigen::VectorXd targets_;
  double ridge_ = 0.0;
  int num_nodes_ = 0;
  int shard_size_ = 0;
  double mu_ = 0.0;
  double rho_ = 0.0;
  Eigen::VectorXd optimum_;
  double optimal_loss_ = 0.0;
};

}  // namespace airfl
