#include "airfl/tasks.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "airfl/rng.hpp"

namespace airfl {

LogisticTask::LogisticTask(std::shared_ptr<const LabeledDataset> train,
                           std::shared_ptr<const LabeledDataset> test,
                           std::vector<Shard> shards)
    : train_(std::move(train)),
      test_(std::move(test)),
      shards_(std::move(shards)) {
  if (!train_ || train_->size() == 0) {
    throw std::invalid_argument("LogisticTask: empty training set");
  }
  feature_dim_ = train_->feature_dim();
  shard_features_.reserve(shards_.size());
  shard_labels_.reserve(shards_.size());
  for (const Shard& shard : shards_) {
    if (shard.empty()) {
      throw std::invalid_argument("LogisticTask: empty shard");
    }
    Eigen::MatrixXd rows(static_cast<int>(shard.size()), feature_dim_);
    std::vector<int> labels;
    labels.reserve(shard.size());
    for (std::size_t i = 0; i < shard.size(); ++i) {
      rows.row(static_cast<int>(i)) = train_->features.row(shard[i]);
      labels.push_back(train_->labels[static_cast<std::size_t>(shard[i])]);
    }
    shard_features_.push_back(std::move(rows));
    shard_labels_.push_back(std::move(labels));
  }
}

double LogisticTask::loss_and_grad(const Eigen::MatrixXd& features,
                                   const std::vector<int>& labels,
                                   const Eigen::VectorXd& theta,
                                   Eigen::VectorXd* grad) const {
  const int n = static_cast<int>(features.rows());
  const Eigen::Map<const Eigen::MatrixXd> weights(theta.data(), feature_dim_,
                                                  kClasses);
  Eigen::MatrixXd logits = features * weights;  // n x 10

  // Row-wise stable softmax.
  Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  logits.colwise() -= row_max;
  Eigen::MatrixXd probs = logits.array().exp();
  Eigen::VectorXd norms = probs.rowwise().sum();
  probs.array().colwise() /= norms.array();

  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    loss -= logits(i, label) - std::log(norms(i));
  }
  loss /= n;

  if (grad != nullptr) {
    for (int i = 0; i < n; ++i) {
      probs(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    }
    Eigen::MatrixXd grad_mat = features.transpose() * probs / n;  // 784 x 10
    *grad = Eigen::Map<Eigen::VectorXd>(grad_mat.data(), dim());
  }
  return loss;
}

Eigen::VectorXd LogisticTask::local_gradient(int node,
                                             const Eigen::VectorXd& theta) const {
  if (node < 0 || node >= num_nodes()) {
    throw std::out_of_range("LogisticTask: node index");
  }
  Eigen::VectorXd grad;
  loss_and_grad(shard_features_[static_cast<std::size_t>(node)],
                shard_labels_[static_cast<std::size_t>(node)], theta, &grad);
  return grad;
}

double LogisticTask::global_loss(const Eigen::VectorXd& theta) const {
  double total = 0.0;
  for (int node = 0; node < num_nodes(); ++node) {
    total += loss_and_grad(shard_features_[static_cast<std::size_t>(node)],
                           shard_labels_[static_cast<std::size_t>(node)],
                           theta, nullptr);
  }
  return total / num_nodes();
}

double LogisticTask::test_metric(const Eigen::VectorXd& theta) const {
  if (!test_ || test_->size() == 0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const Eigen::Map<const Eigen::MatrixXd> weights(theta.data(), feature_dim_,
                                                  kClasses);
  const Eigen::MatrixXd logits = test_->features * weights;
  int correct = 0;
  for (int i = 0; i < test_->size(); ++i) {
    int arg = 0;
    logits.row(i).maxCoeff(&arg);
    if (arg == test_->labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / test_->size();
}

RidgeTask::RidgeTask(Eigen::MatrixXd design_matrix, Eigen::VectorXd targets,
                     double ridge_weight, int num_nodes)
    : design_(std::move(design_matrix)),
      targets_(std::move(targets)),
      ridge_(ridge_weight),
      num_nodes_(num_nodes) {
  const int total = static_cast<int>(design_.rows());
  if (num_nodes_ < 1 || total % num_nodes_ != 0) {
    throw std::invalid_argument(
        "RidgeTask: sample count must split evenly across nodes");
  }
  if (targets_.size() != total) {
    throw std::invalid_argument("RidgeTask: target size mismatch");
  }
  if (!(ridge_ > 0.0)) {
    throw std::invalid_argument("RidgeTask: ridge weight must be positive");
  }
  shard_size_ = total / num_nodes_;

  const Eigen::MatrixXd hessian =
      design_.transpose() * design_ / total +
      ridge_ * Eigen::MatrixXd::Identity(dim(), dim());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian);
  mu_ = eig.eigenvalues().minCoeff();
  rho_ = eig.eigenvalues().maxCoeff();
  optimum_ = hessian.ldlt().solve(design_.transpose() * targets_ / total);
  optimal_loss_ = global_loss(optimum_);
}

RidgeTask RidgeTask::random(int num_nodes, int shard_size, int dim,
                            double ridge_weight, std::uint64_t seed) {
  Rng rng(seed);
  const int total = num_nodes * shard_size;
  Eigen::MatrixXd design(total, dim);
  for (int i = 0; i < total; ++i) {
    for (int j = 0; j < dim; ++j) design(i, j) = rng.normal();
  }
  Eigen::VectorXd planted(dim);
  for (int j = 0; j < dim; ++j) planted(j) = rng.normal();
  Eigen::VectorXd targets = design * planted;
  for (int i = 0; i < total; ++i) targets(i) += 0.1 * rng.normal();
  return RidgeTask(std::move(design), std::move(targets), ridge_weight,
                   num_nodes);
}

Eigen::VectorXd RidgeTask::local_gradient(int node,
                                          const Eigen::VectorXd& theta) const {
  if (node < 0 || node >= num_nodes_) {
    throw std::out_of_range("RidgeTask: node index");
  }
  const auto rows = design_.middleRows(node * shard_size_, shard_size_);
  const auto y = targets_.segment(node * shard_size_, shard_size_);
  return rows.transpose() * (rows * theta - y) / shard_size_ + ridge_ * theta;
}

double RidgeTask::global_loss(const Eigen::VectorXd& theta) const {
  const double fit =
      (design_ * theta - targets_).squaredNorm() / (2.0 * design_.rows());
  return fit + 0.5 * ridge_ * theta.squaredNorm();
}

double RidgeTask::test_metric(const Eigen::VectorXd&) const {
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace airfl
