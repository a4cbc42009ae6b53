#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "airfl/rng.hpp"

namespace airfl {

/// Image classification dataset: features scaled to [0,1], labels 0..9.
struct LabeledDataset {
  Eigen::MatrixXd features;  // samples x 784
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
};

/// Sample indices assigned to one node.
using Shard = std::vector<int>;

/// Parses a big-endian IDX image/label file pair. Expects magic 0x00000803
/// with dims [n, 28, 28] for images and 0x00000801 with dims [n] for labels;
/// pixel bytes are scaled by 1/255 and flattened row-major to 784 entries.
/// Throws std::runtime_error naming the byte offset for a wrong magic, on
/// truncation, or when image and label counts disagree.
LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path);

/// Writes the dataset back out in the same IDX format (28x28 assumed).
void write_idx(const LabeledDataset& dataset, const std::string& images_path,
               const std::string& labels_path);

/// Label-sorted contiguous sharding: samples are stably sorted by
/// (label, original index), the first K*D are sliced into K shards of
/// exactly D samples. Each shard's label support is narrow, which is what
/// makes the split non-IID. The generator argument is reserved for an
/// optional shuffle-within-label step and is unused by default.
std::vector<Shard> shard_non_iid(const LabeledDataset& dataset, int num_nodes,
                                 int shard_size, Rng& rng,
                                 bool shuffle_within_label = false);

/// Deterministic digit-like stand-in dataset with genuine MNIST shapes,
/// for environments where the real files are unavailable. Ten fixed
/// class templates (smoothed random blobs) with per-sample translation,
/// amplitude jitter, and pixel noise; labels are balanced.
LabeledDataset make_synthetic_digits(int num_samples, std::uint64_t seed);

}  // namespace airfl
