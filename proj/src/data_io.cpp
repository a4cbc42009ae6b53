#include "airfl/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace airfl {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;
constexpr int kSide = 28;
constexpr int kPixels = kSide * kSide;

std::uint32_t read_u32_be(std::ifstream& in, const std::string& path,
                          std::size_t offset) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw std::runtime_error(path + ": truncated at byte offset " +
                             std::to_string(offset));
  }
  return (static_cast<std::uint32_t>(bytes[0]) << 24) |
         (static_cast<std::uint32_t>(bytes[1]) << 16) |
         (static_cast<std::uint32_t>(bytes[2]) << 8) |
         static_cast<std::uint32_t>(bytes[3]);
}

void write_u32_be(std::ofstream& out, std::uint32_t value) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>((value >> 24) & 0xFF),
      static_cast<unsigned char>((value >> 16) & 0xFF),
      static_cast<unsigned char>((value >> 8) & 0xFF),
      static_cast<unsigned char>(value & 0xFF)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path) {
  std::ifstream images(images_path, std::ios::binary);
  if (!images) throw std::runtime_error("cannot open " + images_path);
  std::ifstream labels(labels_path, std::ios::binary);
  if (!labels) throw std::runtime_error("cannot open " + labels_path);

  const std::uint32_t image_magic = read_u32_be(images, images_path, 0);
  if (image_magic != kImagesMagic) {
    throw std::runtime_error(images_path + ": bad magic 0x" +
                             [&] {
                               char buf[16];
                               std::snprintf(buf, sizeof(buf), "%08x",
                                             image_magic);
                               return std::string(buf);
                             }() +
                             " at byte offset 0 (expected 0x00000803)");
  }
  const std::uint32_t num_images = read_u32_be(images, images_path, 4);
  const std::uint32_t rows = read_u32_be(images, images_path, 8);
  const std::uint32_t cols = read_u32_be(images, images_path, 12);
  if (rows != kSide || cols != kSide) {
    throw std::runtime_error(images_path + ": expected 28x28 images, got " +
                             std::to_string(rows) + "x" + std::to_string(cols));
  }

  const std::uint32_t label_magic = read_u32_be(labels, labels_path, 0);
  if (label_magic != kLabelsMagic) {
    throw std::runtime_error(labels_path + ": bad magic 0x" +
                             [&] {
                               char buf[16];
                               std::snprintf(buf, sizeof(buf), "%08x",
                                             label_magic);
                               return std::string(buf);
                             }() +
                             " at byte offset 0 (expected 0x00000801)");
  }
  const std::uint32_t num_labels = read_u32_be(labels, labels_path, 4);
  if (num_images != num_labels) {
    throw std::runtime_error("image count " + std::to_string(num_images) +
                             " does not match label count " +
                             std::to_string(num_labels));
  }

  LabeledDataset out;
  out.features.resize(num_images, kPixels);
  out.labels.resize(num_images);

  std::vector<unsigned char> pixel_buf(kPixels);
  for (std::uint32_t i = 0; i < num_images; ++i) {
    if (!images.read(reinterpret_cast<char*>(pixel_buf.data()), kPixels)) {
      throw std::runtime_error(images_path + ": truncated at byte offset " +
                               std::to_string(16 + std::size_t(i) * kPixels));
    }
    for (int p = 0; p < kPixels; ++p) {
      out.features(i, p) = pixel_buf[static_cast<std::size_t>(p)] / 255.0;
    }
    unsigned char lab;
    if (!labels.read(reinterpret_cast<char*>(&lab), 1)) {
      throw std::runtime_error(labels_path + ": truncated at byte offset " +
                               std::to_string(8 + std::size_t(i)));
    }
    if (lab > 9) {
      throw std::runtime_error(labels_path + ": label " + std::to_string(lab) +
                               " out of range at sample " + std::to_string(i));
    }
    out.labels[i] = lab;
  }
  return out;
}

void write_idx(const LabeledDataset& dataset, const std::string& images_path,
               const std::string& labels_path) {
  if (dataset.feature_dim() != kPixels) {
    throw std::invalid_argument("write_idx: expects 784 features per sample");
  }
  std::ofstream images(images_path, std::ios::binary);
  if (!images) throw std::runtime_error("cannot write " + images_path);
  std::ofstream labels(labels_path, std::ios::binary);
  if (!labels) throw std::runtime_error("cannot write " + labels_path);

  const auto n = static_cast<std::uint32_t>(dataset.size());
  write_u32_be(images, kImagesMagic);
  write_u32_be(images, n);
  write_u32_be(images, kSide);
  write_u32_be(images, kSide);
  write_u32_be(labels, kLabelsMagic);
  write_u32_be(labels, n);

  std::vector<unsigned char> pixel_buf(kPixels);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (int p = 0; p < kPixels; ++p) {
      const double clamped = std::clamp(dataset.features(i, p), 0.0, 1.0);
      pixel_buf[static_cast<std::size_t>(p)] =
          static_cast<unsigned char>(std::lround(clamped * 255.0));
    }
    images.write(reinterpret_cast<const char*>(pixel_buf.data()), kPixels);
    const auto lab = static_cast<unsigned char>(dataset.labels[i]);
    labels.write(reinterpret_cast<const char*>(&lab), 1);
  }
}

std::vector<Shard> shard_non_iid(const LabeledDataset& dataset, int num_nodes,
                                 int shard_size, Rng& rng,
                                 bool shuffle_within_label) {
  if (num_nodes < 1 || shard_size < 1) {
    throw std::invalid_argument("shard_non_iid: need positive K and D");
  }
  const long needed = static_cast<long>(num_nodes) * shard_size;
  if (needed > dataset.size()) {
    throw std::invalid_argument(
        "shard_non_iid: need " + std::to_string(needed) + " samples, have " +
        std::to_string(dataset.size()));
  }

  std::vector<int> order(static_cast<std::size_t>(dataset.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dataset.labels[static_cast<std::size_t>(a)] <
           dataset.labels[static_cast<std::size_t>(b)];
  });

  if (shuffle_within_label) {
    // Fisher-Yates inside each label run; keeps the label blocks intact.
    std::size_t start = 0;
    while (start < order.size()) {
      std::size_t stop = start + 1;
      while (stop < order.size() &&
             dataset.labels[static_cast<std::size_t>(order[stop])] ==
                 dataset.labels[static_cast<std::size_t>(order[start])]) {
        ++stop;
      }
      for (std::size_t i = stop - 1; i > start; --i) {
        const std::size_t j =
            start + static_cast<std::size_t>(rng.uniform() *
                                             static_cast<double>(i - start + 1));
        std::swap(order[i], order[std::min(j, i)]);
      }
      start = stop;
    }
  }

  std::vector<Shard> shards(static_cast<std::size_t>(num_nodes));
  for (int node = 0; node < num_nodes; ++node) {
    auto& shard = shards[static_cast<std::size_t>(node)];
    shard.assign(order.begin() + static_cast<long>(node) * shard_size,
                 order.begin() + static_cast<long>(node + 1) * shard_size);
  }
  return shards;
}

LabeledDataset make_synthetic_digits(int num_samples, std::uint64_t seed) {
  if (num_samples < 1) {
    throw std::invalid_argument("make_synthetic_digits: need num_samples >= 1");
  }
  constexpr int kCoarse = 7;
  constexpr int kClasses = 10;

  // Class templates: coarse random grids upsampled bilinearly. A fixed
  // template seed keeps classes consistent across train/test splits.
  Rng template_rng(Rng::derive_seed(0xA1FDA7A5E7ULL, 0));
  std::vector<Eigen::MatrixXd> templates;
  templates.reserve(kClasses);
  for (int cls = 0; cls < kClasses; ++cls) {
    Eigen::MatrixXd coarse(kCoarse, kCoarse);
    for (int r = 0; r < kCoarse; ++r) {
      for (int col = 0; col < kCoarse; ++col) {
        coarse(r, col) = template_rng.uniform();
      }
    }
    Eigen::MatrixXd fine(kSide, kSide);
    for (int r = 0; r < kSide; ++r) {
      for (int col = 0; col < kSide; ++col) {
        const double fr = r * (kCoarse - 1.0) / (kSide - 1.0);
        const double fc = col * (kCoarse - 1.0) / (kSide - 1.0);
        const int r0 = static_cast<int>(fr);
        const int c0 = static_cast<int>(fc);
        const int r1 = std::min(r0 + 1, kCoarse - 1);
        const int c1 = std::min(c0 + 1, kCoarse - 1);
        const double ar = fr - r0;
        const double ac = fc - c0;
        fine(r, col) = (1 - ar) * (1 - ac) * coarse(r0, c0) +
                       (1 - ar) * ac * coarse(r0, c1) +
                       ar * (1 - ac) * coarse(r1, c0) +
                       ar * ac * coarse(r1, c1);
      }
    }
    templates.push_back(fine);
  }

  Rng rng(seed);
  LabeledDataset out;
  out.features.resize(num_samples, kPixels);
  out.labels.resize(static_cast<std::size_t>(num_samples));
  for (int i = 0; i < num_samples; ++i) {
    const int cls = i % kClasses;
    out.labels[static_cast<std::size_t>(i)] = cls;
    const int dx = static_cast<int>(rng.uniform() * 5.0) - 2;
    const int dy = static_cast<int>(rng.uniform() * 5.0) - 2;
    const double amplitude = 0.7 + 0.3 * rng.uniform();
    const Eigen::MatrixXd& tpl = templates[static_cast<std::size_t>(cls)];
    for (int r = 0; r < kSide; ++r) {
      for (int col = 0; col < kSide; ++col) {
        const int sr = std::clamp(r + dy, 0, kSide - 1);
        const int sc = std::clamp(col + dx, 0, kSide - 1);
        const double noise = 0.15 * rng.normal();
        out.features(i, r * kSide + col) =
            std::clamp(amplitude * tpl(sr, sc) + noise, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace airfl
