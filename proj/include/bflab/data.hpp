#pragma once

// Labeled batches, a synthetic Gaussian-blob dataset for fast experiments,
// and an IDX image/label loader.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bflab/model.hpp"
#include "bflab/rng.hpp"
#include "bflab/tensor.hpp"

namespace bflab {

struct LabeledBatch {
  Tensor inputs;            // [B, ...sample shape]
  std::vector<int> labels;  // length B

  int size() const { return inputs.shape.empty() ? 0 : inputs.shape[0]; }

  bool empty() const { return size() == 0; }
};

inline LabeledBatch empty_batch(const std::vector<int>& sample_shape) {
  std::vector<int> s;
  s.push_back(0);
  s.insert(s.end(), sample_shape.begin(), sample_shape.end());
  LabeledBatch b;
  b.inputs.shape = s;
  return b;
}

inline void append_sample(LabeledBatch& b, const double* sample, std::size_t n, int label) {
  b.inputs.data.insert(b.inputs.data.end(), sample, sample + n);
  b.inputs.shape[0] += 1;
  b.labels.push_back(label);
}

// Rows of `src` listed in `idx`, in that order.
inline LabeledBatch subset(const LabeledBatch& src, const std::vector<int>& idx) {
  std::vector<int> sample(src.inputs.shape.begin() + 1, src.inputs.shape.end());
  std::size_t n = numel_of(sample.empty() ? std::vector<int>{1} : sample);
  if (sample.empty()) n = 1;
  LabeledBatch out = empty_batch(sample);
  for (int i : idx) {
    if (i < 0 || i >= src.size()) throw std::out_of_range("subset: row index out of range");
    append_sample(out, &src.inputs.data[static_cast<std::size_t>(i) * n], n, src.labels[i]);
  }
  return out;
}

inline std::vector<int> rows_with_label(const LabeledBatch& b, int label) {
  std::vector<int> idx;
  for (int i = 0; i < b.size(); ++i)
    if (b.labels[i] == label) idx.push_back(i);
  return idx;
}

struct BlobConfig {
  int classes = 10;
  std::vector<int> sample_shape = {16};
  int train_per_class = 200;
  int test_per_class = 100;
  double spread = 0.30;  // per-dimension noise around the class mean
  std::uint64_t seed = 1;
};

struct Dataset {
  LabeledBatch train;
  LabeledBatch test;
  int classes = 0;
};

// Isotropic Gaussian clusters with class means drawn uniformly from
// [-1,1]^D. Same seed, same bytes, regardless of platform.
inline Dataset make_blobs(const BlobConfig& cfg) {
  if (cfg.classes < 2) throw std::invalid_argument("make_blobs: need at least 2 classes");
  if (cfg.train_per_class <= 0 || cfg.test_per_class <= 0)
    throw std::invalid_argument("make_blobs: per-class counts must be positive");
  std::size_t dim = numel_of(cfg.sample_shape);
  Rng rng(cfg.seed);

  std::vector<std::vector<double>> means(cfg.classes, std::vector<double>(dim));
  for (auto& m : means)
    for (double& v : m) v = rng.uniform(-1.0, 1.0);

  auto draw = [&](LabeledBatch& out, int per_class) {
    std::vector<double> buf(dim);
    for (int c = 0; c < cfg.classes; ++c)
      for (int s = 0; s < per_class; ++s) {
        for (std::size_t d = 0; d < dim; ++d) buf[d] = means[c][d] + cfg.spread * rng.normal();
        append_sample(out, buf.data(), dim, c);
      }
  };

  Dataset ds;
  ds.classes = cfg.classes;
  ds.train = empty_batch(cfg.sample_shape);
  ds.test = empty_batch(cfg.sample_shape);
  draw(ds.train, cfg.train_per_class);
  draw(ds.test, cfg.test_per_class);

  auto shuffle_rows = [&](LabeledBatch& b) {
    std::vector<int> order(static_cast<std::size_t>(b.size()));
    for (int i = 0; i < b.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    b = subset(b, order);
  };
  shuffle_rows(ds.train);
  shuffle_rows(ds.test);
  return ds;
}

namespace detail {

inline std::uint32_t read_be32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("idx: truncated header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace detail

// IDX-format images + labels (the MNIST container). Pixels are scaled to
// [0,1] and shaped [count, 1, rows, cols].
inline LabeledBatch load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("idx: cannot open " + images_path);
  if (detail::read_be32(img) != 0x00000803u)
    throw std::runtime_error("idx: bad image magic in " + images_path);
  std::uint32_t count = detail::read_be32(img);
  std::uint32_t rows = detail::read_be32(img);
  std::uint32_t cols = detail::read_be32(img);

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("idx: cannot open " + labels_path);
  if (detail::read_be32(lab) != 0x00000801u)
    throw std::runtime_error("idx: bad label magic in " + labels_path);
  if (detail::read_be32(lab) != count)
    throw std::runtime_error("idx: image/label counts disagree");

  LabeledBatch out;
  out.inputs.shape = {static_cast<int>(count), 1, static_cast<int>(rows), static_cast<int>(cols)};
  std::size_t pixels = static_cast<std::size_t>(count) * rows * cols;
  out.inputs.data.resize(pixels);
  std::vector<unsigned char> raw(pixels);
  img.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(pixels));
  if (!img) throw std::runtime_error("idx: truncated image payload");
  for (std::size_t i = 0; i < pixels; ++i) out.inputs.data[i] = raw[i] / 255.0;

  std::vector<unsigned char> lraw(count);
  lab.read(reinterpret_cast<char*>(lraw.data()), static_cast<std::streamsize>(count));
  if (!lab) throw std::runtime_error("idx: truncated label payload");
  out.labels.assign(lraw.begin(), lraw.end());
  return out;
}

}  // namespace bflab
