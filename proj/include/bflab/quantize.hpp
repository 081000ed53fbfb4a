#pragma once

// Symmetric per-layer N-bit weight quantization. Each parameterized layer
// stores signed integer codes plus one step size; the embedded Model keeps
// the dequantized weights (code * delta_w) so forward/backward run unchanged
// and weight gradients pass straight through the rounding.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bflab/model.hpp"

namespace bflab {

struct QuantConfig {
  int n_bits = 8;
};

// Largest magnitude representable on the symmetric grid: 2^(N-1) - 1.
inline int max_code(int n_bits) {
  if (n_bits < 2 || n_bits > 8) throw std::invalid_argument("n_bits must be in [2,8]");
  return (1 << (n_bits - 1)) - 1;
}

// Step size covering the layer's full weight range. A layer of all zeros
// gets step 1.0 so downstream arithmetic stays finite.
inline double compute_step_size(const Tensor& weights, int n_bits) {
  int mc = max_code(n_bits);
  double mx = 0.0;
  for (double w : weights.data) mx = std::max(mx, std::abs(w));
  if (mx == 0.0) return 1.0;
  return mx / mc;
}

struct QuantizedLayer {
  std::vector<std::int8_t> codes;  // two's-complement values in [-(2^(N-1)-1), 2^(N-1)-1]
  std::vector<int> shape;
  double delta_w = 1.0;
  int n_bits = 8;

  std::size_t size() const { return codes.size(); }

  double dequant(std::size_t i) const { return codes[i] * delta_w; }
};

inline QuantizedLayer quantize_layer(const Tensor& weights, const QuantConfig& cfg) {
  QuantizedLayer q;
  q.n_bits = cfg.n_bits;
  q.shape = weights.shape;
  q.delta_w = compute_step_size(weights, cfg.n_bits);
  int mc = max_code(cfg.n_bits);
  q.codes.resize(weights.data.size());
  for (std::size_t i = 0; i < weights.data.size(); ++i) {
    double c = std::round(weights.data[i] / q.delta_w);
    if (c > mc) c = mc;
    if (c < -mc) c = -mc;
    q.codes[i] = static_cast<std::int8_t>(c);
  }
  return q;
}

// A model plus the integer codes backing each parameterized layer.
// Invariant: model.layers[param_index[i]].weight.data[j] == layers[i].dequant(j).
struct QuantizedModel {
  Model model;
  std::vector<QuantizedLayer> layers;
  std::vector<int> param_index;  // layers[i] quantizes model.layers[param_index[i]]

  int n_bits() const { return layers.empty() ? 0 : layers.front().n_bits; }

  // Rewrites the dequantized weight behind one code slot.
  void sync_weight(int qlayer, std::size_t j) {
    model.layers[static_cast<std::size_t>(param_index[static_cast<std::size_t>(qlayer)])]
        .weight.data[j] = layers[static_cast<std::size_t>(qlayer)].dequant(j);
  }

  void sync_all() {
    for (std::size_t q = 0; q < layers.size(); ++q)
      for (std::size_t j = 0; j < layers[q].size(); ++j) sync_weight(static_cast<int>(q), j);
  }

  std::size_t total_weights() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.size();
    return n;
  }
};

inline QuantizedModel quantize_model(const Model& m, const QuantConfig& cfg) {
  m.validate();
  QuantizedModel qm;
  qm.model = m;
  qm.param_index = m.param_layers();
  for (int li : qm.param_index)
    qm.layers.push_back(quantize_layer(m.layers[static_cast<std::size_t>(li)].weight, cfg));
  qm.sync_all();
  return qm;
}

// Worst-case rounding error of the grid: half a step.
inline double quantization_error_bound(const QuantizedLayer& q) { return q.delta_w / 2.0; }

// Bits of a code, least significant first; bits[n-1] is the sign bit.
inline std::vector<int> encode_code(int code, int n_bits) {
  int mc = max_code(n_bits);
  if (code < -(mc + 1) || code > mc) throw std::out_of_range("encode_code: code out of range");
  std::vector<int> bits(static_cast<std::size_t>(n_bits));
  for (int i = 0; i < n_bits; ++i) bits[static_cast<std::size_t>(i)] = (code >> i) & 1;
  return bits;
}

// Two's-complement value of an LSB-first bit vector: the sign bit weighs
// -2^(N-1), the rest weigh +2^i.
inline int decode_bits(const std::vector<int>& bits) {
  int n = static_cast<int>(bits.size());
  if (n < 2 || n > 8) throw std::invalid_argument("decode_bits: width must be in [2,8]");
  int v = 0;
  for (int i = 0; i < n - 1; ++i) {
    if (bits[static_cast<std::size_t>(i)] != 0 && bits[static_cast<std::size_t>(i)] != 1)
      throw std::invalid_argument("decode_bits: bits must be 0/1");
    v += bits[static_cast<std::size_t>(i)] << i;
  }
  int sign = bits[static_cast<std::size_t>(n - 1)];
  if (sign != 0 && sign != 1) throw std::invalid_argument("decode_bits: bits must be 0/1");
  v -= sign << (n - 1);
  return v;
}

}  // namespace bflab
