#pragma once

// The bit-level view of a quantized model: addressing single bits, the
// gradient of the loss with respect to each bit, and applying/reverting
// individual flips.

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "bflab/quantize.hpp"

namespace bflab {

struct BitLocation {
  int layer = 0;               // index into QuantizedModel::layers
  long long weight_index = 0;  // flat index within the layer
  int bit_pos = 0;             // 0 = least significant

  friend bool operator==(const BitLocation& a, const BitLocation& b) {
    return a.layer == b.layer && a.weight_index == b.weight_index && a.bit_pos == b.bit_pos;
  }
  friend bool operator<(const BitLocation& a, const BitLocation& b) {
    return std::tie(a.layer, a.weight_index, a.bit_pos) <
           std::tie(b.layer, b.weight_index, b.bit_pos);
  }
};

struct BitFlipRecord {
  BitLocation location;
  int old_bit = 0;
  int new_bit = 0;
  double selection_gradient = 0.0;  // bit gradient at selection time
  int iteration = 0;                // 1-based attack iteration
};

enum class FlipDirection { descent, ascent };

// d(loss)/d(bit i) for one weight, from the weight gradient g and the
// two's-complement bit weights: +2^i for the low bits, -2^(N-1) for the sign.
inline std::vector<double> bit_gradients(double weight_grad, double delta_w, int n_bits) {
  if (n_bits < 2 || n_bits > 8) throw std::invalid_argument("bit_gradients: width out of range");
  std::vector<double> g(static_cast<std::size_t>(n_bits));
  for (int i = 0; i < n_bits - 1; ++i)
    g[static_cast<std::size_t>(i)] = weight_grad * delta_w * static_cast<double>(1 << i);
  g[static_cast<std::size_t>(n_bits - 1)] =
      -weight_grad * delta_w * static_cast<double>(1 << (n_bits - 1));
  return g;
}

// The one bit value a gradient step permits: descent moves the bit against
// the gradient sign, ascent with it, clamped to {0,1}. Returns the new value,
// or nothing when the bit cannot move (zero gradient, or already clamped).
inline std::optional<int> admissible_flip(int bit, double bit_grad, FlipDirection dir) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("admissible_flip: bit must be 0/1");
  if (bit_grad == 0.0) return std::nullopt;
  int step = bit_grad > 0.0 ? 1 : -1;
  if (dir == FlipDirection::descent) step = -step;
  int moved = bit + step;
  if (moved < 0) moved = 0;
  if (moved > 1) moved = 1;
  if (moved == bit) return std::nullopt;
  return moved;
}

inline int read_bit(const QuantizedModel& qm, const BitLocation& loc) {
  const QuantizedLayer& q = qm.layers[static_cast<std::size_t>(loc.layer)];
  std::uint8_t raw = static_cast<std::uint8_t>(q.codes[static_cast<std::size_t>(loc.weight_index)]);
  return (raw >> loc.bit_pos) & 1;
}

namespace detail {

inline void toggle_bit(QuantizedModel& qm, const BitLocation& loc) {
  QuantizedLayer& q = qm.layers[static_cast<std::size_t>(loc.layer)];
  if (loc.weight_index < 0 || loc.weight_index >= static_cast<long long>(q.size()))
    throw std::out_of_range("bit flip: weight index out of range");
  if (loc.bit_pos < 0 || loc.bit_pos >= q.n_bits)
    throw std::out_of_range("bit flip: bit position out of range");
  std::uint8_t raw = static_cast<std::uint8_t>(q.codes[static_cast<std::size_t>(loc.weight_index)]);
  raw ^= static_cast<std::uint8_t>(1u << loc.bit_pos);
  // sign-extend the low n_bits back into the full byte
  std::uint8_t sign_mask = static_cast<std::uint8_t>(1u << (q.n_bits - 1));
  std::uint8_t low_mask = static_cast<std::uint8_t>((1u << q.n_bits) - 1u);
  raw &= low_mask;
  if (raw & sign_mask) raw |= static_cast<std::uint8_t>(~low_mask);
  q.codes[static_cast<std::size_t>(loc.weight_index)] = static_cast<std::int8_t>(raw);
  qm.sync_weight(loc.layer, static_cast<std::size_t>(loc.weight_index));
}

}  // namespace detail

// Applies a recorded flip. The stored old/new values must match the model's
// current state; a stale record throws and the model is left untouched.
inline void apply_flip(QuantizedModel& qm, const BitFlipRecord& rec) {
  if (rec.old_bit == rec.new_bit) throw std::invalid_argument("apply_flip: record flips nothing");
  if (read_bit(qm, rec.location) != rec.old_bit)
    throw std::logic_error("apply_flip: model bit does not match record");
  detail::toggle_bit(qm, rec.location);
}

// Undoes a previously applied flip, with the same staleness check.
inline void revert_flip(QuantizedModel& qm, const BitFlipRecord& rec) {
  if (rec.old_bit == rec.new_bit) throw std::invalid_argument("revert_flip: record flips nothing");
  if (read_bit(qm, rec.location) != rec.new_bit)
    throw std::logic_error("revert_flip: model bit does not match record");
  detail::toggle_bit(qm, rec.location);
}

// Number of differing bits between two models with identical geometry,
// counted over the low n_bits of every code.
inline long long hamming_distance(const QuantizedModel& a, const QuantizedModel& b) {
  if (a.layers.size() != b.layers.size())
    throw std::invalid_argument("hamming_distance: layer counts differ");
  long long total = 0;
  for (std::size_t q = 0; q < a.layers.size(); ++q) {
    const QuantizedLayer& la = a.layers[q];
    const QuantizedLayer& lb = b.layers[q];
    if (la.size() != lb.size() || la.n_bits != lb.n_bits)
      throw std::invalid_argument("hamming_distance: layer geometry differs");
    std::uint8_t low_mask = static_cast<std::uint8_t>((1u << la.n_bits) - 1u);
    for (std::size_t j = 0; j < la.size(); ++j) {
      std::uint8_t diff = static_cast<std::uint8_t>(
          (static_cast<std::uint8_t>(la.codes[j]) ^ static_cast<std::uint8_t>(lb.codes[j])) &
          low_mask);
      total += std::popcount(diff);
    }
  }
  return total;
}

}  // namespace bflab
