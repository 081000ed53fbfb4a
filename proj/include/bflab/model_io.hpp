#pragma once

// Binary model containers, explicitly little-endian so files are
// byte-identical across platforms.
//
// Float container ("BFLM", version 1):
//   magic "BFLM" | u32 version | u32 input rank | i32 dims...
//   | u32 layer count | per layer: u32 kind, i32 a,b,c,d,e, u8 has_bias
//   | per parameterized layer: u64 weight count, f64 weights...,
//     u64 bias count, f64 biases...
// The five i32 geometry slots hold, by kind:
//   dense: in_features, out_features  conv2d: in_ch, out_ch, kernel, stride,
//   pad  avgpool2d: pool  (unused slots zero)
//
// Quantized container ("BFLQ", version 1): same skeleton, then per
// parameterized layer: u32 n_bits, f64 delta_w, u64 count, i8 codes...
// (two's-complement bytes, the exact bit tensor the attack edits),
// u64 bias count, f64 biases...

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bflab/quantize.hpp"

namespace bflab {
namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_i32(std::ostream& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }

inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("model file: truncated");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

inline std::int32_t get_i32(std::istream& in) { return static_cast<std::int32_t>(get_u32(in)); }

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("model file: truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& in) {
  std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline void write_skeleton(std::ostream& out, const Model& m) {
  put_u32(out, static_cast<std::uint32_t>(m.input_shape.size()));
  for (int d : m.input_shape) put_i32(out, d);
  put_u32(out, static_cast<std::uint32_t>(m.layers.size()));
  for (const Layer& l : m.layers) {
    put_u32(out, static_cast<std::uint32_t>(l.kind));
    std::int32_t geo[5] = {0, 0, 0, 0, 0};
    switch (l.kind) {
      case LayerKind::dense:
        geo[0] = l.in_features;
        geo[1] = l.out_features;
        break;
      case LayerKind::conv2d:
        geo[0] = l.in_channels;
        geo[1] = l.out_channels;
        geo[2] = l.kernel;
        geo[3] = l.stride;
        geo[4] = l.pad;
        break;
      case LayerKind::avgpool2d:
        geo[0] = l.pool;
        break;
      default:
        break;
    }
    for (std::int32_t g : geo) put_i32(out, g);
    out.put(l.bias.empty() ? '\0' : '\1');
  }
}

inline Model read_skeleton(std::istream& in) {
  Model m;
  std::uint32_t rank = get_u32(in);
  if (rank > 8) throw std::runtime_error("model file: absurd input rank");
  for (std::uint32_t i = 0; i < rank; ++i) m.input_shape.push_back(get_i32(in));
  std::uint32_t count = get_u32(in);
  if (count > 100000) throw std::runtime_error("model file: absurd layer count");
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t kind = get_u32(in);
    std::int32_t geo[5];
    for (std::int32_t& g : geo) g = get_i32(in);
    int has_bias = in.get();
    if (has_bias != 0 && has_bias != 1) throw std::runtime_error("model file: bad bias flag");
    Layer l;
    switch (static_cast<LayerKind>(kind)) {
      case LayerKind::dense:
        l = make_dense(geo[0], geo[1], has_bias == 1);
        break;
      case LayerKind::conv2d:
        l = make_conv2d(geo[0], geo[1], geo[2], geo[3], geo[4], has_bias == 1);
        break;
      case LayerKind::relu:
        l = make_relu();
        break;
      case LayerKind::flatten:
        l = make_flatten();
        break;
      case LayerKind::avgpool2d:
        l = make_avgpool2d(geo[0]);
        break;
      default:
        throw std::runtime_error("model file: unknown layer kind");
    }
    m.layers.push_back(std::move(l));
  }
  return m;
}

}  // namespace detail

inline void save_model(const Model& m, const std::string& path) {
  m.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write("BFLM", 4);
  detail::put_u32(out, 1);
  detail::write_skeleton(out, m);
  for (int li : m.param_layers()) {
    const Layer& l = m.layers[static_cast<std::size_t>(li)];
    detail::put_u64(out, l.weight.data.size());
    for (double w : l.weight.data) detail::put_f64(out, w);
    detail::put_u64(out, l.bias.size());
    for (double b : l.bias) detail::put_f64(out, b);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "BFLM")
    throw std::runtime_error(path + ": not a model file");
  if (detail::get_u32(in) != 1) throw std::runtime_error(path + ": unsupported version");
  Model m = detail::read_skeleton(in);
  for (int li : m.param_layers()) {
    Layer& l = m.layers[static_cast<std::size_t>(li)];
    std::uint64_t wc = detail::get_u64(in);
    if (wc != l.weight.data.size()) throw std::runtime_error(path + ": weight count mismatch");
    for (double& w : l.weight.data) w = detail::get_f64(in);
    std::uint64_t bc = detail::get_u64(in);
    if (bc != l.bias.size()) throw std::runtime_error(path + ": bias count mismatch");
    for (double& b : l.bias) b = detail::get_f64(in);
  }
  m.validate();
  return m;
}

inline void save_quantized(const QuantizedModel& qm, const std::string& path) {
  qm.model.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write("BFLQ", 4);
  detail::put_u32(out, 1);
  detail::write_skeleton(out, qm.model);
  for (std::size_t q = 0; q < qm.layers.size(); ++q) {
    const QuantizedLayer& l = qm.layers[q];
    const Layer& ml = qm.model.layers[static_cast<std::size_t>(qm.param_index[q])];
    detail::put_u32(out, static_cast<std::uint32_t>(l.n_bits));
    detail::put_f64(out, l.delta_w);
    detail::put_u64(out, l.codes.size());
    out.write(reinterpret_cast<const char*>(l.codes.data()),
              static_cast<std::streamsize>(l.codes.size()));
    detail::put_u64(out, ml.bias.size());
    for (double b : ml.bias) detail::put_f64(out, b);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline QuantizedModel load_quantized(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "BFLQ")
    throw std::runtime_error(path + ": not a quantized model file");
  if (detail::get_u32(in) != 1) throw std::runtime_error(path + ": unsupported version");
  QuantizedModel qm;
  qm.model = detail::read_skeleton(in);
  qm.param_index = qm.model.param_layers();
  for (std::size_t q = 0; q < qm.param_index.size(); ++q) {
    Layer& ml = qm.model.layers[static_cast<std::size_t>(qm.param_index[q])];
    QuantizedLayer l;
    l.n_bits = static_cast<int>(detail::get_u32(in));
    max_code(l.n_bits);  // range check
    l.delta_w = detail::get_f64(in);
    if (!(l.delta_w > 0.0)) throw std::runtime_error(path + ": non-positive step size");
    l.shape = ml.weight.shape;
    std::uint64_t wc = detail::get_u64(in);
    if (wc != ml.weight.data.size()) throw std::runtime_error(path + ": code count mismatch");
    l.codes.resize(wc);
    in.read(reinterpret_cast<char*>(l.codes.data()), static_cast<std::streamsize>(wc));
    if (!in) throw std::runtime_error(path + ": truncated codes");
    std::uint64_t bc = detail::get_u64(in);
    if (bc != ml.bias.size()) throw std::runtime_error(path + ": bias count mismatch");
    for (double& b : ml.bias) b = detail::get_f64(in);
    qm.layers.push_back(std::move(l));
  }
  qm.model.validate();
  qm.sync_all();
  return qm;
}

}  // namespace bflab
