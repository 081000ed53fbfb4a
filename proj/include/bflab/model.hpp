#pragma once

// Sequential layer model with manual forward/backward. Weight gradients are
// taken with respect to the stored weight values, so a model whose weights
// were materialized from integer codes gets straight-through gradients for
// free.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bflab/tensor.hpp"

namespace bflab {

enum class LayerKind { dense, conv2d, relu, flatten, avgpool2d };

inline const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::relu: return "relu";
    case LayerKind::flatten: return "flatten";
    case LayerKind::avgpool2d: return "avgpool2d";
  }
  return "?";
}

struct Layer {
  LayerKind kind = LayerKind::relu;
  // dense
  int in_features = 0, out_features = 0;
  // conv2d
  int in_channels = 0, out_channels = 0, kernel = 0, stride = 1, pad = 0;
  // avgpool2d
  int pool = 0;

  Tensor weight;             // dense: [out,in]; conv2d: [co,ci,k,k]
  std::vector<double> bias;  // full precision, never bit-encoded

  bool parameterized() const { return kind == LayerKind::dense || kind == LayerKind::conv2d; }
};

inline Layer make_dense(int in, int out, bool with_bias = true) {
  if (in <= 0 || out <= 0) throw std::invalid_argument("dense: features must be positive");
  Layer l;
  l.kind = LayerKind::dense;
  l.in_features = in;
  l.out_features = out;
  l.weight = Tensor({out, in});
  if (with_bias) l.bias.assign(static_cast<std::size_t>(out), 0.0);
  return l;
}

inline Layer make_conv2d(int in_ch, int out_ch, int kernel, int stride = 1, int pad = 0,
                         bool with_bias = true) {
  if (in_ch <= 0 || out_ch <= 0 || kernel <= 0 || stride <= 0 || pad < 0)
    throw std::invalid_argument("conv2d: bad geometry");
  Layer l;
  l.kind = LayerKind::conv2d;
  l.in_channels = in_ch;
  l.out_channels = out_ch;
  l.kernel = kernel;
  l.stride = stride;
  l.pad = pad;
  l.weight = Tensor({out_ch, in_ch, kernel, kernel});
  if (with_bias) l.bias.assign(static_cast<std::size_t>(out_ch), 0.0);
  return l;
}

inline Layer make_relu() {
  Layer l;
  l.kind = LayerKind::relu;
  return l;
}

inline Layer make_flatten() {
  Layer l;
  l.kind = LayerKind::flatten;
  return l;
}

inline Layer make_avgpool2d(int k) {
  if (k <= 0) throw std::invalid_argument("avgpool2d: pool size must be positive");
  Layer l;
  l.kind = LayerKind::avgpool2d;
  l.pool = k;
  return l;
}

// Per-sample output shape of a layer given its per-sample input shape.
// Throws naming the layer when shapes do not compose.
inline std::vector<int> layer_output_shape(const Layer& l, const std::vector<int>& in, int index) {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("layer " + std::to_string(index) + " (" +
                                layer_kind_name(l.kind) + "): " + why + ", input shape " +
                                shape_str(in));
  };
  switch (l.kind) {
    case LayerKind::dense: {
      if (in.size() != 1) fail("expects flat input");
      if (in[0] != l.in_features)
        fail("expects " + std::to_string(l.in_features) + " features");
      return {l.out_features};
    }
    case LayerKind::conv2d: {
      if (in.size() != 3) fail("expects [C,H,W] input");
      if (in[0] != l.in_channels)
        fail("expects " + std::to_string(l.in_channels) + " channels");
      int ho = (in[1] + 2 * l.pad - l.kernel) / l.stride + 1;
      int wo = (in[2] + 2 * l.pad - l.kernel) / l.stride + 1;
      if (in[1] + 2 * l.pad < l.kernel || in[2] + 2 * l.pad < l.kernel || ho <= 0 || wo <= 0)
        fail("kernel does not fit");
      return {l.out_channels, ho, wo};
    }
    case LayerKind::relu:
      return in;
    case LayerKind::flatten:
      return {static_cast<int>(numel_of(in))};
    case LayerKind::avgpool2d: {
      if (in.size() != 3) fail("expects [C,H,W] input");
      int ho = in[1] / l.pool, wo = in[2] / l.pool;
      if (ho <= 0 || wo <= 0) fail("pool window does not fit");
      return {in[0], ho, wo};
    }
  }
  fail("unknown layer kind");
  return {};
}

struct Model {
  std::vector<int> input_shape;  // per-sample shape, batch dim excluded
  std::vector<Layer> layers;

  std::vector<int> param_layers() const {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(layers.size()); ++i)
      if (layers[i].parameterized()) idx.push_back(i);
    return idx;
  }

  std::vector<int> output_shape() const {
    std::vector<int> s = input_shape;
    for (int i = 0; i < static_cast<int>(layers.size()); ++i)
      s = layer_output_shape(layers[i], s, i);
    return s;
  }

  // Victim-model contract: shapes compose and the terminal layer is a dense
  // layer emitting one logit per class.
  void validate() const {
    if (layers.empty()) throw std::invalid_argument("model has no layers");
    std::vector<int> out = output_shape();
    if (layers.back().kind != LayerKind::dense)
      throw std::invalid_argument("model must end in a dense classification layer");
    if (out.size() != 1 || out[0] < 2)
      throw std::invalid_argument("terminal dense layer must emit >= 2 class logits");
  }

  int num_classes() const { return layers.back().out_features; }
};

namespace detail {

inline void batch_shape_check(const Model& m, const Tensor& inputs) {
  if (inputs.shape.empty()) throw std::invalid_argument("input tensor needs a batch dimension");
  std::vector<int> per(inputs.shape.begin() + 1, inputs.shape.end());
  if (per != m.input_shape)
    throw std::invalid_argument("batch sample shape " + shape_str(per) +
                                " does not match model input shape " + shape_str(m.input_shape));
}

inline Tensor dense_forward(const Layer& l, const Tensor& x) {
  int b = x.shape[0], in = l.in_features, out = l.out_features;
  Tensor y({b, out});
  for (int n = 0; n < b; ++n) {
    const double* xr = &x.data[static_cast<std::size_t>(n) * in];
    double* yr = &y.data[static_cast<std::size_t>(n) * out];
    for (int o = 0; o < out; ++o) {
      double s = l.bias.empty() ? 0.0 : l.bias[o];
      const double* wr = &l.weight.data[static_cast<std::size_t>(o) * in];
      for (int i = 0; i < in; ++i) s += xr[i] * wr[i];
      yr[o] = s;
    }
  }
  return y;
}

inline void dense_backward(const Layer& l, const Tensor& x, const Tensor& dy, Tensor& dx,
                           Tensor& dw, std::vector<double>& db) {
  int b = x.shape[0], in = l.in_features, out = l.out_features;
  dx = Tensor({b, in});
  dw = Tensor(l.weight.shape);
  db.assign(l.bias.size(), 0.0);
  for (int n = 0; n < b; ++n) {
    const double* xr = &x.data[static_cast<std::size_t>(n) * in];
    const double* gr = &dy.data[static_cast<std::size_t>(n) * out];
    double* dxr = &dx.data[static_cast<std::size_t>(n) * in];
    for (int o = 0; o < out; ++o) {
      double g = gr[o];
      if (!l.bias.empty()) db[o] += g;
      const double* wr = &l.weight.data[static_cast<std::size_t>(o) * in];
      double* dwr = &dw.data[static_cast<std::size_t>(o) * in];
      for (int i = 0; i < in; ++i) {
        dwr[i] += g * xr[i];
        dxr[i] += g * wr[i];
      }
    }
  }
}

inline Tensor conv2d_forward(const Layer& l, const Tensor& x) {
  int b = x.shape[0], ci = x.shape[1], h = x.shape[2], w = x.shape[3];
  int k = l.kernel, st = l.stride, p = l.pad, co = l.out_channels;
  int ho = (h + 2 * p - k) / st + 1, wo = (w + 2 * p - k) / st + 1;
  Tensor y({b, co, ho, wo});
  for (int n = 0; n < b; ++n)
    for (int oc = 0; oc < co; ++oc)
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow) {
          double s = l.bias.empty() ? 0.0 : l.bias[oc];
          for (int ic = 0; ic < ci; ++ic)
            for (int kh = 0; kh < k; ++kh) {
              int ih = oh * st - p + kh;
              if (ih < 0 || ih >= h) continue;
              for (int kw = 0; kw < k; ++kw) {
                int iw = ow * st - p + kw;
                if (iw < 0 || iw >= w) continue;
                s += x.data[((static_cast<std::size_t>(n) * ci + ic) * h + ih) * w + iw] *
                     l.weight.data[((static_cast<std::size_t>(oc) * ci + ic) * k + kh) * k + kw];
              }
            }
          y.data[((static_cast<std::size_t>(n) * co + oc) * ho + oh) * wo + ow] = s;
        }
  return y;
}

inline void conv2d_backward(const Layer& l, const Tensor& x, const Tensor& dy, Tensor& dx,
                            Tensor& dw, std::vector<double>& db) {
  int b = x.shape[0], ci = x.shape[1], h = x.shape[2], w = x.shape[3];
  int k = l.kernel, st = l.stride, p = l.pad, co = l.out_channels;
  int ho = dy.shape[2], wo = dy.shape[3];
  dx = Tensor(x.shape);
  dw = Tensor(l.weight.shape);
  db.assign(l.bias.size(), 0.0);
  for (int n = 0; n < b; ++n)
    for (int oc = 0; oc < co; ++oc)
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow) {
          double g = dy.data[((static_cast<std::size_t>(n) * co + oc) * ho + oh) * wo + ow];
          if (!l.bias.empty()) db[oc] += g;
          for (int ic = 0; ic < ci; ++ic)
            for (int kh = 0; kh < k; ++kh) {
              int ih = oh * st - p + kh;
              if (ih < 0 || ih >= h) continue;
              for (int kw = 0; kw < k; ++kw) {
                int iw = ow * st - p + kw;
                if (iw < 0 || iw >= w) continue;
                std::size_t xi = ((static_cast<std::size_t>(n) * ci + ic) * h + ih) * w + iw;
                std::size_t wi = ((static_cast<std::size_t>(oc) * ci + ic) * k + kh) * k + kw;
                dw.data[wi] += g * x.data[xi];
                dx.data[xi] += g * l.weight.data[wi];
              }
            }
        }
}

inline Tensor avgpool_forward(const Layer& l, const Tensor& x) {
  int b = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3];
  int k = l.pool, ho = h / k, wo = w / k;
  Tensor y({b, c, ho, wo});
  double inv = 1.0 / (k * k);
  for (int n = 0; n < b; ++n)
    for (int ch = 0; ch < c; ++ch)
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow) {
          double s = 0.0;
          for (int kh = 0; kh < k; ++kh)
            for (int kw = 0; kw < k; ++kw)
              s += x.data[((static_cast<std::size_t>(n) * c + ch) * h + oh * k + kh) * w +
                          ow * k + kw];
          y.data[((static_cast<std::size_t>(n) * c + ch) * ho + oh) * wo + ow] = s * inv;
        }
  return y;
}

inline Tensor avgpool_backward(const Layer& l, const Tensor& x, const Tensor& dy) {
  int b = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3];
  int k = l.pool, ho = h / k, wo = w / k;
  Tensor dx(x.shape);
  double inv = 1.0 / (k * k);
  for (int n = 0; n < b; ++n)
    for (int ch = 0; ch < c; ++ch)
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow) {
          double g = dy.data[((static_cast<std::size_t>(n) * c + ch) * ho + oh) * wo + ow] * inv;
          for (int kh = 0; kh < k; ++kh)
            for (int kw = 0; kw < k; ++kw)
              dx.data[((static_cast<std::size_t>(n) * c + ch) * h + oh * k + kh) * w + ow * k +
                      kw] = g;
        }
  return dx;
}

}  // namespace detail

// Per-layer activations cached for the backward pass; acts[0] is the input
// batch, acts[i+1] the output of layer i.
struct ForwardTrace {
  std::vector<Tensor> acts;
};

inline Tensor forward(const Model& m, const Tensor& inputs, ForwardTrace* trace = nullptr) {
  detail::batch_shape_check(m, inputs);
  int b = inputs.shape[0];
  std::vector<int> sample = m.input_shape;
  Tensor cur = inputs;
  if (trace) {
    trace->acts.clear();
    trace->acts.push_back(cur);
  }
  for (int li = 0; li < static_cast<int>(m.layers.size()); ++li) {
    const Layer& l = m.layers[li];
    std::vector<int> out_sample = layer_output_shape(l, sample, li);
    Tensor next;
    switch (l.kind) {
      case LayerKind::dense:
        next = detail::dense_forward(l, cur);
        break;
      case LayerKind::conv2d:
        next = detail::conv2d_forward(l, cur);
        break;
      case LayerKind::relu: {
        next = cur;
        for (double& v : next.data) v = v > 0.0 ? v : 0.0;
        break;
      }
      case LayerKind::flatten: {
        next = cur;
        next.shape = {b, out_sample[0]};
        break;
      }
      case LayerKind::avgpool2d:
        next = detail::avgpool_forward(l, cur);
        break;
    }
    cur = std::move(next);
    sample = std::move(out_sample);
    if (trace) trace->acts.push_back(cur);
  }
  return cur;
}

// Mean softmax cross-entropy over the batch, numerically stable.
inline double cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  if (logits.shape.size() != 2) throw std::invalid_argument("cross_entropy: logits must be [B,C]");
  int b = logits.shape[0], c = logits.shape[1];
  if (static_cast<int>(labels.size()) != b)
    throw std::invalid_argument("cross_entropy: batch sizes disagree");
  double total = 0.0;
  for (int n = 0; n < b; ++n) {
    int y = labels[n];
    if (y < 0 || y >= c) throw std::invalid_argument("cross_entropy: label out of range");
    const double* z = &logits.data[static_cast<std::size_t>(n) * c];
    double mx = z[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, z[j]);
    double sum = 0.0;
    for (int j = 0; j < c; ++j) sum += std::exp(z[j] - mx);
    total += mx + std::log(sum) - z[y];
  }
  return total / b;
}

// d(mean CE)/d(logits): (softmax - onehot) / B
inline Tensor softmax_ce_grad(const Tensor& logits, const std::vector<int>& labels) {
  int b = logits.shape[0], c = logits.shape[1];
  Tensor g(logits.shape);
  for (int n = 0; n < b; ++n) {
    const double* z = &logits.data[static_cast<std::size_t>(n) * c];
    double* gr = &g.data[static_cast<std::size_t>(n) * c];
    double mx = z[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, z[j]);
    double sum = 0.0;
    for (int j = 0; j < c; ++j) sum += std::exp(z[j] - mx);
    for (int j = 0; j < c; ++j) gr[j] = std::exp(z[j] - mx) / sum / b;
    gr[labels[n]] -= 1.0 / b;
  }
  return g;
}

// Weight and bias gradients, one slot per parameterized layer in model order.
struct Gradients {
  std::vector<Tensor> weight;
  std::vector<std::vector<double>> bias;
};

// Mean-CE gradients of the model's weights against per-sample target labels.
inline Gradients backward(const Model& m, const Tensor& inputs, const std::vector<int>& labels) {
  ForwardTrace tr;
  Tensor logits = forward(m, inputs, &tr);
  std::vector<int> pidx = m.param_layers();
  Gradients g;
  g.weight.resize(pidx.size());
  g.bias.resize(pidx.size());

  Tensor dy = softmax_ce_grad(logits, labels);
  for (int li = static_cast<int>(m.layers.size()) - 1; li >= 0; --li) {
    const Layer& l = m.layers[li];
    const Tensor& x = tr.acts[li];
    Tensor dx;
    switch (l.kind) {
      case LayerKind::dense:
      case LayerKind::conv2d: {
        int slot = static_cast<int>(std::lower_bound(pidx.begin(), pidx.end(), li) - pidx.begin());
        if (l.kind == LayerKind::dense)
          detail::dense_backward(l, x, dy, dx, g.weight[slot], g.bias[slot]);
        else
          detail::conv2d_backward(l, x, dy, dx, g.weight[slot], g.bias[slot]);
        break;
      }
      case LayerKind::relu: {
        dx = dy;
        for (std::size_t i = 0; i < dx.data.size(); ++i)
          if (x.data[i] <= 0.0) dx.data[i] = 0.0;
        break;
      }
      case LayerKind::flatten: {
        dx = dy;
        dx.shape = x.shape;
        break;
      }
      case LayerKind::avgpool2d:
        dx = detail::avgpool_backward(l, x, dy);
        break;
    }
    dy = std::move(dx);
  }
  return g;
}

// argmax class per row; ties resolve to the lowest index
inline std::vector<int> predict_classes(const Model& m, const Tensor& inputs) {
  Tensor logits = forward(m, inputs);
  int b = logits.shape[0], c = logits.shape[1];
  std::vector<int> out(static_cast<std::size_t>(b));
  for (int n = 0; n < b; ++n) {
    const double* z = &logits.data[static_cast<std::size_t>(n) * c];
    int best = 0;
    for (int j = 1; j < c; ++j)
      if (z[j] > z[best]) best = j;
    out[n] = best;
  }
  return out;
}

}  // namespace bflab
