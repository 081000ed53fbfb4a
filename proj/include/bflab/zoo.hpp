#pragma once

// Stock victim architectures, small enough to train in seconds.

#include <stdexcept>
#include <vector>

#include "bflab/model.hpp"

namespace bflab {

// flatten -> dense(hidden) -> relu -> dense(classes)
inline Model make_mlp(const std::vector<int>& input_shape, int hidden, int classes) {
  Model m;
  m.input_shape = input_shape;
  int in = static_cast<int>(numel_of(input_shape));
  m.layers.push_back(make_flatten());
  m.layers.push_back(make_dense(in, hidden));
  m.layers.push_back(make_relu());
  m.layers.push_back(make_dense(hidden, classes));
  m.validate();
  return m;
}

// conv3x3(pad 1) -> relu -> avgpool2 -> flatten -> dense(classes)
inline Model make_cnn(const std::vector<int>& input_shape, int channels, int classes) {
  if (input_shape.size() != 3)
    throw std::invalid_argument("make_cnn: input shape must be [C,H,W]");
  Model m;
  m.input_shape = input_shape;
  m.layers.push_back(make_conv2d(input_shape[0], channels, 3, 1, 1));
  m.layers.push_back(make_relu());
  m.layers.push_back(make_avgpool2d(2));
  m.layers.push_back(make_flatten());
  std::vector<int> s = input_shape;
  for (int i = 0; i < static_cast<int>(m.layers.size()); ++i)
    s = layer_output_shape(m.layers[static_cast<std::size_t>(i)], s, i);
  m.layers.push_back(make_dense(s[0], classes));
  m.validate();
  return m;
}

}  // namespace bflab
