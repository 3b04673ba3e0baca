/*
 * Copyright 2026 The tilecodec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tilecodec/nn_layers.hpp"

#include <cmath>

#include "tilecodec/errors.hpp"

namespace tilecodec {

BinaryCode to_binary_code(const Tensor& t) {
  BinaryCode code;
  code.bits.reserve(static_cast<size_t>(t.numel()));
  for (float v : t.values()) {
    if (v != 1.0f && v != -1.0f)
      throw ConfigError("binary code tensor contains a non +-1 value");
    code.bits.push_back(v > 0.0f ? int8_t{1} : int8_t{-1});
  }
  return code;
}

Tensor code_to_tensor(const BinaryCode& code, const Shape& shape) {
  if (static_cast<long long>(code.bits.size()) != shape.numel())
    throw ShapeError("binary code length " + std::to_string(code.bits.size()) +
                     " does not match shape " + shape.str());
  std::vector<float> v(code.bits.size());
  for (size_t i = 0; i < code.bits.size(); ++i)
    v[i] = code.bits[i] > 0 ? 1.0f : -1.0f;
  return Tensor::from(shape, std::move(v));
}

ConvLstmState zero_lstm_state(int batch, int out_h, int out_w, int depth) {
  return {Tensor::zeros({batch, out_h, out_w, depth}),
          Tensor::zeros({batch, out_h, out_w, depth})};
}

std::pair<Tensor, ConvLstmState> conv_lstm_step(Graph& g, const Tensor& input,
                                                const ConvLstmState& state,
                                                const ConvLstmParams& params) {
  if (state.hidden.shape() != state.cell.shape())
    throw ShapeError("lstm state hidden " + state.hidden.shape().str() +
                     " and cell " + state.cell.shape().str() + " differ");

  auto input_path = [&](int gate) {
    return params.transposed
               ? conv2d_transpose(g, input, params.wx[gate], params.bx[gate],
                                  params.stride)
               : conv2d(g, input, params.wx[gate], params.bx[gate],
                        params.stride);
  };

  Tensor pre_i = input_path(0);
  if (pre_i.shape() != state.hidden.shape())
    throw ShapeError("lstm state shape " + state.hidden.shape().str() +
                     " does not match layer output " + pre_i.shape().str());

  Tensor gi = sigmoid_act(
      g, elementwise_add(g, pre_i, pointwise_conv2d(g, state.hidden, params.wh[0])));
  Tensor gf = sigmoid_act(
      g, elementwise_add(g, input_path(1),
                         pointwise_conv2d(g, state.hidden, params.wh[1])));
  Tensor gc = tanh_act(
      g, elementwise_add(g, input_path(2),
                         pointwise_conv2d(g, state.hidden, params.wh[2])));
  Tensor go = sigmoid_act(
      g, elementwise_add(g, input_path(3),
                         pointwise_conv2d(g, state.hidden, params.wh[3])));

  Tensor cell = elementwise_add(g, elementwise_mul(g, gf, state.cell),
                                elementwise_mul(g, gi, gc));
  Tensor hidden = elementwise_mul(g, go, tanh_act(g, cell));
  return {hidden, ConvLstmState{hidden, cell}};
}

Tensor channelwise_fc(Graph& g, const Tensor& input,
                      const ChannelwiseFcParams& params) {
  return pointwise_conv2d(g, channelwise_dense(g, input, params.dw),
                          params.pw);
}

long long channelwise_fc_param_count(const ChannelwiseFcParams& params) {
  return params.dw.numel() + params.pw.numel();
}

}  // namespace tilecodec
