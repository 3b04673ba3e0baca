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

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tilecodec/tensor.hpp"

namespace tilecodec {

/// Binary code emitted by the bottleneck for one iteration; values are
/// strictly -1 or +1. The shipped architecture emits 128 bits per iteration.
struct BinaryCode {
  std::vector<int8_t> bits;

  size_t size() const { return bits.size(); }
  bool operator==(const BinaryCode& o) const { return bits == o.bits; }
};

/// Flattens a +-1-valued tensor into a BinaryCode in the tensor's natural
/// order (row-major spatial, depth contiguous).
BinaryCode to_binary_code(const Tensor& t);

/// Expands a code back into a +-1 tensor of the given shape.
Tensor code_to_tensor(const BinaryCode& code, const Shape& shape);

/// Recurrent state of one convolutional LSTM layer. Reset to zeros at
/// iteration 0 of each tile; hidden and cell always share a shape.
struct ConvLstmState {
  Tensor hidden;
  Tensor cell;
};

ConvLstmState zero_lstm_state(int batch, int out_h, int out_w, int depth);

/// Weights of one convolutional LSTM layer. The input path is a strided
/// (optionally transposed) convolution with bias; the recurrent path is a
/// bias-free 1x1 convolution of the previous hidden state. Gate order:
/// input, forget, cell candidate, output.
struct ConvLstmParams {
  Tensor wx[4];  // input-path kernels [KH,KW,IC,OC]
  Tensor bx[4];  // input-path biases [OC]
  Tensor wh[4];  // recurrent kernels [1,1,OC,OC]
  int stride = 1;
  bool transposed = false;

  int out_depth() const { return wx[0].shape()[3]; }
};

/// One ConvLSTM step with standard gating:
///   i,f,o = sigmoid(conv(x) + conv1x1(h)),  g = tanh(conv(x) + conv1x1(h))
///   c' = f*c + i*g,  h' = o * tanh(c')
/// Weights are shared across iterations; the caller threads the state.
std::pair<Tensor, ConvLstmState> conv_lstm_step(Graph& g, const Tensor& input,
                                                const ConvLstmState& state,
                                                const ConvLstmParams& params);

/// Channel-wise fully-connected block: a per-channel dense spatial stage
/// (equivalent to one full-extent depthwise convolution per output position)
/// followed by a pointwise cross-channel map. Neither stage has a bias.
struct ChannelwiseFcParams {
  Tensor dw;  // [H*W, H, W, C]
  Tensor pw;  // [1,1,C,C]
};

Tensor channelwise_fc(Graph& g, const Tensor& input,
                      const ChannelwiseFcParams& params);

long long channelwise_fc_param_count(const ChannelwiseFcParams& params);

}  // namespace tilecodec
