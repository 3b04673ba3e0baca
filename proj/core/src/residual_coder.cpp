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

#include "tilecodec/residual_coder.hpp"

#include <cmath>

#include "tilecodec/errors.hpp"

namespace tilecodec {

ResidualEncoderState zero_encoder_state(const ArchConfig& arch, int batch) {
  ResidualEncoderState st;
  int extent = kTileSize;
  for (int i = 0; i < 3; ++i) {
    extent /= 2;
    st.layers[i] =
        zero_lstm_state(batch, extent, extent, arch.res_enc_depths[i]);
  }
  return st;
}

ResidualDecoderState zero_decoder_state(const ArchConfig& arch, int batch) {
  ResidualDecoderState st;
  int extent = kTileSize / 8;
  for (int i = 0; i < 3; ++i) {
    extent *= 2;
    st.layers[i] =
        zero_lstm_state(batch, extent, extent, arch.res_dec_depths[i]);
  }
  return st;
}

Tensor residual_encode_step(Graph& g, const Tensor& residual,
                            ResidualEncoderState& state,
                            const ResidualCoderParams& params) {
  if (residual.shape().rank() != 4 || residual.shape()[1] != kTileSize ||
      residual.shape()[2] != kTileSize || residual.shape()[3] != 3)
    throw ShapeError("residual must be Bx32x32x3, got " +
                     residual.shape().str());
  Tensor h = conv2d(g, residual, params.in_conv.w, params.in_conv.b, 1);
  for (int i = 0; i < 3; ++i) {
    auto [out, next] = conv_lstm_step(g, h, state.layers[i], params.enc[i]);
    state.layers[i] = next;
    h = out;
  }
  return conv2d(g, h, params.bottleneck.w, params.bottleneck.b, 1);
}

Tensor residual_decode_step(Graph& g, const Tensor& code,
                            ResidualDecoderState& state,
                            const ResidualCoderParams& params) {
  if (code.shape().rank() != 4 || code.shape()[1] != kTileSize / 8 ||
      code.shape()[2] != kTileSize / 8)
    throw ShapeError("code tensor must be Bx4x4xD, got " + code.shape().str());
  Tensor h = code;
  for (int i = 0; i < 3; ++i) {
    auto [out, next] = conv_lstm_step(g, h, state.layers[i], params.dec[i]);
    state.layers[i] = next;
    h = out;
  }
  return tanh_act(g, conv2d(g, h, params.head.w, params.head.b, 1));
}

std::vector<IterationOutput> encode_residual(const Tensor& r0, int k,
                                             const CodecModel& model,
                                             BinarizeMode mode, Rng* rng) {
  if (k < 1 || k > model.arch().k_max)
    throw ConfigError("iteration count " + std::to_string(k) +
                      " outside [1, " + std::to_string(model.arch().k_max) +
                      "]");
  if (mode == BinarizeMode::Stochastic && rng == nullptr)
    throw ConfigError("stochastic binarization needs an rng");
  if (r0.shape() != Shape{1, kTileSize, kTileSize, 3})
    throw ShapeError("encode_residual expects 1x32x32x3, got " +
                     r0.shape().str());

  Graph g;
  ResidualEncoderState enc_st = zero_encoder_state(model.arch(), 1);
  ResidualDecoderState dec_st = zero_decoder_state(model.arch(), 1);
  const ResidualCoderParams& params = model.residual();

  std::vector<IterationOutput> out;
  out.reserve(static_cast<size_t>(k));
  Tensor j;
  Tensor r = r0;
  for (int i = 0; i < k; ++i) {
    Tensor z = residual_encode_step(g, r, enc_st, params);
    Tensor bits = mode == BinarizeMode::Deterministic
                      ? binarize_deterministic(g, z)
                      : binarize_stochastic(g, z, *rng);
    Tensor p = residual_decode_step(g, bits, dec_st, params);
    j = j.valid() ? elementwise_add(g, j, p) : p;
    out.push_back({p, to_binary_code(bits)});
    if (i + 1 < k) r = elementwise_sub(g, r0, j);
  }
  return out;
}

Tensor decode_residual(const std::vector<BinaryCode>& codes,
                       const CodecModel& model) {
  if (codes.empty())
    throw ConfigError("decode_residual needs at least one code");
  Graph g;
  ResidualDecoderState dec_st = zero_decoder_state(model.arch(), 1);
  const Shape code_shape{1, kTileSize / 8, kTileSize / 8,
                         model.arch().bottleneck_depth};
  Tensor j;
  for (const auto& code : codes) {
    if (static_cast<long long>(code.size()) != code_shape.numel())
      throw ConfigError("code length " + std::to_string(code.size()) +
                        " is not " + std::to_string(code_shape.numel()));
    Tensor p = residual_decode_step(g, code_to_tensor(code, code_shape),
                                    dec_st, model.residual());
    j = j.valid() ? elementwise_add(g, j, p) : p;
  }
  return j;
}

Tensor sum_partials(const std::vector<IterationOutput>& iterations) {
  if (iterations.empty())
    throw ConfigError("sum_partials needs at least one iteration");
  Graph g;
  Tensor j = iterations[0].partial;
  for (size_t i = 1; i < iterations.size(); ++i)
    j = elementwise_add(g, j, iterations[i].partial);
  return j;
}

uint8_t quantize_output(float normalized) {
  const double x = static_cast<double>(normalized) * 142.0 + 128.0;
  const double clipped = std::min(std::max(x, 0.0), 255.0);
  return static_cast<uint8_t>(std::lround(clipped));
}

}  // namespace tilecodec
