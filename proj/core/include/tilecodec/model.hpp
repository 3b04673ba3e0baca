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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tilecodec/nn_layers.hpp"
#include "tilecodec/tensor.hpp"

namespace tilecodec {

/// Codec-wide format constants.
inline constexpr int kTileSize = 32;
inline constexpr int kBitsPerIteration = 128;  // 4 x 4 x 8 bottleneck
inline constexpr int kMaxIterations = 16;      // 2.0 bpp ceiling

/// Pixel normalization: p_norm = (p - 128) / 142. The inverse matches the
/// output quantizer exactly, so 142 (not 128) is the scale on both sides.
inline constexpr float kPixelOffset = 128.0f;
inline constexpr float kPixelScale = 142.0f;

inline float normalize_pixel(uint8_t p) {
  return (static_cast<float>(p) - kPixelOffset) / kPixelScale;
}

/// Layer depths for both networks. The bottleneck is always 4x4x8 (128 bits
/// per iteration); every other depth may shrink for desk-scale models.
struct ArchConfig {
  // Context predictor: four stride-2 3x3 encoder convolutions
  // (64->32->16->8->4 spatial), channel-wise FC at 4x4, three stride-2 4x4
  // upsampling convolutions (4->8->16->32), then a 1x1 head to RGB.
  std::array<int, 4> ctx_enc_depths{64, 128, 256, 512};
  std::array<int, 3> ctx_dec_depths{256, 128, 64};

  // Residual coder: 3x3 input convolution, three stride-2 ConvLSTM encoder
  // layers (32->16->8->4), 1x1 bottleneck to depth 8, three stride-2
  // upsampling ConvLSTM decoder layers (4->8->16->32), 1x1 tanh head.
  int res_in_depth = 64;
  std::array<int, 3> res_enc_depths{256, 512, 512};
  std::array<int, 3> res_dec_depths{512, 256, 64};

  int bottleneck_depth = 8;
  int k_max = kMaxIterations;

  /// Published-size configuration.
  static ArchConfig full() { return ArchConfig{}; }

  /// Small configuration used by the shipped desk-scale model and the
  /// training regression tests.
  static ArchConfig toy() {
    ArchConfig a;
    a.ctx_enc_depths = {16, 24, 32, 48};
    a.ctx_dec_depths = {32, 24, 16};
    a.res_in_depth = 16;
    a.res_enc_depths = {32, 48, 48};
    a.res_dec_depths = {48, 32, 16};
    return a;
  }

  bool operator==(const ArchConfig&) const = default;
};

struct ConvParams {
  Tensor w;
  Tensor b;
};

/// All learned tensors of the context prediction network.
struct ContextPredictorParams {
  ConvParams enc[4];
  ChannelwiseFcParams cw;
  ConvParams dec[3];
  ConvParams head;
};

/// All learned tensors of the residual coder.
struct ResidualCoderParams {
  ConvParams in_conv;
  ConvLstmParams enc[3];
  ConvParams bottleneck;
  ConvLstmParams dec[3];
  ConvParams head;
};

/// The complete set of learned weights plus architecture hyperparameters.
/// Parameters are exposed both as typed structs (for the forward passes) and
/// as a flat named registry in a fixed order (for the optimizer and the
/// serializer).
class CodecModel {
 public:
  struct NamedParam {
    std::string name;
    Tensor tensor;
  };

  CodecModel() = default;

  /// Fresh model with truncated-normal weights (sigma 0.02), zero biases and
  /// forget-gate biases at one.
  static CodecModel init(const ArchConfig& arch, uint64_t seed);

  const ArchConfig& arch() const { return arch_; }
  ContextPredictorParams& context() { return ctx_; }
  const ContextPredictorParams& context() const { return ctx_; }
  ResidualCoderParams& residual() { return res_; }
  const ResidualCoderParams& residual() const { return res_; }

  const std::vector<NamedParam>& params() const { return registry_; }
  std::vector<Tensor> context_params() const;
  std::vector<Tensor> residual_params() const;

  long long param_count() const;
  long long context_param_count() const;
  long long residual_param_count() const;

  /// FNV-1a 64 over the architecture descriptor and all weights.
  uint64_t digest() const;

  void set_context_trainable(bool trainable);
  void set_residual_trainable(bool trainable);

  uint64_t train_steps = 0;
  float final_loss = 0.0f;

 private:
  void build_registry();

  ArchConfig arch_;
  ContextPredictorParams ctx_;
  ResidualCoderParams res_;
  std::vector<NamedParam> registry_;

  friend CodecModel load_model(std::span<const uint8_t> bytes);
};

}  // namespace tilecodec
