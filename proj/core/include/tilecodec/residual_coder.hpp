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
#include <vector>

#include "tilecodec/model.hpp"
#include "tilecodec/nn_layers.hpp"
#include "tilecodec/rng.hpp"
#include "tilecodec/tensor.hpp"

namespace tilecodec {

/// LSTM states of the three encoder (resp. decoder) layers. States persist
/// across the iterations of one tile and reset between tiles.
struct ResidualEncoderState {
  ConvLstmState layers[3];
};
struct ResidualDecoderState {
  ConvLstmState layers[3];
};

ResidualEncoderState zero_encoder_state(const ArchConfig& arch, int batch);
ResidualDecoderState zero_decoder_state(const ArchConfig& arch, int batch);

/// Encoder half of one iteration: residual [B,32,32,3] -> bottleneck
/// pre-activation [B,4,4,8] (binarize separately).
Tensor residual_encode_step(Graph& g, const Tensor& residual,
                            ResidualEncoderState& state,
                            const ResidualCoderParams& params);

/// Decoder half of one iteration: +-1 code tensor [B,4,4,8] -> partial
/// reconstruction [B,32,32,3].
Tensor residual_decode_step(Graph& g, const Tensor& code,
                            ResidualDecoderState& state,
                            const ResidualCoderParams& params);

enum class BinarizeMode { Deterministic, Stochastic };

/// One iteration's outputs: the partial reconstruction P_i and its 128 bits.
struct IterationOutput {
  Tensor partial;
  BinaryCode code;
};

/// Progressively encodes a [1,32,32,3] residual: iteration i consumes the
/// remaining residual r0 - J_{i-1} and emits 128 bits. Stochastic mode needs
/// an rng and is for training-time use only.
std::vector<IterationOutput> encode_residual(const Tensor& r0, int k,
                                             const CodecModel& model,
                                             BinarizeMode mode,
                                             Rng* rng = nullptr);

/// Runs only the decoder half from the codes; bit-exact equal to the
/// encoder's internal reconstruction (same arithmetic, same order).
Tensor decode_residual(const std::vector<BinaryCode>& codes,
                       const CodecModel& model);

/// Left-fold sum of the partials in iteration order; the decoder-side J.
Tensor sum_partials(const std::vector<IterationOutput>& iterations);

/// Output quantizer: round(min(max(v*142 + 128, 0), 255)), round half away
/// from zero.
uint8_t quantize_output(float normalized);

}  // namespace tilecodec
