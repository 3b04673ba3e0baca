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

#include "tilecodec/image_io.hpp"
#include "tilecodec/model.hpp"
#include "tilecodec/tensor.hpp"

namespace tilecodec {

/// 64x64x3 context window in normalized [-1,1] space. The bottom-right
/// 32x32 quadrant (the tile being predicted) is always the neutral value 0,
/// as is anything outside the image.
struct ContextPatch {
  Tensor pixels;  // [1,64,64,3]
};

/// 32x32x3 prediction in the network's [-1,1] output range.
struct TilePrediction {
  Tensor pixels;  // [1,32,32,3]
};

/// Forward pass of the context prediction network for a [B,64,64,3] batch:
/// four stride-2 convolutions with leaky-relu, the channel-wise FC block,
/// three stride-2 upsampling convolutions with relu, and a 1x1 tanh head.
Tensor context_predictor_forward(Graph& g, const Tensor& batch,
                                 const ContextPredictorParams& params);

/// Single-tile prediction; pure in the model and the patch.
TilePrediction predict_tile(const ContextPatch& ctx, const CodecModel& model);

/// Assembles the context window for tile (tile_row, tile_col) from decoded
/// pixels: the 64x64 crop whose bottom-right quadrant is the target tile.
/// Regions outside the buffer and the target quadrant are neutral-filled.
/// `decoded` is the tile-padded reconstruction buffer.
ContextPatch build_context(const RgbImage& decoded, int tile_row,
                           int tile_col);

}  // namespace tilecodec
