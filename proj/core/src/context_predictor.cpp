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

#include "tilecodec/context_predictor.hpp"

#include "tilecodec/errors.hpp"

namespace tilecodec {

Tensor context_predictor_forward(Graph& g, const Tensor& batch,
                                 const ContextPredictorParams& params) {
  if (batch.shape().rank() != 4 || batch.shape()[1] != 2 * kTileSize ||
      batch.shape()[2] != 2 * kTileSize || batch.shape()[3] != 3)
    throw ShapeError("context batch must be Bx64x64x3, got " +
                     batch.shape().str());
  Tensor h = batch;
  for (int i = 0; i < 4; ++i)
    h = leaky_relu_act(g, conv2d(g, h, params.enc[i].w, params.enc[i].b, 2),
                       0.2f);
  // The channel-wise FC block is a linear bridge between the paths.
  h = channelwise_fc(g, h, params.cw);
  for (int i = 0; i < 3; ++i)
    h = relu_act(
        g, conv2d_transpose(g, h, params.dec[i].w, params.dec[i].b, 2));
  return tanh_act(g, conv2d(g, h, params.head.w, params.head.b, 1));
}

TilePrediction predict_tile(const ContextPatch& ctx, const CodecModel& model) {
  if (!ctx.pixels.valid())
    throw ConfigError("predict_tile called with an empty context patch");
  Graph g;
  return TilePrediction{
      context_predictor_forward(g, ctx.pixels, model.context())};
}

ContextPatch build_context(const RgbImage& decoded, int tile_row,
                           int tile_col) {
  const int rows = (decoded.height + kTileSize - 1) / kTileSize;
  const int cols = (decoded.width + kTileSize - 1) / kTileSize;
  if (tile_row < 0 || tile_row >= rows || tile_col < 0 || tile_col >= cols)
    throw ConfigError("tile (" + std::to_string(tile_row) + "," +
                      std::to_string(tile_col) + ") outside the " +
                      std::to_string(rows) + "x" + std::to_string(cols) +
                      " grid");

  const int y0 = tile_row * kTileSize - kTileSize;
  const int x0 = tile_col * kTileSize - kTileSize;
  std::vector<float> v(static_cast<size_t>(2 * kTileSize) * 2 * kTileSize * 3,
                       0.0f);
  for (int y = 0; y < 2 * kTileSize; ++y) {
    const int sy = y0 + y;
    if (sy < 0 || sy >= decoded.height) continue;
    for (int x = 0; x < 2 * kTileSize; ++x) {
      // The bottom-right quadrant is the tile being predicted: neutral fill.
      if (y >= kTileSize && x >= kTileSize) continue;
      const int sx = x0 + x;
      if (sx < 0 || sx >= decoded.width) continue;
      const uint8_t* p = decoded.at(sx, sy);
      float* d = v.data() + (static_cast<size_t>(y) * 2 * kTileSize + x) * 3;
      d[0] = normalize_pixel(p[0]);
      d[1] = normalize_pixel(p[1]);
      d[2] = normalize_pixel(p[2]);
    }
  }
  return ContextPatch{
      Tensor::from({1, 2 * kTileSize, 2 * kTileSize, 3}, std::move(v))};
}

}  // namespace tilecodec
