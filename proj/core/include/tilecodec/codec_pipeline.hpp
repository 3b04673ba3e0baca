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

#include <functional>
#include <span>
#include <vector>

#include "tilecodec/bitstream.hpp"
#include "tilecodec/image_io.hpp"
#include "tilecodec/model.hpp"
#include "tilecodec/residual_coder.hpp"

namespace tilecodec {

struct EncodeConfig {
  enum class Mode { Constant, Adaptive };
  Mode mode = Mode::Constant;
  int k = 4;                  // constant mode: iterations per tile, 0..16
  double target_psnr = 32.0;  // adaptive mode: per-tile quality target in dB
  int threads = 0;            // wavefront parallelism; 0 = hardware threads
  // Ablation switch: when false the context predictor is bypassed and every
  // tile is predicted as mid-gray. Such runs produce no decodable stream
  // (bytes stays empty); they exist for measuring what context prediction
  // contributes.
  bool use_context = true;
};

struct EncodeResult {
  std::vector<uint8_t> bytes;  // complete stream; empty for ablation runs
  RgbImage reconstruction;     // encoder-internal decode, cropped to source
  TilePlan plan;
  long long payload_bits = 0;
  double psnr_vs_source = 0.0;  // +inf sentinel when lossless
};

/// Tile-by-tile encode in raster order with decoded-context feedback.
/// Images whose dimensions are not multiples of 32 are padded by edge
/// replication; the header records the pre-padding size. Tiles with no
/// mutual dependency are processed as anti-diagonal wavefronts when
/// cfg.threads allows; the output is invariant to the thread count.
EncodeResult encode_image(const RgbImage& img, const EncodeConfig& cfg,
                          const CodecModel& model);

/// Bit-exact reproduction of the encoder's internal reconstruction.
RgbImage decode_image(std::span<const uint8_t> stream, const CodecModel& model);

/// Per-tile quality functional for the adaptive allocator: arguments are the
/// original and reconstructed 32x32 RGB tiles (3072 bytes each). Returns a
/// score in the same orientation as PSNR (higher is better).
using TileQualityFn = std::function<double(const uint8_t* orig,
                                           const uint8_t* recon)>;

/// PSNR over one 32x32x3 tile; +infinity when identical.
double tile_psnr(const uint8_t* orig, const uint8_t* recon);

/// Minimum k in [0, k_max] whose quantized reconstruction
/// quantize(renormalize(pred) + J_k) meets the target quality; k_max if the
/// target is never reached. Appends the emitted codes for the returned k to
/// `codes_out` (nothing for k = 0). The evaluation is a single pass: the
/// recurrence never rewrites earlier iterations.
int allocate_adaptive(const Tensor& r0, const uint8_t* orig_tile,
                      const uint8_t* pred_tile, double target_psnr,
                      const CodecModel& model,
                      std::vector<BinaryCode>* codes_out,
                      const TileQualityFn& quality = nullptr);

/// Whole-image PSNR: 10*log10(255^2 / MSE) over all RGB samples; +infinity
/// sentinel for identical images.
double psnr(const RgbImage& a, const RgbImage& b);

}  // namespace tilecodec
