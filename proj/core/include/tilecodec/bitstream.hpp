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
#include <span>
#include <string>
#include <vector>

#include "tilecodec/model.hpp"
#include "tilecodec/nn_layers.hpp"

namespace tilecodec {

/// Encoded-image container header. All multi-byte integers little-endian.
/// Layout (21 bytes):
///   magic "TNC1" | version u8 | width u16 | height u16 | tile_size u8 |
///   mode u8 | mode_param u16 | model_digest u64
/// width/height are the pre-padding image dimensions. mode_param holds k for
/// constant mode, or the PSNR target in 8.8 fixed point for adaptive mode.
struct StreamHeader {
  uint16_t width = 0;
  uint16_t height = 0;
  uint8_t tile_size = kTileSize;
  uint8_t mode = 0;  // 0 constant, 1 adaptive
  uint16_t mode_param = 0;
  uint64_t model_digest = 0;

  int tile_rows() const { return (height + tile_size - 1) / tile_size; }
  int tile_cols() const { return (width + tile_size - 1) / tile_size; }
};

inline constexpr size_t kStreamHeaderBytes = 21;
inline constexpr uint8_t kStreamVersion = 1;

/// Per-tile iteration counts, row-major over the tile grid. k = 0 means the
/// tile ships no residual bits (context prediction only).
struct TilePlan {
  int rows = 0;
  int cols = 0;
  std::vector<uint8_t> k;

  long long total_iterations() const {
    long long n = 0;
    for (uint8_t v : k) n += v;
    return n;
  }
};

/// Serializes header, plan table (one u8 per tile) and the packed codes.
/// Codes are packed MSB-first, +1 -> bit 1, in tile raster order, iteration
/// order within a tile, row-major x depth-major within an iteration; a final
/// partial byte is zero padded.
std::vector<uint8_t> write_stream(const StreamHeader& header,
                                  const TilePlan& plan,
                                  const std::vector<BinaryCode>& codes);

struct ParsedStream {
  StreamHeader header;
  TilePlan plan;
  std::vector<BinaryCode> codes;  // tile raster order, iteration-major
};

/// Exact inverse of write_stream. Rejects bad magic, unsupported versions,
/// truncation and trailing bytes with distinct error kinds.
ParsedStream read_stream(std::span<const uint8_t> bytes);

/// Total stream size for a plan: header + plan table + packed payload.
size_t stream_size_bytes(const TilePlan& plan);

// ---------------------------------------------------------------------------
// Model checkpoint format "TNCM": architecture descriptor, named weight
// tensors (float32, lossless), training metadata, digest.
// ---------------------------------------------------------------------------

std::vector<uint8_t> save_model(const CodecModel& model);
CodecModel load_model(std::span<const uint8_t> bytes);

void save_model_file(const CodecModel& model, const std::string& path);
CodecModel load_model_file(const std::string& path);

}  // namespace tilecodec
