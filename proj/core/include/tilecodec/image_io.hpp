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

namespace tilecodec {

/// 8-bit RGB image, row-major, R,G,B interleaved.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, 0) {}

  uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<size_t>(y) * width + x) * 3;
  }
  const uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<size_t>(y) * width + x) * 3;
  }
  bool operator==(const RgbImage& o) const {
    return width == o.width && height == o.height && pixels == o.pixels;
  }
};

enum class ImageFormat { Ppm, Png };

/// Reads a P6 PPM (maxval 255) or a non-interlaced 8-bit PNG. PNG grayscale
/// is promoted to RGB and RGBA alpha is dropped; all chunk CRCs and the zlib
/// checksum are verified.
RgbImage read_image(const std::string& path);

/// Writes the image in the format implied by the file extension
/// (.ppm or .png). Output bytes are deterministic.
void write_image(const RgbImage& img, const std::string& path);
void write_image(const RgbImage& img, const std::string& path, ImageFormat f);

std::vector<uint8_t> encode_ppm(const RgbImage& img);
RgbImage decode_ppm(std::span<const uint8_t> bytes);
std::vector<uint8_t> encode_png(const RgbImage& img);
RgbImage decode_png(std::span<const uint8_t> bytes);

/// Size in bytes of the image's PNG encoding; the codec's lossless
/// compressed-size proxy for how difficult a region is to compress.
size_t png_encoded_size(const RgbImage& img);

namespace detail {
// Deflate-class primitives, exposed for tests.
std::vector<uint8_t> deflate_fixed(std::span<const uint8_t> data);
std::vector<uint8_t> inflate(std::span<const uint8_t> data);
uint32_t crc32(std::span<const uint8_t> data);
uint32_t adler32(std::span<const uint8_t> data);
}  // namespace detail

}  // namespace tilecodec
