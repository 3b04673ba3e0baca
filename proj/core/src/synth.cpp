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

#include "tilecodec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tilecodec/errors.hpp"
#include "tilecodec/rng.hpp"

namespace tilecodec {

namespace {

struct Color {
  float r, g, b;
};

Color random_color(Rng& rng) {
  return {rng.uniform(10.0f, 245.0f), rng.uniform(10.0f, 245.0f),
          rng.uniform(10.0f, 245.0f)};
}

}  // namespace

RgbImage synth_corpus_image(int width, int height, uint64_t seed) {
  if (width <= 0 || height <= 0)
    throw ConfigError("synthetic image dimensions must be positive");
  Rng rng(seed);
  std::vector<float> buf(static_cast<size_t>(width) * height * 3);

  // Smooth background: two-color gradient plus a low-frequency wave.
  {
    const Color c0 = random_color(rng), c1 = random_color(rng);
    const float ang = rng.uniform(0.0f, 6.2831853f);
    const float dx = std::cos(ang), dy = std::sin(ang);
    const float wf = rng.uniform(0.5f, 2.0f);
    const float wp = rng.uniform(0.0f, 6.2831853f);
    const float span =
        std::fabs(dx) * width + std::fabs(dy) * height + 1.0f;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        float t = (dx * x + dy * y) / span + 0.5f;
        t = std::clamp(t + 0.08f * std::sin(wf * 6.2831853f * t + wp), 0.0f,
                       1.0f);
        float* p = buf.data() + (static_cast<size_t>(y) * width + x) * 3;
        p[0] = c0.r + t * (c1.r - c0.r);
        p[1] = c0.g + t * (c1.g - c0.g);
        p[2] = c0.b + t * (c1.b - c0.b);
      }
  }

  const int shapes = 4 + static_cast<int>(rng.uniform_index(4));
  for (int s = 0; s < shapes; ++s) {
    const Color col = random_color(rng);
    const bool circle = (rng.next_u32() & 1) != 0;
    const float soft = rng.uniform(0.5f, 6.0f);  // edge softness in pixels
    if (circle) {
      const float cx = rng.uniform(0.0f, static_cast<float>(width));
      const float cy = rng.uniform(0.0f, static_cast<float>(height));
      const float rad =
          rng.uniform(8.0f, 0.3f * static_cast<float>(std::min(width, height)));
      const int x0 = std::max(0, static_cast<int>(cx - rad - soft));
      const int x1 = std::min(width - 1, static_cast<int>(cx + rad + soft));
      const int y0 = std::max(0, static_cast<int>(cy - rad - soft));
      const int y1 = std::min(height - 1, static_cast<int>(cy + rad + soft));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const float d =
              std::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy)) - rad;
          const float a = std::clamp(0.5f - d / soft, 0.0f, 1.0f);
          if (a <= 0.0f) continue;
          float* p = buf.data() + (static_cast<size_t>(y) * width + x) * 3;
          p[0] += a * (col.r - p[0]);
          p[1] += a * (col.g - p[1]);
          p[2] += a * (col.b - p[2]);
        }
    } else {
      const int rw = 8 + static_cast<int>(rng.uniform_index(
                             static_cast<uint64_t>(std::max(8, width / 2))));
      const int rh = 8 + static_cast<int>(rng.uniform_index(
                             static_cast<uint64_t>(std::max(8, height / 2))));
      const int x0 = static_cast<int>(rng.uniform_index(
          static_cast<uint64_t>(std::max(1, width - rw))));
      const int y0 = static_cast<int>(rng.uniform_index(
          static_cast<uint64_t>(std::max(1, height - rh))));
      for (int y = y0; y < std::min(height, y0 + rh); ++y)
        for (int x = x0; x < std::min(width, x0 + rw); ++x) {
          float* p = buf.data() + (static_cast<size_t>(y) * width + x) * 3;
          p[0] = col.r;
          p[1] = col.g;
          p[2] = col.b;
        }
    }
  }

  // Striped texture bands: mid-frequency structure the coder can learn and
  // keep refining across iterations.
  const int bands = 2 + static_cast<int>(rng.uniform_index(3));
  for (int bnd = 0; bnd < bands; ++bnd) {
    const Color col = random_color(rng);
    const int rw = width / 4 + static_cast<int>(rng.uniform_index(
                                   static_cast<uint64_t>(width / 3 + 1)));
    const int rh = height / 4 + static_cast<int>(rng.uniform_index(
                                    static_cast<uint64_t>(height / 3 + 1)));
    const int x0 = static_cast<int>(
        rng.uniform_index(static_cast<uint64_t>(std::max(1, width - rw))));
    const int y0 = static_cast<int>(
        rng.uniform_index(static_cast<uint64_t>(std::max(1, height - rh))));
    const float freq = rng.uniform(0.15f, 0.9f);
    const float ang = rng.uniform(0.0f, 3.14159265f);
    const float ca = std::cos(ang), sa = std::sin(ang);
    const float mix = rng.uniform(0.35f, 0.8f);
    for (int y = y0; y < std::min(height, y0 + rh); ++y)
      for (int x = x0; x < std::min(width, x0 + rw); ++x) {
        const float a =
            mix * (0.5f + 0.5f * std::sin(freq * (ca * x + sa * y)));
        float* p = buf.data() + (static_cast<size_t>(y) * width + x) * 3;
        p[0] += a * (col.r - p[0]);
        p[1] += a * (col.g - p[1]);
        p[2] += a * (col.b - p[2]);
      }
  }

  // A noise region in roughly half the images: incompressible content that
  // forces residual bits without dominating the frame.
  if (rng.next_u32() & 1) {
    const int rw = std::max(16, width / 6);
    const int rh = std::max(16, height / 6);
    const int x0 = static_cast<int>(
        rng.uniform_index(static_cast<uint64_t>(std::max(1, width - rw))));
    const int y0 = static_cast<int>(
        rng.uniform_index(static_cast<uint64_t>(std::max(1, height - rh))));
    const float amp = rng.uniform(10.0f, 40.0f);
    for (int y = y0; y < std::min(height, y0 + rh); ++y)
      for (int x = x0; x < std::min(width, x0 + rw); ++x) {
        float* p = buf.data() + (static_cast<size_t>(y) * width + x) * 3;
        p[0] += rng.uniform(-amp, amp);
        p[1] += rng.uniform(-amp, amp);
        p[2] += rng.uniform(-amp, amp);
      }
  }

  RgbImage img(width, height);
  for (size_t i = 0; i < buf.size(); ++i)
    img.pixels[i] =
        static_cast<uint8_t>(std::lround(std::clamp(buf[i], 0.0f, 255.0f)));
  return img;
}

}  // namespace tilecodec
