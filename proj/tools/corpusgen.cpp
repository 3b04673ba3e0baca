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

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>

#include "tilecodec/image_io.hpp"
#include "tilecodec/synth.hpp"

// Deterministic synthetic image corpus for desk-scale training and tests.
int main(int argc, char** argv) {
  CLI::App app{"tilecodec-corpusgen: deterministic synthetic image corpus"};
  std::string out_dir;
  int count = 20, width = 384, height = 384;
  uint64_t seed = 1;
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--count", count, "Number of images");
  app.add_option("--width", width, "Image width");
  app.add_option("--height", height, "Image height");
  app.add_option("--seed", seed, "Base seed");
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    tilecodec::RgbImage img =
        tilecodec::synth_corpus_image(width, height, seed + 1000ull * i);
    char name[512];
    std::snprintf(name, sizeof(name), "%s/synth_%03d.png", out_dir.c_str(), i);
    tilecodec::write_image(img, name);
  }
  std::printf("{\"images\":%d,\"dir\":\"%s\"}\n", count, out_dir.c_str());
  return 0;
}
