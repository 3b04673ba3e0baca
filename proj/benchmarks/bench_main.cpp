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

#include <benchmark/benchmark.h>

#include "tilecodec/codec_pipeline.hpp"
#include "tilecodec/context_predictor.hpp"
#include "tilecodec/image_io.hpp"
#include "tilecodec/residual_coder.hpp"
#include "tilecodec/synth.hpp"
#include "tilecodec/trainer.hpp"

using namespace tilecodec;

namespace {

CodecModel& toy_model() {
  static CodecModel m = CodecModel::init(ArchConfig::toy(), 1);
  return m;
}

Tensor random_input(const Shape& s, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(static_cast<size_t>(s.numel()));
  for (auto& x : v) x = rng.uniform(-1.0f, 1.0f);
  return Tensor::from(s, std::move(v));
}

}  // namespace

static void BM_Conv2dForward(benchmark::State& state) {
  Graph g;
  Tensor x = random_input({1, 32, 32, 32}, 2);
  Tensor w = random_input({3, 3, 32, 32}, 3);
  Tensor b = random_input({32}, 4);
  for (auto _ : state) {
    Tensor y = conv2d(g, x, w, b, 2);
    benchmark::DoNotOptimize(y.values().data());
  }
}
BENCHMARK(BM_Conv2dForward);

static void BM_ConvLstmStep(benchmark::State& state) {
  Graph g;
  const auto& p = toy_model().residual().enc[0];
  Tensor x = random_input({1, 32, 32, 16}, 5);
  ConvLstmState st = zero_lstm_state(1, 16, 16, 32);
  for (auto _ : state) {
    auto [out, next] = conv_lstm_step(g, x, st, p);
    benchmark::DoNotOptimize(out.values().data());
  }
}
BENCHMARK(BM_ConvLstmStep);

static void BM_PredictTile(benchmark::State& state) {
  RgbImage img = synth_corpus_image(96, 96, 6);
  ContextPatch ctx = build_context(img, 1, 1);
  for (auto _ : state) {
    TilePrediction pred = predict_tile(ctx, toy_model());
    benchmark::DoNotOptimize(pred.pixels.values().data());
  }
}
BENCHMARK(BM_PredictTile);

static void BM_EncodeResidualIterations(benchmark::State& state) {
  Tensor r0 = random_input({1, 32, 32, 3}, 7);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto iters = encode_residual(r0, k, toy_model(),
                                 BinarizeMode::Deterministic);
    benchmark::DoNotOptimize(iters.data());
  }
}
BENCHMARK(BM_EncodeResidualIterations)->Arg(1)->Arg(4)->Arg(8);

static void BM_EncodeImageConstant(benchmark::State& state) {
  RgbImage img = synth_corpus_image(128, 128, 8);
  EncodeConfig cfg;
  cfg.mode = EncodeConfig::Mode::Constant;
  cfg.k = 2;
  cfg.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    EncodeResult res = encode_image(img, cfg, toy_model());
    benchmark::DoNotOptimize(res.bytes.data());
  }
}
BENCHMARK(BM_EncodeImageConstant)->Arg(1)->Arg(2);

static void BM_Psnr(benchmark::State& state) {
  RgbImage a = synth_corpus_image(256, 256, 9);
  RgbImage b = synth_corpus_image(256, 256, 10);
  for (auto _ : state) benchmark::DoNotOptimize(psnr(a, b));
}
BENCHMARK(BM_Psnr);

static void BM_PngEncode(benchmark::State& state) {
  RgbImage img = synth_corpus_image(256, 256, 11);
  for (auto _ : state) {
    auto bytes = encode_png(img);
    benchmark::DoNotOptimize(bytes.data());
  }
}
BENCHMARK(BM_PngEncode);

static void BM_SelectPatches(benchmark::State& state) {
  RgbImage img = synth_corpus_image(384, 384, 12);
  for (auto _ : state) {
    auto patches = select_patches(img, 100);
    benchmark::DoNotOptimize(patches.data());
  }
}
BENCHMARK(BM_SelectPatches);

BENCHMARK_MAIN();
