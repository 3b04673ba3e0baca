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
#include <vector>

#include "tilecodec/image_io.hpp"
#include "tilecodec/model.hpp"
#include "tilecodec/tensor.hpp"

namespace tilecodec {

enum class TrainPhase { Context, Residual };

struct TrainConfig {
  int batch_size = 32;
  float lr0 = 0.5f;  // as-published value; desk-scale runs override it
  float decay = 0.95f;
  int decay_step = 20000;
  long long steps = 0;
  uint64_t seed = 0;
  TrainPhase phase = TrainPhase::Context;
  int unroll = 8;  // residual-phase iterations during training
};

/// Staircase schedule: lr0 * decay^(step / decay_step), integer division.
float lr_schedule(const TrainConfig& cfg, long long step);

/// One training patch: raw 64x64 RGB pixels, provenance and the
/// compressed-size difficulty that selected it.
struct PatchRecord {
  std::vector<uint8_t> pixels;  // 64*64*3 bytes
  int source_id = 0;
  size_t difficulty = 0;
};

/// Scores every 64x64 crop on the stride-32 grid by its losslessly
/// compressed size and returns the n most difficult, ties broken by
/// position. Returns all candidates when fewer than n exist.
std::vector<PatchRecord> select_patches(const RgbImage& img, int n = 100,
                                        int source_id = 0);

/// Adam with conventional defaults. step() applies the accumulated
/// gradients at the given learning rate and clears them.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::vector<Tensor> params, float beta1 = 0.9f,
                         float beta2 = 0.999f, float epsilon = 1e-8f);
  void step(float lr);
  long long steps_taken() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
  float beta1_, beta2_, epsilon_;
  double beta1_t_ = 1.0;
  double beta2_t_ = 1.0;
  long long t_ = 0;
};

struct TrainLogRecord {
  long long step;
  float lr;
  float loss;
};
using TrainLogFn = std::function<void(const TrainLogRecord&)>;

/// Context phase: Adam on the mean L1 error between the predicted and true
/// bottom-right quadrant in normalized space. Deterministic given cfg.seed;
/// single-threaded.
void train_context(CodecModel& model, const std::vector<PatchRecord>& corpus,
                   const TrainConfig& cfg, const TrainLogFn& log = nullptr);

/// Residual phase: the context fragment stays frozen; each patch's residual
/// is unrolled cfg.unroll iterations with stochastic binarization and the
/// loss sums mean L1(R0 - J_i) over iterations.
void train_residual(CodecModel& model, const std::vector<PatchRecord>& corpus,
                    const TrainConfig& cfg, const TrainLogFn& log = nullptr);

}  // namespace tilecodec
