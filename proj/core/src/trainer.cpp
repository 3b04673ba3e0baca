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

#include "tilecodec/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "tilecodec/context_predictor.hpp"
#include "tilecodec/errors.hpp"
#include "tilecodec/residual_coder.hpp"
#include "tilecodec/rng.hpp"

namespace tilecodec {

float lr_schedule(const TrainConfig& cfg, long long step) {
  if (step < 0) throw ConfigError("negative training step");
  const long long n = step / cfg.decay_step;
  return cfg.lr0 *
         static_cast<float>(std::pow(static_cast<double>(cfg.decay),
                                     static_cast<double>(n)));
}

std::vector<PatchRecord> select_patches(const RgbImage& img, int n,
                                        int source_id) {
  const int patch = 2 * kTileSize;
  if (img.width < patch || img.height < patch)
    throw ConfigError("image " + std::to_string(img.width) + "x" +
                      std::to_string(img.height) + " smaller than a " +
                      std::to_string(patch) + "x" + std::to_string(patch) +
                      " patch");
  std::vector<PatchRecord> candidates;
  for (int y = 0; y + patch <= img.height; y += kTileSize)
    for (int x = 0; x + patch <= img.width; x += kTileSize) {
      RgbImage crop(patch, patch);
      for (int row = 0; row < patch; ++row)
        std::copy_n(img.at(x, y + row), patch * 3, crop.at(0, row));
      PatchRecord rec;
      rec.source_id = source_id;
      rec.difficulty = png_encoded_size(crop);
      rec.pixels = std::move(crop.pixels);
      candidates.push_back(std::move(rec));
    }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const PatchRecord& a, const PatchRecord& b) {
                     return a.difficulty > b.difficulty;
                   });
  if (static_cast<int>(candidates.size()) > n) candidates.resize(n);
  return candidates;
}

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, float beta1,
                             float beta2, float epsilon)
    : params_(std::move(params)),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(static_cast<size_t>(p.numel()), 0.0f);
    v_.emplace_back(static_cast<size_t>(p.numel()), 0.0f);
  }
}

void AdamOptimizer::step(float lr) {
  ++t_;
  beta1_t_ *= beta1_;
  beta2_t_ *= beta2_;
  const float bc1 = static_cast<float>(1.0 - beta1_t_);
  const float bc2 = static_cast<float>(1.0 - beta2_t_);
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Tensor& p = params_[pi];
    auto values = p.values();
    const auto grad = p.grad();
    float* m = m_[pi].data();
    float* v = v_[pi].data();
    for (size_t i = 0; i < values.size(); ++i) {
      const float g = grad.empty() ? 0.0f : grad[i];
      m[i] = beta1_ * m[i] + (1.0f - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0f - beta2_) * g * g;
      const float m_hat = m[i] / bc1;
      const float v_hat = v[i] / bc2;
      values[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
    p.zero_grad();
  }
}

namespace {

constexpr int kPatch = 2 * kTileSize;
constexpr int kPatchValues = kPatch * kPatch * 3;
constexpr int kQuadValues = kTileSize * kTileSize * 3;

struct BatchSampler {
  explicit BatchSampler(size_t n, uint64_t seed) : order(n), rng(seed) {
    for (size_t i = 0; i < n; ++i) order[i] = i;
    shuffle();
  }
  size_t next() {
    if (cursor == order.size()) {
      cursor = 0;
      shuffle();
    }
    return order[cursor++];
  }
  void shuffle() {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  std::vector<size_t> order;
  Rng rng;
  size_t cursor = 0;
};

// Masked context input [B,64,64,3] and true-quadrant target [B,32,32,3].
// When `border_aug` is given, a fraction of samples additionally lose their
// left or top context half, matching what build_context produces for tiles
// on the image border.
void fill_context_batch(const std::vector<PatchRecord>& corpus,
                        const std::vector<size_t>& ids, Tensor& x,
                        Tensor& target, Rng* border_aug) {
  auto xv = x.values();
  auto tv = target.values();
  for (size_t b = 0; b < ids.size(); ++b) {
    const uint8_t* p = corpus[ids[b]].pixels.data();
    float* xb = xv.data() + b * kPatchValues;
    float* tb = tv.data() + b * kQuadValues;
    bool drop_left = false, drop_top = false;
    if (border_aug) {
      drop_left = border_aug->uniform() < 0.125f;
      drop_top = border_aug->uniform() < 0.125f;
    }
    for (int y = 0; y < kPatch; ++y)
      for (int x2 = 0; x2 < kPatch; ++x2)
        for (int c = 0; c < 3; ++c) {
          const float val = normalize_pixel(p[(y * kPatch + x2) * 3 + c]);
          bool masked = y >= kTileSize && x2 >= kTileSize;
          masked |= drop_left && x2 < kTileSize;
          masked |= drop_top && y < kTileSize;
          xb[(y * kPatch + x2) * 3 + c] = masked ? 0.0f : val;
          if (y >= kTileSize && x2 >= kTileSize)
            tb[((y - kTileSize) * kTileSize + (x2 - kTileSize)) * 3 + c] = val;
        }
  }
}

void validate(const std::vector<PatchRecord>& corpus, const TrainConfig& cfg) {
  if (corpus.empty()) throw ConfigError("training corpus is empty");
  if (cfg.batch_size <= 0 || cfg.steps < 0 || cfg.unroll < 1 ||
      cfg.decay_step <= 0)
    throw ConfigError("invalid training configuration");
  for (const auto& rec : corpus)
    if (rec.pixels.size() != kPatchValues)
      throw ConfigError("patch record has wrong pixel count");
}

}  // namespace

void train_context(CodecModel& model, const std::vector<PatchRecord>& corpus,
                   const TrainConfig& cfg, const TrainLogFn& log) {
  validate(corpus, cfg);
  model.set_context_trainable(true);
  model.set_residual_trainable(false);
  AdamOptimizer opt(model.context_params());
  BatchSampler sampler(corpus.size(), cfg.seed);
  Rng border_aug(cfg.seed ^ 0x5851f42d4c957f2dull);

  const int b = cfg.batch_size;
  Tensor x = Tensor::zeros({b, kPatch, kPatch, 3});
  Tensor target = Tensor::zeros({b, kTileSize, kTileSize, 3});
  float last_loss = 0.0f;
  std::vector<size_t> ids(static_cast<size_t>(b));
  for (long long step = 0; step < cfg.steps; ++step) {
    for (auto& id : ids) id = sampler.next();
    fill_context_batch(corpus, ids, x, target, &border_aug);
    Graph g;
    Tensor pred = context_predictor_forward(g, x, model.context());
    Tensor loss = mean_abs(g, elementwise_sub(g, pred, target));
    g.backward(loss);
    const float lr = lr_schedule(cfg, step);
    opt.step(lr);
    last_loss = loss.item();
    if (log) log({step, lr, last_loss});
  }
  model.train_steps += static_cast<uint64_t>(cfg.steps);
  model.final_loss = last_loss;
  model.set_context_trainable(false);
}

void train_residual(CodecModel& model, const std::vector<PatchRecord>& corpus,
                    const TrainConfig& cfg, const TrainLogFn& log) {
  validate(corpus, cfg);
  model.set_context_trainable(false);
  model.set_residual_trainable(true);
  AdamOptimizer opt(model.residual_params());
  BatchSampler sampler(corpus.size(), cfg.seed);
  Rng noise(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  Rng border_aug(cfg.seed ^ 0x5851f42d4c957f2dull);

  const int b = cfg.batch_size;
  Tensor x = Tensor::zeros({b, kPatch, kPatch, 3});
  Tensor target = Tensor::zeros({b, kTileSize, kTileSize, 3});
  float last_loss = 0.0f;
  std::vector<size_t> ids(static_cast<size_t>(b));
  for (long long step = 0; step < cfg.steps; ++step) {
    for (auto& id : ids) id = sampler.next();
    fill_context_batch(corpus, ids, x, target, &border_aug);

    // Frozen context prediction, quantized like the codec would.
    Graph g;
    Tensor pred = context_predictor_forward(g, x, model.context());
    std::vector<float> r0v(static_cast<size_t>(b) * kQuadValues);
    {
      const auto pv = pred.values();
      const auto tv = target.values();
      for (size_t i = 0; i < r0v.size(); ++i)
        r0v[i] = tv[i] - normalize_pixel(quantize_output(pv[i]));
    }
    Tensor r0 = Tensor::from({b, kTileSize, kTileSize, 3}, std::move(r0v));

    ResidualEncoderState enc_st = zero_encoder_state(model.arch(), b);
    ResidualDecoderState dec_st = zero_decoder_state(model.arch(), b);
    Tensor r = r0;
    Tensor j, loss;
    // Linear ramp over the per-iteration L1 terms, normalized to keep the
    // total weight at cfg.unroll. Early partials already appear inside every
    // J_i; with flat weights their gradient share starves the refinement
    // tail and late iterations stop improving.
    const float ramp = 2.0f / static_cast<float>(cfg.unroll + 1);
    for (int i = 0; i < cfg.unroll; ++i) {
      Tensor z = residual_encode_step(g, r, enc_st, model.residual());
      Tensor bits = binarize_stochastic(g, z, noise);
      Tensor p = residual_decode_step(g, bits, dec_st, model.residual());
      j = j.valid() ? elementwise_add(g, j, p) : p;
      Tensor diff = elementwise_sub(g, r0, j);
      Tensor l = scale(g, mean_abs(g, diff),
                       ramp * static_cast<float>(i + 1));
      loss = loss.valid() ? elementwise_add(g, loss, l) : l;
      r = diff;
    }
    g.backward(loss);
    const float lr = lr_schedule(cfg, step);
    opt.step(lr);
    last_loss = loss.item();
    if (log) log({step, lr, last_loss});
  }
  model.train_steps += static_cast<uint64_t>(cfg.steps);
  model.final_loss = last_loss;
  model.set_residual_trainable(false);
}

}  // namespace tilecodec
