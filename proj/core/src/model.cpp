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

#include "tilecodec/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tilecodec/rng.hpp"

namespace tilecodec {

namespace {

// Truncated normal scaled by the receptive fan-in. A fixed small sigma
// leaves the stacked networks too quiet to train at desk scale: gradients
// into the early layers stay noise-dominated for thousands of steps.
Tensor init_weight(const Shape& s, long long fan_in, Rng& rng) {
  const float sigma =
      std::sqrt(1.0f / static_cast<float>(std::max<long long>(fan_in, 1)));
  std::vector<float> v(static_cast<size_t>(s.numel()));
  for (auto& x : v) x = rng.truncated_normal(sigma);
  return Tensor::from(s, std::move(v));
}

// fan_in of a [KH,KW,IC,OC] convolution kernel.
long long conv_fan_in(const Shape& s) {
  return static_cast<long long>(s[0]) * s[1] * s[2];
}

ConvLstmParams init_lstm(const Shape& wx_shape, int out_depth, Rng& rng,
                         int stride, bool transposed) {
  ConvLstmParams p;
  p.stride = stride;
  p.transposed = transposed;
  const long long fan = conv_fan_in(wx_shape) + out_depth;
  for (int gate = 0; gate < 4; ++gate) {
    p.wx[gate] = init_weight(wx_shape, fan, rng);
    p.bx[gate] = Tensor::zeros({out_depth});
    p.wh[gate] = init_weight({1, 1, out_depth, out_depth}, fan, rng);
  }
  // Forget gate starts open so early training can carry state across
  // iterations.
  std::fill(p.bx[1].values().begin(), p.bx[1].values().end(), 1.0f);
  return p;
}

}  // namespace

CodecModel CodecModel::init(const ArchConfig& arch, uint64_t seed) {
  CodecModel m;
  m.arch_ = arch;
  Rng rng(seed);

  // Context predictor.
  {
    const auto& d = arch.ctx_enc_depths;
    int in_depth = 3;
    for (int i = 0; i < 4; ++i) {
      Shape s{3, 3, in_depth, d[i]};
      m.ctx_.enc[i].w = init_weight(s, conv_fan_in(s), rng);
      m.ctx_.enc[i].b = Tensor::zeros({d[i]});
      in_depth = d[i];
    }
    // The per-channel dense stage sums 16 spatial taps per output.
    m.ctx_.cw.dw = init_weight({16, 4, 4, d[3]}, 16, rng);
    m.ctx_.cw.pw = init_weight({1, 1, d[3], d[3]}, d[3], rng);
    const auto& e = arch.ctx_dec_depths;
    int dec_in = d[3];
    for (int i = 0; i < 3; ++i) {
      Shape s{4, 4, dec_in, e[i]};
      // Stride-2 upsampling spreads the taps over 4 output positions.
      m.ctx_.dec[i].w = init_weight(s, conv_fan_in(s) / 4, rng);
      m.ctx_.dec[i].b = Tensor::zeros({e[i]});
      dec_in = e[i];
    }
    m.ctx_.head.w = init_weight({1, 1, e[2], 3}, e[2], rng);
    m.ctx_.head.b = Tensor::zeros({3});
  }

  // Residual coder.
  {
    Shape s_in{3, 3, 3, arch.res_in_depth};
    m.res_.in_conv.w = init_weight(s_in, conv_fan_in(s_in), rng);
    m.res_.in_conv.b = Tensor::zeros({arch.res_in_depth});
    int in_depth = arch.res_in_depth;
    for (int i = 0; i < 3; ++i) {
      const int out = arch.res_enc_depths[i];
      m.res_.enc[i] = init_lstm({3, 3, in_depth, out}, out, rng, 2, false);
      in_depth = out;
    }
    m.res_.bottleneck.w =
        init_weight({1, 1, in_depth, arch.bottleneck_depth}, in_depth, rng);
    m.res_.bottleneck.b = Tensor::zeros({arch.bottleneck_depth});
    in_depth = arch.bottleneck_depth;
    for (int i = 0; i < 3; ++i) {
      const int out = arch.res_dec_depths[i];
      m.res_.dec[i] = init_lstm({3, 3, in_depth, out}, out, rng, 2, true);
      in_depth = out;
    }
    m.res_.head.w = init_weight({1, 1, in_depth, 3}, in_depth, rng);
    m.res_.head.b = Tensor::zeros({3});
  }

  m.build_registry();
  return m;
}

void CodecModel::build_registry() {
  registry_.clear();
  auto add = [this](const std::string& name, const Tensor& t) {
    registry_.push_back({name, t});
  };
  static const char* gate_names[4] = {"i", "f", "g", "o"};

  for (int i = 0; i < 4; ++i) {
    add("ctx.enc" + std::to_string(i) + ".w", ctx_.enc[i].w);
    add("ctx.enc" + std::to_string(i) + ".b", ctx_.enc[i].b);
  }
  add("ctx.cw.dw", ctx_.cw.dw);
  add("ctx.cw.pw", ctx_.cw.pw);
  for (int i = 0; i < 3; ++i) {
    add("ctx.dec" + std::to_string(i) + ".w", ctx_.dec[i].w);
    add("ctx.dec" + std::to_string(i) + ".b", ctx_.dec[i].b);
  }
  add("ctx.head.w", ctx_.head.w);
  add("ctx.head.b", ctx_.head.b);

  add("res.in.w", res_.in_conv.w);
  add("res.in.b", res_.in_conv.b);
  for (int i = 0; i < 3; ++i)
    for (int gate = 0; gate < 4; ++gate) {
      const std::string base =
          "res.enc" + std::to_string(i) + "." + gate_names[gate];
      add(base + ".wx", res_.enc[i].wx[gate]);
      add(base + ".bx", res_.enc[i].bx[gate]);
      add(base + ".wh", res_.enc[i].wh[gate]);
    }
  add("res.bottleneck.w", res_.bottleneck.w);
  add("res.bottleneck.b", res_.bottleneck.b);
  for (int i = 0; i < 3; ++i)
    for (int gate = 0; gate < 4; ++gate) {
      const std::string base =
          "res.dec" + std::to_string(i) + "." + gate_names[gate];
      add(base + ".wx", res_.dec[i].wx[gate]);
      add(base + ".bx", res_.dec[i].bx[gate]);
      add(base + ".wh", res_.dec[i].wh[gate]);
    }
  add("res.head.w", res_.head.w);
  add("res.head.b", res_.head.b);
}

std::vector<Tensor> CodecModel::context_params() const {
  std::vector<Tensor> out;
  for (const auto& p : registry_)
    if (p.name.rfind("ctx.", 0) == 0) out.push_back(p.tensor);
  return out;
}

std::vector<Tensor> CodecModel::residual_params() const {
  std::vector<Tensor> out;
  for (const auto& p : registry_)
    if (p.name.rfind("res.", 0) == 0) out.push_back(p.tensor);
  return out;
}

long long CodecModel::param_count() const {
  long long n = 0;
  for (const auto& p : registry_) n += p.tensor.numel();
  return n;
}

long long CodecModel::context_param_count() const {
  long long n = 0;
  for (const auto& p : registry_)
    if (p.name.rfind("ctx.", 0) == 0) n += p.tensor.numel();
  return n;
}

long long CodecModel::residual_param_count() const {
  long long n = 0;
  for (const auto& p : registry_)
    if (p.name.rfind("res.", 0) == 0) n += p.tensor.numel();
  return n;
}

uint64_t CodecModel::digest() const {
  uint64_t h = 14695981039346656037ull;
  auto mix_bytes = [&h](const void* data, size_t n) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  auto mix_int = [&](long long v) { mix_bytes(&v, sizeof(v)); };

  for (int d : arch_.ctx_enc_depths) mix_int(d);
  for (int d : arch_.ctx_dec_depths) mix_int(d);
  mix_int(arch_.res_in_depth);
  for (int d : arch_.res_enc_depths) mix_int(d);
  for (int d : arch_.res_dec_depths) mix_int(d);
  mix_int(arch_.bottleneck_depth);
  mix_int(arch_.k_max);

  for (const auto& p : registry_) {
    mix_bytes(p.name.data(), p.name.size());
    mix_int(p.tensor.shape().rank());
    for (int i = 0; i < p.tensor.shape().rank(); ++i)
      mix_int(p.tensor.shape()[i]);
    mix_bytes(p.tensor.values().data(),
              p.tensor.values().size() * sizeof(float));
  }
  return h;
}

void CodecModel::set_context_trainable(bool trainable) {
  for (auto& p : registry_)
    if (p.name.rfind("ctx.", 0) == 0) p.tensor.set_requires_grad(trainable);
}

void CodecModel::set_residual_trainable(bool trainable) {
  for (auto& p : registry_)
    if (p.name.rfind("res.", 0) == 0) p.tensor.set_requires_grad(trainable);
}

}  // namespace tilecodec
