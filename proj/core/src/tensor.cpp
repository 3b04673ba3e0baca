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

#include "tilecodec/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tilecodec/errors.hpp"

namespace tilecodec {

std::string Shape::str() const {
  std::string s;
  for (int i = 0; i < rank_; ++i) {
    if (i) s += 'x';
    s += std::to_string(dims_[i]);
  }
  return s.empty() ? "scalar" : s;
}

Tensor Tensor::zeros(const Shape& s, bool requires_grad) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = s;
  impl->data.assign(static_cast<size_t>(s.numel()), 0.0f);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::full(const Shape& s, float value, bool requires_grad) {
  Tensor t = zeros(s, requires_grad);
  std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
  return t;
}

Tensor Tensor::from(const Shape& s, std::vector<float> values,
                    bool requires_grad) {
  if (static_cast<long long>(values.size()) != s.numel())
    throw ShapeError("tensor data length " + std::to_string(values.size()) +
                     " does not match shape " + s.str());
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = s;
  impl->data = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(float value) { return from({1}, {value}); }

float Tensor::item() const {
  if (numel() != 1)
    throw ShapeError("item() requires a scalar tensor, got shape " +
                     shape().str());
  return impl_->data[0];
}

std::span<float> Tensor::grad_buffer() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0f);
  return impl_->grad;
}

void Tensor::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0f);
}

void Graph::backward(const Tensor& loss) {
  if (loss.numel() != 1)
    throw ShapeError("backward() requires a scalar loss, got shape " +
                     loss.shape().str());
  loss.impl_->grad.assign(1, 1.0f);
  for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
    if (it->out->grad.empty()) continue;  // not on a path to the loss
    it->back();
  }
}

namespace detail {

float* grad_accum(TensorImpl& t) {
  if (t.grad.empty()) t.grad.assign(t.data.size(), 0.0f);
  return t.grad.data();
}

void check_finite(const Tensor& t, const char* op) {
#ifndef NDEBUG
  for (float v : t.values()) {
    if (!std::isfinite(v)) {
      assert(false && "non-finite value produced by forward op");
      (void)op;
      break;
    }
  }
#else
  (void)t;
  (void)op;
#endif
}

}  // namespace detail

namespace {

using detail::grad_accum;

bool track_any(std::initializer_list<const Tensor*> ts) {
  for (const Tensor* t : ts)
    if (t->requires_grad()) return true;
  return false;
}

void require_rank(const Tensor& t, int rank, const char* what) {
  if (t.shape().rank() != rank)
    throw ShapeError(std::string(what) + " must have rank " +
                     std::to_string(rank) + ", got shape " + t.shape().str());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shapes " + a.shape().str() +
                     " and " + b.shape().str() + " differ");
}

void require_stride(int stride) {
  if (stride != 1 && stride != 2)
    throw ConfigError("stride must be 1 or 2, got " + std::to_string(stride));
}

struct ConvGeom {
  int B, H, W, IC, KH, KW, OC, OH, OW, pad_t, pad_l, stride;
};

ConvGeom conv_geometry(const Tensor& input, const Tensor& weights,
                       const Tensor* bias, int stride) {
  require_rank(input, 4, "conv input");
  require_rank(weights, 4, "conv weights");
  require_stride(stride);
  ConvGeom cg{};
  cg.B = input.shape()[0];
  cg.H = input.shape()[1];
  cg.W = input.shape()[2];
  cg.IC = input.shape()[3];
  cg.KH = weights.shape()[0];
  cg.KW = weights.shape()[1];
  cg.OC = weights.shape()[3];
  cg.stride = stride;
  if (weights.shape()[2] != cg.IC)
    throw ShapeError("conv weights expect input depth " +
                     std::to_string(weights.shape()[2]) + ", input has depth " +
                     std::to_string(cg.IC) + " (input " + input.shape().str() +
                     ", weights " + weights.shape().str() + ")");
  if (bias) {
    require_rank(*bias, 1, "conv bias");
    if (bias->shape()[0] != cg.OC)
      throw ShapeError("conv bias length " +
                       std::to_string(bias->shape()[0]) +
                       " does not match output depth " + std::to_string(cg.OC));
  }
  cg.OH = (cg.H + stride - 1) / stride;
  cg.OW = (cg.W + stride - 1) / stride;
  const int pad_h = std::max((cg.OH - 1) * stride + cg.KH - cg.H, 0);
  const int pad_w = std::max((cg.OW - 1) * stride + cg.KW - cg.W, 0);
  cg.pad_t = pad_h / 2;  // odd padding goes to the bottom/right
  cg.pad_l = pad_w / 2;
  return cg;
}

// y[b,oy,ox,oc] = bias[oc] + sum_{ky,kx,ic} x[b, oy*s+ky-pad, ox*s+kx-pad, ic]
//                                           * w[ky,kx,ic,oc]
void conv2d_fwd_kernel(const float* x, const float* w, const float* bias,
                       float* y, const ConvGeom& c) {
  const int IC = c.IC, OC = c.OC;
  for (int b = 0; b < c.B; ++b) {
    for (int oy = 0; oy < c.OH; ++oy) {
      for (int ox = 0; ox < c.OW; ++ox) {
        float* yr = y + ((static_cast<long long>(b) * c.OH + oy) * c.OW + ox) * OC;
        if (bias)
          std::memcpy(yr, bias, sizeof(float) * OC);
        else
          std::memset(yr, 0, sizeof(float) * OC);
        for (int ky = 0; ky < c.KH; ++ky) {
          const int iy = oy * c.stride + ky - c.pad_t;
          if (iy < 0 || iy >= c.H) continue;
          for (int kx = 0; kx < c.KW; ++kx) {
            const int ix = ox * c.stride + kx - c.pad_l;
            if (ix < 0 || ix >= c.W) continue;
            const float* xr =
                x + ((static_cast<long long>(b) * c.H + iy) * c.W + ix) * IC;
            const float* wr = w + (static_cast<long long>(ky) * c.KW + kx) * IC * OC;
            for (int ic = 0; ic < IC; ++ic) {
              const float v = xr[ic];
              const float* wc = wr + static_cast<long long>(ic) * OC;
              for (int oc = 0; oc < OC; ++oc) yr[oc] += v * wc[oc];
            }
          }
        }
      }
    }
  }
}

void conv2d_bwd_kernel(const float* x, const float* w, const float* gy,
                       float* gx, float* gw, float* gb, const ConvGeom& c) {
  const int IC = c.IC, OC = c.OC;
  for (int b = 0; b < c.B; ++b) {
    for (int oy = 0; oy < c.OH; ++oy) {
      for (int ox = 0; ox < c.OW; ++ox) {
        const float* gr =
            gy + ((static_cast<long long>(b) * c.OH + oy) * c.OW + ox) * OC;
        if (gb)
          for (int oc = 0; oc < OC; ++oc) gb[oc] += gr[oc];
        for (int ky = 0; ky < c.KH; ++ky) {
          const int iy = oy * c.stride + ky - c.pad_t;
          if (iy < 0 || iy >= c.H) continue;
          for (int kx = 0; kx < c.KW; ++kx) {
            const int ix = ox * c.stride + kx - c.pad_l;
            if (ix < 0 || ix >= c.W) continue;
            const long long xoff =
                ((static_cast<long long>(b) * c.H + iy) * c.W + ix) * IC;
            const long long woff =
                (static_cast<long long>(ky) * c.KW + kx) * IC * OC;
            if (gw) {
              const float* xr = x + xoff;
              for (int ic = 0; ic < IC; ++ic) {
                const float v = xr[ic];
                float* gwc = gw + woff + static_cast<long long>(ic) * OC;
                for (int oc = 0; oc < OC; ++oc) gwc[oc] += v * gr[oc];
              }
            }
            if (gx) {
              float* gxr = gx + xoff;
              for (int ic = 0; ic < IC; ++ic) {
                const float* wc = w + woff + static_cast<long long>(ic) * OC;
                float acc = 0.0f;
                for (int oc = 0; oc < OC; ++oc) acc += wc[oc] * gr[oc];
                gxr[ic] += acc;
              }
            }
          }
        }
      }
    }
  }
}

// Transposed geometry: output spatial extent is input * stride; the op is the
// adjoint of a same-padded conv2d from the output extent back to the input
// extent with the same kernel.
ConvGeom conv_transpose_geometry(const Tensor& input, const Tensor& weights,
                                 const Tensor* bias, int stride) {
  require_rank(input, 4, "conv_transpose input");
  require_rank(weights, 4, "conv_transpose weights");
  require_stride(stride);
  ConvGeom cg{};
  cg.B = input.shape()[0];
  cg.H = input.shape()[1];
  cg.W = input.shape()[2];
  cg.IC = input.shape()[3];
  cg.KH = weights.shape()[0];
  cg.KW = weights.shape()[1];
  cg.OC = weights.shape()[3];
  cg.stride = stride;
  if (weights.shape()[2] != cg.IC)
    throw ShapeError("conv_transpose weights expect input depth " +
                     std::to_string(weights.shape()[2]) + ", input has depth " +
                     std::to_string(cg.IC) + " (input " + input.shape().str() +
                     ", weights " + weights.shape().str() + ")");
  if (bias) {
    require_rank(*bias, 1, "conv_transpose bias");
    if (bias->shape()[0] != cg.OC)
      throw ShapeError("conv_transpose bias length " +
                       std::to_string(bias->shape()[0]) +
                       " does not match output depth " + std::to_string(cg.OC));
  }
  cg.OH = cg.H * stride;
  cg.OW = cg.W * stride;
  cg.pad_t = std::max(cg.KH - stride, 0) / 2;
  cg.pad_l = std::max(cg.KW - stride, 0) / 2;
  return cg;
}

// out[b,oy,ox,oc] = bias[oc] + sum over (ky,kx) with
//   iy = (oy + pad_t - ky) / s  (when divisible and in range)
// of x[b,iy,ix,ic] * w[ky,kx,ic,oc].
void conv2d_transpose_fwd_kernel(const float* x, const float* w,
                                 const float* bias, float* y,
                                 const ConvGeom& c) {
  const int IC = c.IC, OC = c.OC, s = c.stride;
  for (int b = 0; b < c.B; ++b) {
    for (int oy = 0; oy < c.OH; ++oy) {
      for (int ox = 0; ox < c.OW; ++ox) {
        float* yr = y + ((static_cast<long long>(b) * c.OH + oy) * c.OW + ox) * OC;
        if (bias)
          std::memcpy(yr, bias, sizeof(float) * OC);
        else
          std::memset(yr, 0, sizeof(float) * OC);
        for (int ky = 0; ky < c.KH; ++ky) {
          const int ty = oy + c.pad_t - ky;
          if (ty < 0 || ty % s != 0) continue;
          const int iy = ty / s;
          if (iy >= c.H) continue;
          for (int kx = 0; kx < c.KW; ++kx) {
            const int tx = ox + c.pad_l - kx;
            if (tx < 0 || tx % s != 0) continue;
            const int ix = tx / s;
            if (ix >= c.W) continue;
            const float* xr =
                x + ((static_cast<long long>(b) * c.H + iy) * c.W + ix) * IC;
            const float* wr = w + (static_cast<long long>(ky) * c.KW + kx) * IC * OC;
            for (int ic = 0; ic < IC; ++ic) {
              const float v = xr[ic];
              const float* wc = wr + static_cast<long long>(ic) * OC;
              for (int oc = 0; oc < OC; ++oc) yr[oc] += v * wc[oc];
            }
          }
        }
      }
    }
  }
}

void conv2d_transpose_bwd_kernel(const float* x, const float* w,
                                 const float* gy, float* gx, float* gw,
                                 float* gb, const ConvGeom& c) {
  const int IC = c.IC, OC = c.OC, s = c.stride;
  for (int b = 0; b < c.B; ++b) {
    for (int oy = 0; oy < c.OH; ++oy) {
      for (int ox = 0; ox < c.OW; ++ox) {
        const float* gr =
            gy + ((static_cast<long long>(b) * c.OH + oy) * c.OW + ox) * OC;
        if (gb)
          for (int oc = 0; oc < OC; ++oc) gb[oc] += gr[oc];
        for (int ky = 0; ky < c.KH; ++ky) {
          const int ty = oy + c.pad_t - ky;
          if (ty < 0 || ty % s != 0) continue;
          const int iy = ty / s;
          if (iy >= c.H) continue;
          for (int kx = 0; kx < c.KW; ++kx) {
            const int tx = ox + c.pad_l - kx;
            if (tx < 0 || tx % s != 0) continue;
            const int ix = tx / s;
            if (ix >= c.W) continue;
            const long long xoff =
                ((static_cast<long long>(b) * c.H + iy) * c.W + ix) * IC;
            const long long woff =
                (static_cast<long long>(ky) * c.KW + kx) * IC * OC;
            if (gw) {
              const float* xr = x + xoff;
              for (int ic = 0; ic < IC; ++ic) {
                const float v = xr[ic];
                float* gwc = gw + woff + static_cast<long long>(ic) * OC;
                for (int oc = 0; oc < OC; ++oc) gwc[oc] += v * gr[oc];
              }
            }
            if (gx) {
              float* gxr = gx + xoff;
              for (int ic = 0; ic < IC; ++ic) {
                const float* wc = w + woff + static_cast<long long>(ic) * OC;
                float acc = 0.0f;
                for (int oc = 0; oc < OC; ++oc) acc += wc[oc] * gr[oc];
                gxr[ic] += acc;
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(Graph& g, const Tensor& input, const Tensor& weights,
              const Tensor& bias, int stride) {
  const ConvGeom c = conv_geometry(input, weights, &bias, stride);
  Tensor out = Tensor::zeros({c.B, c.OH, c.OW, c.OC});
  conv2d_fwd_kernel(input.values().data(), weights.values().data(),
                    bias.values().data(), out.values().data(), c);
  detail::check_finite(out, "conv2d");
  if (track_any({&input, &weights, &bias})) {
    out.set_requires_grad(true);
    Tensor x = input, w = weights, b = bias, y = out;
    g.record(out, [x, w, b, y, c]() mutable {
      conv2d_bwd_kernel(
          x.values().data(), w.values().data(), y.grad().data(),
          x.requires_grad() ? grad_accum(*x.impl()) : nullptr,
          w.requires_grad() ? grad_accum(*w.impl()) : nullptr,
          b.requires_grad() ? grad_accum(*b.impl()) : nullptr, c);
    });
  }
  return out;
}

Tensor conv2d_transpose(Graph& g, const Tensor& input, const Tensor& weights,
                        const Tensor& bias, int stride) {
  const ConvGeom c = conv_transpose_geometry(input, weights, &bias, stride);
  Tensor out = Tensor::zeros({c.B, c.OH, c.OW, c.OC});
  conv2d_transpose_fwd_kernel(input.values().data(), weights.values().data(),
                              bias.values().data(), out.values().data(), c);
  detail::check_finite(out, "conv2d_transpose");
  if (track_any({&input, &weights, &bias})) {
    out.set_requires_grad(true);
    Tensor x = input, w = weights, b = bias, y = out;
    g.record(out, [x, w, b, y, c]() mutable {
      conv2d_transpose_bwd_kernel(
          x.values().data(), w.values().data(), y.grad().data(),
          x.requires_grad() ? grad_accum(*x.impl()) : nullptr,
          w.requires_grad() ? grad_accum(*w.impl()) : nullptr,
          b.requires_grad() ? grad_accum(*b.impl()) : nullptr, c);
    });
  }
  return out;
}

Tensor depthwise_conv2d(Graph& g, const Tensor& input, const Tensor& weights) {
  require_rank(input, 4, "depthwise input");
  require_rank(weights, 3, "depthwise weights");
  const int B = input.shape()[0], H = input.shape()[1], W = input.shape()[2],
            C = input.shape()[3];
  const int KH = weights.shape()[0], KW = weights.shape()[1];
  if (weights.shape()[2] != C)
    throw ShapeError("depthwise weights expect " +
                     std::to_string(weights.shape()[2]) +
                     " channels, input has " + std::to_string(C));
  const int OH = H - KH + 1, OW = W - KW + 1;
  if (OH < 1 || OW < 1)
    throw ShapeError("depthwise kernel " + weights.shape().str() +
                     " larger than input " + input.shape().str());
  Tensor out = Tensor::zeros({B, OH, OW, C});
  {
    const float* x = input.values().data();
    const float* w = weights.values().data();
    float* y = out.values().data();
    for (int b = 0; b < B; ++b)
      for (int oy = 0; oy < OH; ++oy)
        for (int ox = 0; ox < OW; ++ox) {
          float* yr = y + ((static_cast<long long>(b) * OH + oy) * OW + ox) * C;
          for (int ky = 0; ky < KH; ++ky)
            for (int kx = 0; kx < KW; ++kx) {
              const float* xr =
                  x + ((static_cast<long long>(b) * H + oy + ky) * W + ox + kx) * C;
              const float* wr = w + (static_cast<long long>(ky) * KW + kx) * C;
              for (int ch = 0; ch < C; ++ch) yr[ch] += xr[ch] * wr[ch];
            }
        }
  }
  detail::check_finite(out, "depthwise_conv2d");
  if (track_any({&input, &weights})) {
    out.set_requires_grad(true);
    Tensor x = input, w = weights, y = out;
    g.record(out, [x, w, y, B, H, W, C, KH, KW, OH, OW]() mutable {
      const float* xv = x.values().data();
      const float* wv = w.values().data();
      const float* gy = y.grad().data();
      float* gx = x.requires_grad() ? grad_accum(*x.impl()) : nullptr;
      float* gw = w.requires_grad() ? grad_accum(*w.impl()) : nullptr;
      for (int b = 0; b < B; ++b)
        for (int oy = 0; oy < OH; ++oy)
          for (int ox = 0; ox < OW; ++ox) {
            const float* gr =
                gy + ((static_cast<long long>(b) * OH + oy) * OW + ox) * C;
            for (int ky = 0; ky < KH; ++ky)
              for (int kx = 0; kx < KW; ++kx) {
                const long long xoff =
                    ((static_cast<long long>(b) * H + oy + ky) * W + ox + kx) * C;
                const long long woff = (static_cast<long long>(ky) * KW + kx) * C;
                if (gw)
                  for (int ch = 0; ch < C; ++ch)
                    gw[woff + ch] += xv[xoff + ch] * gr[ch];
                if (gx)
                  for (int ch = 0; ch < C; ++ch)
                    gx[xoff + ch] += wv[woff + ch] * gr[ch];
              }
          }
    });
  }
  return out;
}

Tensor pointwise_conv2d(Graph& g, const Tensor& input, const Tensor& weights) {
  require_rank(weights, 4, "pointwise weights");
  if (weights.shape()[0] != 1 || weights.shape()[1] != 1)
    throw ShapeError("pointwise weights must be 1x1xICxOC, got " +
                     weights.shape().str());
  const ConvGeom c = conv_geometry(input, weights, nullptr, 1);
  Tensor out = Tensor::zeros({c.B, c.OH, c.OW, c.OC});
  conv2d_fwd_kernel(input.values().data(), weights.values().data(), nullptr,
                    out.values().data(), c);
  detail::check_finite(out, "pointwise_conv2d");
  if (track_any({&input, &weights})) {
    out.set_requires_grad(true);
    Tensor x = input, w = weights, y = out;
    g.record(out, [x, w, y, c]() mutable {
      conv2d_bwd_kernel(x.values().data(), w.values().data(), y.grad().data(),
                        x.requires_grad() ? grad_accum(*x.impl()) : nullptr,
                        w.requires_grad() ? grad_accum(*w.impl()) : nullptr,
                        nullptr, c);
    });
  }
  return out;
}

Tensor channelwise_dense(Graph& g, const Tensor& input, const Tensor& weights) {
  require_rank(input, 4, "channelwise input");
  require_rank(weights, 4, "channelwise weights");
  const int B = input.shape()[0], H = input.shape()[1], W = input.shape()[2],
            C = input.shape()[3];
  if (weights.shape()[0] != H * W || weights.shape()[1] != H ||
      weights.shape()[2] != W || weights.shape()[3] != C)
    throw ShapeError("channelwise weights must be " + std::to_string(H * W) +
                     "x" + std::to_string(H) + "x" + std::to_string(W) + "x" +
                     std::to_string(C) + " for input " + input.shape().str() +
                     ", got " + weights.shape().str());
  Tensor out = Tensor::zeros(input.shape());
  const long long plane = static_cast<long long>(H) * W;
  {
    const float* x = input.values().data();
    const float* w = weights.values().data();
    float* y = out.values().data();
    for (int b = 0; b < B; ++b) {
      const float* xb = x + b * plane * C;
      float* yb = y + b * plane * C;
      for (long long p = 0; p < plane; ++p) {
        float* yr = yb + p * C;
        const float* wp = w + p * plane * C;
        for (long long q = 0; q < plane; ++q) {
          const float* xr = xb + q * C;
          const float* wr = wp + q * C;
          for (int ch = 0; ch < C; ++ch) yr[ch] += xr[ch] * wr[ch];
        }
      }
    }
  }
  detail::check_finite(out, "channelwise_dense");
  if (track_any({&input, &weights})) {
    out.set_requires_grad(true);
    Tensor x = input, w = weights, y = out;
    g.record(out, [x, w, y, B, C, plane]() mutable {
      const float* xv = x.values().data();
      const float* wv = w.values().data();
      const float* gy = y.grad().data();
      float* gx = x.requires_grad() ? grad_accum(*x.impl()) : nullptr;
      float* gw = w.requires_grad() ? grad_accum(*w.impl()) : nullptr;
      for (int b = 0; b < B; ++b) {
        const float* xb = xv + b * plane * C;
        const float* gyb = gy + b * plane * C;
        float* gxb = gx ? gx + b * plane * C : nullptr;
        for (long long p = 0; p < plane; ++p) {
          const float* gr = gyb + p * C;
          for (long long q = 0; q < plane; ++q) {
            const long long woff = (p * plane + q) * C;
            if (gw) {
              const float* xr = xb + q * C;
              for (int ch = 0; ch < C; ++ch)
                gw[woff + ch] += xr[ch] * gr[ch];
            }
            if (gxb) {
              const float* wr = wv + woff;
              for (int ch = 0; ch < C; ++ch)
                gxb[q * C + ch] += wr[ch] * gr[ch];
            }
          }
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Elementwise ops.
// ---------------------------------------------------------------------------

namespace {

template <class Fwd, class MakeBwd>
Tensor unary_op(Graph& g, const Tensor& x, const char* name, Fwd fwd,
                MakeBwd make_bwd) {
  Tensor out = Tensor::zeros(x.shape());
  const auto xv = x.values();
  auto yv = out.values();
  for (size_t i = 0; i < xv.size(); ++i) yv[i] = fwd(xv[i]);
  detail::check_finite(out, name);
  if (x.requires_grad()) {
    out.set_requires_grad(true);
    g.record(out, make_bwd(x, out));
  }
  return out;
}

}  // namespace

Tensor tanh_act(Graph& g, const Tensor& x) {
  // Evaluated in double so results stay within ~0.5 ulp of the true value;
  // gradient checks difference the forward pass at eps ~ 1e-3.
  return unary_op(
      g, x, "tanh",
      [](float v) {
        return static_cast<float>(std::tanh(static_cast<double>(v)));
      },
      [](Tensor in, Tensor out) {
        return [in, out]() mutable {
          float* gx = grad_accum(*in.impl());
          const auto yv = out.values();
          const auto gy = out.grad();
          for (size_t i = 0; i < yv.size(); ++i)
            gx[i] += (1.0f - yv[i] * yv[i]) * gy[i];
        };
      });
}

Tensor sigmoid_act(Graph& g, const Tensor& x) {
  return unary_op(
      g, x, "sigmoid",
      [](float v) {
        return static_cast<float>(1.0 /
                                  (1.0 + std::exp(-static_cast<double>(v))));
      },
      [](Tensor in, Tensor out) {
        return [in, out]() mutable {
          float* gx = grad_accum(*in.impl());
          const auto yv = out.values();
          const auto gy = out.grad();
          for (size_t i = 0; i < yv.size(); ++i)
            gx[i] += yv[i] * (1.0f - yv[i]) * gy[i];
        };
      });
}

Tensor relu_act(Graph& g, const Tensor& x) {
  return unary_op(
      g, x, "relu", [](float v) { return v > 0.0f ? v : 0.0f; },
      [](Tensor in, Tensor out) {
        return [in, out]() mutable {
          float* gx = grad_accum(*in.impl());
          const auto xv = in.values();
          const auto gy = out.grad();
          for (size_t i = 0; i < xv.size(); ++i)
            if (xv[i] > 0.0f) gx[i] += gy[i];
        };
      });
}

Tensor leaky_relu_act(Graph& g, const Tensor& x, float slope) {
  return unary_op(
      g, x, "leaky_relu", [slope](float v) { return v > 0.0f ? v : slope * v; },
      [slope](Tensor in, Tensor out) {
        return [in, out, slope]() mutable {
          float* gx = grad_accum(*in.impl());
          const auto xv = in.values();
          const auto gy = out.grad();
          for (size_t i = 0; i < xv.size(); ++i)
            gx[i] += (xv[i] > 0.0f ? 1.0f : slope) * gy[i];
        };
      });
}

Tensor scale(Graph& g, const Tensor& x, float s) {
  return unary_op(
      g, x, "scale", [s](float v) { return s * v; },
      [s](Tensor in, Tensor out) {
        return [in, out, s]() mutable {
          float* gx = grad_accum(*in.impl());
          const auto gy = out.grad();
          for (size_t i = 0; i < gy.size(); ++i) gx[i] += s * gy[i];
        };
      });
}

Tensor clip(Graph& g, const Tensor& x, float lo, float hi) {
  return unary_op(
      g, x, "clip",
      [lo, hi](float v) { return std::min(std::max(v, lo), hi); },
      [lo, hi](Tensor in, Tensor out) {
        return [in, out, lo, hi]() mutable {
          float* gx = grad_accum(*in.impl());
          const auto xv = in.values();
          const auto gy = out.grad();
          for (size_t i = 0; i < xv.size(); ++i)
            if (xv[i] >= lo && xv[i] <= hi) gx[i] += gy[i];
        };
      });
}

namespace {

template <class Fwd>
Tensor binary_op(Graph& g, const Tensor& a, const Tensor& b, const char* name,
                 Fwd fwd, std::function<void(Tensor, Tensor, Tensor)> noop,
                 std::function<std::function<void()>(Tensor, Tensor, Tensor)>
                     make_bwd) {
  (void)noop;
  require_same_shape(a, b, name);
  Tensor out = Tensor::zeros(a.shape());
  const auto av = a.values();
  const auto bv = b.values();
  auto yv = out.values();
  for (size_t i = 0; i < av.size(); ++i) yv[i] = fwd(av[i], bv[i]);
  detail::check_finite(out, name);
  if (track_any({&a, &b})) {
    out.set_requires_grad(true);
    g.record(out, make_bwd(a, b, out));
  }
  return out;
}

}  // namespace

Tensor elementwise_add(Graph& g, const Tensor& a, const Tensor& b) {
  return binary_op(
      g, a, b, "add", [](float x, float y) { return x + y; }, nullptr,
      [](Tensor ta, Tensor tb, Tensor out) {
        return [ta, tb, out]() mutable {
          const auto gy = out.grad();
          if (ta.requires_grad()) {
            float* ga = grad_accum(*ta.impl());
            for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
          }
          if (tb.requires_grad()) {
            float* gb = grad_accum(*tb.impl());
            for (size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i];
          }
        };
      });
}

Tensor elementwise_sub(Graph& g, const Tensor& a, const Tensor& b) {
  return binary_op(
      g, a, b, "sub", [](float x, float y) { return x - y; }, nullptr,
      [](Tensor ta, Tensor tb, Tensor out) {
        return [ta, tb, out]() mutable {
          const auto gy = out.grad();
          if (ta.requires_grad()) {
            float* ga = grad_accum(*ta.impl());
            for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
          }
          if (tb.requires_grad()) {
            float* gb = grad_accum(*tb.impl());
            for (size_t i = 0; i < gy.size(); ++i) gb[i] -= gy[i];
          }
        };
      });
}

Tensor elementwise_mul(Graph& g, const Tensor& a, const Tensor& b) {
  return binary_op(
      g, a, b, "mul", [](float x, float y) { return x * y; }, nullptr,
      [](Tensor ta, Tensor tb, Tensor out) {
        return [ta, tb, out]() mutable {
          const auto gy = out.grad();
          const auto av = ta.values();
          const auto bv = tb.values();
          if (ta.requires_grad()) {
            float* ga = grad_accum(*ta.impl());
            for (size_t i = 0; i < gy.size(); ++i) ga[i] += bv[i] * gy[i];
          }
          if (tb.requires_grad()) {
            float* gb = grad_accum(*tb.impl());
            for (size_t i = 0; i < gy.size(); ++i) gb[i] += av[i] * gy[i];
          }
        };
      });
}

Tensor sum(Graph& g, const Tensor& x) {
  double acc = 0.0;
  for (float v : x.values()) acc += v;
  Tensor out = Tensor::scalar(static_cast<float>(acc));
  if (x.requires_grad()) {
    out.set_requires_grad(true);
    Tensor in = x, y = out;
    g.record(out, [in, y]() mutable {
      float* gx = grad_accum(*in.impl());
      const float gy = y.grad()[0];
      for (size_t i = 0; i < in.values().size(); ++i) gx[i] += gy;
    });
  }
  return out;
}

Tensor mean_abs(Graph& g, const Tensor& x) {
  double acc = 0.0;
  for (float v : x.values()) acc += std::fabs(v);
  const double n = static_cast<double>(x.numel());
  Tensor out = Tensor::scalar(static_cast<float>(acc / n));
  if (x.requires_grad()) {
    out.set_requires_grad(true);
    Tensor in = x, y = out;
    const float inv_n = static_cast<float>(1.0 / n);
    g.record(out, [in, y, inv_n]() mutable {
      float* gx = grad_accum(*in.impl());
      const auto xv = in.values();
      const float gy = y.grad()[0] * inv_n;
      for (size_t i = 0; i < xv.size(); ++i) {
        if (xv[i] > 0.0f)
          gx[i] += gy;
        else if (xv[i] < 0.0f)
          gx[i] -= gy;
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binarizers.
// ---------------------------------------------------------------------------

namespace {

// Shared straight-through backward: gradient of tanh at the pre-activation.
std::function<void()> straight_through_bwd(Tensor in, Tensor out) {
  return [in, out]() mutable {
    float* gx = grad_accum(*in.impl());
    const auto xv = in.values();
    const auto gy = out.grad();
    for (size_t i = 0; i < xv.size(); ++i) {
      const float t = std::tanh(xv[i]);
      gx[i] += (1.0f - t * t) * gy[i];
    }
  };
}

}  // namespace

Tensor binarize_stochastic(Graph& g, const Tensor& x, Rng& rng) {
  Tensor out = Tensor::zeros(x.shape());
  const auto xv = x.values();
  auto yv = out.values();
  for (size_t i = 0; i < xv.size(); ++i) {
    const float p = 0.5f * (1.0f + std::tanh(xv[i]));
    yv[i] = rng.uniform() < p ? 1.0f : -1.0f;
  }
  if (x.requires_grad()) {
    out.set_requires_grad(true);
    g.record(out, straight_through_bwd(x, out));
  }
  return out;
}

Tensor binarize_deterministic(Graph& g, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape());
  const auto xv = x.values();
  auto yv = out.values();
  for (size_t i = 0; i < xv.size(); ++i) yv[i] = xv[i] >= 0.0f ? 1.0f : -1.0f;
  if (x.requires_grad()) {
    out.set_requires_grad(true);
    g.record(out, straight_through_bwd(x, out));
  }
  return out;
}

}  // namespace tilecodec
