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

#include <array>
#include <cassert>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tilecodec/rng.hpp"

namespace tilecodec {

/// Tensor extents, rank <= 4. Rank-4 tensors follow the fixed
/// batch x height x width x depth layout; data is row-major with depth
/// contiguous.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<int> dims) {
    assert(dims.size() <= 4);
    for (int d : dims) dims_[rank_++] = d;
  }

  int rank() const { return rank_; }
  int operator[](int i) const {
    assert(i >= 0 && i < rank_);
    return dims_[i];
  }

  long long numel() const {
    long long n = 1;
    for (int i = 0; i < rank_; ++i) n *= dims_[i];
    return n;
  }

  bool operator==(const Shape& o) const {
    if (rank_ != o.rank_) return false;
    for (int i = 0; i < rank_; ++i)
      if (dims_[i] != o.dims_[i]) return false;
    return true;
  }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const;

 private:
  std::array<int, 4> dims_ = {0, 0, 0, 0};
  int rank_ = 0;
};

struct TensorImpl {
  Shape shape;
  std::vector<float> data;
  std::vector<float> grad;  // empty until first accumulation
  bool requires_grad = false;
};

/// Shared handle to a dense float32 buffer. Values are treated as immutable
/// once the tensor has been consumed by an op; gradients accumulate in a
/// parallel buffer on demand.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& s, bool requires_grad = false);
  static Tensor full(const Shape& s, float value, bool requires_grad = false);
  static Tensor from(const Shape& s, std::vector<float> values,
                     bool requires_grad = false);
  static Tensor scalar(float value);

  bool valid() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  long long numel() const { return impl_->shape.numel(); }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool v) { impl_->requires_grad = v; }

  std::span<const float> values() const { return impl_->data; }
  std::span<float> values() { return impl_->data; }

  /// Value of a scalar (numel == 1) tensor.
  float item() const;

  /// Gradient buffer; empty span if no gradient has been accumulated.
  std::span<const float> grad() const { return impl_->grad; }
  std::span<float> grad_buffer();  // allocates zeros on first use
  void zero_grad();

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorImpl> impl_;

  friend class Graph;
};

/// Reverse-mode tape. Ops append one entry per recorded step; backward()
/// replays the entries exactly once in reverse order. A Graph is rebuilt per
/// forward pass and is confined to a single thread.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Records a backward step for the op that produced `out`. The closure
  /// captures whatever forward values it needs and accumulates into the
  /// inputs' grad buffers when invoked.
  void record(const Tensor& out, std::function<void()> backward) {
    tape_.push_back({out.impl_, std::move(backward)});
  }

  /// Seeds d(loss)/d(loss) = 1 and propagates gradients to every
  /// requires_grad leaf reachable from `loss`. Loss must be scalar.
  void backward(const Tensor& loss);

  size_t size() const { return tape_.size(); }
  void clear() { tape_.clear(); }

 private:
  struct Node {
    std::shared_ptr<TensorImpl> out;
    std::function<void()> back;
  };
  std::vector<Node> tape_;
};

// ---------------------------------------------------------------------------
// Convolution ops. Spatial layout: input [B,H,W,IC]; conv2d and
// conv2d_transpose weights [KH,KW,IC,OC] with bias [OC].
// ---------------------------------------------------------------------------

/// Same-padded 2-D convolution, stride in {1,2}. Output spatial extent is
/// ceil(input/stride); odd padding goes to the bottom/right.
Tensor conv2d(Graph& g, const Tensor& input, const Tensor& weights,
              const Tensor& bias, int stride);

/// Upsampling convolution (adjoint of a same-padded strided conv2d).
/// Output spatial extent is exactly input * stride.
Tensor conv2d_transpose(Graph& g, const Tensor& input, const Tensor& weights,
                        const Tensor& bias, int stride);

/// Per-channel (no cross-channel mixing) valid convolution, one KHxKW kernel
/// per input channel; weights [KH,KW,C]. A full-extent kernel reduces the
/// spatial map to 1x1.
Tensor depthwise_conv2d(Graph& g, const Tensor& input, const Tensor& weights);

/// Per-pixel linear map across channels; weights [1,1,IC,OC], no bias.
Tensor pointwise_conv2d(Graph& g, const Tensor& input, const Tensor& weights);

/// Per-channel dense spatial map: every output position of every channel has
/// its own full-extent kernel over that channel's input map. Weights
/// [H*W, H, W, C] (output position major). Equivalent to stacking H*W
/// full-extent depthwise convolutions.
Tensor channelwise_dense(Graph& g, const Tensor& input, const Tensor& weights);

// ---------------------------------------------------------------------------
// Elementwise and reduction ops.
// ---------------------------------------------------------------------------

Tensor tanh_act(Graph& g, const Tensor& x);
Tensor sigmoid_act(Graph& g, const Tensor& x);
Tensor relu_act(Graph& g, const Tensor& x);
Tensor leaky_relu_act(Graph& g, const Tensor& x, float slope);
Tensor elementwise_add(Graph& g, const Tensor& a, const Tensor& b);
Tensor elementwise_sub(Graph& g, const Tensor& a, const Tensor& b);
Tensor elementwise_mul(Graph& g, const Tensor& a, const Tensor& b);
Tensor scale(Graph& g, const Tensor& x, float s);
/// Clamp to [lo, hi]; gradient is zero outside the bounds.
Tensor clip(Graph& g, const Tensor& x, float lo, float hi);

/// Sum of all elements to a scalar (accumulated in double).
Tensor sum(Graph& g, const Tensor& x);
/// Mean of absolute values to a scalar; the L1 building block.
Tensor mean_abs(Graph& g, const Tensor& x);

// ---------------------------------------------------------------------------
// Binarizers with straight-through gradients: the backward pass of both is
// the derivative of tanh at the pre-activation, as if the output were
// tanh(x) itself.
// ---------------------------------------------------------------------------

/// Training-mode binarizer: each element is +1 with probability
/// 0.5 * (1 + tanh(x)), else -1.
Tensor binarize_stochastic(Graph& g, const Tensor& x, Rng& rng);

/// Inference-mode binarizer: sign(tanh(x)) with +1 at x == 0.
Tensor binarize_deterministic(Graph& g, const Tensor& x);

namespace detail {
// Grad accumulation helper shared by op backward closures.
float* grad_accum(TensorImpl& t);
void check_finite(const Tensor& t, const char* op);
}  // namespace detail

}  // namespace tilecodec
