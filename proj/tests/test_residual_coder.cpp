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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "grad_check.hpp"
#include "tilecodec/errors.hpp"
#include "tilecodec/residual_coder.hpp"

using namespace tilecodec;

namespace {

CodecModel tiny_model(uint64_t seed) {
  ArchConfig a;
  a.ctx_enc_depths = {4, 5, 6, 8};
  a.ctx_dec_depths = {6, 5, 4};
  a.res_in_depth = 4;
  a.res_enc_depths = {6, 8, 8};
  a.res_dec_depths = {8, 6, 4};
  return CodecModel::init(a, seed);
}

Tensor random_residual(uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(32 * 32 * 3);
  for (auto& x : v) x = rng.uniform(-1.5f, 1.5f);
  return Tensor::from({1, 32, 32, 3}, std::move(v));
}

// The 0.02-sigma init produces bottleneck pre-activations clustered near
// zero; spreading one weight tensor makes the codes input-dependent.
CodecModel tiny_model_spread(uint64_t seed) {
  CodecModel m = tiny_model(seed);
  for (auto& v : m.residual().bottleneck.w.values()) v *= 40.0f;
  for (auto& v : m.residual().in_conv.w.values()) v *= 10.0f;
  return m;
}

}  // namespace

TEST_CASE("encode_residual emits exactly k * 128 bits") {
  CodecModel m = tiny_model(1);
  auto iters = encode_residual(random_residual(2), 4, m,
                               BinarizeMode::Deterministic);
  REQUIRE(iters.size() == 4);
  long long bits = 0;
  for (const auto& it : iters) {
    CHECK(it.code.size() == 128);
    CHECK(it.partial.shape() == Shape{1, 32, 32, 3});
    bits += static_cast<long long>(it.code.size());
  }
  CHECK(bits == 512);
  // 32x32 tile: k iterations cost exactly 0.125 * k bits per pixel.
  CHECK(static_cast<double>(bits) / (32 * 32) == doctest::Approx(0.5));
}

TEST_CASE("zero-weight model: partials all zero, codes all +1") {
  CodecModel m = tiny_model(3);
  for (const auto& p : m.params()) {
    Tensor t = p.tensor;
    std::fill(t.values().begin(), t.values().end(), 0.0f);
  }
  auto iters = encode_residual(random_residual(4), 3, m,
                               BinarizeMode::Deterministic);
  for (const auto& it : iters) {
    for (float v : it.partial.values()) CHECK(v == 0.0f);
    for (int8_t b : it.code.bits) CHECK(b == 1);  // sign(tanh(0)) = +1
  }
}

TEST_CASE("decode_residual equals the encoder-internal reconstruction") {
  CodecModel m = tiny_model_spread(5);
  Tensor r0 = random_residual(6);
  for (int k : {1, 2, 7}) {
    auto iters = encode_residual(r0, k, m, BinarizeMode::Deterministic);
    std::vector<BinaryCode> codes;
    for (const auto& it : iters) codes.push_back(it.code);
    Tensor j_dec = decode_residual(codes, m);
    Tensor j_enc = sum_partials(iters);
    REQUIRE(j_dec.shape() == j_enc.shape());
    CHECK(std::memcmp(j_dec.values().data(), j_enc.values().data(),
                      sizeof(float) * j_dec.numel()) == 0);
  }
}

TEST_CASE("k = 1 reconstruction is the first partial alone") {
  CodecModel m = tiny_model_spread(7);
  Tensor r0 = random_residual(8);
  auto iters = encode_residual(r0, 1, m, BinarizeMode::Deterministic);
  std::vector<BinaryCode> codes{iters[0].code};
  Tensor j = decode_residual(codes, m);
  CHECK(std::memcmp(j.values().data(), iters[0].partial.values().data(),
                    sizeof(float) * j.numel()) == 0);
}

TEST_CASE("prefix property: shorter encodes are prefixes of longer ones") {
  CodecModel m = tiny_model_spread(9);
  Tensor r0 = random_residual(10);
  auto short_run = encode_residual(r0, 3, m, BinarizeMode::Deterministic);
  auto long_run = encode_residual(r0, 9, m, BinarizeMode::Deterministic);
  for (int i = 0; i < 3; ++i) {
    CHECK(short_run[i].code == long_run[i].code);
    CHECK(std::memcmp(short_run[i].partial.values().data(),
                      long_run[i].partial.values().data(),
                      sizeof(float) * short_run[i].partial.numel()) == 0);
  }
}

TEST_CASE("deterministic mode is reproducible across runs") {
  CodecModel m = tiny_model_spread(11);
  Tensor r0 = random_residual(12);
  auto a = encode_residual(r0, 5, m, BinarizeMode::Deterministic);
  auto b = encode_residual(r0, 5, m, BinarizeMode::Deterministic);
  for (int i = 0; i < 5; ++i) CHECK(a[i].code == b[i].code);
}

TEST_CASE("codes depend on the input residual") {
  CodecModel m = tiny_model_spread(13);
  auto a = encode_residual(random_residual(14), 2, m,
                           BinarizeMode::Deterministic);
  auto b = encode_residual(random_residual(15), 2, m,
                           BinarizeMode::Deterministic);
  bool any_diff = false;
  for (int i = 0; i < 2; ++i) any_diff |= !(a[i].code == b[i].code);
  CHECK(any_diff);
}

TEST_CASE("flipping one code bit changes the reconstruction") {
  CodecModel m = tiny_model_spread(16);
  Tensor r0 = random_residual(17);
  auto iters = encode_residual(r0, 2, m, BinarizeMode::Deterministic);
  std::vector<BinaryCode> codes{iters[0].code, iters[1].code};
  Tensor base = decode_residual(codes, m);
  codes[0].bits[37] = static_cast<int8_t>(-codes[0].bits[37]);
  Tensor flipped = decode_residual(codes, m);
  bool differs = false;
  for (long long i = 0; i < base.numel(); ++i)
    differs |= (base.values()[i] != flipped.values()[i]);
  CHECK(differs);
}

TEST_CASE("argument validation") {
  CodecModel m = tiny_model(18);
  Tensor r0 = random_residual(19);
  CHECK_THROWS_AS(encode_residual(r0, 0, m, BinarizeMode::Deterministic),
                  ConfigError);
  CHECK_THROWS_AS(encode_residual(r0, 17, m, BinarizeMode::Deterministic),
                  ConfigError);
  CHECK_THROWS_AS(encode_residual(r0, 2, m, BinarizeMode::Stochastic),
                  ConfigError);  // missing rng
  std::vector<BinaryCode> bad{BinaryCode{{1, -1, 1}}};
  CHECK_THROWS_AS(decode_residual(bad, m), ConfigError);
}

TEST_CASE("quantize_output formula") {
  CHECK(quantize_output(0.0f) == 128);
  CHECK(quantize_output(1.0f) == 255);   // 270 clipped
  CHECK(quantize_output(-1.0f) == 0);    // -14 clipped
  CHECK(quantize_output(0.5f) == 199);   // 71 + 128
  CHECK(quantize_output(-0.25f) == 93);  // round(92.5) away from zero

  // Exhaustive grid against a direct double-precision oracle.
  for (int i = 0; i <= 100000; ++i) {
    const float v = -1.25f + 2.5f * static_cast<float>(i) / 100000.0f;
    const double oracle =
        std::round(std::min(std::max(static_cast<double>(v) * 142.0 + 128.0,
                                     0.0),
                            255.0));
    REQUIRE(quantize_output(v) == static_cast<uint8_t>(oracle));
  }
}

TEST_CASE("gradients: two unrolled iterations with straight-through codes") {
  Rng rng(20);
  CodecModel m = tiny_model(21);
  // Grid-valued weights at healthy scale; gate biases open the input and
  // forget gates so the recurrent paths carry resolvable gradients.
  for (const auto& np : m.params()) {
    if (np.name.rfind("res.", 0) != 0) continue;
    Tensor t = np.tensor;
    for (auto& v : t.values())
      v = static_cast<float>(static_cast<int>(rng.uniform_index(11)) - 5) / 16.0f;
    t.set_requires_grad(true);
  }
  for (int stack = 0; stack < 2; ++stack)
    for (int layer = 0; layer < 3; ++layer) {
      ConvLstmParams& lp = stack == 0 ? m.residual().enc[layer]
                                      : m.residual().dec[layer];
      std::fill(lp.bx[0].values().begin(), lp.bx[0].values().end(), 1.0f);
      std::fill(lp.bx[1].values().begin(), lp.bx[1].values().end(), 1.5f);
    }
  Tensor r0 = testsupport::random_grid_tensor({1, 32, 32, 3}, rng, false);
  std::vector<Tensor> checked{m.residual().in_conv.w,
                              m.residual().bottleneck.w,
                              m.residual().bottleneck.b,
                              m.residual().enc[0].wx[2],
                              m.residual().enc[2].wh[0],
                              m.residual().dec[0].wx[1],
                              m.residual().dec[2].wh[3],
                              m.residual().head.w};
  // Two chained iterations: additive reconstruction feeds iteration 2, and
  // the LSTM states are nonzero there so every gate has a live gradient.
  // tanh stands in for the sampled bits, which is exactly the gradient the
  // binarizers propagate. The L1 differences guard the |x| kinks.
  std::vector<Tensor> kinks;
  auto forward = [&](Graph& g) {
    kinks.clear();
    ResidualEncoderState enc_st = zero_encoder_state(m.arch(), 1);
    ResidualDecoderState dec_st = zero_decoder_state(m.arch(), 1);
    Tensor r = r0;
    Tensor j, loss;
    for (int i = 0; i < 2; ++i) {
      Tensor z = residual_encode_step(g, r, enc_st, m.residual());
      Tensor soft = tanh_act(g, z);
      Tensor p = residual_decode_step(g, soft, dec_st, m.residual());
      j = j.valid() ? elementwise_add(g, j, p) : p;
      Tensor diff = elementwise_sub(g, r0, j);
      kinks.push_back(diff);
      Tensor l = mean_abs(g, diff);
      loss = loss.valid() ? elementwise_add(g, loss, l) : l;
      r = diff;
    }
    return loss;
  };
  auto snapshot = [&]() {
    std::vector<float> all;
    for (const auto& t : kinks)
      all.insert(all.end(), t.values().begin(), t.values().end());
    return all;
  };
  // 4e-3 of the loss is the float32 resolution floor for these probes;
  // gradients below it cannot be certified by finite differences.
  auto res = testsupport::check_gradients_guarded(forward, snapshot, checked,
                                                  22, 0.03125f, 4e-3);
  CHECK(res.max_rel_err < 1e-3);
  CHECK(res.elements > 4 * res.skipped);
}
