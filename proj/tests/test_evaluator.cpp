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
#include <limits>
#include <sstream>

#include "tilecodec/errors.hpp"
#include "tilecodec/evaluator.hpp"
#include "tilecodec/synth.hpp"

using namespace tilecodec;

namespace {

CodecModel eval_model(uint64_t seed) {
  ArchConfig a;
  a.ctx_enc_depths = {4, 5, 6, 8};
  a.ctx_dec_depths = {6, 5, 4};
  a.res_in_depth = 4;
  a.res_enc_depths = {6, 8, 8};
  a.res_dec_depths = {8, 6, 4};
  CodecModel m = CodecModel::init(a, seed);
  for (const auto& np : m.params()) {
    if (np.name.ends_with(".b") || np.name.ends_with(".bx")) continue;
    Tensor t = np.tensor;
    for (auto& v : t.values()) v *= 8.0f;
  }
  return m;
}

std::vector<CorpusImage> small_corpus() {
  std::vector<CorpusImage> corpus;
  corpus.push_back({"a", synth_corpus_image(64, 64, 1)});
  corpus.push_back({"b", synth_corpus_image(64, 32, 2)});
  return corpus;
}

}  // namespace

TEST_CASE("constant sweep: payload bpp arithmetic and record count") {
  CodecModel m = eval_model(3);
  auto corpus = small_corpus();
  auto records = sweep_constant(corpus, m, {2, 12}, 1);
  REQUIRE(records.size() == 4);  // |corpus| * |k_list|

  // 64x64 image at k=2: payload exactly 0.25 bpp, container on top.
  CHECK(records[0].image_id == "a");
  CHECK(records[0].param == 2.0);
  CHECK(records[0].payload_bpp == doctest::Approx(0.25));
  CHECK(records[0].bpp > records[0].payload_bpp);
  CHECK(records[1].payload_bpp == doctest::Approx(1.5));  // k = 12
}

TEST_CASE("bpp equals file bytes times eight over source pixels") {
  CodecModel m = eval_model(4);
  std::vector<CorpusImage> corpus{{"c", synth_corpus_image(70, 50, 5)}};
  auto records = sweep_constant(corpus, m, {3}, 1);
  EncodeConfig cfg;
  cfg.k = 3;
  cfg.threads = 1;
  EncodeResult res = encode_image(corpus[0].image, cfg, m);
  CHECK(records[0].bpp ==
        doctest::Approx(res.bytes.size() * 8.0 / (70.0 * 50.0)).epsilon(1e-12));
}

TEST_CASE("adaptive sweep: floor and ceiling targets") {
  CodecModel m = eval_model(6);
  std::vector<CorpusImage> corpus{{"d", synth_corpus_image(96, 64, 7)}};
  std::vector<BitMap> maps;
  auto records = sweep_adaptive(corpus, m, {0.01, 99.0}, &maps, 1);
  REQUIRE(records.size() == 2);
  REQUIRE(maps.size() == 2);

  // Target below any reconstruction quality: zero payload, container only.
  const double pixels = 96.0 * 64.0;
  const size_t n_tiles = 3 * 2;
  CHECK(records[0].payload_bpp == 0.0);
  CHECK(records[0].bpp ==
        doctest::Approx((kStreamHeaderBytes + n_tiles) * 8.0 / pixels));
  for (uint8_t g : maps[0].gray) CHECK(g == 0);

  // Unreachable target: every tile at k_max.
  CHECK(records[1].payload_bpp ==
        doctest::Approx(kMaxIterations * 128.0 / 1024.0));
  for (uint8_t g : maps[1].gray) CHECK(g == 255);
}

TEST_CASE("bitmap rendering: linear k normalization") {
  TilePlan plan{2, 2, {0, 16, 8, 4}};
  BitMap map = plan_to_bitmap(plan);
  REQUIRE(map.gray.size() == 4);
  CHECK(map.gray[0] == 0);
  CHECK(map.gray[1] == 255);
  CHECK(map.gray[2] == 128);
  CHECK(map.gray[3] == 64);

  auto pgm = render_pgm(map);
  const std::string header = "P5\n2 2\n255\n";
  REQUIRE(pgm.size() == header.size() + 4);
  CHECK(std::equal(header.begin(), header.end(), pgm.begin()));
  CHECK(pgm[header.size() + 1] == 255);
}

TEST_CASE("csv rendering") {
  CHECK(render_csv({}) == "image,mode,param,bpp,payload_bpp,psnr\n");

  RdRecord rec;
  rec.image_id = "kodim01";
  rec.mode = "constant";
  rec.param = 4.0;
  rec.bpp = 0.541016;
  rec.payload_bpp = 0.5;
  rec.psnr = 31.25;
  const std::string csv = render_csv({rec});
  std::istringstream in(csv);
  std::string line1, line2, line3;
  std::getline(in, line1);
  std::getline(in, line2);
  CHECK(!std::getline(in, line3));
  CHECK(line1 == "image,mode,param,bpp,payload_bpp,psnr");
  CHECK(line2 == "kodim01,constant,4.000000,0.541016,0.500000,31.250000");

  // Fields round-trip parse.
  std::istringstream fields(line2);
  std::string image, mode, param, bpp, payload, psnr_s;
  std::getline(fields, image, ',');
  std::getline(fields, mode, ',');
  std::getline(fields, param, ',');
  std::getline(fields, bpp, ',');
  std::getline(fields, payload, ',');
  std::getline(fields, psnr_s, ',');
  CHECK(image == rec.image_id);
  CHECK(std::stod(param) == rec.param);
  CHECK(std::stod(bpp) == doctest::Approx(rec.bpp));
  CHECK(std::stod(psnr_s) == doctest::Approx(rec.psnr));

  // Infinite PSNR renders as "inf".
  rec.psnr = std::numeric_limits<double>::infinity();
  CHECK(render_csv({rec}).find(",inf\n") != std::string::npos);
}

TEST_CASE("csv output is byte-identical across runs") {
  CodecModel m = eval_model(8);
  auto corpus = small_corpus();
  auto r1 = sweep_constant(corpus, m, {1, 2}, 1);
  auto r2 = sweep_constant(corpus, m, {1, 2}, 2);
  CHECK(render_csv(r1) == render_csv(r2));
}

TEST_CASE("summary: image-mean psnr with inf exclusion") {
  std::vector<RdRecord> records(3);
  records[0].psnr = 30.0;
  records[0].bpp = 0.5;
  records[1].psnr = 40.0;
  records[1].bpp = 1.0;
  records[2].psnr = std::numeric_limits<double>::infinity();
  records[2].bpp = 1.5;
  SweepSummary s = summarize(records);
  CHECK(s.n == 3);
  CHECK(s.psnr_inf_excluded == 1);
  CHECK(s.mean_psnr == doctest::Approx(35.0));
  CHECK(s.mean_bpp == doctest::Approx(1.0));
}

TEST_CASE("empty corpus rejected") {
  CodecModel m = eval_model(9);
  CHECK_THROWS_AS(sweep_constant({}, m, {2}, 1), tilecodec::ConfigError);
}
