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

#include "tilecodec/evaluator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "tilecodec/errors.hpp"

namespace tilecodec {

namespace {

RdRecord measure(const CorpusImage& ci, const EncodeConfig& cfg,
                 const CodecModel& model, TilePlan* plan_out) {
  EncodeResult res = encode_image(ci.image, cfg, model);
  RdRecord rec;
  rec.image_id = ci.id;
  rec.mode = cfg.mode == EncodeConfig::Mode::Adaptive ? "adaptive" : "constant";
  rec.param = cfg.mode == EncodeConfig::Mode::Adaptive


                  ? cfg.target_psnr
                  : static_cast<double>(cfg.k);
  const double pixels =
      static_cast<double>(ci.image.width) * ci.image.height;
  rec.bpp = static_cast<double>(res.bytes.size()) * 8.0 / pixels;
  rec.payload_bpp = static_cast<double>(res.payload_bits) / pixels;
  rec.psnr = res.psnr_vs_source;
  if (plan_out) *plan_out = std::move(res.plan);
  return rec;
}

void require_nonempty_corpus(const std::vector<CorpusImage>& corpus) {
  if (corpus.empty()) throw ConfigError("sweep corpus is empty");
}

std::string format_double(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::vector<RdRecord> sweep_constant(const std::vector<CorpusImage>& corpus,
                                     const CodecModel& model,
                                     const std::vector<int>& k_list,
                                     int threads) {
  require_nonempty_corpus(corpus);
  std::vector<RdRecord> records;
  records.reserve(corpus.size() * k_list.size());
  for (const auto& ci : corpus)
    for (int k : k_list) {
      EncodeConfig cfg;
      cfg.mode = EncodeConfig::Mode::Constant;
      cfg.k = k;
      cfg.threads = threads;
      records.push_back(measure(ci, cfg, model, nullptr));
    }
  return records;
}

std::vector<RdRecord> sweep_adaptive(const std::vector<CorpusImage>& corpus,
                                     const CodecModel& model,
                                     const std::vector<double>& targets,
                                     std::vector<BitMap>* maps, int threads) {
  require_nonempty_corpus(corpus);
  std::vector<RdRecord> records;
  records.reserve(corpus.size() * targets.size());
  for (const auto& ci : corpus)
    for (double target : targets) {
      EncodeConfig cfg;
      cfg.mode = EncodeConfig::Mode::Adaptive;
      cfg.target_psnr = target;
      cfg.threads = threads;
      TilePlan plan;
      records.push_back(measure(ci, cfg, model, &plan));
      if (maps) maps->push_back(plan_to_bitmap(plan));
    }
  return records;
}

BitMap plan_to_bitmap(const TilePlan& plan) {
  BitMap map;
  map.rows = plan.rows;
  map.cols = plan.cols;
  map.gray.reserve(plan.k.size());
  for (uint8_t k : plan.k)
    map.gray.push_back(static_cast<uint8_t>(
        std::lround(static_cast<double>(k) * 255.0 / kMaxIterations)));
  return map;
}

std::string render_csv(const std::vector<RdRecord>& records) {
  std::string out = "image,mode,param,bpp,payload_bpp,psnr\n";
  for (const auto& r : records) {
    out += r.image_id;
    out += ',';
    out += r.mode;
    out += ',';
    out += format_double(r.param);
    out += ',';
    out += format_double(r.bpp);
    out += ',';
    out += format_double(r.payload_bpp);
    out += ',';
    out += format_double(r.psnr);
    out += '\n';
  }
  return out;
}

void export_csv(const std::vector<RdRecord>& records, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot create " + path);
  const std::string csv = render_csv(records);
  f.write(csv.data(), static_cast<std::streamsize>(csv.size()));
  if (!f) throw IoError("write failed for " + path);
}

std::vector<uint8_t> render_pgm(const BitMap& map) {
  if (map.rows <= 0 || map.cols <= 0 ||
      map.gray.size() != static_cast<size_t>(map.rows) * map.cols)
    throw ConfigError("bitmap dimensions do not match its data");
  std::string header = "P5\n" + std::to_string(map.cols) + " " +
                       std::to_string(map.rows) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), map.gray.begin(), map.gray.end());
  return out;
}

void export_bitmap(const BitMap& map, const std::string& path) {
  const auto bytes = render_pgm(map);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot create " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for " + path);
}

SweepSummary summarize(const std::vector<RdRecord>& records) {
  SweepSummary s;
  double psnr_sum = 0.0;
  int psnr_n = 0;
  for (const auto& r : records) {
    s.mean_bpp += r.bpp;
    s.mean_payload_bpp += r.payload_bpp;
    ++s.n;
    if (std::isinf(r.psnr)) {
      ++s.psnr_inf_excluded;
    } else {
      psnr_sum += r.psnr;
      ++psnr_n;
    }
  }
  if (s.n > 0) {
    s.mean_bpp /= s.n;
    s.mean_payload_bpp /= s.n;
  }
  s.mean_psnr = psnr_n > 0 ? psnr_sum / psnr_n : 0.0;
  return s;
}

}  // namespace tilecodec
