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

#include <string>
#include <vector>

#include "tilecodec/codec_pipeline.hpp"

namespace tilecodec {

/// One rate-distortion measurement. bpp counts every container byte of the
/// actual stream; payload_bpp counts only the residual code bits.
struct RdRecord {
  std::string image_id;
  std::string mode;  // "constant" or "adaptive"
  double param = 0.0;
  double bpp = 0.0;
  double payload_bpp = 0.0;
  double psnr = 0.0;  // +infinity sentinel for lossless
};

/// Tile-grid bit allocation map, normalized to k / k_max grayscale.
struct BitMap {
  int rows = 0;
  int cols = 0;
  std::vector<uint8_t> gray;
};

struct CorpusImage {
  std::string id;
  RgbImage image;
};

/// One record per (image, k), images outer, k inner; bpp from actual stream
/// bytes.
std::vector<RdRecord> sweep_constant(const std::vector<CorpusImage>& corpus,
                                     const CodecModel& model,
                                     const std::vector<int>& k_list,
                                     int threads = 0);

/// One record per (image, target); also emits a bit-allocation map per
/// record when maps is non-null.
std::vector<RdRecord> sweep_adaptive(const std::vector<CorpusImage>& corpus,
                                     const CodecModel& model,
                                     const std::vector<double>& targets,
                                     std::vector<BitMap>* maps = nullptr,
                                     int threads = 0);

BitMap plan_to_bitmap(const TilePlan& plan);

/// CSV with header image,mode,param,bpp,payload_bpp,psnr. Byte-deterministic;
/// infinite PSNR renders as "inf".
std::string render_csv(const std::vector<RdRecord>& records);
void export_csv(const std::vector<RdRecord>& records, const std::string& path);

/// Binary PGM (P5) rendering of a bit-allocation map.
std::vector<uint8_t> render_pgm(const BitMap& map);
void export_bitmap(const BitMap& map, const std::string& path);

/// Image-mean aggregation (not pixel-mean). Records with infinite PSNR are
/// excluded from mean_psnr and counted.
struct SweepSummary {
  double mean_psnr = 0.0;
  double mean_bpp = 0.0;
  double mean_payload_bpp = 0.0;
  int n = 0;
  int psnr_inf_excluded = 0;
};
SweepSummary summarize(const std::vector<RdRecord>& records);

}  // namespace tilecodec
