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

#include <CLI11.hpp>
#include <cinttypes>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "tilecodec/bitstream.hpp"
#include "tilecodec/codec_pipeline.hpp"
#include "tilecodec/errors.hpp"
#include "tilecodec/evaluator.hpp"
#include "tilecodec/image_io.hpp"
#include "tilecodec/synth.hpp"
#include "tilecodec/trainer.hpp"

namespace fs = std::filesystem;
using namespace tilecodec;

namespace {

// Exit-code contract: 0 ok, 1 usage, 2 data error, 3 internal.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

int log_level() {
  const char* env = std::getenv("TILECODEC_LOG");
  if (!env) return 1;
  const std::string v = env;
  if (v == "off" || v == "quiet" || v == "0") return 0;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

void logf(int level, const char* fmt, ...) {
  if (log_level() < level) return;
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  va_end(args);
  std::fputc('\n', stderr);
}

std::string json_num(double v) {
  if (std::isinf(v)) return "\"inf\"";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  f.seekg(0, std::ios::end);
  std::vector<uint8_t> data(static_cast<size_t>(f.tellg()));
  f.seekg(0);
  f.read(reinterpret_cast<char*>(data.data()),
         static_cast<std::streamsize>(data.size()));
  if (!f) throw IoError("read failed for " + path);
  return data;
}

void write_file_bytes(const std::string& path, std::span<const uint8_t> data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot create " + path);
  f.write(reinterpret_cast<const char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
  if (!f) throw IoError("write failed for " + path);
}

std::vector<CorpusImage> load_corpus_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir + " is not a directory");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".ppm") names.push_back(entry.path().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw IoError("no .png or .ppm images in " + dir);
  std::vector<CorpusImage> corpus;
  corpus.reserve(names.size());
  for (const auto& name : names)
    corpus.push_back({fs::path(name).stem().string(), read_image(name)});
  return corpus;
}

// ---------------------------------------------------------------------------

struct EncodeArgs {
  std::string input, output, model_path, mode = "constant";
  int k = -1;
  double target = -1.0;
  int threads = 0;
};

int run_encode(const EncodeArgs& args) {
  if (args.mode == "constant") {
    if (args.k < 0)
      throw CLI::ValidationError("encode", "constant mode requires --k");
    if (args.target >= 0.0)
      throw CLI::ValidationError("encode",
                                 "--target-psnr is only for adaptive mode");
  } else {
    if (args.target < 0.0)
      throw CLI::ValidationError("encode",
                                 "adaptive mode requires --target-psnr");
    if (args.k >= 0)
      throw CLI::ValidationError("encode", "--k is only for constant mode");
  }
  CodecModel model = load_model_file(args.model_path);
  RgbImage img = read_image(args.input);
  EncodeConfig cfg;
  cfg.mode = args.mode == "adaptive" ? EncodeConfig::Mode::Adaptive
                                     : EncodeConfig::Mode::Constant;
  cfg.k = args.k;
  cfg.target_psnr = args.target;
  cfg.threads = args.threads;
  logf(2, "encoding %s (%dx%d) with %s", args.input.c_str(), img.width,
       img.height, args.mode.c_str());
  EncodeResult res = encode_image(img, cfg, model);
  write_file_bytes(args.output, res.bytes);

  const double pixels = static_cast<double>(img.width) * img.height;
  std::string extra;
  if (cfg.mode == EncodeConfig::Mode::Adaptive) {
    double mean_k = 0.0;
    for (uint8_t k : res.plan.k) mean_k += k;
    mean_k /= static_cast<double>(res.plan.k.size());
    extra = ",\"target_psnr\":" + json_num(args.target) +
            ",\"mean_k\":" + json_num(mean_k);
  } else {
    extra = ",\"k\":" + std::to_string(args.k);
  }
  std::printf(
      "{\"mode\":\"%s\",\"width\":%d,\"height\":%d,\"tiles\":%zu,"
      "\"bytes\":%zu,\"bpp\":%s,\"payload_bpp\":%s,\"psnr\":%s%s}\n",
      args.mode.c_str(), img.width, img.height, res.plan.k.size(),
      res.bytes.size(), json_num(res.bytes.size() * 8.0 / pixels).c_str(),
      json_num(res.payload_bits / pixels).c_str(),
      json_num(res.psnr_vs_source).c_str(), extra.c_str());
  return kExitOk;
}

int run_decode(const std::string& input, const std::string& output,
               const std::string& model_path) {
  CodecModel model = load_model_file(model_path);
  const auto stream = read_file_bytes(input);
  RgbImage img = decode_image(stream, model);
  write_image(img, output);
  std::printf("{\"width\":%d,\"height\":%d,\"output\":\"%s\"}\n", img.width,
              img.height, output.c_str());
  return kExitOk;
}

struct TrainArgs {
  std::string phase = "context";
  std::string corpus_dir, out_path, init_path, arch = "toy";
  long long steps = 0;
  uint64_t seed = 0;
  double lr = 0.001;  // desk-scale default; 0.5 is the as-published value
  int batch = 8;
  int unroll = 8;
  int patches_per_image = 100;
};

int run_train(const TrainArgs& args) {
  if (args.phase == "residual" && args.init_path.empty())
    throw CLI::ValidationError(
        "train", "residual phase requires --init with the context model");

  CodecModel model =
      !args.init_path.empty()
          ? load_model_file(args.init_path)
          : CodecModel::init(
                args.arch == "full" ? ArchConfig::full() : ArchConfig::toy(),
                args.seed);

  std::vector<PatchRecord> corpus;
  if (args.steps > 0 || !args.corpus_dir.empty()) {
    if (args.corpus_dir.empty())
      throw CLI::ValidationError("train", "--corpus is required");
    for (const auto& ci : load_corpus_dir(args.corpus_dir)) {
      auto patches = select_patches(ci.image, args.patches_per_image,
                                    static_cast<int>(corpus.size()));
      for (auto& p : patches) corpus.push_back(std::move(p));
    }
    logf(1, "corpus: %zu patches", corpus.size());
  }

  TrainConfig cfg;
  cfg.batch_size = args.batch;
  cfg.lr0 = static_cast<float>(args.lr);
  cfg.steps = args.steps;
  cfg.seed = args.seed;
  cfg.unroll = args.unroll;
  cfg.phase =
      args.phase == "residual" ? TrainPhase::Residual : TrainPhase::Context;

  const int log_every = log_level() >= 2 ? 1 : 25;
  auto log_fn = [&](const TrainLogRecord& rec) {
    if (rec.step % log_every == 0 || rec.step + 1 == cfg.steps)
      std::fprintf(stderr, "{\"step\":%lld,\"lr\":%s,\"loss\":%s}\n", rec.step,
                   json_num(rec.lr).c_str(), json_num(rec.loss).c_str());
  };

  if (cfg.steps > 0) {
    if (cfg.phase == TrainPhase::Context)
      train_context(model, corpus, cfg, log_fn);
    else
      train_residual(model, corpus, cfg, log_fn);
  }
  save_model_file(model, args.out_path);
  std::printf(
      "{\"phase\":\"%s\",\"steps\":%lld,\"final_loss\":%s,\"params\":%lld,"
      "\"out\":\"%s\"}\n",
      args.phase.c_str(), args.steps, json_num(model.final_loss).c_str(),
      model.param_count(), args.out_path.c_str());
  return kExitOk;
}

struct SweepArgs {
  std::string corpus_dir, model_path, mode = "constant", csv_path, maps_dir;
  std::string params;
  int threads = 0;
};

int run_sweep(const SweepArgs& args) {
  CodecModel model = load_model_file(args.model_path);
  auto corpus = load_corpus_dir(args.corpus_dir);

  std::vector<double> values;
  {
    std::string tok;
    std::istringstream in(args.params);
    while (std::getline(in, tok, ',')) {
      if (tok.empty()) continue;
      values.push_back(std::stod(tok));
    }
  }
  if (values.empty())
    throw CLI::ValidationError("sweep", "--params needs a comma list");

  std::vector<RdRecord> records;
  std::vector<BitMap> maps;
  if (args.mode == "constant") {
    std::vector<int> ks;
    for (double v : values) ks.push_back(static_cast<int>(v));
    records = sweep_constant(corpus, model, ks, args.threads);
  } else {
    records = sweep_adaptive(corpus, model, values, &maps, args.threads);
  }
  if (!args.csv_path.empty()) export_csv(records, args.csv_path);
  if (!args.maps_dir.empty() && args.mode == "adaptive") {
    fs::create_directories(args.maps_dir);
    size_t mi = 0;
    for (const auto& rec : records) {
      char name[256];
      std::snprintf(name, sizeof(name), "%s/%s_t%.2f.pgm",
                    args.maps_dir.c_str(), rec.image_id.c_str(), rec.param);
      export_bitmap(maps[mi++], name);
    }
  }

  // One summary line per parameter value, aggregated over images.
  for (double v : values) {
    std::vector<RdRecord> subset;
    for (const auto& r : records)
      if (r.param == (args.mode == "constant" ? static_cast<int>(v) : v))
        subset.push_back(r);
    SweepSummary s = summarize(subset);
    std::printf(
        "{\"mode\":\"%s\",\"param\":%s,\"n\":%d,\"mean_bpp\":%s,"
        "\"mean_payload_bpp\":%s,\"mean_psnr\":%s,\"psnr_inf_excluded\":%d}\n",
        args.mode.c_str(), json_num(v).c_str(), s.n,
        json_num(s.mean_bpp).c_str(), json_num(s.mean_payload_bpp).c_str(),
        json_num(s.mean_psnr).c_str(), s.psnr_inf_excluded);
  }
  return kExitOk;
}

int run_inspect(const std::string& input) {
  const auto bytes = read_file_bytes(input);
  ParsedStream ps = read_stream(bytes);
  std::map<int, int> histogram;
  for (uint8_t k : ps.plan.k) ++histogram[k];
  std::string hist = "{";
  for (auto it = histogram.begin(); it != histogram.end(); ++it) {
    if (it != histogram.begin()) hist += ',';
    hist += "\"" + std::to_string(it->first) +
            "\":" + std::to_string(it->second);
  }
  hist += "}";
  char digest[32];
  std::snprintf(digest, sizeof(digest), "%016" PRIx64,
                ps.header.model_digest);
  std::printf(
      "{\"width\":%u,\"height\":%u,\"tile_size\":%u,\"mode\":\"%s\","
      "\"mode_param\":%u,\"model_digest\":\"%s\",\"tiles\":%zu,"
      "\"payload_bits\":%lld,\"plan_histogram\":%s}\n",
      ps.header.width, ps.header.height, ps.header.tile_size,
      ps.header.mode == 1 ? "adaptive" : "constant", ps.header.mode_param,
      digest, ps.plan.k.size(),
      ps.plan.total_iterations() * kBitsPerIteration, hist.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tilecodec: block-based neural image codec"};
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* cmd_encode = app.add_subcommand("encode", "Encode an image");
  cmd_encode->add_option("--input", enc.input, "Source image (.png/.ppm)")
      ->required();
  cmd_encode->add_option("--output", enc.output, "Output stream path")
      ->required();
  cmd_encode->add_option("--model", enc.model_path, "Model checkpoint")
      ->required();
  cmd_encode->add_option("--mode", enc.mode, "constant or adaptive")
      ->check(CLI::IsMember({"constant", "adaptive"}));
  cmd_encode->add_option("--k", enc.k, "Iterations per tile (constant mode)");
  cmd_encode->add_option("--target-psnr", enc.target,
                         "Per-tile PSNR target in dB (adaptive mode)");
  cmd_encode->add_option("--threads", enc.threads,
                         "Wavefront threads (0 = auto)");

  std::string dec_input, dec_output, dec_model;
  auto* cmd_decode = app.add_subcommand("decode", "Decode a stream");
  cmd_decode->add_option("--input", dec_input, "Encoded stream")->required();
  cmd_decode->add_option("--output", dec_output, "Output image (.png/.ppm)")
      ->required();
  cmd_decode->add_option("--model", dec_model, "Model checkpoint")->required();

  TrainArgs tr;
  auto* cmd_train = app.add_subcommand("train", "Train a model phase");
  cmd_train->add_option("--phase", tr.phase, "context or residual")
      ->check(CLI::IsMember({"context", "residual"}));
  cmd_train->add_option("--corpus", tr.corpus_dir, "Directory of images");
  cmd_train->add_option("--steps", tr.steps, "Optimization steps")->required();
  cmd_train->add_option("--seed", tr.seed, "Deterministic seed");
  cmd_train->add_option("--out", tr.out_path, "Output checkpoint")->required();
  cmd_train->add_option("--init", tr.init_path,
                        "Checkpoint to start from (required for residual)");
  cmd_train->add_option("--arch", tr.arch, "toy or full (fresh init only)")
      ->check(CLI::IsMember({"toy", "full"}));
  cmd_train->add_option("--lr", tr.lr,
                        "Initial learning rate (0.5 is the as-published "
                        "value; the desk-scale default is 0.001)");
  cmd_train->add_option("--batch", tr.batch, "Mini-batch size");
  cmd_train->add_option("--unroll", tr.unroll, "Residual-phase iterations");
  cmd_train->add_option("--patches-per-image", tr.patches_per_image,
                        "Most-difficult patches kept per corpus image");

  SweepArgs sw;
  auto* cmd_sweep = app.add_subcommand("sweep", "Rate-distortion sweep");
  cmd_sweep->add_option("--corpus", sw.corpus_dir, "Directory of images")
      ->required();
  cmd_sweep->add_option("--model", sw.model_path, "Model checkpoint")
      ->required();
  cmd_sweep->add_option("--mode", sw.mode, "constant or adaptive")
      ->check(CLI::IsMember({"constant", "adaptive"}));
  cmd_sweep->add_option("--params", sw.params,
                        "Comma list of k values or PSNR targets")
      ->required();
  cmd_sweep->add_option("--csv", sw.csv_path, "Per-record CSV output path");
  cmd_sweep->add_option("--maps-dir", sw.maps_dir,
                        "Directory for adaptive bit-allocation maps (.pgm)");
  cmd_sweep->add_option("--threads", sw.threads, "Wavefront threads");

  std::string ins_input;
  auto* cmd_inspect =
      app.add_subcommand("inspect", "Dump stream header and plan histogram");
  cmd_inspect->add_option("--input", ins_input, "Encoded stream")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cmd_encode) return run_encode(enc);
    if (*cmd_decode) return run_decode(dec_input, dec_output, dec_model);
    if (*cmd_train) return run_train(tr);
    if (*cmd_sweep) return run_sweep(sw);
    if (*cmd_inspect) return run_inspect(ins_input);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
