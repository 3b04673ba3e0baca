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

#include "tilecodec/bitstream.hpp"

#include <cstring>
#include <fstream>

#include "tilecodec/errors.hpp"

namespace tilecodec {

namespace {

constexpr char kStreamMagic[4] = {'T', 'N', 'C', '1'};
constexpr char kModelMagic[4] = {'T', 'N', 'C', 'M'};
constexpr uint8_t kModelVersion = 1;

struct ByteWriter {
  std::vector<uint8_t> bytes;

  void u8(uint8_t v) { bytes.push_back(v); }
  void u16(uint16_t v) {
    bytes.push_back(static_cast<uint8_t>(v & 0xff));
    bytes.push_back(static_cast<uint8_t>(v >> 8));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void raw(const void* data, size_t n) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    bytes.insert(bytes.end(), p, p + n);
  }
};

struct ByteReader {
  std::span<const uint8_t> bytes;
  size_t pos = 0;

  void need(size_t n, const char* what) {
    if (pos + n > bytes.size())
      throw FormatError(FormatError::Kind::Truncated,
                        std::string("truncated ") + what + ": need " +
                            std::to_string(pos + n) + " bytes, have " +
                            std::to_string(bytes.size()));
  }
  uint8_t u8(const char* what) {
    need(1, what);
    return bytes[pos++];
  }
  uint16_t u16(const char* what) {
    need(2, what);
    const uint16_t v = static_cast<uint16_t>(bytes[pos] | (bytes[pos + 1] << 8));
    pos += 2;
    return v;
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64(const char* what) {
    need(8, what);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  float f32(const char* what) {
    const uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
};

void check_plan(const StreamHeader& header, const TilePlan& plan) {
  if (header.width == 0 || header.height == 0)
    throw ConfigError("stream header has zero image dimensions");
  if (header.tile_size != kTileSize)
    throw ConfigError("tile size must be " + std::to_string(kTileSize));
  if (plan.rows != header.tile_rows() || plan.cols != header.tile_cols())
    throw ConfigError("plan grid " + std::to_string(plan.rows) + "x" +
                      std::to_string(plan.cols) + " does not match header-derived " +
                      std::to_string(header.tile_rows()) + "x" +
                      std::to_string(header.tile_cols()));
  if (plan.k.size() != static_cast<size_t>(plan.rows) * plan.cols)
    throw ConfigError("plan table length does not match grid");
  for (uint8_t k : plan.k)
    if (k > kMaxIterations)
      throw ConfigError("plan k " + std::to_string(k) + " exceeds " +
                        std::to_string(kMaxIterations));
}

}  // namespace

size_t stream_size_bytes(const TilePlan& plan) {
  const long long payload_bits = plan.total_iterations() * kBitsPerIteration;
  return kStreamHeaderBytes + plan.k.size() +
         static_cast<size_t>((payload_bits + 7) / 8);
}

std::vector<uint8_t> write_stream(const StreamHeader& header,
                                  const TilePlan& plan,
                                  const std::vector<BinaryCode>& codes) {
  check_plan(header, plan);
  if (static_cast<long long>(codes.size()) != plan.total_iterations())
    throw ConfigError("code count " + std::to_string(codes.size()) +
                      " does not match plan total " +
                      std::to_string(plan.total_iterations()));
  for (const auto& c : codes)
    if (c.size() != kBitsPerIteration)
      throw ConfigError("code length " + std::to_string(c.size()) +
                        " is not " + std::to_string(kBitsPerIteration));

  ByteWriter w;
  w.raw(kStreamMagic, 4);
  w.u8(kStreamVersion);
  w.u16(header.width);
  w.u16(header.height);
  w.u8(header.tile_size);
  w.u8(header.mode);
  w.u16(header.mode_param);
  w.u64(header.model_digest);
  w.raw(plan.k.data(), plan.k.size());

  uint8_t acc = 0;
  int nbits = 0;
  for (const auto& code : codes)
    for (int8_t bit : code.bits) {
      acc = static_cast<uint8_t>((acc << 1) | (bit > 0 ? 1 : 0));
      if (++nbits == 8) {
        w.u8(acc);
        acc = 0;
        nbits = 0;
      }
    }
  if (nbits > 0) w.u8(static_cast<uint8_t>(acc << (8 - nbits)));
  return std::move(w.bytes);
}

ParsedStream read_stream(std::span<const uint8_t> bytes) {
  ByteReader r{bytes};
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kStreamMagic, 4) != 0)
    throw FormatError(FormatError::Kind::BadMagic, "bad stream magic");
  r.pos = 4;
  const uint8_t version = r.u8("version");
  if (version != kStreamVersion)
    throw FormatError(FormatError::Kind::BadVersion,
                      "unsupported stream version " + std::to_string(version));
  ParsedStream ps;
  ps.header.width = r.u16("header");
  ps.header.height = r.u16("header");
  ps.header.tile_size = r.u8("header");
  ps.header.mode = r.u8("header");
  ps.header.mode_param = r.u16("header");
  ps.header.model_digest = r.u64("header");

  if (ps.header.width == 0 || ps.header.height == 0)
    throw FormatError(FormatError::Kind::Corrupt,
                      "stream header has zero image dimensions");
  if (ps.header.tile_size != kTileSize)
    throw FormatError(FormatError::Kind::Unsupported,
                      "unsupported tile size " +
                          std::to_string(ps.header.tile_size));
  if (ps.header.mode > 1)
    throw FormatError(FormatError::Kind::Corrupt,
                      "unknown mode " + std::to_string(ps.header.mode));

  ps.plan.rows = ps.header.tile_rows();
  ps.plan.cols = ps.header.tile_cols();
  const size_t n_tiles = static_cast<size_t>(ps.plan.rows) * ps.plan.cols;
  r.need(n_tiles, "plan table");
  ps.plan.k.assign(bytes.begin() + r.pos, bytes.begin() + r.pos + n_tiles);
  r.pos += n_tiles;
  for (uint8_t k : ps.plan.k)
    if (k > kMaxIterations)
      throw FormatError(FormatError::Kind::Corrupt,
                        "plan k " + std::to_string(k) + " exceeds " +
                            std::to_string(kMaxIterations));

  const long long total_bits = ps.plan.total_iterations() * kBitsPerIteration;
  const size_t payload_bytes = static_cast<size_t>((total_bits + 7) / 8);
  if (bytes.size() - r.pos < payload_bytes)
    throw FormatError(FormatError::Kind::Truncated,
                      "truncated payload: need " +
                          std::to_string(payload_bytes) + " bytes, have " +
                          std::to_string(bytes.size() - r.pos));
  if (bytes.size() - r.pos > payload_bytes)
    throw FormatError(FormatError::Kind::TrailingData,
                      "stream has " +
                          std::to_string(bytes.size() - r.pos - payload_bytes) +
                          " trailing bytes");

  ps.codes.reserve(static_cast<size_t>(ps.plan.total_iterations()));
  size_t bit_index = 0;
  const uint8_t* payload = bytes.data() + r.pos;
  for (long long c = 0; c < ps.plan.total_iterations(); ++c) {
    BinaryCode code;
    code.bits.resize(kBitsPerIteration);
    for (int i = 0; i < kBitsPerIteration; ++i, ++bit_index) {
      const uint8_t byte = payload[bit_index >> 3];
      const int bit = (byte >> (7 - (bit_index & 7))) & 1;
      code.bits[i] = bit ? int8_t{1} : int8_t{-1};
    }
    ps.codes.push_back(std::move(code));
  }
  return ps;
}

// ---------------------------------------------------------------------------
// Model checkpoints.
// ---------------------------------------------------------------------------

std::vector<uint8_t> save_model(const CodecModel& model) {
  ByteWriter w;
  w.raw(kModelMagic, 4);
  w.u8(kModelVersion);
  const ArchConfig& a = model.arch();
  for (int d : a.ctx_enc_depths) w.u16(static_cast<uint16_t>(d));
  for (int d : a.ctx_dec_depths) w.u16(static_cast<uint16_t>(d));
  w.u16(static_cast<uint16_t>(a.res_in_depth));
  for (int d : a.res_enc_depths) w.u16(static_cast<uint16_t>(d));
  for (int d : a.res_dec_depths) w.u16(static_cast<uint16_t>(d));
  w.u16(static_cast<uint16_t>(a.bottleneck_depth));
  w.u16(static_cast<uint16_t>(a.k_max));

  w.u32(static_cast<uint32_t>(model.params().size()));
  for (const auto& p : model.params()) {
    w.u16(static_cast<uint16_t>(p.name.size()));
    w.raw(p.name.data(), p.name.size());
    w.u8(static_cast<uint8_t>(p.tensor.shape().rank()));
    for (int i = 0; i < p.tensor.shape().rank(); ++i)
      w.u16(static_cast<uint16_t>(p.tensor.shape()[i]));
    w.u32(static_cast<uint32_t>(p.tensor.numel()));
    w.raw(p.tensor.values().data(), p.tensor.values().size() * sizeof(float));
  }
  w.u64(model.train_steps);
  w.f32(model.final_loss);
  w.u64(model.digest());
  return std::move(w.bytes);
}

CodecModel load_model(std::span<const uint8_t> bytes) {
  ByteReader r{bytes};
  r.need(4, "model magic");
  if (std::memcmp(bytes.data(), kModelMagic, 4) != 0)
    throw FormatError(FormatError::Kind::BadMagic, "bad model magic");
  r.pos = 4;
  const uint8_t version = r.u8("model version");
  if (version != kModelVersion)
    throw FormatError(FormatError::Kind::BadVersion,
                      "unsupported model version " + std::to_string(version));

  ArchConfig a;
  for (int& d : a.ctx_enc_depths) d = r.u16("arch");
  for (int& d : a.ctx_dec_depths) d = r.u16("arch");
  a.res_in_depth = r.u16("arch");
  for (int& d : a.res_enc_depths) d = r.u16("arch");
  for (int& d : a.res_dec_depths) d = r.u16("arch");
  a.bottleneck_depth = r.u16("arch");
  a.k_max = r.u16("arch");
  if (a.bottleneck_depth != 8 || a.k_max != kMaxIterations)
    throw FormatError(FormatError::Kind::Unsupported,
                      "model bottleneck/k_max do not match this codec");

  // Rebuild the expected parameter list from the descriptor, then require the
  // file to match it name-for-name and shape-for-shape.
  CodecModel m = CodecModel::init(a, 0);
  const uint32_t n_params = r.u32("param count");
  if (n_params != m.params().size())
    throw FormatError(FormatError::Kind::Corrupt,
                      "model has " + std::to_string(n_params) +
                          " tensors, descriptor implies " +
                          std::to_string(m.params().size()));
  for (const auto& expect : m.params()) {
    const uint16_t name_len = r.u16("param name");
    r.need(name_len, "param name");
    std::string name(reinterpret_cast<const char*>(bytes.data() + r.pos),
                     name_len);
    r.pos += name_len;
    if (name != expect.name)
      throw FormatError(FormatError::Kind::Corrupt,
                        "unexpected tensor '" + name + "', descriptor implies '" +
                            expect.name + "'");
    const uint8_t rank = r.u8("param rank");
    if (rank != expect.tensor.shape().rank())
      throw FormatError(FormatError::Kind::Corrupt,
                        "tensor '" + name + "' rank mismatch");
    for (int i = 0; i < rank; ++i) {
      const uint16_t dim = r.u16("param dims");
      if (dim != expect.tensor.shape()[i])
        throw FormatError(FormatError::Kind::Corrupt,
                          "tensor '" + name + "' dim " + std::to_string(i) +
                              " is " + std::to_string(dim) + ", descriptor implies " +
                              std::to_string(expect.tensor.shape()[i]));
    }
    const uint32_t numel = r.u32("param size");
    if (numel != expect.tensor.numel())
      throw FormatError(FormatError::Kind::Corrupt,
                        "tensor '" + name + "' element count mismatch");
    r.need(numel * sizeof(float), "param data");
    Tensor t = expect.tensor;
    std::memcpy(t.values().data(), bytes.data() + r.pos,
                numel * sizeof(float));
    r.pos += numel * sizeof(float);
  }
  m.train_steps = r.u64("metadata");
  m.final_loss = r.f32("metadata");
  const uint64_t digest = r.u64("digest");
  if (r.pos != bytes.size())
    throw FormatError(FormatError::Kind::TrailingData,
                      "model file has trailing bytes");
  if (digest != m.digest())
    throw FormatError(FormatError::Kind::DigestMismatch,
                      "model digest mismatch: file corrupt or tampered");
  return m;
}

void save_model_file(const CodecModel& model, const std::string& path) {
  const auto bytes = save_model(model);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot create " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for " + path);
}

CodecModel load_model_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  f.seekg(0, std::ios::end);
  std::vector<uint8_t> bytes(static_cast<size_t>(f.tellg()));
  f.seekg(0);
  f.read(reinterpret_cast<char*>(bytes.data()),
         static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("read failed for " + path);
  return load_model(bytes);
}

}  // namespace tilecodec
