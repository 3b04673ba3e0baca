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

#include "tilecodec/image_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "tilecodec/errors.hpp"

namespace tilecodec {
namespace detail {

uint32_t crc32(std::span<const uint8_t> data) {
  static const auto table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t n = 0; n < 256; ++n) {
      uint32_t c = n;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[n] = c;
    }
    return t;
  }();
  uint32_t c = 0xffffffffu;
  for (uint8_t b : data) c = table[(c ^ b) & 0xffu] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

uint32_t adler32(std::span<const uint8_t> data) {
  uint32_t a = 1, b = 0;
  size_t i = 0;
  while (i < data.size()) {
    // 5552 iterations fit in 32 bits before the modulo is needed.
    const size_t chunk = std::min<size_t>(5552, data.size() - i);
    for (size_t j = 0; j < chunk; ++j) {
      a += data[i + j];
      b += a;
    }
    a %= 65521;
    b %= 65521;
    i += chunk;
  }
  return (b << 16) | a;
}

namespace {

// --------------------------------------------------------------------------
// Deflate (fixed Huffman) with a hash-chain LZ77 matcher.
// --------------------------------------------------------------------------

constexpr int kMinMatch = 3;
constexpr int kMaxMatch = 258;
constexpr int kWindow = 32768;

constexpr uint16_t kLenBase[29] = {3,  4,  5,  6,  7,  8,  9,  10, 11, 13,
                                   15, 17, 19, 23, 27, 31, 35, 43, 51, 59,
                                   67, 83, 99, 115, 131, 163, 195, 227, 258};
constexpr uint8_t kLenExtra[29] = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2,
                                   2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0};
constexpr uint16_t kDistBase[30] = {
    1,    2,    3,    4,    5,    7,     9,     13,    17,   25,
    33,   49,   65,   97,   129,  193,   257,   385,   513,  769,
    1025, 1537, 2049, 3073, 4097, 6145,  8193,  12289, 16385, 24577};
constexpr uint8_t kDistExtra[30] = {0, 0, 0,  0,  1,  1,  2,  2,  3,  3,
                                    4, 4, 5,  5,  6,  6,  7,  7,  8,  8,
                                    9, 9, 10, 10, 11, 11, 12, 12, 13, 13};

struct BitWriter {
  std::vector<uint8_t> bytes;
  uint32_t bitbuf = 0;
  int bitcnt = 0;

  void put(uint32_t bits, int n) {
    bitbuf |= bits << bitcnt;
    bitcnt += n;
    while (bitcnt >= 8) {
      bytes.push_back(static_cast<uint8_t>(bitbuf & 0xffu));
      bitbuf >>= 8;
      bitcnt -= 8;
    }
  }
  // Huffman codes go out most-significant-bit first.
  void put_huff(uint32_t code, int n) {
    uint32_t rev = 0;
    for (int i = 0; i < n; ++i) rev |= ((code >> i) & 1u) << (n - 1 - i);
    put(rev, n);
  }
  void flush() {
    if (bitcnt > 0) {
      bytes.push_back(static_cast<uint8_t>(bitbuf & 0xffu));
      bitbuf = 0;
      bitcnt = 0;
    }
  }
};

void put_fixed_literal(BitWriter& bw, int sym) {
  if (sym < 144)
    bw.put_huff(0x30 + sym, 8);
  else if (sym < 256)
    bw.put_huff(0x190 + (sym - 144), 9);
  else if (sym < 280)
    bw.put_huff(sym - 256, 7);
  else
    bw.put_huff(0xc0 + (sym - 280), 8);
}

int length_code(int len) {
  int c = 28;
  while (c > 0 && kLenBase[c] > len) --c;
  // Code 28 encodes exactly 258 with no extra bits.
  if (c == 28 && len != 258) c = 27;
  return c;
}

int dist_code(int dist) {
  int c = 29;
  while (c > 0 && kDistBase[c] > dist) --c;
  return c;
}

}  // namespace

std::vector<uint8_t> deflate_fixed(std::span<const uint8_t> data) {
  BitWriter bw;
  bw.put(1, 1);  // BFINAL
  bw.put(1, 2);  // fixed Huffman block

  constexpr int kHashBits = 15;
  constexpr int kMaxChain = 48;
  std::vector<int32_t> head(1 << kHashBits, -1);
  std::vector<int32_t> prev(data.size(), -1);
  auto hash3 = [&](size_t i) {
    const uint32_t v = data[i] | (data[i + 1] << 8) | (data[i + 2] << 16);
    return (v * 2654435761u) >> (32 - kHashBits);
  };

  size_t pos = 0;
  const size_t n = data.size();
  while (pos < n) {
    int best_len = 0, best_dist = 0;
    if (pos + kMinMatch <= n) {
      const uint32_t h = hash3(pos);
      int32_t cand = head[h];
      int chain = kMaxChain;
      const int max_len = static_cast<int>(std::min<size_t>(kMaxMatch, n - pos));
      while (cand >= 0 && chain-- > 0 &&
             pos - static_cast<size_t>(cand) <= kWindow) {
        int len = 0;
        while (len < max_len && data[cand + len] == data[pos + len]) ++len;
        if (len > best_len) {
          best_len = len;
          best_dist = static_cast<int>(pos) - cand;
          if (len >= max_len) break;
        }
        cand = prev[cand];
      }
      prev[pos] = head[h];
      head[h] = static_cast<int32_t>(pos);
    }
    if (best_len >= kMinMatch) {
      const int lc = length_code(best_len);
      put_fixed_literal(bw, 257 + lc);
      if (kLenExtra[lc]) bw.put(best_len - kLenBase[lc], kLenExtra[lc]);
      const int dc = dist_code(best_dist);
      bw.put_huff(dc, 5);
      if (kDistExtra[dc]) bw.put(best_dist - kDistBase[dc], kDistExtra[dc]);
      // Insert the skipped positions into the hash chains too.
      for (size_t k = pos + 1; k < pos + best_len && k + kMinMatch <= n; ++k) {
        const uint32_t h = hash3(k);
        prev[k] = head[h];
        head[h] = static_cast<int32_t>(k);
      }
      pos += best_len;
    } else {
      put_fixed_literal(bw, data[pos]);
      ++pos;
    }
  }
  put_fixed_literal(bw, 256);  // end of block
  bw.flush();
  return std::move(bw.bytes);
}

namespace {

// --------------------------------------------------------------------------
// Inflate: stored, fixed and dynamic Huffman blocks.
// --------------------------------------------------------------------------

struct BitReader {
  std::span<const uint8_t> data;
  size_t pos = 0;
  uint32_t bitbuf = 0;
  int bitcnt = 0;

  uint32_t get(int n) {
    while (bitcnt < n) {
      if (pos >= data.size())
        throw FormatError(FormatError::Kind::Truncated,
                          "deflate stream truncated");
      bitbuf |= static_cast<uint32_t>(data[pos++]) << bitcnt;
      bitcnt += 8;
    }
    const uint32_t v = bitbuf & ((1u << n) - 1u);
    bitbuf >>= n;
    bitcnt -= n;
    return v;
  }
  void align() {
    bitbuf = 0;
    bitcnt = 0;
  }
};

// Canonical Huffman decoder from code lengths.
struct HuffTable {
  std::array<uint16_t, 16> count{};   // codes per length
  std::vector<uint16_t> symbols;      // symbols sorted by (length, symbol)

  void build(std::span<const uint8_t> lengths) {
    count.fill(0);
    for (uint8_t l : lengths)
      if (l) ++count[l];
    symbols.assign(lengths.size(), 0);
    std::array<uint16_t, 16> offs{};
    uint16_t o = 0;
    for (int l = 1; l < 16; ++l) {
      offs[l] = o;
      o += count[l];
    }
    for (size_t s = 0; s < lengths.size(); ++s)
      if (lengths[s]) symbols[offs[lengths[s]]++] = static_cast<uint16_t>(s);
  }

  int decode(BitReader& br) const {
    int code = 0, first = 0, index = 0;
    for (int len = 1; len < 16; ++len) {
      code |= static_cast<int>(br.get(1));
      const int cnt = count[len];
      if (code - first < cnt) return symbols[index + (code - first)];
      index += cnt;
      first = (first + cnt) << 1;
      code <<= 1;
    }
    throw FormatError(FormatError::Kind::Corrupt, "invalid huffman code");
  }
};

const HuffTable& fixed_literal_table() {
  static const HuffTable t = [] {
    std::vector<uint8_t> lens(288);
    for (int i = 0; i < 144; ++i) lens[i] = 8;
    for (int i = 144; i < 256; ++i) lens[i] = 9;
    for (int i = 256; i < 280; ++i) lens[i] = 7;
    for (int i = 280; i < 288; ++i) lens[i] = 8;
    HuffTable h;
    h.build(lens);
    return h;
  }();
  return t;
}

const HuffTable& fixed_dist_table() {
  static const HuffTable t = [] {
    std::vector<uint8_t> lens(30, 5);
    HuffTable h;
    h.build(lens);
    return h;
  }();
  return t;
}

}  // namespace

std::vector<uint8_t> inflate(std::span<const uint8_t> data) {
  BitReader br{data};
  std::vector<uint8_t> out;
  bool final_block = false;
  while (!final_block) {
    final_block = br.get(1) != 0;
    const uint32_t btype = br.get(2);
    if (btype == 0) {  // stored
      br.align();
      if (br.pos + 4 > data.size())
        throw FormatError(FormatError::Kind::Truncated,
                          "stored block header truncated");
      const uint32_t len = data[br.pos] | (data[br.pos + 1] << 8);
      const uint32_t nlen = data[br.pos + 2] | (data[br.pos + 3] << 8);
      br.pos += 4;
      if ((len ^ 0xffffu) != nlen)
        throw FormatError(FormatError::Kind::Corrupt,
                          "stored block length check failed");
      if (br.pos + len > data.size())
        throw FormatError(FormatError::Kind::Truncated,
                          "stored block data truncated");
      out.insert(out.end(), data.begin() + br.pos, data.begin() + br.pos + len);
      br.pos += len;
    } else if (btype == 1 || btype == 2) {
      HuffTable lit, dist;
      if (btype == 1) {
        lit = fixed_literal_table();
        dist = fixed_dist_table();
      } else {
        const int hlit = static_cast<int>(br.get(5)) + 257;
        const int hdist = static_cast<int>(br.get(5)) + 1;
        const int hclen = static_cast<int>(br.get(4)) + 4;
        static constexpr uint8_t order[19] = {16, 17, 18, 0, 8,  7, 9,  6, 10, 5,
                                              11, 4,  12, 3, 13, 2, 14, 1, 15};
        std::vector<uint8_t> cl_lens(19, 0);
        for (int i = 0; i < hclen; ++i)
          cl_lens[order[i]] = static_cast<uint8_t>(br.get(3));
        HuffTable cl;
        cl.build(cl_lens);
        std::vector<uint8_t> lens;
        lens.reserve(hlit + hdist);
        while (static_cast<int>(lens.size()) < hlit + hdist) {
          const int sym = cl.decode(br);
          if (sym < 16) {
            lens.push_back(static_cast<uint8_t>(sym));
          } else if (sym == 16) {
            if (lens.empty())
              throw FormatError(FormatError::Kind::Corrupt,
                                "code length repeat with no previous length");
            const int rep = 3 + static_cast<int>(br.get(2));
            lens.insert(lens.end(), rep, lens.back());
          } else if (sym == 17) {
            lens.insert(lens.end(), 3 + br.get(3), 0);
          } else {
            lens.insert(lens.end(), 11 + br.get(7), 0);
          }
        }
        if (static_cast<int>(lens.size()) != hlit + hdist)
          throw FormatError(FormatError::Kind::Corrupt,
                            "code length table overflow");
        lit.build(std::span(lens).subspan(0, hlit));
        dist.build(std::span(lens).subspan(hlit));
      }
      for (;;) {
        const int sym = lit.decode(br);
        if (sym == 256) break;
        if (sym < 256) {
          out.push_back(static_cast<uint8_t>(sym));
        } else {
          const int lc = sym - 257;
          if (lc >= 29)
            throw FormatError(FormatError::Kind::Corrupt,
                              "invalid length code");
          const int len = kLenBase[lc] + static_cast<int>(br.get(kLenExtra[lc]));
          const int dc = dist.decode(br);
          if (dc >= 30)
            throw FormatError(FormatError::Kind::Corrupt,
                              "invalid distance code");
          const int d = kDistBase[dc] + static_cast<int>(br.get(kDistExtra[dc]));
          if (d > static_cast<int>(out.size()))
            throw FormatError(FormatError::Kind::Corrupt,
                              "match distance before stream start");
          for (int i = 0; i < len; ++i)
            out.push_back(out[out.size() - d]);
        }
      }
    } else {
      throw FormatError(FormatError::Kind::Corrupt, "invalid block type 3");
    }
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PPM (P6, maxval 255).
// ---------------------------------------------------------------------------

namespace {

void require_nonempty(const RgbImage& img) {
  if (img.width <= 0 || img.height <= 0)
    throw ConfigError("image dimensions must be positive, got " +
                      std::to_string(img.width) + "x" +
                      std::to_string(img.height));
  if (img.pixels.size() != static_cast<size_t>(img.width) * img.height * 3)
    throw ConfigError("pixel buffer size does not match dimensions");
}

struct PpmTokenizer {
  std::span<const uint8_t> data;
  size_t pos = 0;

  // Skips whitespace and '#' comments, then reads one token.
  std::string next() {
    for (;;) {
      while (pos < data.size() && std::isspace(data[pos])) ++pos;
      if (pos < data.size() && data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    std::string tok;
    while (pos < data.size() && !std::isspace(data[pos]))
      tok.push_back(static_cast<char>(data[pos++]));
    if (tok.empty())
      throw FormatError(FormatError::Kind::Truncated, "ppm header truncated");
    return tok;
  }
};

int parse_positive(const std::string& tok, const char* what) {
  int v = 0;
  for (char c : tok) {
    if (c < '0' || c > '9')
      throw FormatError(FormatError::Kind::Corrupt,
                        std::string("ppm ") + what + " is not a number");
    v = v * 10 + (c - '0');
    if (v > 1 << 24)
      throw FormatError(FormatError::Kind::Corrupt,
                        std::string("ppm ") + what + " out of range");
  }
  return v;
}

}  // namespace

std::vector<uint8_t> encode_ppm(const RgbImage& img) {
  require_nonempty(img);
  std::string header = "P6\n" + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

RgbImage decode_ppm(std::span<const uint8_t> bytes) {
  PpmTokenizer tok{bytes};
  const std::string magic = tok.next();
  if (magic != "P6")
    throw FormatError(FormatError::Kind::BadMagic,
                      "not a binary ppm (magic '" + magic + "', expected P6)");
  RgbImage img;
  img.width = parse_positive(tok.next(), "width");
  img.height = parse_positive(tok.next(), "height");
  const int maxval = parse_positive(tok.next(), "maxval");
  if (maxval != 255)
    throw FormatError(FormatError::Kind::Unsupported,
                      "unsupported ppm maxval " + std::to_string(maxval) +
                          " (only 255)");
  if (img.width == 0 || img.height == 0)
    throw FormatError(FormatError::Kind::Corrupt, "ppm with zero dimension");
  ++tok.pos;  // the single whitespace byte after maxval
  const size_t need = static_cast<size_t>(img.width) * img.height * 3;
  if (bytes.size() - tok.pos < need)
    throw FormatError(FormatError::Kind::Truncated,
                      "ppm pixel data truncated: need " + std::to_string(need) +
                          " bytes, have " +
                          std::to_string(bytes.size() - tok.pos));
  img.pixels.assign(bytes.begin() + tok.pos, bytes.begin() + tok.pos + need);
  return img;
}

// ---------------------------------------------------------------------------
// PNG.
// ---------------------------------------------------------------------------

namespace {

constexpr uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

void put_be32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(static_cast<uint8_t>(x >> 24));
  v.push_back(static_cast<uint8_t>(x >> 16));
  v.push_back(static_cast<uint8_t>(x >> 8));
  v.push_back(static_cast<uint8_t>(x));
}

uint32_t get_be32(const uint8_t* p) {
  return (static_cast<uint32_t>(p[0]) << 24) |
         (static_cast<uint32_t>(p[1]) << 16) |
         (static_cast<uint32_t>(p[2]) << 8) | p[3];
}

void append_chunk(std::vector<uint8_t>& out, const char type[4],
                  std::span<const uint8_t> data) {
  put_be32(out, static_cast<uint32_t>(data.size()));
  std::vector<uint8_t> crc_input(type, type + 4);
  crc_input.insert(crc_input.end(), data.begin(), data.end());
  out.insert(out.end(), crc_input.begin(), crc_input.end());
  put_be32(out, detail::crc32(crc_input));
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

std::vector<uint8_t> encode_png(const RgbImage& img) {
  require_nonempty(img);
  const int w = img.width, h = img.height, bpp = 3;
  const size_t stride = static_cast<size_t>(w) * bpp;

  // Per-row filter selection by minimum sum of absolute residuals.
  std::vector<uint8_t> raw;
  raw.reserve((stride + 1) * h);
  for (int y = 0; y < h; ++y) {
    const uint8_t* row = img.pixels.data() + y * stride;
    const uint8_t* above = y > 0 ? img.pixels.data() + (y - 1) * stride : nullptr;
    auto filtered = [&](int f, size_t i) -> uint8_t {
      const int x = row[i];
      const int a = i >= static_cast<size_t>(bpp) ? row[i - bpp] : 0;
      const int b = above ? above[i] : 0;
      const int c =
          (above && i >= static_cast<size_t>(bpp)) ? above[i - bpp] : 0;
      switch (f) {
        case 1: return static_cast<uint8_t>(x - a);
        case 2: return static_cast<uint8_t>(x - b);
        case 3: return static_cast<uint8_t>(x - (a + b) / 2);
        case 4: return static_cast<uint8_t>(x - paeth(a, b, c));
        default: return static_cast<uint8_t>(x);
      }
    };
    long long best_score = -1;
    int best_filter = 0;
    for (int f = 0; f < 5; ++f) {
      long long score = 0;
      for (size_t i = 0; i < stride; ++i) {
        const int s = static_cast<int8_t>(filtered(f, i));
        score += s < 0 ? -s : s;
      }
      if (best_score < 0 || score < best_score) {
        best_score = score;
        best_filter = f;
      }
    }
    raw.push_back(static_cast<uint8_t>(best_filter));
    for (size_t i = 0; i < stride; ++i) raw.push_back(filtered(best_filter, i));
  }

  std::vector<uint8_t> zdata;
  zdata.push_back(0x78);
  zdata.push_back(0x01);
  auto compressed = detail::deflate_fixed(raw);
  zdata.insert(zdata.end(), compressed.begin(), compressed.end());
  put_be32(zdata, detail::adler32(raw));

  std::vector<uint8_t> out(kPngSig, kPngSig + 8);
  std::vector<uint8_t> ihdr;
  put_be32(ihdr, static_cast<uint32_t>(w));
  put_be32(ihdr, static_cast<uint32_t>(h));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", zdata);
  append_chunk(out, "IEND", {});
  return out;
}

RgbImage decode_png(std::span<const uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSig, 8) != 0)
    throw FormatError(FormatError::Kind::BadMagic, "not a png file");

  size_t pos = 8;
  int w = 0, h = 0, color_type = -1;
  bool saw_ihdr = false, saw_iend = false;
  std::vector<uint8_t> idat;

  while (pos < bytes.size()) {
    if (pos + 12 > bytes.size())
      throw FormatError(FormatError::Kind::Truncated, "png chunk truncated");
    const uint32_t len = get_be32(&bytes[pos]);
    if (pos + 12 + len > bytes.size())
      throw FormatError(FormatError::Kind::Truncated,
                        "png chunk data truncated");
    const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
    const uint32_t crc_have = get_be32(&bytes[pos + 8 + len]);
    const uint32_t crc_want =
        detail::crc32(bytes.subspan(pos + 4, 4 + len));
    if (crc_have != crc_want)
      throw FormatError(FormatError::Kind::Corrupt,
                        std::string("png chunk crc mismatch in ") +
                            std::string(type, 4));
    std::span<const uint8_t> data = bytes.subspan(pos + 8, len);

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13)
        throw FormatError(FormatError::Kind::Corrupt, "bad IHDR length");
      w = static_cast<int>(get_be32(&data[0]));
      h = static_cast<int>(get_be32(&data[4]));
      const int bit_depth = data[8];
      color_type = data[9];
      const int interlace = data[12];
      if (bit_depth != 8)
        throw FormatError(FormatError::Kind::Unsupported,
                          "unsupported png bit depth " +
                              std::to_string(bit_depth) + " (only 8)");
      if (color_type != 0 && color_type != 2 && color_type != 6)
        throw FormatError(FormatError::Kind::Unsupported,
                          "unsupported png color type " +
                              std::to_string(color_type) +
                              " (grayscale, rgb or rgba)");
      if (interlace != 0)
        throw FormatError(FormatError::Kind::Unsupported,
                          "interlaced png is not supported");
      if (w <= 0 || h <= 0)
        throw FormatError(FormatError::Kind::Corrupt, "png with zero dimension");
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data.begin(), data.end());
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      saw_iend = true;
      break;
    }
    // Ancillary chunks are skipped (their CRC was still verified).
    pos += 12 + len;
  }
  if (!saw_ihdr)
    throw FormatError(FormatError::Kind::Corrupt, "png missing IHDR");
  if (!saw_iend)
    throw FormatError(FormatError::Kind::Truncated, "png missing IEND");
  if (idat.size() < 6)
    throw FormatError(FormatError::Kind::Truncated, "png missing IDAT data");

  // zlib wrapper.
  if ((idat[0] & 0x0f) != 8)
    throw FormatError(FormatError::Kind::Corrupt, "bad zlib method in IDAT");
  if (((idat[0] << 8) | idat[1]) % 31 != 0)
    throw FormatError(FormatError::Kind::Corrupt, "bad zlib header check");
  if (idat[1] & 0x20)
    throw FormatError(FormatError::Kind::Unsupported,
                      "zlib preset dictionary not supported");
  auto raw = detail::inflate(
      std::span(idat).subspan(2, idat.size() - 6));
  const uint32_t adler_have = get_be32(&idat[idat.size() - 4]);
  if (detail::adler32(raw) != adler_have)
    throw FormatError(FormatError::Kind::Corrupt, "zlib checksum mismatch");

  const int channels = color_type == 0 ? 1 : (color_type == 2 ? 3 : 4);
  const size_t stride = static_cast<size_t>(w) * channels;
  if (raw.size() != (stride + 1) * static_cast<size_t>(h))
    throw FormatError(FormatError::Kind::Corrupt,
                      "png pixel data size mismatch: got " +
                          std::to_string(raw.size()) + ", expected " +
                          std::to_string((stride + 1) * h));

  // Undo per-row filters in place.
  std::vector<uint8_t> flat(stride * h);
  for (int y = 0; y < h; ++y) {
    const uint8_t filter = raw[y * (stride + 1)];
    const uint8_t* src = raw.data() + y * (stride + 1) + 1;
    uint8_t* dst = flat.data() + y * stride;
    const uint8_t* up = y > 0 ? flat.data() + (y - 1) * stride : nullptr;
    for (size_t i = 0; i < stride; ++i) {
      const int a = i >= static_cast<size_t>(channels) ? dst[i - channels] : 0;
      const int b = up ? up[i] : 0;
      const int c =
          (up && i >= static_cast<size_t>(channels)) ? up[i - channels] : 0;
      int v;
      switch (filter) {
        case 0: v = src[i]; break;
        case 1: v = src[i] + a; break;
        case 2: v = src[i] + b; break;
        case 3: v = src[i] + (a + b) / 2; break;
        case 4: v = src[i] + paeth(a, b, c); break;
        default:
          throw FormatError(FormatError::Kind::Corrupt,
                            "invalid png filter type " +
                                std::to_string(filter));
      }
      dst[i] = static_cast<uint8_t>(v);
    }
  }

  RgbImage img(w, h);
  for (size_t p = 0; p < static_cast<size_t>(w) * h; ++p) {
    const uint8_t* s = flat.data() + p * channels;
    uint8_t* d = img.pixels.data() + p * 3;
    if (channels == 1) {
      d[0] = d[1] = d[2] = s[0];
    } else {
      d[0] = s[0];
      d[1] = s[1];
      d[2] = s[2];  // alpha, when present, is dropped
    }
  }
  return img;
}

size_t png_encoded_size(const RgbImage& img) { return encode_png(img).size(); }

// ---------------------------------------------------------------------------
// File-level helpers.
// ---------------------------------------------------------------------------

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  f.seekg(0, std::ios::end);
  const auto size = f.tellg();
  f.seekg(0);
  std::vector<uint8_t> data(static_cast<size_t>(size));
  f.read(reinterpret_cast<char*>(data.data()), size);
  if (!f) throw IoError("read failed for " + path);
  return data;
}

void write_file(const std::string& path, std::span<const uint8_t> data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot create " + path);
  f.write(reinterpret_cast<const char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
  if (!f) throw IoError("write failed for " + path);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

RgbImage read_image(const std::string& path) {
  const auto data = read_file(path);
  if (data.size() >= 8 && std::memcmp(data.data(), kPngSig, 8) == 0)
    return decode_png(data);
  if (data.size() >= 2 && data[0] == 'P' && data[1] == '6')
    return decode_ppm(data);
  throw FormatError(FormatError::Kind::Unsupported,
                    "unsupported image format in " + path +
                        " (png or binary ppm expected)");
}

void write_image(const RgbImage& img, const std::string& path,
                 ImageFormat fmt) {
  write_file(path, fmt == ImageFormat::Ppm ? encode_ppm(img) : encode_png(img));
}

void write_image(const RgbImage& img, const std::string& path) {
  if (ends_with(path, ".ppm"))
    write_image(img, path, ImageFormat::Ppm);
  else if (ends_with(path, ".png"))
    write_image(img, path, ImageFormat::Png);
  else
    throw ConfigError("cannot infer image format from path " + path +
                      " (.ppm or .png)");
}

}  // namespace tilecodec
