#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>

#include "mocorec/types.hpp"

// Minimal 8-bit grayscale PNG writer (zlib-deflated, filter 0 per scanline).
// Previews only; quantitative output always goes through CSV or the container.

namespace mocorec {

namespace detail {

inline void put_u32_be(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(uint8_t(x >> 24));
  v.push_back(uint8_t(x >> 16));
  v.push_back(uint8_t(x >> 8));
  v.push_back(uint8_t(x));
}

inline void png_chunk(std::ofstream& f, const char type[4],
                      const std::vector<uint8_t>& payload) {
  std::vector<uint8_t> hdr;
  put_u32_be(hdr, uint32_t(payload.size()));
  f.write(reinterpret_cast<const char*>(hdr.data()), 4);
  f.write(type, 4);
  if (!payload.empty())
    f.write(reinterpret_cast<const char*>(payload.data()), std::streamsize(payload.size()));
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
  if (!payload.empty()) crc = crc32(crc, payload.data(), uInt(payload.size()));
  std::vector<uint8_t> tail;
  put_u32_be(tail, uint32_t(crc));
  f.write(reinterpret_cast<const char*>(tail.data()), 4);
}

}  // namespace detail

inline void write_png_gray8(const std::string& path, const uint8_t* pixels,
                            int h, int w) {
  std::ofstream f(path, std::ios::binary);
  require(bool(f), "write_png_gray8: cannot open " + path);
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  f.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<uint8_t> ihdr;
  detail::put_u32_be(ihdr, uint32_t(w));
  detail::put_u32_be(ihdr, uint32_t(h));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  detail::png_chunk(f, "IHDR", ihdr);

  std::vector<uint8_t> raw;
  raw.reserve(size_t(h) * (w + 1));
  for (int y = 0; y < h; ++y) {
    raw.push_back(0);  // filter type
    raw.insert(raw.end(), pixels + size_t(y) * w, pixels + size_t(y) * w + w);
  }
  uLongf comp_len = compressBound(uLong(raw.size()));
  std::vector<uint8_t> comp(comp_len);
  const int rc = compress2(comp.data(), &comp_len, raw.data(), uLong(raw.size()), 6);
  require(rc == Z_OK, "write_png_gray8: deflate failed");
  comp.resize(comp_len);
  detail::png_chunk(f, "IDAT", comp);
  detail::png_chunk(f, "IEND", {});
}

// Magnitude image normalized to its own max, 8-bit.
inline void write_png_magnitude(const std::string& path, const ComplexImage& img) {
  double mx = 0.0;
  for (const auto& v : img.data) mx = std::max(mx, std::abs(v));
  std::vector<uint8_t> px(img.size());
  for (size_t i = 0; i < img.size(); ++i)
    px[i] = uint8_t(std::min(255.0, std::abs(img.data[i]) / (mx > 0 ? mx : 1.0) * 255.0 + 0.5));
  write_png_gray8(path, px.data(), img.h, img.w);
}

}  // namespace mocorec
