#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "capsqz/errors.hpp"
#include "capsqz/image.hpp"

namespace capsqz {
namespace detail {

inline std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file_bytes(const std::string& path, const void* data, size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw DataError("short write: " + path);
}

// Token scanner over a netpbm header: whitespace separated decimal fields,
// '#' comments running to end of line.
class PnmScanner {
 public:
  PnmScanner(const std::vector<uint8_t>& bytes, const std::string& path)
      : bytes_(bytes), path_(path) {}

  size_t pos() const { return pos_; }

  std::string magic() {
    if (bytes_.size() < 2) throw ParseError(path_ + ": truncated header", bytes_.size());
    std::string m(reinterpret_cast<const char*>(bytes_.data()), 2);
    pos_ = 2;
    return m;
  }

  unsigned long field(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size())
      throw ParseError(path_ + ": missing " + what, pos_);
    if (!is_digit(bytes_[pos_]))
      throw ParseError(path_ + ": expected number for " + what, pos_);
    unsigned long value = 0;
    while (pos_ < bytes_.size() && is_digit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1000000000ul) throw ParseError(path_ + ": absurd value for " + what, pos_);
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates the maxval from the raster.
  void raster_start() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_]))
      throw ParseError(path_ + ": missing whitespace before raster", pos_);
    ++pos_;
  }

  const uint8_t* raster(size_t n, const char* what) {
    if (bytes_.size() - pos_ < n)
      throw ParseError(path_ + ": truncated " + what + " raster", bytes_.size());
    const uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

 private:
  static bool is_space(uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
  static bool is_digit(uint8_t c) { return c >= '0' && c <= '9'; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<uint8_t>& bytes_;
  std::string path_;
  size_t pos_ = 0;
};

}  // namespace detail

// Binary 8-bit PPM (P6), maxval 255.
inline RgbImage read_ppm(const std::string& path) {
  const auto bytes = detail::read_file_bytes(path);
  detail::PnmScanner sc(bytes, path);
  if (sc.magic() != "P6") throw ParseError(path + ": not a P6 PPM", 0);
  const size_t w = sc.field("width");
  const size_t h = sc.field("height");
  if (w < 1 || h < 1) throw ParseError(path + ": zero dimension", sc.pos());
  const unsigned long maxval = sc.field("maxval");
  if (maxval != 255) throw ParseError(path + ": unsupported maxval (want 255)", sc.pos());
  sc.raster_start();
  RgbImage img(w, h);
  const uint8_t* raster = sc.raster(3 * w * h, "P6");
  std::copy(raster, raster + 3 * w * h, img.data.begin());
  return img;
}

// Binary 8-bit PGM (P5), maxval 255, returned as raw gray bytes.
inline std::vector<uint8_t> read_pgm_bytes(const std::string& path, size_t& w, size_t& h) {
  const auto bytes = detail::read_file_bytes(path);
  detail::PnmScanner sc(bytes, path);
  if (sc.magic() != "P5") throw ParseError(path + ": not a P5 PGM", 0);
  w = sc.field("width");
  h = sc.field("height");
  if (w < 1 || h < 1) throw ParseError(path + ": zero dimension", sc.pos());
  const unsigned long maxval = sc.field("maxval");
  if (maxval != 255) throw ParseError(path + ": unsupported maxval (want 255)", sc.pos());
  sc.raster_start();
  const uint8_t* raster = sc.raster(w * h, "P5");
  return std::vector<uint8_t>(raster, raster + w * h);
}

// Ground-truth mask: P5 thresholded at 128.
inline MaskPlane read_mask_pgm(const std::string& path) {
  size_t w = 0, h = 0;
  const auto gray = read_pgm_bytes(path, w, h);
  MaskPlane m(w, h);
  for (size_t i = 0; i < gray.size(); ++i) m.v[i] = gray[i] >= 128 ? 1 : 0;
  return m;
}

inline void write_ppm(const std::string& path, const RgbImage& img) {
  std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  detail::write_file_bytes(path, out.data(), out.size());
}

inline void write_pgm(const std::string& path, const MaskPlane& mask) {
  std::string header = "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + mask.size());
  for (uint8_t b : mask.v) out.push_back(b ? 255 : 0);
  detail::write_file_bytes(path, out.data(), out.size());
}

// Plane quantized to 8 bits; values are clamped to [0,1] first.
inline void write_pgm(const std::string& path, const Plane& plane) {
  std::string header = "P5\n" + std::to_string(plane.width) + "\n" + std::to_string(plane.height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + plane.size());
  for (float f : plane.v) {
    const float c = f < 0.0f ? 0.0f : (f > 1.0f ? 1.0f : f);
    out.push_back(static_cast<uint8_t>(c * 255.0f + 0.5f));
  }
  detail::write_file_bytes(path, out.data(), out.size());
}

// Grayscale PFM ("Pf"), little-endian f32, for lossless probability planes.
// PFM stores rows bottom-up.
inline void write_pfm(const std::string& path, const Plane& plane) {
  std::string header = "Pf\n" + std::to_string(plane.width) + " " + std::to_string(plane.height) + "\n-1.0\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + plane.size() * 4);
  for (size_t y = plane.height; y-- > 0;) {
    const float* row = plane.v.data() + y * plane.width;
    const uint8_t* raw = reinterpret_cast<const uint8_t*>(row);
    out.insert(out.end(), raw, raw + plane.width * 4);
  }
  detail::write_file_bytes(path, out.data(), out.size());
}

}  // namespace capsqz
