#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "capsqz/errors.hpp"

namespace capsqz {

// The ten candidate channels: RGB, HSV, CIE-lab and luma gray.
enum class Channel : uint8_t { R = 0, G, B, H, S, V, LabL, LabA, LabB, Gray };

inline constexpr std::array<Channel, 10> kAllChannels = {
    Channel::R, Channel::G, Channel::B,    Channel::H,    Channel::S,
    Channel::V, Channel::LabL, Channel::LabA, Channel::LabB, Channel::Gray,
};

inline std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::R: return "R";
    case Channel::G: return "G";
    case Channel::B: return "B";
    case Channel::H: return "H";
    case Channel::S: return "S";
    case Channel::V: return "V";
    case Channel::LabL: return "l";
    case Channel::LabA: return "a";
    case Channel::LabB: return "b";
    case Channel::Gray: return "Gray";
  }
  return "?";
}

// Case matters for the single letters: uppercase B is the RGB blue plane,
// lowercase b the lab chroma plane. "I" and "L" are accepted for lab "l".
inline std::optional<Channel> try_parse_channel(std::string_view s) {
  if (s == "R") return Channel::R;
  if (s == "G") return Channel::G;
  if (s == "B") return Channel::B;
  if (s == "H" || s == "h") return Channel::H;
  if (s == "S") return Channel::S;
  if (s == "V" || s == "v") return Channel::V;
  if (s == "l" || s == "L" || s == "I") return Channel::LabL;
  if (s == "a" || s == "A") return Channel::LabA;
  if (s == "b" || s == "Bb") return Channel::LabB;
  if (s == "Gray" || s == "gray" || s == "GRAY" || s == "g") return Channel::Gray;
  return std::nullopt;
}

inline Channel parse_channel(std::string_view s) {
  if (auto c = try_parse_channel(s)) return *c;
  throw std::invalid_argument("unknown channel name: " + std::string(s));
}

struct ValueRange {
  float lo = 0.0f;
  float hi = 1.0f;
};

// Nominal range of each channel. Used for histogram binning and for scaling
// network inputs onto a common [0,1] scale.
inline constexpr ValueRange channel_range(Channel c) {
  switch (c) {
    case Channel::LabL: return {0.0f, 100.0f};
    case Channel::LabA: return {-110.0f, 110.0f};
    case Channel::LabB: return {-110.0f, 110.0f};
    default: return {0.0f, 1.0f};
  }
}

inline float unit_scale(Channel c, float v) {
  const ValueRange r = channel_range(c);
  return (v - r.lo) / (r.hi - r.lo);
}

// 8-bit RGB image, interleaved row-major (the PPM byte layout).
struct RgbImage {
  size_t width = 0, height = 0;
  std::vector<uint8_t> data;  // 3 * width * height

  RgbImage() = default;
  RgbImage(size_t w, size_t h) : width(w), height(h), data(3 * w * h, 0) {
    if (w < 1 || h < 1) throw std::invalid_argument("RgbImage dimensions must be >= 1");
  }

  size_t pixels() const { return width * height; }
  uint8_t* px(size_t x, size_t y) { return data.data() + 3 * (y * width + x); }
  const uint8_t* px(size_t x, size_t y) const { return data.data() + 3 * (y * width + x); }
};

// Single real-valued plane.
struct Plane {
  size_t width = 0, height = 0;
  std::vector<float> v;

  Plane() = default;
  Plane(size_t w, size_t h, float fill = 0.0f) : width(w), height(h), v(w * h, fill) {}

  float& at(size_t x, size_t y) { return v[y * width + x]; }
  float at(size_t x, size_t y) const { return v[y * width + x]; }
  size_t size() const { return v.size(); }
};

// Binary plane; values are exactly 0 or 1.
struct MaskPlane {
  size_t width = 0, height = 0;
  std::vector<uint8_t> v;

  MaskPlane() = default;
  MaskPlane(size_t w, size_t h, uint8_t fill = 0) : width(w), height(h), v(w * h, fill) {}

  uint8_t& at(size_t x, size_t y) { return v[y * width + x]; }
  uint8_t at(size_t x, size_t y) const { return v[y * width + x]; }
  size_t size() const { return v.size(); }
};

inline double positive_fraction(const MaskPlane& m) {
  if (m.v.empty()) return 0.0;
  size_t pos = 0;
  for (uint8_t b : m.v) pos += b;
  return static_cast<double>(pos) / static_cast<double>(m.v.size());
}

// Planar stack of real-valued channels, each tagged with its channel id.
struct ChannelImage {
  size_t width = 0, height = 0;
  std::vector<Channel> ids;
  std::vector<Plane> planes;

  size_t plane_count() const { return planes.size(); }

  const Plane* find(Channel c) const {
    for (size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == c) return &planes[i];
    return nullptr;
  }

  void append(Channel c, Plane p) {
    if (width == 0 && height == 0) {
      width = p.width;
      height = p.height;
    }
    if (p.width != width || p.height != height)
      throw std::invalid_argument("ChannelImage planes must share dimensions");
    ids.push_back(c);
    planes.push_back(std::move(p));
  }
};

// Image with its bleeding ground truth.
struct LabeledImage {
  ChannelImage channels;
  MaskPlane mask;
  std::string name;
};

}  // namespace capsqz
