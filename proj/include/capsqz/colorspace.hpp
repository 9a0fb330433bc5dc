#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "capsqz/image.hpp"

namespace capsqz {
namespace detail {

// sRGB decoding to linear light.
inline double srgb_linearize(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

// D65 reference white.
inline constexpr double kXn = 0.95047;
inline constexpr double kYn = 1.0;
inline constexpr double kZn = 1.08883;

inline double lab_f(double t) {
  constexpr double eps = 216.0 / 24389.0;
  constexpr double kappa = 24389.0 / 27.0;
  return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
}

struct Hsv {
  double h, s, v;
};

// Hexcone HSV on [0,1] inputs; hue normalized to [0,1). Undefined hue
// (max == min) maps to 0, as does saturation of pure black.
inline Hsv rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out{0.0, 0.0, mx};
  if (delta <= 0.0) return out;
  out.s = mx > 0.0 ? delta / mx : 0.0;
  double h6;
  if (mx == r) {
    h6 = (g - b) / delta;
  } else if (mx == g) {
    h6 = 2.0 + (b - r) / delta;
  } else {
    h6 = 4.0 + (r - g) / delta;
  }
  double h = h6 / 6.0;
  if (h < 0.0) h += 1.0;
  if (h >= 1.0) h -= 1.0;
  return {h, out.s, out.v};
}

struct Lab {
  double l, a, b;
};

inline Lab rgb_to_lab(double r, double g, double b) {
  const double rl = srgb_linearize(r);
  const double gl = srgb_linearize(g);
  const double bl = srgb_linearize(b);
  const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
  const double fx = lab_f(x / kXn);
  const double fy = lab_f(y / kYn);
  const double fz = lab_f(z / kZn);
  Lab lab;
  lab.l = std::clamp(116.0 * fy - 16.0, 0.0, 100.0);
  // a and b clipped to the nominal +-110 range.
  lab.a = std::clamp(500.0 * (fx - fy), -110.0, 110.0);
  lab.b = std::clamp(200.0 * (fy - fz), -110.0, 110.0);
  return lab;
}

inline double rgb_to_gray(double r, double g, double b) {
  // Rec.601 luma.
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

}  // namespace detail

inline ChannelImage to_hsv(const RgbImage& img) {
  ChannelImage out;
  Plane h(img.width, img.height), s(img.width, img.height), v(img.width, img.height);
  for (size_t i = 0; i < img.pixels(); ++i) {
    const uint8_t* p = img.data.data() + 3 * i;
    const auto hsv = detail::rgb_to_hsv(p[0] / 255.0, p[1] / 255.0, p[2] / 255.0);
    h.v[i] = static_cast<float>(hsv.h);
    s.v[i] = static_cast<float>(hsv.s);
    v.v[i] = static_cast<float>(hsv.v);
  }
  out.append(Channel::H, std::move(h));
  out.append(Channel::S, std::move(s));
  out.append(Channel::V, std::move(v));
  return out;
}

inline ChannelImage to_cielab(const RgbImage& img) {
  ChannelImage out;
  Plane l(img.width, img.height), a(img.width, img.height), b(img.width, img.height);
  for (size_t i = 0; i < img.pixels(); ++i) {
    const uint8_t* p = img.data.data() + 3 * i;
    const auto lab = detail::rgb_to_lab(p[0] / 255.0, p[1] / 255.0, p[2] / 255.0);
    l.v[i] = static_cast<float>(lab.l);
    a.v[i] = static_cast<float>(lab.a);
    b.v[i] = static_cast<float>(lab.b);
  }
  out.append(Channel::LabL, std::move(l));
  out.append(Channel::LabA, std::move(a));
  out.append(Channel::LabB, std::move(b));
  return out;
}

inline ChannelImage to_gray(const RgbImage& img) {
  ChannelImage out;
  Plane g(img.width, img.height);
  for (size_t i = 0; i < img.pixels(); ++i) {
    const uint8_t* p = img.data.data() + 3 * i;
    g.v[i] = static_cast<float>(detail::rgb_to_gray(p[0] / 255.0, p[1] / 255.0, p[2] / 255.0));
  }
  out.append(Channel::Gray, std::move(g));
  return out;
}

// Only the requested planes, in the requested order. Each source color space
// is converted at most once.
inline ChannelImage extract_channels(const RgbImage& img, std::span<const Channel> ids) {
  if (ids.empty()) throw std::invalid_argument("extract_channels: empty channel list");
  for (size_t i = 0; i < ids.size(); ++i)
    for (size_t j = i + 1; j < ids.size(); ++j)
      if (ids[i] == ids[j]) throw std::invalid_argument("extract_channels: duplicate channel id");

  const auto wants = [&](std::initializer_list<Channel> group) {
    for (Channel c : ids)
      for (Channel g : group)
        if (c == g) return true;
    return false;
  };

  ChannelImage hsv, lab, gray;
  if (wants({Channel::H, Channel::S, Channel::V})) hsv = to_hsv(img);
  if (wants({Channel::LabL, Channel::LabA, Channel::LabB})) lab = to_cielab(img);
  if (wants({Channel::Gray})) gray = to_gray(img);

  ChannelImage out;
  for (Channel c : ids) {
    switch (c) {
      case Channel::R:
      case Channel::G:
      case Channel::B: {
        const size_t offset = static_cast<size_t>(c);
        Plane p(img.width, img.height);
        for (size_t i = 0; i < img.pixels(); ++i)
          p.v[i] = static_cast<float>(img.data[3 * i + offset]) / 255.0f;
        out.append(c, std::move(p));
        break;
      }
      case Channel::H:
      case Channel::S:
      case Channel::V:
        out.append(c, *hsv.find(c));
        break;
      case Channel::LabL:
      case Channel::LabA:
      case Channel::LabB:
        out.append(c, *lab.find(c));
        break;
      case Channel::Gray:
        out.append(c, *gray.find(c));
        break;
    }
  }
  return out;
}

// All ten candidate planes in canonical order.
inline ChannelImage all_channels(const RgbImage& img) {
  return extract_channels(img, std::span<const Channel>(kAllChannels));
}

}  // namespace capsqz
