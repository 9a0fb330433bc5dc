#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "capsqz/colorspace.hpp"
#include "capsqz/errors.hpp"
#include "capsqz/image.hpp"
#include "capsqz/pnm.hpp"
#include "capsqz/rng.hpp"

namespace capsqz {

struct PatchSource {
  uint32_t image = 0;
  uint16_t cx = 0, cy = 0;
};

// Fixed-size labeled patches, stored planar: n * channels * size * size f32,
// raw channel values (scaling onto the network's input range happens at batch
// assembly).
struct PatchSet {
  uint16_t patch_size = 9;
  std::vector<Channel> channel_ids;
  std::vector<float> data;
  std::vector<uint8_t> labels;
  std::vector<PatchSource> sources;

  size_t n() const { return labels.size(); }
  size_t patch_floats() const {
    return channel_ids.size() * static_cast<size_t>(patch_size) * patch_size;
  }
  std::span<const float> patch(size_t i) const {
    return std::span<const float>(data.data() + i * patch_floats(), patch_floats());
  }
  size_t positives() const {
    return static_cast<size_t>(std::accumulate(labels.begin(), labels.end(), size_t{0}));
  }
};

enum class Border {
  Valid,    // one patch per fully-interior center
  Reflect,  // reflect-pad by size/2 so every pixel is a center
};

namespace detail {

// Reflection without repeating the edge sample (w-1 -> w-2 ...).
inline size_t reflect_index(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  long m = i % period;
  if (m < 0) m += period;
  if (m >= n) m = period - m;
  return static_cast<size_t>(m);
}

}  // namespace detail

inline PatchSet extract_patches(const LabeledImage& img, size_t size = 9, size_t stride = 1,
                                Border border = Border::Valid) {
  if (size % 2 == 0) throw std::invalid_argument("patch size must be odd");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  const size_t w = img.channels.width, h = img.channels.height;
  if (size > w || size > h) throw std::invalid_argument("patch size exceeds image dimensions");
  if (img.mask.width != w || img.mask.height != h)
    throw std::invalid_argument("mask dimensions do not match image");

  const size_t r = size / 2;
  size_t cx0, cy0, cx1, cy1;  // inclusive center range
  if (border == Border::Valid) {
    cx0 = r;
    cy0 = r;
    cx1 = w - 1 - r;
    cy1 = h - 1 - r;
  } else {
    cx0 = 0;
    cy0 = 0;
    cx1 = w - 1;
    cy1 = h - 1;
  }

  PatchSet ps;
  ps.patch_size = static_cast<uint16_t>(size);
  ps.channel_ids = img.channels.ids;
  const size_t nx = (cx1 - cx0) / stride + 1;
  const size_t ny = (cy1 - cy0) / stride + 1;
  ps.data.reserve(nx * ny * ps.patch_floats());
  ps.labels.reserve(nx * ny);
  ps.sources.reserve(nx * ny);

  for (size_t cy = cy0; cy <= cy1; cy += stride) {
    for (size_t cx = cx0; cx <= cx1; cx += stride) {
      for (const Plane& plane : img.channels.planes) {
        for (size_t dy = 0; dy < size; ++dy) {
          const long sy = static_cast<long>(cy + dy) - static_cast<long>(r);
          const size_t y = border == Border::Valid ? static_cast<size_t>(sy)
                                                   : detail::reflect_index(sy, static_cast<long>(h));
          for (size_t dx = 0; dx < size; ++dx) {
            const long sx = static_cast<long>(cx + dx) - static_cast<long>(r);
            const size_t x = border == Border::Valid ? static_cast<size_t>(sx)
                                                     : detail::reflect_index(sx, static_cast<long>(w));
            ps.data.push_back(plane.at(x, y));
          }
        }
      }
      ps.labels.push_back(img.mask.at(cx, cy));
      ps.sources.push_back({0, static_cast<uint16_t>(cx), static_cast<uint16_t>(cy)});
    }
  }
  return ps;
}

// Patches from several images pooled into one set, with source image ids.
inline PatchSet extract_patches(std::span<const LabeledImage> imgs, size_t size = 9,
                                size_t stride = 1, Border border = Border::Valid) {
  if (imgs.empty()) throw std::invalid_argument("extract_patches: no images");
  PatchSet pooled;
  for (size_t i = 0; i < imgs.size(); ++i) {
    PatchSet ps = extract_patches(imgs[i], size, stride, border);
    if (i == 0) {
      pooled = std::move(ps);
      continue;
    }
    if (ps.channel_ids != pooled.channel_ids)
      throw std::invalid_argument("extract_patches: images disagree on channels");
    for (auto& src : ps.sources) src.image = static_cast<uint32_t>(i);
    pooled.data.insert(pooled.data.end(), ps.data.begin(), ps.data.end());
    pooled.labels.insert(pooled.labels.end(), ps.labels.begin(), ps.labels.end());
    pooled.sources.insert(pooled.sources.end(), ps.sources.begin(), ps.sources.end());
  }
  return pooled;
}

struct BalanceStats {
  size_t n_pos = 0, n_neg = 0;
  bool pos_with_replacement = false;
  bool neg_with_replacement = false;
};

// Class-rebalanced subset of target_count patches with pos:neg = ratio_pos :
// ratio_neg. Patch content is copied bit-exactly; classes short of their quota
// are sampled with replacement.
inline PatchSet balance(const PatchSet& ps, unsigned ratio_pos, unsigned ratio_neg,
                        size_t target_count, uint64_t seed, BalanceStats* stats = nullptr) {
  if (ratio_pos == 0 || ratio_neg == 0) throw std::invalid_argument("balance: ratio parts must be positive");
  std::vector<size_t> pos_idx, neg_idx;
  for (size_t i = 0; i < ps.n(); ++i) (ps.labels[i] ? pos_idx : neg_idx).push_back(i);
  if (pos_idx.empty() || neg_idx.empty())
    throw DataError("balance: both classes must be present");

  const size_t n_pos = target_count * ratio_pos / (ratio_pos + ratio_neg);
  const size_t n_neg = target_count - n_pos;

  Rng rng(seed);
  const auto draw = [&rng](const std::vector<size_t>& from, size_t k, bool* replaced) {
    std::vector<size_t> out;
    out.reserve(k);
    if (k <= from.size()) {
      std::vector<size_t> shuffled = from;
      rng.shuffle(shuffled);
      out.assign(shuffled.begin(), shuffled.begin() + static_cast<long>(k));
      if (replaced) *replaced = false;
    } else {
      for (size_t i = 0; i < k; ++i) out.push_back(from[rng.index(from.size())]);
      if (replaced) *replaced = true;
    }
    return out;
  };

  BalanceStats bs;
  bs.n_pos = n_pos;
  bs.n_neg = n_neg;
  std::vector<size_t> chosen = draw(pos_idx, n_pos, &bs.pos_with_replacement);
  std::vector<size_t> negs = draw(neg_idx, n_neg, &bs.neg_with_replacement);
  chosen.insert(chosen.end(), negs.begin(), negs.end());
  rng.shuffle(chosen);
  if (stats) *stats = bs;

  PatchSet out;
  out.patch_size = ps.patch_size;
  out.channel_ids = ps.channel_ids;
  const size_t pf = ps.patch_floats();
  out.data.resize(chosen.size() * pf);
  out.labels.resize(chosen.size());
  out.sources.resize(chosen.size());
  for (size_t i = 0; i < chosen.size(); ++i) {
    std::memcpy(out.data.data() + i * pf, ps.data.data() + chosen[i] * pf, pf * sizeof(float));
    out.labels[i] = ps.labels[chosen[i]];
    out.sources[i] = ps.sources[chosen[i]];
  }
  return out;
}

struct SynthSample {
  RgbImage image;
  MaskPlane mask;
};

struct SynthConfig {
  double frac_min = 0.005, frac_max = 0.08;  // blob area fraction range
  std::array<double, 3> blob_mean = {150.0, 30.0, 30.0};
  double blob_sigma = 20.0;
  std::array<double, 3> bg_mean = {190.0, 130.0, 110.0};
  double bg_sigma = 25.0;
  double texture_amp = 8.0;  // low-frequency brightness modulation
  double edge_softness = 0.05;  // color blend half-width in normalized radius
};

// Bleeding-style test images: mucosa-toned background with one dark-red
// soft-edged elliptical blob per image; the mask is the blob support.
inline std::vector<SynthSample> synth_generate(size_t n_images, size_t width, size_t height,
                                               uint64_t seed, const SynthConfig& cfg = {}) {
  if (width < 32 || height < 32) throw std::invalid_argument("synth_generate: dimensions must be >= 32");
  if (cfg.frac_min < 0.0 || cfg.frac_max < cfg.frac_min || cfg.frac_max > 0.25)
    throw std::invalid_argument("synth_generate: bad blob fraction range");

  std::vector<SynthSample> out;
  out.reserve(n_images);
  for (size_t im = 0; im < n_images; ++im) {
    Rng rng(derive_seed(seed, im));
    SynthSample s;
    s.image = RgbImage(width, height);
    s.mask = MaskPlane(width, height);

    const double frac = rng.uniform(cfg.frac_min, cfg.frac_max);
    // Ellipse with the requested pixel area, kept fully inside the frame.
    double ax = 0.0, by = 0.0, cx = 0.0, cy = 0.0, angle = 0.0;
    bool has_blob = frac > 0.0;
    if (has_blob) {
      const double area = frac * static_cast<double>(width * height);
      const double aspect = rng.uniform(0.5, 2.0);
      ax = std::sqrt(area * aspect / 3.14159265358979323846);
      by = area / (3.14159265358979323846 * ax);
      angle = rng.uniform(0.0, 3.14159265358979323846);
      const double reach = std::max(ax, by) * (1.0 + cfg.edge_softness) + 1.0;
      if (2.0 * reach >= std::min(width, height) - 2.0) {
        // Degenerate request; clamp to a centered blob.
        cx = width / 2.0;
        cy = height / 2.0;
      } else {
        cx = rng.uniform(reach, static_cast<double>(width) - reach);
        cy = rng.uniform(reach, static_cast<double>(height) - reach);
      }
    }

    // Smooth texture field shared by all channels.
    const double fx = rng.uniform(0.5, 2.0) / static_cast<double>(width);
    const double fy = rng.uniform(0.5, 2.0) / static_cast<double>(height);
    const double phx = rng.uniform(0.0, 6.28318530717958647692);
    const double phy = rng.uniform(0.0, 6.28318530717958647692);

    const double ca = std::cos(angle), sa = std::sin(angle);
    for (size_t y = 0; y < height; ++y) {
      for (size_t x = 0; x < width; ++x) {
        double blend = 0.0;  // 1 inside blob color, 0 in background
        bool inside = false;
        if (has_blob) {
          const double dx = (static_cast<double>(x) + 0.5) - cx;
          const double dy = (static_cast<double>(y) + 0.5) - cy;
          const double u = (dx * ca + dy * sa) / ax;
          const double v = (-dx * sa + dy * ca) / by;
          const double rr = std::sqrt(u * u + v * v);
          inside = rr <= 1.0;
          blend = std::clamp((1.0 + cfg.edge_softness - rr) / (2.0 * cfg.edge_softness), 0.0, 1.0);
        }
        const double tex = cfg.texture_amp *
                           std::sin(6.28318530717958647692 * fx * static_cast<double>(x) + phx) *
                           std::sin(6.28318530717958647692 * fy * static_cast<double>(y) + phy);
        uint8_t* px = s.image.px(x, y);
        for (int c = 0; c < 3; ++c) {
          const double mean = blend * cfg.blob_mean[c] + (1.0 - blend) * cfg.bg_mean[c];
          const double sigma = blend * cfg.blob_sigma + (1.0 - blend) * cfg.bg_sigma;
          const double value = mean + tex + rng.normal(0.0, sigma);
          px[c] = static_cast<uint8_t>(std::clamp(value, 0.0, 255.0) + 0.5);
        }
        s.mask.at(x, y) = inside ? 1 : 0;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

// --- PatchSet on-disk cache ----------------------------------------------
// Little-endian: magic "PSET", version u32, n u64, size u16, n_channels u16,
// channel ids u8 each, then n*channels*size*size f32 and n label bytes.

inline constexpr uint32_t kPatchSetVersion = 1;

inline void save_patchset(const std::string& path, const PatchSet& ps) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open file for writing: " + path);
  const auto put = [&out](const void* p, size_t n) { out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); };
  put("PSET", 4);
  const uint32_t version = kPatchSetVersion;
  put(&version, 4);
  const uint64_t n = ps.n();
  put(&n, 8);
  const uint16_t size = ps.patch_size;
  put(&size, 2);
  const uint16_t n_channels = static_cast<uint16_t>(ps.channel_ids.size());
  put(&n_channels, 2);
  for (Channel c : ps.channel_ids) {
    const uint8_t id = static_cast<uint8_t>(c);
    put(&id, 1);
  }
  put(ps.data.data(), ps.data.size() * sizeof(float));
  put(ps.labels.data(), ps.labels.size());
  if (!out) throw DataError("short write: " + path);
}

inline PatchSet load_patchset(const std::string& path) {
  const auto bytes = detail::read_file_bytes(path);
  size_t pos = 0;
  const auto get = [&](void* p, size_t n, const char* what) {
    if (bytes.size() - pos < n) throw ParseError(path + ": truncated " + what, pos);
    std::memcpy(p, bytes.data() + pos, n);
    pos += n;
  };
  char magic[4];
  get(magic, 4, "magic");
  if (std::memcmp(magic, "PSET", 4) != 0) throw ParseError(path + ": not a PSET file", 0);
  uint32_t version = 0;
  get(&version, 4, "version");
  if (version != kPatchSetVersion) throw ParseError(path + ": unsupported PSET version", 4);
  uint64_t n = 0;
  get(&n, 8, "count");
  PatchSet ps;
  uint16_t size = 0, n_channels = 0;
  get(&size, 2, "patch size");
  get(&n_channels, 2, "channel count");
  ps.patch_size = size;
  for (uint16_t i = 0; i < n_channels; ++i) {
    uint8_t id = 0;
    get(&id, 1, "channel id");
    if (id >= kAllChannels.size()) throw ParseError(path + ": bad channel id", pos - 1);
    ps.channel_ids.push_back(static_cast<Channel>(id));
  }
  ps.data.resize(static_cast<size_t>(n) * ps.patch_floats());
  get(ps.data.data(), ps.data.size() * sizeof(float), "patch data");
  ps.labels.resize(static_cast<size_t>(n));
  get(ps.labels.data(), ps.labels.size(), "labels");
  ps.sources.assign(static_cast<size_t>(n), PatchSource{});
  return ps;
}

// --- Directory loading -----------------------------------------------------

struct LoadedPair {
  RgbImage image;
  MaskPlane mask;
  std::string name;
};

// Loads every <stem>.ppm with its <stem>.pgm mask from a directory, sorted by
// name for reproducible ordering.
inline std::vector<LoadedPair> load_image_mask_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<fs::path> ppms;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".ppm") ppms.push_back(e.path());
  std::sort(ppms.begin(), ppms.end());
  if (ppms.empty()) throw DataError("no .ppm images in " + dir);

  std::vector<LoadedPair> out;
  out.reserve(ppms.size());
  for (const auto& p : ppms) {
    fs::path maskp = p;
    maskp.replace_extension(".pgm");
    if (!fs::exists(maskp)) throw DataError("missing mask for " + p.string());
    LoadedPair pair;
    pair.image = read_ppm(p.string());
    pair.mask = read_mask_pgm(maskp.string());
    if (pair.mask.width != pair.image.width || pair.mask.height != pair.image.height)
      throw DataError("mask dimensions do not match image: " + p.string());
    pair.name = p.stem().string();
    out.push_back(std::move(pair));
  }
  return out;
}

// Channel extraction over a loaded pair.
inline LabeledImage to_labeled(const LoadedPair& pair, std::span<const Channel> channels) {
  LabeledImage li;
  li.channels = extract_channels(pair.image, channels);
  li.mask = pair.mask;
  li.name = pair.name;
  return li;
}

}  // namespace capsqz
