#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "capsqz/image.hpp"
#include "capsqz/threading.hpp"

namespace capsqz {

// Sparse joint histogram over (channel-bin tuple, ground-truth label).
// Keys pack up to three bin indices of 16 bits each plus the label bit, so
// 3-combinations with 64 bins stay tractable.
struct JointHistogram {
  uint32_t arity = 1;
  uint32_t bins = 64;
  std::unordered_map<uint64_t, uint64_t> counts;
  uint64_t total = 0;

  static uint64_t key(std::span<const uint32_t> bin, int label) {
    uint64_t k = label ? 1u : 0u;
    for (size_t i = 0; i < bin.size(); ++i) k |= static_cast<uint64_t>(bin[i] & 0xffffu) << (1 + 16 * i);
    return k;
  }

  void add(std::span<const uint32_t> bin, int label, uint64_t n = 1) {
    counts[key(bin, label)] += n;
    total += n;
  }

  // Associative and commutative, so per-image histograms can be reduced in
  // any order.
  void merge(const JointHistogram& other) {
    for (const auto& [k, c] : other.counts) counts[k] += c;
    total += other.total;
  }
};

// Shannon entropy in bits of a count vector. The counts need not be
// normalized; zero bins contribute nothing.
inline double entropy_bits(std::span<const uint64_t> counts) {
  uint64_t total = 0;
  for (uint64_t c : counts) total += c;
  if (total == 0) throw std::invalid_argument("entropy of an empty histogram");
  const double tot = static_cast<double>(total);
  double h = 0.0;
  for (uint64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / tot;
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

namespace detail {

inline double entropy_of_map(const std::unordered_map<uint64_t, uint64_t>& m, uint64_t total) {
  const double tot = static_cast<double>(total);
  double h = 0.0;
  for (const auto& [k, c] : m) {
    (void)k;
    if (c == 0) continue;
    const double p = static_cast<double>(c) / tot;
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

}  // namespace detail

// I(X;Y) = H(X) + H(Y) - H(X,Y) in bits, X the channel-bin tuple and Y the
// label. Tiny negative float residue is clamped to zero.
inline double mutual_information_bits(const JointHistogram& joint) {
  if (joint.total == 0) throw std::invalid_argument("mutual information of an empty histogram");
  std::unordered_map<uint64_t, uint64_t> mx;
  uint64_t y_counts[2] = {0, 0};
  for (const auto& [k, c] : joint.counts) {
    mx[k >> 1] += c;
    y_counts[k & 1] += c;
  }
  const double hx = detail::entropy_of_map(mx, joint.total);
  const double hy = entropy_bits(std::span<const uint64_t>(y_counts, 2));
  const double hxy = detail::entropy_of_map(joint.counts, joint.total);
  double mi = hx + hy - hxy;
  if (mi < 0.0 && mi > -1e-12) mi = 0.0;
  return mi;
}

inline uint32_t bin_index(Channel c, float value, uint32_t bins) {
  const ValueRange r = channel_range(c);
  float t = (value - r.lo) / (r.hi - r.lo);
  if (t < 0.0f) t = 0.0f;
  long idx = static_cast<long>(t * static_cast<float>(bins));
  if (idx >= static_cast<long>(bins)) idx = bins - 1;
  if (idx < 0) idx = 0;
  return static_cast<uint32_t>(idx);
}

enum class MiPooling {
  Pooled,        // one joint distribution over all pixels of all images
  PerImageMean,  // MI per image, averaged
};

struct MiEntry {
  std::vector<Channel> combo;
  double mi_bits = 0.0;
};

struct MiRanking {
  std::vector<MiEntry> entries;  // sorted descending by mi_bits

  void write_csv(std::ostream& os) const {
    os << "combination,mi_bits,rank\n";
    for (size_t i = 0; i < entries.size(); ++i) {
      std::string combo;
      for (size_t j = 0; j < entries[i].combo.size(); ++j) {
        if (j) combo += '+';
        combo += channel_name(entries[i].combo[j]);
      }
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6f", entries[i].mi_bits);
      os << combo << ',' << buf << ',' << (i + 1) << '\n';
    }
  }
};

namespace detail {

inline std::vector<std::vector<uint8_t>> k_combinations(size_t n, size_t k) {
  std::vector<std::vector<uint8_t>> out;
  std::vector<uint8_t> idx(k);
  for (size_t i = 0; i < k; ++i) idx[i] = static_cast<uint8_t>(i);
  while (true) {
    out.push_back(idx);
    size_t i = k;
    while (i-- > 0) {
      if (idx[i] != i + n - k) break;
      if (i == 0) return out;
    }
    ++idx[i];
    for (size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

// Rank all arity-sized channel combinations by mutual information with the
// ground truth. Requires every image to carry all ten planes.
inline MiRanking rank_combinations(std::span<const LabeledImage> imgs, int arity, uint32_t bins,
                                   MiPooling pooling = MiPooling::Pooled) {
  if (imgs.empty()) throw std::invalid_argument("rank_combinations: no images");
  if (arity < 1 || arity > 3) throw std::invalid_argument("rank_combinations: arity must be 1, 2 or 3");
  if (bins < 2) throw std::invalid_argument("rank_combinations: bins must be >= 2");
  for (const auto& li : imgs) {
    if (li.channels.plane_count() != kAllChannels.size())
      throw std::invalid_argument("rank_combinations: images must carry all 10 planes");
    if (li.mask.width != li.channels.width || li.mask.height != li.channels.height)
      throw std::invalid_argument("rank_combinations: mask dimensions do not match image");
  }

  // Pre-binned planes: binned[image][channel][pixel].
  std::vector<std::vector<std::vector<uint16_t>>> binned(imgs.size());
  for (size_t im = 0; im < imgs.size(); ++im) {
    binned[im].resize(kAllChannels.size());
    for (size_t c = 0; c < kAllChannels.size(); ++c) {
      const Plane* p = imgs[im].channels.find(kAllChannels[c]);
      binned[im][c].resize(p->size());
      for (size_t i = 0; i < p->size(); ++i)
        binned[im][c][i] = static_cast<uint16_t>(bin_index(kAllChannels[c], p->v[i], bins));
    }
  }

  const auto combos = detail::k_combinations(kAllChannels.size(), static_cast<size_t>(arity));
  MiRanking ranking;
  ranking.entries.resize(combos.size());

  parallel_for(0, combos.size(), [&](size_t ci) {
    const auto& combo = combos[ci];
    double mi = 0.0;
    if (pooling == MiPooling::Pooled) {
      JointHistogram joint;
      joint.arity = static_cast<uint32_t>(arity);
      joint.bins = bins;
      for (size_t im = 0; im < imgs.size(); ++im) {
        const auto& mask = imgs[im].mask;
        uint32_t bin[3] = {0, 0, 0};
        for (size_t px = 0; px < mask.size(); ++px) {
          for (size_t a = 0; a < combo.size(); ++a) bin[a] = binned[im][combo[a]][px];
          joint.add(std::span<const uint32_t>(bin, combo.size()), mask.v[px]);
        }
      }
      mi = mutual_information_bits(joint);
    } else {
      double sum = 0.0;
      for (size_t im = 0; im < imgs.size(); ++im) {
        JointHistogram joint;
        joint.arity = static_cast<uint32_t>(arity);
        joint.bins = bins;
        const auto& mask = imgs[im].mask;
        uint32_t bin[3] = {0, 0, 0};
        for (size_t px = 0; px < mask.size(); ++px) {
          for (size_t a = 0; a < combo.size(); ++a) bin[a] = binned[im][combo[a]][px];
          joint.add(std::span<const uint32_t>(bin, combo.size()), mask.v[px]);
        }
        sum += mutual_information_bits(joint);
      }
      mi = sum / static_cast<double>(imgs.size());
    }
    MiEntry entry;
    for (uint8_t c : combo) entry.combo.push_back(kAllChannels[c]);
    entry.mi_bits = mi;
    ranking.entries[ci] = std::move(entry);
  });

  std::stable_sort(ranking.entries.begin(), ranking.entries.end(), [](const MiEntry& a, const MiEntry& b) {
    if (a.mi_bits != b.mi_bits) return a.mi_bits > b.mi_bits;
    return a.combo < b.combo;
  });
  return ranking;
}

}  // namespace capsqz
