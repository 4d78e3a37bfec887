#include "lbvh/morton.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lbvh {

std::uint32_t expand_bits_10(std::uint32_t v) {
  if (v >= kMortonGrid) throw std::out_of_range("expand_bits_10: value exceeds 10 bits");
  return spread_bits_10(v);
}

namespace {

std::uint32_t axis_cell(float c, float lo, float hi) {
  const float extent = hi - lo;
  if (!(extent > 0.f)) return 0;
  const float t = std::clamp((c - lo) / extent, 0.f, 1.f);
  const auto cell = static_cast<std::uint32_t>(std::floor(t * static_cast<float>(kMortonGrid)));
  return std::min(cell, kMortonGrid - 1);
}

}  // namespace

GridCell grid_cell(const Point& c, const Box& scene) {
  return {axis_cell(c.x, scene.min.x, scene.max.x), axis_cell(c.y, scene.min.y, scene.max.y),
          axis_cell(c.z, scene.min.z, scene.max.z)};
}

std::vector<MortonKey> assign_keys(std::span<const Box> boxes, const Box& scene,
                                   Execution exec) {
  std::vector<MortonKey> keys(boxes.size());
  detail::for_each_index(exec, boxes.size(), [&](std::size_t i) {
    keys[i] = {morton_code(centroid(boxes[i]), scene), static_cast<std::uint32_t>(i)};
  });
  return keys;
}

std::vector<MortonKey> assign_keys(std::span<const Point> points, const Box& scene,
                                   Execution exec) {
  std::vector<MortonKey> keys(points.size());
  detail::for_each_index(exec, points.size(), [&](std::size_t i) {
    keys[i] = {morton_code(points[i], scene), static_cast<std::uint32_t>(i)};
  });
  return keys;
}

namespace {

constexpr int kRadixBits = 8;
constexpr std::size_t kBuckets = std::size_t{1} << kRadixBits;
constexpr int kPasses = 64 / kRadixBits;

using Histogram = std::array<std::size_t, kBuckets>;

constexpr std::uint64_t composite(const MortonKey& k) {
  return (std::uint64_t{k.code} << 32) | k.index;
}

// LSD radix sort of 64-bit (code, index) composites carrying the original
// position. Each thread owns one contiguous chunk; scattering chunks in
// thread order keeps every pass stable and the output deterministic.
std::vector<std::uint32_t> radix_sort(std::span<const MortonKey> keys) {
  const std::size_t n = keys.size();
  std::vector<std::uint64_t> key_a(n), key_b(n);
  std::vector<std::uint32_t> pos_a(n), pos_b(n);
  for (std::size_t i = 0; i < n; ++i) {
    key_a[i] = composite(keys[i]);
    pos_a[i] = static_cast<std::uint32_t>(i);
  }

  std::uint64_t* src_key = key_a.data();
  std::uint64_t* dst_key = key_b.data();
  std::uint32_t* src_pos = pos_a.data();
  std::uint32_t* dst_pos = pos_b.data();

  const int max_threads = omp_get_max_threads();
  std::vector<Histogram> hist(static_cast<std::size_t>(max_threads));
  bool skip_pass = false;

#pragma omp parallel num_threads(max_threads)
  {
    const auto team = static_cast<std::size_t>(omp_get_num_threads());
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t begin = n * tid / team;
    const std::size_t end = n * (tid + 1) / team;

    for (int pass = 0; pass < kPasses; ++pass) {
      const int shift = pass * kRadixBits;
      Histogram& local = hist[tid];
      local.fill(0);
      for (std::size_t i = begin; i < end; ++i) ++local[(src_key[i] >> shift) & (kBuckets - 1)];
#pragma omp barrier
#pragma omp single
      {
        skip_pass = false;
        for (std::size_t d = 0; d < kBuckets && !skip_pass; ++d) {
          std::size_t total = 0;
          for (std::size_t t = 0; t < team; ++t) total += hist[t][d];
          skip_pass = total == n;
        }
        if (!skip_pass) {
          std::size_t running = 0;
          for (std::size_t d = 0; d < kBuckets; ++d) {
            for (std::size_t t = 0; t < team; ++t) {
              const std::size_t count = hist[t][d];
              hist[t][d] = running;
              running += count;
            }
          }
        }
      }
      if (!skip_pass) {
        for (std::size_t i = begin; i < end; ++i) {
          const std::size_t slot = local[(src_key[i] >> shift) & (kBuckets - 1)]++;
          dst_key[slot] = src_key[i];
          dst_pos[slot] = src_pos[i];
        }
      }
#pragma omp barrier
#pragma omp single
      {
        if (!skip_pass) {
          std::swap(src_key, dst_key);
          std::swap(src_pos, dst_pos);
        }
      }
    }
  }

  return {src_pos, src_pos + n};
}

}  // namespace

std::vector<std::uint32_t> sort_by_key(std::span<const MortonKey> keys, Execution exec) {
  if (exec == Execution::parallel && keys.size() > 1) return radix_sort(keys);

  std::vector<std::uint32_t> perm(keys.size());
  std::iota(perm.begin(), perm.end(), 0u);
  std::sort(perm.begin(), perm.end(),
            [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });
  return perm;
}

}  // namespace lbvh
