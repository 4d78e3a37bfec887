#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lbvh/execution.hpp"
#include "lbvh/geometry.hpp"

namespace lbvh {

inline constexpr int kMortonBits = 30;
inline constexpr std::uint32_t kMortonGrid = 1024;  // cells per axis

/// Z-order key of an object: 30-bit interleaved code plus the original
/// object ordinal, which breaks ties between equal codes.
struct MortonKey {
  std::uint32_t code = 0;
  std::uint32_t index = 0;

  friend constexpr bool operator==(const MortonKey&, const MortonKey&) = default;
  friend constexpr auto operator<=>(const MortonKey& a, const MortonKey& b) {
    if (a.code != b.code) return a.code <=> b.code;
    return a.index <=> b.index;
  }
};

// Spreads the low 10 bits of v so that bit i lands on bit 3i.
constexpr std::uint32_t spread_bits_10(std::uint32_t v) {
  v &= 0x3ffu;
  v = (v | (v << 16)) & 0x030000ffu;
  v = (v | (v << 8)) & 0x0300f00fu;
  v = (v | (v << 4)) & 0x030c30c3u;
  v = (v | (v << 2)) & 0x09249249u;
  return v;
}

// Inverse of spread_bits_10.
constexpr std::uint32_t compact_bits_10(std::uint32_t v) {
  v &= 0x09249249u;
  v = (v | (v >> 2)) & 0x030c30c3u;
  v = (v | (v >> 4)) & 0x0300f00fu;
  v = (v | (v >> 8)) & 0x030000ffu;
  v = (v | (v >> 16)) & 0x000003ffu;
  return v;
}

/// Checked variant of spread_bits_10: throws std::out_of_range for v >= 1024.
std::uint32_t expand_bits_10(std::uint32_t v);

struct GridCell {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint32_t z = 0;
  friend constexpr bool operator==(const GridCell&, const GridCell&) = default;
};

/// Grid cell of c after normalizing by the scene box. Coordinates outside the
/// scene are clamped; zero-extent axes map to cell 0.
GridCell grid_cell(const Point& c, const Box& scene);

constexpr std::uint32_t interleave(const GridCell& cell) {
  // x takes the most significant bit of every 3-bit group.
  return (spread_bits_10(cell.x) << 2) | (spread_bits_10(cell.y) << 1) |
         spread_bits_10(cell.z);
}

constexpr GridCell deinterleave(std::uint32_t code) {
  return {compact_bits_10(code >> 2), compact_bits_10(code >> 1), compact_bits_10(code)};
}

inline std::uint32_t morton_code(const Point& c, const Box& scene) {
  return interleave(grid_cell(c, scene));
}

/// Keys for a set of boxes: code of each centroid, index = position.
std::vector<MortonKey> assign_keys(std::span<const Box> boxes, const Box& scene,
                                   Execution exec = Execution::parallel);

/// Keys for a set of points, index = position.
std::vector<MortonKey> assign_keys(std::span<const Point> points, const Box& scene,
                                   Execution exec = Execution::parallel);

/// Permutation of positions that orders keys by (code, index). The parallel
/// path is an LSD radix sort; the serial path is a comparison sort. Both
/// return the same permutation because (code, index) is a total order when
/// indices are unique.
std::vector<std::uint32_t> sort_by_key(std::span<const MortonKey> keys,
                                       Execution exec = Execution::parallel);

}  // namespace lbvh
