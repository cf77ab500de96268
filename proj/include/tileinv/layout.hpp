#pragma once

#include <cstdint>
#include <unordered_set>
#include <utility>
#include <vector>

namespace tileinv {

// Tile grid over an n x n symmetric matrix: N x N tiles of size b x b,
// the last tile row/column padded up to n_padded = N*b.
struct TileLayout {
  long n = 0;
  int b = 0;
  int N = 0;
  long n_padded = 0;
};

TileLayout build_layout(long n, int b);

struct TileCoord {
  int i = 0;  // tile row
  int j = 0;  // tile column, j <= i for everything stored
  friend bool operator==(const TileCoord&, const TileCoord&) = default;
};

// Sort key: column-major over the tile grid.
inline bool tile_before(const TileCoord& a, const TileCoord& b) {
  return a.j != b.j ? a.j < b.j : a.i < b.i;
}

inline std::uint64_t tile_key(int i, int j) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(j)) << 32) |
         static_cast<std::uint32_t>(i);
}

// (r, c) -> tile (i, j) plus in-tile offset, reflecting upper-triangle
// queries to the stored lower triangle first.
struct TileAddress {
  TileCoord tile;
  int row_off = 0;
  int col_off = 0;
};

TileAddress map_entry_to_tile(const TileLayout& layout, long r, long c);

// Lower-triangular structural tile pattern with per-column neighbor lists.
class TilePattern {
 public:
  TilePattern() = default;
  TilePattern(TileLayout layout, std::vector<TileCoord> tiles);

  const TileLayout& layout() const { return layout_; }
  const std::vector<TileCoord>& tiles() const { return tiles_; }
  // Ascending row indices i with (i, j) present, including i = j when stored.
  const std::vector<int>& neighbors(int j) const { return neighbors_[j]; }
  bool has(int i, int j) const { return members_.count(tile_key(i, j)) != 0; }
  std::size_t size() const { return tiles_.size(); }
  bool has_all_diagonals() const;

  friend bool operator==(const TilePattern& a, const TilePattern& b) {
    return a.tiles_ == b.tiles_;
  }

 private:
  TileLayout layout_;
  std::vector<TileCoord> tiles_;  // sorted column-major, duplicate-free
  std::vector<std::vector<int>> neighbors_;
  std::unordered_set<std::uint64_t> members_;
};

// Elimination closure at tile granularity: if (i, k) and (j, k) are present
// with k < j <= i then (i, j) becomes present. One ascending pass over
// columns reaches the least fixpoint because every added tile lands in a
// column greater than the one being processed.
TilePattern symbolic_fill(const TilePattern& pattern);

// Band of B tile blocks including the diagonal (off-diagonal distance
// <= B - 1), plus the arrow row N - 1, plus all diagonals.
TilePattern band_arrow_pattern(const TileLayout& layout, int band_b);

}  // namespace tileinv
