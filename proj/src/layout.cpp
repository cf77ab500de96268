#include "tileinv/layout.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "tileinv/errors.hpp"

namespace tileinv {

TileLayout build_layout(long n, int b) {
  if (n < 1) throw InvalidArgumentError("matrix dimension must be positive, got " + std::to_string(n));
  if (b < 1) throw InvalidArgumentError("tile size must be positive, got " + std::to_string(b));
  TileLayout layout;
  layout.n = n;
  layout.b = b;
  layout.N = static_cast<int>((n + b - 1) / b);
  layout.n_padded = static_cast<long>(layout.N) * b;
  return layout;
}

TileAddress map_entry_to_tile(const TileLayout& layout, long r, long c) {
  if (r < 0 || c < 0 || r >= layout.n || c >= layout.n) {
    throw InvalidArgumentError("entry (" + std::to_string(r) + ", " + std::to_string(c) +
                               ") outside matrix of dimension " + std::to_string(layout.n));
  }
  if (r < c) std::swap(r, c);
  TileAddress addr;
  addr.tile.i = static_cast<int>(r / layout.b);
  addr.tile.j = static_cast<int>(c / layout.b);
  addr.row_off = static_cast<int>(r % layout.b);
  addr.col_off = static_cast<int>(c % layout.b);
  return addr;
}

TilePattern::TilePattern(TileLayout layout, std::vector<TileCoord> tiles)
    : layout_(layout), tiles_(std::move(tiles)) {
  for (const TileCoord& t : tiles_) {
    if (t.j < 0 || t.j > t.i || t.i >= layout_.N) {
      throw StructureError("tile (" + std::to_string(t.i) + ", " + std::to_string(t.j) +
                           ") outside the lower triangle of a " + std::to_string(layout_.N) +
                           "-tile grid");
    }
  }
  std::sort(tiles_.begin(), tiles_.end(), tile_before);
  tiles_.erase(std::unique(tiles_.begin(), tiles_.end()), tiles_.end());
  neighbors_.assign(layout_.N, {});
  members_.reserve(tiles_.size() * 2);
  for (const TileCoord& t : tiles_) {
    neighbors_[t.j].push_back(t.i);
    members_.insert(tile_key(t.i, t.j));
  }
}

bool TilePattern::has_all_diagonals() const {
  for (int i = 0; i < layout_.N; ++i) {
    if (!has(i, i)) return false;
  }
  return true;
}

TilePattern symbolic_fill(const TilePattern& pattern) {
  const int N = pattern.layout().N;
  for (int i = 0; i < N; ++i) {
    if (!pattern.has(i, i)) {
      throw StructureError("symbolic fill requires every diagonal tile, column " +
                           std::to_string(i) + " has none");
    }
  }
  // Working copy as per-column row sets; additions always target a column
  // beyond the one currently eliminated, so one ascending pass suffices.
  std::vector<std::set<int>> cols(N);
  for (const TileCoord& t : pattern.tiles()) cols[t.j].insert(t.i);
  for (int k = 0; k < N; ++k) {
    std::vector<int> below(cols[k].upper_bound(k), cols[k].end());
    for (std::size_t a = 0; a < below.size(); ++a) {
      for (std::size_t b = a; b < below.size(); ++b) {
        cols[below[a]].insert(below[b]);
      }
    }
  }
  std::vector<TileCoord> tiles;
  for (int j = 0; j < N; ++j) {
    for (int i : cols[j]) tiles.push_back({i, j});
  }
  return TilePattern(pattern.layout(), std::move(tiles));
}

TilePattern band_arrow_pattern(const TileLayout& layout, int band_b) {
  if (band_b < 1 || band_b > layout.N) {
    throw InvalidArgumentError("band width " + std::to_string(band_b) +
                               " outside [1, " + std::to_string(layout.N) + "]");
  }
  std::vector<TileCoord> tiles;
  for (int j = 0; j < layout.N; ++j) {
    for (int i = j; i < layout.N && i - j <= band_b - 1; ++i) tiles.push_back({i, j});
    if (layout.N - 1 - j > band_b - 1) tiles.push_back({layout.N - 1, j});
  }
  return TilePattern(layout, std::move(tiles));
}

}  // namespace tileinv
