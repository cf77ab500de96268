#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "tileinv/layout.hpp"

namespace tileinv {

enum class PhaseTag : std::uint32_t {
  kMatrix = 0,
  kFactor = 1,
  kPhase1 = 2,
  kSelectedInverse = 3,
};

// Tile payload container. Keyed so that iteration runs column-major over the
// tile grid, which fixes the order used by file output and checksums.
class TileBlocks {
 public:
  using Map = std::map<std::uint64_t, std::vector<double>>;

  explicit TileBlocks(int b = 0) : b_(b) {}

  int b() const { return b_; }
  bool has(int i, int j) const { return blocks_.count(tile_key(i, j)) != 0; }
  std::vector<double>& at(int i, int j);
  const std::vector<double>& at(int i, int j) const;
  // Inserts a zero block if absent, returns the payload either way.
  std::vector<double>& ensure(int i, int j);
  const Map& map() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }

 private:
  int b_;
  Map blocks_;
};

struct TiledSymmetricMatrix {
  TileLayout layout;
  TilePattern pattern;
  TileBlocks blocks;
};

struct TiledFactor {
  TileLayout layout;
  TilePattern pattern;
  TileBlocks blocks;
  PhaseTag phase = PhaseTag::kFactor;
};

// FNV-1a over the column-major payload bytes, coordinates included. Used for
// thread-count equality checks and result provenance.
std::uint64_t payload_checksum(const TileBlocks& blocks);

}  // namespace tileinv
