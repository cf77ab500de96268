#pragma once

#include <string>

#include "tileinv/storage.hpp"

namespace tileinv {

// Binary tile file, little-endian throughout:
//   "STLS" | version u32 | n u32 | b u32 | N u32 | phase u32 | count u32
// then per tile: i u32, j u32, b*b float64 row-major.
// Tiles are written column-major over the grid (sorted by (j, i)).
inline constexpr std::uint32_t kTileFileVersion = 1;

struct TileFile {
  TileLayout layout;
  PhaseTag phase = PhaseTag::kMatrix;
  TileBlocks blocks;
};

void write_tile_file(const std::string& path, const TileLayout& layout,
                     PhaseTag phase, const TileBlocks& blocks);
TileFile read_tile_file(const std::string& path);

// Pattern is rebuilt from the stored coordinates.
TiledSymmetricMatrix matrix_from_tile_file(const TileFile& file);
TiledFactor factor_from_tile_file(const TileFile& file);

}  // namespace tileinv
