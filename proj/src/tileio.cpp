#include "tileinv/tileio.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "tileinv/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "tile files are little-endian; big-endian hosts are unsupported");

namespace tileinv {

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t get_u32(std::ifstream& in, const char* what) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw ParseError(std::string("tile file truncated reading ") + what);
  }
  return v;
}

}  // namespace

void write_tile_file(const std::string& path, const TileLayout& layout,
                     PhaseTag phase, const TileBlocks& blocks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write("STLS", 4);
  put_u32(out, kTileFileVersion);
  put_u32(out, static_cast<std::uint32_t>(layout.n));
  put_u32(out, static_cast<std::uint32_t>(layout.b));
  put_u32(out, static_cast<std::uint32_t>(layout.N));
  put_u32(out, static_cast<std::uint32_t>(phase));
  put_u32(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& [key, values] : blocks.map()) {
    const std::uint32_t i = static_cast<std::uint32_t>(key & 0xffffffffu);
    const std::uint32_t j = static_cast<std::uint32_t>(key >> 32);
    put_u32(out, i);
    put_u32(out, j);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
  if (!out) throw Error("short write to " + path);
}

TileFile read_tile_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "STLS", 4) != 0) {
    throw ParseError("not a tile file (bad magic): " + path);
  }
  const std::uint32_t version = get_u32(in, "version");
  if (version != kTileFileVersion) {
    throw ParseError("unsupported tile file version " + std::to_string(version));
  }
  const std::uint32_t n = get_u32(in, "n");
  const std::uint32_t b = get_u32(in, "b");
  const std::uint32_t N = get_u32(in, "N");
  const std::uint32_t phase = get_u32(in, "phase");
  const std::uint32_t count = get_u32(in, "tile count");
  if (phase > static_cast<std::uint32_t>(PhaseTag::kSelectedInverse)) {
    throw ParseError("unknown phase tag " + std::to_string(phase));
  }
  TileFile file;
  file.layout = build_layout(static_cast<long>(n), static_cast<int>(b));
  if (file.layout.N != static_cast<int>(N)) {
    throw ParseError("tile grid mismatch: header says " + std::to_string(N) +
                     ", n and b give " + std::to_string(file.layout.N));
  }
  file.phase = static_cast<PhaseTag>(phase);
  file.blocks = TileBlocks(static_cast<int>(b));
  const std::size_t len = static_cast<std::size_t>(b) * b;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t i = get_u32(in, "tile row");
    const std::uint32_t j = get_u32(in, "tile column");
    if (j > i || i >= N) {
      throw ParseError("tile (" + std::to_string(i) + ", " + std::to_string(j) +
                       ") outside the lower triangle");
    }
    std::vector<double>& block = file.blocks.ensure(static_cast<int>(i), static_cast<int>(j));
    if (!in.read(reinterpret_cast<char*>(block.data()),
                 static_cast<std::streamsize>(len * sizeof(double)))) {
      throw ParseError("tile file truncated in payload of tile " + std::to_string(t));
    }
  }
  return file;
}

namespace {

TilePattern pattern_from_blocks(const TileLayout& layout, const TileBlocks& blocks) {
  std::vector<TileCoord> tiles;
  tiles.reserve(blocks.size());
  for (const auto& [key, values] : blocks.map()) {
    (void)values;
    tiles.push_back({static_cast<int>(key & 0xffffffffu), static_cast<int>(key >> 32)});
  }
  return TilePattern(layout, std::move(tiles));
}

}  // namespace

TiledSymmetricMatrix matrix_from_tile_file(const TileFile& file) {
  if (file.phase != PhaseTag::kMatrix) {
    throw FormatError("expected a matrix tile file, found phase tag " +
                      std::to_string(static_cast<int>(file.phase)));
  }
  return {file.layout, pattern_from_blocks(file.layout, file.blocks), file.blocks};
}

TiledFactor factor_from_tile_file(const TileFile& file) {
  if (file.phase != PhaseTag::kFactor && file.phase != PhaseTag::kPhase1) {
    throw FormatError("expected a factor tile file, found phase tag " +
                      std::to_string(static_cast<int>(file.phase)));
  }
  return {file.layout, pattern_from_blocks(file.layout, file.blocks), file.blocks,
          file.phase};
}

}  // namespace tileinv
