#include "tileinv/storage.hpp"

#include <cstring>
#include <string>

#include "tileinv/errors.hpp"

namespace tileinv {

std::vector<double>& TileBlocks::at(int i, int j) {
  auto it = blocks_.find(tile_key(i, j));
  if (it == blocks_.end()) {
    throw ConsistencyError("no payload for tile (" + std::to_string(i) + ", " +
                           std::to_string(j) + ")");
  }
  return it->second;
}

const std::vector<double>& TileBlocks::at(int i, int j) const {
  auto it = blocks_.find(tile_key(i, j));
  if (it == blocks_.end()) {
    throw ConsistencyError("no payload for tile (" + std::to_string(i) + ", " +
                           std::to_string(j) + ")");
  }
  return it->second;
}

std::vector<double>& TileBlocks::ensure(int i, int j) {
  auto [it, inserted] = blocks_.try_emplace(tile_key(i, j));
  if (inserted) it->second.assign(static_cast<std::size_t>(b_) * b_, 0.0);
  return it->second;
}

std::uint64_t payload_checksum(const TileBlocks& blocks) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& [key, values] : blocks.map()) {
    mix(&key, sizeof(key));
    mix(values.data(), values.size() * sizeof(double));
  }
  return h;
}

}  // namespace tileinv
