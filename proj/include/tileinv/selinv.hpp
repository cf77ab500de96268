#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tileinv/cholesky.hpp"
#include "tileinv/storage.hpp"

namespace tileinv {

enum class SelectionPreset { kNone, kDiagonal, kFactorPattern, kAll };

struct SelectionRequest {
  SelectionPreset preset = SelectionPreset::kNone;
  std::vector<std::pair<long, long>> entries;  // scalar (r, c), any triangle

  static SelectionRequest diagonal() { return {SelectionPreset::kDiagonal, {}}; }
  static SelectionRequest factor_pattern() { return {SelectionPreset::kFactorPattern, {}}; }
  static SelectionRequest all() { return {SelectionPreset::kAll, {}}; }
  static SelectionRequest of(std::vector<std::pair<long, long>> list) {
    return {SelectionPreset::kNone, std::move(list)};
  }
};

// Plain text request file: one "r c" pair per line, 0-based, '#' comments.
SelectionRequest read_request_file(const std::string& path);
SelectionRequest parse_request_text(const std::string& text);

std::vector<TileCoord> select_tiles(const TileLayout& layout,
                                    const TilePattern& factor_pattern,
                                    const SelectionRequest& request);

struct ColumnWork {
  int col = 0;
  std::vector<int> offdiag_rows;  // descending; computed before the diagonal
  bool diagonal = false;
};

struct SelectedTileSet {
  std::vector<TileCoord> requested;  // sorted column-major
  TilePattern closure;
  std::vector<ColumnWork> columns;   // descending column order
  bool growth_warning = false;       // closure grew past 4x the request
};

// Least fixpoint of: for (j, i) in the set and k in factor neighbors(i) with
// k > i, the operand tile (max(j,k), min(j,k)) is in the set, plus (k, i) for
// diagonal targets. Single ascending column sweep (operands always live in
// higher columns).
SelectedTileSet symbolic_inversion(const std::vector<TileCoord>& requested,
                                   const TilePattern& factor_pattern);

// Column i of the factor becomes U_i = (L_ii^T)^{-1} on the diagonal and
// W_ji = L_ji * L_ii^{-1} off it. Columns are distributed round-robin,
// i = N - 1 - worker stepping by the worker count. The rvalue overload
// transforms the blocks in place.
TiledFactor phase1(const TiledFactor& factor, int workers);
TiledFactor phase1(TiledFactor&& factor, int workers);

struct SelectedInverse {
  TileLayout layout;
  TilePattern closure;
  TileBlocks blocks;
  std::vector<TileCoord> requested;
  std::uint64_t factor_checksum = 0;
  std::uint64_t request_digest = 0;
};

// Phase 2 recursion, columns descending per owner, off-diagonals (descending
// row) before the diagonal, k terms ascending:
//   sigma(j,i) = - sum_k M(j,k) * W(k,i)        M = sigma(j,j) | sigma(j,k) | sigma(k,j)^T
//   sigma(i,i) = U_i U_i^T - sum_k W(k,i)^T * sigma(k,i)
// Cross-column reads wait on per-tile completion flags.
SelectedInverse phase2(const TiledFactor& p1, const SelectedTileSet& closure,
                       int workers);

// factorize if needed -> select -> closure -> phase1 -> phase2
SelectedInverse selected_inverse(const TiledSymmetricMatrix& matrix,
                                 const SelectionRequest& request, int workers);
SelectedInverse selected_inverse(const TiledFactor& factor,
                                 const SelectionRequest& request, int workers);

// The all-selection path under its own name; bitwise identical to it.
SelectedInverse full_inverse(const TiledFactor& factor, int workers);

struct Entry {
  long r = 0;
  long c = 0;
  double value = 0.0;
};

// Preset requests expand canonically: kDiagonal ascending, kAll and
// kFactorPattern column-major over covered in-range entries. Explicit lists
// keep request order minus duplicates.
std::vector<Entry> extract_entries(const SelectedInverse& sigma,
                                   const SelectionRequest& request);

void write_selected_inverse(const std::string& path, const SelectedInverse& sigma);

}  // namespace tileinv
