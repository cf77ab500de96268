#pragma once

#include <vector>

#include "tileinv/storage.hpp"

namespace tileinv {

enum class FactorKernel { kPotrf, kTrsm, kSyrk, kGemm };

struct FactorTask {
  FactorKernel kind;
  TileCoord target;
  TileCoord op_a;  // kTrsm: diagonal; kSyrk/kGemm: first source tile
  TileCoord op_b;  // kGemm: second source tile
};

// Right-looking column schedule over the filled pattern. Tasks are grouped
// per column as POTRF, then TRSMs, then SYRK/GEMM updates; the numeric phase
// separates the groups with barriers.
struct FactorPlan {
  TilePattern filled;
  std::vector<FactorTask> tasks;
  // tasks[column_begin[j] ... column_begin[j+1]) belong to column j.
  std::vector<std::size_t> column_begin;
};

FactorPlan symbolic_cholesky(const TilePattern& pattern);

// Bitwise identical results for any worker count: each task writes one tile,
// update order per target is fixed by ascending source column.
TiledFactor factorize(const TiledSymmetricMatrix& matrix, const FactorPlan& plan,
                      int workers);

}  // namespace tileinv
