#pragma once

#include <vector>

#include "tileinv/errors.hpp"

namespace tileinv {

enum class TileShape { kGeneral, kLowerTriangular, kUpperTriangular, kSymmetricFull };
enum class Side { kLeft, kRight };
enum class Trans { kNo, kTrans };

// Dense b x b block, row-major. Triangular shapes keep the opposite triangle
// exactly zero; kSymmetricFull is mirrored by an explicit copy.
struct Tile {
  int b = 0;
  std::vector<double> v;
  TileShape shape = TileShape::kGeneral;

  Tile() = default;
  Tile(int n, TileShape s) : b(n), v(static_cast<std::size_t>(n) * n, 0.0), shape(s) {}
  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * b + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * b + c]; }
};

// All kernels accumulate with a fixed ascending inner index so results are
// bitwise reproducible regardless of scheduling.

// Cholesky of a symmetric tile (lower triangle read). Throws NotSpdError
// carrying the in-tile pivot index.
Tile potrf_tile(const Tile& a);

// Inverse of a triangular tile, same orientation.
Tile trtri_tile(const Tile& t);

// Solve op(T) * X = B (kLeft) or X * op(T) = B (kRight).
Tile trsm_tile(const Tile& t, const Tile& b, Side side, Trans trans);

// C <- C - A * A^T, lower computed then mirrored.
void syrk_tile(Tile& c, const Tile& a);

// C <- C + alpha * op(A) * op(B).
void gemm_tile(Tile& c, const Tile& a, const Tile& b, Trans trans_a, Trans trans_b,
               double alpha);

// B <- op(T) * B (kLeft) or B * op(T) (kRight).
void trmm_tile(Tile& b, const Tile& t, Side side, Trans trans);

// T * T^T as a fully mirrored symmetric tile.
Tile lauum_tile(const Tile& t);

Tile transpose_tile(const Tile& t);

}  // namespace tileinv
