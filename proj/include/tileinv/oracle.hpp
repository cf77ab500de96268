#pragma once

#include <vector>

#include "tileinv/storage.hpp"

namespace tileinv {

// Brute-force scalar references. Nothing here touches the tile kernels; the
// point is an independent check of the tiled pipeline.

struct DenseMatrix {
  long n = 0;
  std::vector<double> a;  // row-major n x n

  DenseMatrix() = default;
  explicit DenseMatrix(long size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
  double& at(long r, long c) { return a[static_cast<std::size_t>(r) * n + c]; }
  double at(long r, long c) const { return a[static_cast<std::size_t>(r) * n + c]; }
};

inline constexpr long kOracleSizeLimit = 4000;

// Full symmetric expansion of the stored lower triangle, padding dropped.
DenseMatrix dense_from_tiled(const TiledSymmetricMatrix& matrix);

// Unblocked scalar Cholesky, lower triangular result.
DenseMatrix dense_cholesky_ref(const DenseMatrix& a);

// Inverse via forward/back substitution against unit columns of L.
DenseMatrix dense_inverse_ref(const DenseMatrix& a);

// max over entries of |cand - ref| / max(|ref|, 1e-30).
double max_rel_error(const std::vector<double>& reference,
                     const std::vector<double>& candidate);

}  // namespace tileinv
