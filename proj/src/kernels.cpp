#include "tileinv/kernels.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace tileinv {

namespace {

void require_square_match(const Tile& x, const Tile& y, const char* op) {
  if (x.b != y.b || x.b <= 0) {
    throw InvalidArgumentError(std::string(op) + ": tile size mismatch (" +
                               std::to_string(x.b) + " vs " + std::to_string(y.b) + ")");
  }
}

void require_triangular(const Tile& t, const char* op) {
  if (t.shape != TileShape::kLowerTriangular && t.shape != TileShape::kUpperTriangular) {
    throw InvalidArgumentError(std::string(op) + ": operand is not triangular");
  }
}

// Orientation of op(T).
bool effective_lower(const Tile& t, Trans trans) {
  const bool lower = t.shape == TileShape::kLowerTriangular;
  return trans == Trans::kNo ? lower : !lower;
}

std::vector<double>& scratch_buffer(std::size_t len) {
  static thread_local std::vector<double> buf;
  if (buf.size() < len) buf.resize(len);
  return buf;
}

}  // namespace

Tile transpose_tile(const Tile& t) {
  Tile out(t.b, t.shape);
  if (t.shape == TileShape::kLowerTriangular) out.shape = TileShape::kUpperTriangular;
  if (t.shape == TileShape::kUpperTriangular) out.shape = TileShape::kLowerTriangular;
  for (int r = 0; r < t.b; ++r) {
    for (int c = 0; c < t.b; ++c) out.at(c, r) = t.at(r, c);
  }
  return out;
}

Tile potrf_tile(const Tile& a) {
  if (a.b <= 0) throw InvalidArgumentError("potrf: empty tile");
  const int b = a.b;
  Tile l(b, TileShape::kLowerTriangular);
  for (int j = 0; j < b; ++j) {
    double s = a.at(j, j);
    for (int k = 0; k < j; ++k) s -= l.at(j, k) * l.at(j, k);
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw NotSpdError("non-positive pivot " + std::to_string(s) + " at in-tile index " +
                            std::to_string(j),
                        j);
    }
    const double d = std::sqrt(s);
    l.at(j, j) = d;
    for (int i = j + 1; i < b; ++i) {
      double t = a.at(i, j);
      for (int k = 0; k < j; ++k) t -= l.at(i, k) * l.at(j, k);
      l.at(i, j) = t / d;
    }
  }
  return l;
}

Tile trtri_tile(const Tile& t) {
  require_triangular(t, "trtri");
  const int b = t.b;
  for (int i = 0; i < b; ++i) {
    if (t.at(i, i) == 0.0) {
      throw SingularTileError("trtri: zero diagonal at index " + std::to_string(i));
    }
  }
  Tile x(b, t.shape);
  if (t.shape == TileShape::kLowerTriangular) {
    for (int j = 0; j < b; ++j) {
      x.at(j, j) = 1.0 / t.at(j, j);
      for (int i = j + 1; i < b; ++i) {
        double s = 0.0;
        for (int k = j; k < i; ++k) s += t.at(i, k) * x.at(k, j);
        x.at(i, j) = -s / t.at(i, i);
      }
    }
  } else {
    for (int j = 0; j < b; ++j) {
      x.at(j, j) = 1.0 / t.at(j, j);
      for (int i = j - 1; i >= 0; --i) {
        double s = 0.0;
        for (int k = i + 1; k <= j; ++k) s += t.at(i, k) * x.at(k, j);
        x.at(i, j) = -s / t.at(i, i);
      }
    }
  }
  return x;
}

Tile trsm_tile(const Tile& t, const Tile& rhs, Side side, Trans trans) {
  require_triangular(t, "trsm");
  require_square_match(t, rhs, "trsm");
  const int b = t.b;
  for (int i = 0; i < b; ++i) {
    if (t.at(i, i) == 0.0) {
      throw SingularTileError("trsm: zero diagonal at index " + std::to_string(i));
    }
  }
  const bool lower = effective_lower(t, trans);
  auto opt = [&](int r, int c) { return trans == Trans::kNo ? t.at(r, c) : t.at(c, r); };
  Tile x(b, TileShape::kGeneral);
  if (side == Side::kLeft) {
    // op(T) * X = B, row substitution.
    if (lower) {
      for (int i = 0; i < b; ++i) {
        for (int j = 0; j < b; ++j) {
          double s = rhs.at(i, j);
          for (int k = 0; k < i; ++k) s -= opt(i, k) * x.at(k, j);
          x.at(i, j) = s / opt(i, i);
        }
      }
    } else {
      for (int i = b - 1; i >= 0; --i) {
        for (int j = 0; j < b; ++j) {
          double s = rhs.at(i, j);
          for (int k = i + 1; k < b; ++k) s -= opt(i, k) * x.at(k, j);
          x.at(i, j) = s / opt(i, i);
        }
      }
    }
  } else {
    // X * op(T) = B, column substitution.
    if (lower) {
      for (int j = b - 1; j >= 0; --j) {
        for (int i = 0; i < b; ++i) {
          double s = rhs.at(i, j);
          for (int k = j + 1; k < b; ++k) s -= x.at(i, k) * opt(k, j);
          x.at(i, j) = s / opt(j, j);
        }
      }
    } else {
      for (int j = 0; j < b; ++j) {
        for (int i = 0; i < b; ++i) {
          double s = rhs.at(i, j);
          for (int k = 0; k < j; ++k) s -= x.at(i, k) * opt(k, j);
          x.at(i, j) = s / opt(j, j);
        }
      }
    }
  }
  return x;
}

void syrk_tile(Tile& c, const Tile& a) {
  require_square_match(c, a, "syrk");
  const int b = c.b;
  // Transposed copy keeps the inner loop contiguous.
  std::vector<double>& at = scratch_buffer(static_cast<std::size_t>(b) * b);
  for (int r = 0; r < b; ++r) {
    for (int q = 0; q < b; ++q) at[static_cast<std::size_t>(q) * b + r] = a.at(r, q);
  }
  for (int i = 0; i < b; ++i) {
    double* crow = &c.v[static_cast<std::size_t>(i) * b];
    for (int k = 0; k < b; ++k) {
      const double aik = a.at(i, k);
      const double* atrow = &at[static_cast<std::size_t>(k) * b];
      for (int j = 0; j <= i; ++j) crow[j] -= aik * atrow[j];
    }
  }
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < i; ++j) c.at(j, i) = c.at(i, j);
  }
  c.shape = TileShape::kSymmetricFull;
}

void gemm_tile(Tile& c, const Tile& a, const Tile& b, Trans trans_a, Trans trans_b,
               double alpha) {
  require_square_match(c, a, "gemm");
  require_square_match(c, b, "gemm");
  const int n = c.b;
  const std::size_t len = static_cast<std::size_t>(n) * n;
  // op(B) rows must be contiguous for the vectorized inner loop.
  const double* bdata = b.v.data();
  if (trans_b == Trans::kTrans) {
    std::vector<double>& bt = scratch_buffer(len);
    for (int r = 0; r < n; ++r) {
      for (int q = 0; q < n; ++q) bt[static_cast<std::size_t>(q) * n + r] = b.at(r, q);
    }
    bdata = bt.data();
  }
  for (int i = 0; i < n; ++i) {
    double* crow = &c.v[static_cast<std::size_t>(i) * n];
    for (int k = 0; k < n; ++k) {
      const double aik = trans_a == Trans::kNo ? a.at(i, k) : a.at(k, i);
      const double* brow = &bdata[static_cast<std::size_t>(k) * n];
      if (alpha == 1.0) {
        for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
      } else if (alpha == -1.0) {
        for (int j = 0; j < n; ++j) crow[j] -= aik * brow[j];
      } else {
        for (int j = 0; j < n; ++j) crow[j] += alpha * (aik * brow[j]);
      }
    }
  }
  c.shape = TileShape::kGeneral;
}

void trmm_tile(Tile& b, const Tile& t, Side side, Trans trans) {
  require_triangular(t, "trmm");
  require_square_match(b, t, "trmm");
  const int n = b.b;
  const bool lower = effective_lower(t, trans);
  auto opt = [&](int r, int c) { return trans == Trans::kNo ? t.at(r, c) : t.at(c, r); };
  std::vector<double>& out = scratch_buffer(static_cast<std::size_t>(n) * n);
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n) * n, 0.0);
  if (side == Side::kLeft) {
    // out(i, :) = sum_k op(T)(i, k) * B(k, :)
    for (int i = 0; i < n; ++i) {
      double* orow = &out[static_cast<std::size_t>(i) * n];
      const int k0 = lower ? 0 : i;
      const int k1 = lower ? i : n - 1;
      for (int k = k0; k <= k1; ++k) {
        const double tik = opt(i, k);
        const double* brow = &b.v[static_cast<std::size_t>(k) * n];
        for (int j = 0; j < n; ++j) orow[j] += tik * brow[j];
      }
    }
  } else {
    // out(:, j) = sum_k B(:, k) * op(T)(k, j)
    for (int i = 0; i < n; ++i) {
      const double* brow = &b.v[static_cast<std::size_t>(i) * n];
      double* orow = &out[static_cast<std::size_t>(i) * n];
      for (int j = 0; j < n; ++j) {
        const int k0 = lower ? j : 0;
        const int k1 = lower ? n - 1 : j;
        double s = 0.0;
        for (int k = k0; k <= k1; ++k) s += brow[k] * opt(k, j);
        orow[j] = s;
      }
    }
  }
  std::copy(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n) * n, b.v.begin());
  b.shape = TileShape::kGeneral;
}

Tile lauum_tile(const Tile& t) {
  require_triangular(t, "lauum");
  const int b = t.b;
  Tile c(b, TileShape::kSymmetricFull);
  const bool lower = t.shape == TileShape::kLowerTriangular;
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j <= i; ++j) {
      const int k0 = lower ? 0 : i;
      const int k1 = lower ? j : b - 1;
      double s = 0.0;
      for (int k = k0; k <= k1; ++k) s += t.at(i, k) * t.at(j, k);
      c.at(i, j) = s;
    }
  }
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < i; ++j) c.at(j, i) = c.at(i, j);
  }
  return c;
}

}  // namespace tileinv
