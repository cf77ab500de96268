#include "tileinv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tileinv/errors.hpp"

namespace tileinv {

namespace {

void check_oracle_size(long n) {
  if (n > kOracleSizeLimit) {
    throw InvalidArgumentError("oracle limited to n <= " + std::to_string(kOracleSizeLimit) +
                               ", got n = " + std::to_string(n));
  }
}

}  // namespace

DenseMatrix dense_from_tiled(const TiledSymmetricMatrix& matrix) {
  const long n = matrix.layout.n;
  check_oracle_size(n);
  const int b = matrix.layout.b;
  DenseMatrix out(n);
  for (const auto& [key, payload] : matrix.blocks.map()) {
    const int ti = static_cast<int>(key & 0xffffffffu);
    const int tj = static_cast<int>(key >> 32);
    for (int or_ = 0; or_ < b; ++or_) {
      const long r = static_cast<long>(ti) * b + or_;
      if (r >= n) break;
      for (int oc = 0; oc < b; ++oc) {
        const long c = static_cast<long>(tj) * b + oc;
        if (c >= n || c > r) break;
        const double v = payload[static_cast<std::size_t>(or_) * b + oc];
        out.at(r, c) = v;
        out.at(c, r) = v;
      }
    }
  }
  return out;
}

DenseMatrix dense_cholesky_ref(const DenseMatrix& a) {
  const long n = a.n;
  check_oracle_size(n);
  DenseMatrix l(n);
  for (long j = 0; j < n; ++j) {
    double d = a.at(j, j);
    for (long k = 0; k < j; ++k) d -= l.at(j, k) * l.at(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NotSpdError("reference factorization hit a non-positive pivot", j);
    }
    const double djj = std::sqrt(d);
    l.at(j, j) = djj;
    for (long i = j + 1; i < n; ++i) {
      double s = a.at(i, j);
      for (long k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
      l.at(i, j) = s / djj;
    }
  }
  return l;
}

DenseMatrix dense_inverse_ref(const DenseMatrix& a) {
  const long n = a.n;
  const DenseMatrix l = dense_cholesky_ref(a);
  DenseMatrix inv(n);
  std::vector<double> y(static_cast<std::size_t>(n));
  std::vector<double> x(static_cast<std::size_t>(n));
  for (long col = 0; col < n; ++col) {
    for (long i = 0; i < n; ++i) {
      double s = i == col ? 1.0 : 0.0;
      for (long k = 0; k < i; ++k) s -= l.at(i, k) * y[static_cast<std::size_t>(k)];
      y[static_cast<std::size_t>(i)] = s / l.at(i, i);
    }
    for (long i = n - 1; i >= 0; --i) {
      double s = y[static_cast<std::size_t>(i)];
      for (long k = i + 1; k < n; ++k) s -= l.at(k, i) * x[static_cast<std::size_t>(k)];
      x[static_cast<std::size_t>(i)] = s / l.at(i, i);
    }
    for (long i = 0; i < n; ++i) inv.at(i, col) = x[static_cast<std::size_t>(i)];
  }
  return inv;
}

double max_rel_error(const std::vector<double>& reference,
                     const std::vector<double>& candidate) {
  if (reference.size() != candidate.size()) {
    throw InvalidArgumentError("max_rel_error: size mismatch, " + std::to_string(reference.size()) +
                               " vs " + std::to_string(candidate.size()));
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const double denom = std::max(std::abs(reference[k]), 1e-30);
    worst = std::max(worst, std::abs(candidate[k] - reference[k]) / denom);
  }
  return worst;
}

}  // namespace tileinv
