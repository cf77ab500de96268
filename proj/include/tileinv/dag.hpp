#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tileinv/selinv.hpp"
#include "tileinv/storage.hpp"

namespace tileinv {

enum class DagKernel { kTrsmInv, kTrmm, kLauum, kGemm };

struct DagNode {
  DagKernel kind;
  int i = 0;       // target tile row
  int j = 0;       // target tile column
  int k = -1;      // accumulation term for kGemm
  int phase = 1;   // 1: factor transform, 2: inversion recursion
};

// Kernel-invocation granularity dependency graph. One TRSM_INV per factor
// diagonal, one TRMM per off-diagonal factor tile, one LAUUM per closure
// diagonal, one GEMM per (target, k) accumulation term. Edges:
//   TRSM_INV(i,i) -> TRMM(j,i), TRSM_INV(i,i) -> LAUUM(i,i)
//   chain edges through each target's accumulation in ascending k
//   TRMM(k,i) -> every GEMM consuming W(k,i)
//   final producer of a sigma operand tile -> the GEMM reading it
struct TaskDag {
  int n_tiles = 0;
  std::optional<int> band_b;       // set when closure == factor == band+arrow
  std::vector<DagNode> nodes;      // canonical order, ids are indices
  std::vector<std::pair<int, int>> edges;
  std::vector<int> core_of;        // empty until assign_cores
};

TaskDag build_dag(const SelectedTileSet& closure, const TilePattern& factor_pattern);

// Case-7 band+arrowhead selection over an N-tile grid, band of band_b blocks
// including the diagonal. band_b = N behaves as the dense case.
TaskDag build_band_arrow_dag(int n_tiles, int band_b);

// Static round-robin: the owner of tile column c is (N - 1 - c) mod P.
TaskDag assign_cores(TaskDag dag, int cores);

// Node count on the longest directed path.
int critical_path(const TaskDag& dag);

// Canonical DOT text: nodes sorted by (phase, column desc, row desc, kernel,
// k), fill colors cycle an 8-color palette by core when cores are assigned.
std::string export_dot(const TaskDag& dag);

// N_GEMM = (N-B)B + B(B-1)/2 + B^2(N-B-1) + B(B+1)(2B+1)/6
long long predict_gemm_count(int n_tiles, int band_b);

enum class PatternKind { kDense, kBandArrow };

struct ComplexityReport {
  int n_tiles = 0;
  std::optional<int> band_b;
  long long trsm = 0;
  long long trmm = 0;
  long long lauum = 0;
  long long gemm_actual = 0;
  std::optional<long long> gemm_predicted;
  int critical_path = 0;
  bool match = false;
};

// TRSM_INV = N, LAUUM = N, TRMM = off-diagonal factor tile count.
ComplexityReport predict_phase_counts(int n_tiles, PatternKind kind, int band_b = 0);

ComplexityReport count_kernels(const TaskDag& dag);

// Flat JSON document with keys n_tiles, band_b, gemm_actual, gemm_predicted,
// trsm, trmm, lauum, critical_path, match.
std::string report_to_json(const ComplexityReport& report);

}  // namespace tileinv
