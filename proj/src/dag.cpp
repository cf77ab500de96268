#include "tileinv/dag.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <queue>
#include <sstream>
#include <string>

#include "json.hpp"
#include "tileinv/errors.hpp"

namespace tileinv {

namespace {

int kind_rank(DagKernel k) {
  switch (k) {
    case DagKernel::kTrsmInv: return 0;
    case DagKernel::kTrmm: return 1;
    case DagKernel::kLauum: return 2;
    case DagKernel::kGemm: return 3;
  }
  return 3;
}

const char* kind_name(DagKernel k) {
  switch (k) {
    case DagKernel::kTrsmInv: return "TRSM_INV";
    case DagKernel::kTrmm: return "TRMM";
    case DagKernel::kLauum: return "LAUUM";
    case DagKernel::kGemm: return "GEMM";
  }
  return "GEMM";
}

bool node_before(const DagNode& a, const DagNode& b) {
  if (a.phase != b.phase) return a.phase < b.phase;
  if (a.j != b.j) return a.j > b.j;
  if (a.i != b.i) return a.i > b.i;
  const int ra = kind_rank(a.kind);
  const int rb = kind_rank(b.kind);
  if (ra != rb) return ra < rb;
  return a.k < b.k;
}

using NodeKey = std::array<int, 5>;

NodeKey key_of(const DagNode& n) {
  return {n.phase, kind_rank(n.kind), n.i, n.j, n.k};
}

void check_acyclic(const TaskDag& dag) {
  const int n = static_cast<int>(dag.nodes.size());
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (const auto& [from, to] : dag.edges) {
    out[static_cast<std::size_t>(from)].push_back(to);
    ++indegree[static_cast<std::size_t>(to)];
  }
  std::queue<int> ready;
  for (int v = 0; v < n; ++v) {
    if (indegree[static_cast<std::size_t>(v)] == 0) ready.push(v);
  }
  int seen = 0;
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop();
    ++seen;
    for (int w : out[static_cast<std::size_t>(v)]) {
      if (--indegree[static_cast<std::size_t>(w)] == 0) ready.push(w);
    }
  }
  if (seen != n) throw ConsistencyError("task graph contains a cycle");
}

}  // namespace

TaskDag build_dag(const SelectedTileSet& sel, const TilePattern& factor_pattern) {
  const TileLayout& layout = factor_pattern.layout();
  const int N = layout.N;
  if (sel.closure.layout().N != N) {
    throw ContractError("selection closure built for a different tile grid");
  }

  std::vector<DagNode> nodes;
  for (int i = 0; i < N; ++i) {
    nodes.push_back({DagKernel::kTrsmInv, i, i, -1, 1});
    for (int k : factor_pattern.neighbors(i)) {
      if (k > i) nodes.push_back({DagKernel::kTrmm, k, i, -1, 1});
    }
  }
  for (const ColumnWork& col : sel.columns) {
    const int i = col.col;
    const std::vector<int>& nb = factor_pattern.neighbors(i);
    for (int j : col.offdiag_rows) {
      for (int k : nb) {
        if (k > i) nodes.push_back({DagKernel::kGemm, j, i, k, 2});
      }
    }
    if (col.diagonal) {
      nodes.push_back({DagKernel::kLauum, i, i, -1, 2});
      for (int k : nb) {
        if (k > i) nodes.push_back({DagKernel::kGemm, i, i, k, 2});
      }
    }
  }
  std::sort(nodes.begin(), nodes.end(), node_before);

  std::map<NodeKey, int> id_of;
  for (std::size_t idx = 0; idx < nodes.size(); ++idx) {
    id_of.emplace(key_of(nodes[idx]), static_cast<int>(idx));
  }
  auto id = [&](DagKernel kind, int i, int j, int k, int phase) {
    const auto it = id_of.find(NodeKey{phase, kind_rank(kind), i, j, k});
    if (it == id_of.end()) throw ConsistencyError("dangling task reference");
    return it->second;
  };

  // Final producer of a sigma tile: the last accumulation term if any, else
  // the LAUUM for diagonals, else nothing (the tile stays zero).
  auto producer = [&](int i, int j) -> int {
    int last_k = -1;
    for (int k : factor_pattern.neighbors(j)) {
      if (k > j) last_k = k;
    }
    if (last_k >= 0) return id(DagKernel::kGemm, i, j, last_k, 2);
    if (i == j) return id(DagKernel::kLauum, j, j, -1, 2);
    return -1;
  };

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < N; ++i) {
    const int trsm = id(DagKernel::kTrsmInv, i, i, -1, 1);
    for (int k : factor_pattern.neighbors(i)) {
      if (k > i) edges.emplace_back(trsm, id(DagKernel::kTrmm, k, i, -1, 1));
    }
  }
  for (const ColumnWork& col : sel.columns) {
    const int i = col.col;
    std::vector<int> terms;
    for (int k : factor_pattern.neighbors(i)) {
      if (k > i) terms.push_back(k);
    }
    for (int j : col.offdiag_rows) {
      int prev = -1;
      for (int k : terms) {
        const int g = id(DagKernel::kGemm, j, i, k, 2);
        if (prev >= 0) edges.emplace_back(prev, g);
        edges.emplace_back(id(DagKernel::kTrmm, k, i, -1, 1), g);
        const int op = producer(std::max(j, k), std::min(j, k));
        if (op >= 0) edges.emplace_back(op, g);
        prev = g;
      }
    }
    if (col.diagonal) {
      const int lauum = id(DagKernel::kLauum, i, i, -1, 2);
      edges.emplace_back(id(DagKernel::kTrsmInv, i, i, -1, 1), lauum);
      int prev = lauum;
      for (int k : terms) {
        const int g = id(DagKernel::kGemm, i, i, k, 2);
        edges.emplace_back(prev, g);
        edges.emplace_back(id(DagKernel::kTrmm, k, i, -1, 1), g);
        const int op = producer(k, i);
        if (op >= 0) edges.emplace_back(op, g);
        prev = g;
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  TaskDag dag;
  dag.n_tiles = N;
  dag.nodes = std::move(nodes);
  dag.edges = std::move(edges);

  if (sel.closure == factor_pattern) {
    const std::size_t dense_count =
        static_cast<std::size_t>(N) * (static_cast<std::size_t>(N) + 1) / 2;
    if (sel.closure.size() == dense_count) {
      dag.band_b = N;
    } else {
      int bhat = 1;
      for (const TileCoord& t : sel.closure.tiles()) {
        if (t.i != t.j && t.i != N - 1) bhat = std::max(bhat, t.i - t.j + 1);
      }
      if (band_arrow_pattern(layout, bhat) == sel.closure) dag.band_b = bhat;
    }
  }

  check_acyclic(dag);
  return dag;
}

TaskDag build_band_arrow_dag(int n_tiles, int band_b) {
  if (n_tiles < 1) throw InvalidArgumentError("tile count must be at least 1");
  if (band_b < 1 || band_b > n_tiles) {
    throw InvalidArgumentError("band width must lie in [1, n_tiles]");
  }
  const TileLayout layout = build_layout(n_tiles, 1);
  const TilePattern pattern = band_arrow_pattern(layout, band_b);
  const SelectedTileSet sel = symbolic_inversion(pattern.tiles(), pattern);
  TaskDag dag = build_dag(sel, pattern);
  dag.band_b = band_b;
  return dag;
}

TaskDag assign_cores(TaskDag dag, int cores) {
  if (cores < 1) throw InvalidArgumentError("core count must be at least 1");
  dag.core_of.resize(dag.nodes.size());
  for (std::size_t idx = 0; idx < dag.nodes.size(); ++idx) {
    dag.core_of[idx] = (dag.n_tiles - 1 - dag.nodes[idx].j) % cores;
  }
  return dag;
}

int critical_path(const TaskDag& dag) {
  const int n = static_cast<int>(dag.nodes.size());
  if (n == 0) return 0;
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (const auto& [from, to] : dag.edges) {
    out[static_cast<std::size_t>(from)].push_back(to);
    ++indegree[static_cast<std::size_t>(to)];
  }
  std::vector<int> depth(static_cast<std::size_t>(n), 1);
  std::queue<int> ready;
  for (int v = 0; v < n; ++v) {
    if (indegree[static_cast<std::size_t>(v)] == 0) ready.push(v);
  }
  int seen = 0;
  int best = 0;
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop();
    ++seen;
    best = std::max(best, depth[static_cast<std::size_t>(v)]);
    for (int w : out[static_cast<std::size_t>(v)]) {
      depth[static_cast<std::size_t>(w)] =
          std::max(depth[static_cast<std::size_t>(w)], depth[static_cast<std::size_t>(v)] + 1);
      if (--indegree[static_cast<std::size_t>(w)] == 0) ready.push(w);
    }
  }
  if (seen != n) throw ConsistencyError("task graph contains a cycle");
  return best;
}

std::string export_dot(const TaskDag& dag) {
  static const char* kPalette[8] = {"#a6cee3", "#1f78b4", "#b2df8a", "#33a02c",
                                    "#fb9a99", "#e31a1c", "#fdbf6f", "#ff7f00"};
  std::ostringstream out;
  out << "digraph tasks {\n";
  out << "  rankdir=TB;\n";
  out << "  node [shape=box];\n";
  for (std::size_t idx = 0; idx < dag.nodes.size(); ++idx) {
    const DagNode& n = dag.nodes[idx];
    out << "  n" << idx << " [label=\"" << kind_name(n.kind) << "(" << n.i << "," << n.j
        << ")\"";
    if (!dag.core_of.empty()) {
      out << ", style=filled, fillcolor=\"" << kPalette[dag.core_of[idx] % 8] << "\"";
    }
    out << "];\n";
  }
  for (const auto& [from, to] : dag.edges) {
    out << "  n" << from << " -> n" << to << ";\n";
  }
  out << "}\n";
  return out.str();
}

long long predict_gemm_count(int n_tiles, int band_b) {
  if (n_tiles < 1) throw InvalidArgumentError("tile count must be at least 1");
  if (band_b < 1 || band_b > n_tiles) {
    throw InvalidArgumentError("band width must lie in [1, n_tiles]");
  }
  const long long n = n_tiles;
  const long long b = band_b;
  return (n - b) * b + b * (b - 1) / 2 + b * b * (n - b - 1) + b * (b + 1) * (2 * b + 1) / 6;
}

ComplexityReport predict_phase_counts(int n_tiles, PatternKind kind, int band_b) {
  if (n_tiles < 1) throw InvalidArgumentError("tile count must be at least 1");
  ComplexityReport report;
  report.n_tiles = n_tiles;
  report.trsm = n_tiles;
  report.lauum = n_tiles;
  if (kind == PatternKind::kDense) {
    report.band_b = n_tiles;
    report.trmm = static_cast<long long>(n_tiles) * (n_tiles - 1) / 2;
    report.gemm_predicted = predict_gemm_count(n_tiles, n_tiles);
  } else {
    const TilePattern pattern = band_arrow_pattern(build_layout(n_tiles, 1), band_b);
    report.band_b = band_b;
    report.trmm = static_cast<long long>(pattern.size()) - n_tiles;
    report.gemm_predicted = predict_gemm_count(n_tiles, band_b);
  }
  return report;
}

ComplexityReport count_kernels(const TaskDag& dag) {
  ComplexityReport report;
  report.n_tiles = dag.n_tiles;
  report.band_b = dag.band_b;
  for (const DagNode& n : dag.nodes) {
    switch (n.kind) {
      case DagKernel::kTrsmInv: ++report.trsm; break;
      case DagKernel::kTrmm: ++report.trmm; break;
      case DagKernel::kLauum: ++report.lauum; break;
      case DagKernel::kGemm: ++report.gemm_actual; break;
    }
  }
  report.critical_path = critical_path(dag);
  if (dag.band_b) {
    const ComplexityReport predicted = predict_phase_counts(
        dag.n_tiles, *dag.band_b == dag.n_tiles ? PatternKind::kDense : PatternKind::kBandArrow,
        *dag.band_b);
    report.gemm_predicted = predicted.gemm_predicted;
    report.match = report.gemm_actual == *predicted.gemm_predicted &&
                   report.trsm == predicted.trsm && report.trmm == predicted.trmm &&
                   report.lauum == predicted.lauum;
  }
  return report;
}

std::string report_to_json(const ComplexityReport& report) {
  nlohmann::json doc;
  doc["n_tiles"] = report.n_tiles;
  doc["band_b"] = nullptr;
  if (report.band_b) doc["band_b"] = *report.band_b;
  doc["trsm"] = report.trsm;
  doc["trmm"] = report.trmm;
  doc["lauum"] = report.lauum;
  doc["gemm_actual"] = report.gemm_actual;
  doc["gemm_predicted"] = nullptr;
  if (report.gemm_predicted) doc["gemm_predicted"] = *report.gemm_predicted;
  doc["critical_path"] = report.critical_path;
  doc["match"] = report.match;
  return doc.dump(2) + "\n";
}

}  // namespace tileinv
