#include "tileinv/selinv.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "tileinv/errors.hpp"
#include "tileinv/kernels.hpp"
#include "tileinv/tileio.hpp"

namespace tileinv {

SelectionRequest parse_request_text(const std::string& text) {
  std::vector<std::pair<long, long>> entries;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    long r = 0, c = 0;
    if (!(fields >> r)) continue;  // blank or comment-only line
    if (!(fields >> c)) throw ParseError("request line needs two indices", line_no);
    std::string extra;
    if (fields >> extra) throw ParseError("trailing token '" + extra + "' in request", line_no);
    entries.emplace_back(r, c);
  }
  return SelectionRequest::of(std::move(entries));
}

SelectionRequest read_request_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_request_text(buf.str());
}

std::vector<TileCoord> select_tiles(const TileLayout& layout,
                                    const TilePattern& factor_pattern,
                                    const SelectionRequest& request) {
  std::vector<TileCoord> tiles;
  switch (request.preset) {
    case SelectionPreset::kDiagonal:
      tiles.reserve(static_cast<std::size_t>(layout.N));
      for (int i = 0; i < layout.N; ++i) tiles.push_back({i, i});
      break;
    case SelectionPreset::kFactorPattern:
      tiles = factor_pattern.tiles();
      break;
    case SelectionPreset::kAll:
      tiles.reserve(static_cast<std::size_t>(layout.N) * (layout.N + 1) / 2);
      for (int j = 0; j < layout.N; ++j) {
        for (int i = j; i < layout.N; ++i) tiles.push_back({i, j});
      }
      break;
    case SelectionPreset::kNone:
      tiles.reserve(request.entries.size());
      for (const auto& [r, c] : request.entries) {
        if (r < 0 || c < 0 || r >= layout.n || c >= layout.n) {
          throw InvalidArgumentError("requested entry (" + std::to_string(r) + ", " +
                                     std::to_string(c) + ") outside the matrix");
        }
        tiles.push_back(map_entry_to_tile(layout, r, c).tile);
      }
      std::sort(tiles.begin(), tiles.end(), tile_before);
      tiles.erase(std::unique(tiles.begin(), tiles.end()), tiles.end());
      break;
  }
  return tiles;
}

SelectedTileSet symbolic_inversion(const std::vector<TileCoord>& requested,
                                   const TilePattern& factor_pattern) {
  const TileLayout& layout = factor_pattern.layout();
  const int N = layout.N;
  if (!factor_pattern.has_all_diagonals()) {
    throw StructureError("symbolic inversion needs every factor diagonal tile");
  }

  std::vector<TileCoord> wanted = requested;
  std::sort(wanted.begin(), wanted.end(), tile_before);
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  for (const TileCoord& t : wanted) {
    if (t.j < 0 || t.i < t.j || t.i >= N) {
      throw InvalidArgumentError("requested tile (" + std::to_string(t.i) + ", " +
                                 std::to_string(t.j) + ") outside the lower tile grid");
    }
  }

  std::vector<std::set<int>> col_rows(static_cast<std::size_t>(N));
  for (const TileCoord& t : wanted) col_rows[static_cast<std::size_t>(t.j)].insert(t.i);

  // Every operand lands in a column at or after the one being expanded, so a
  // single ascending sweep reaches the fixpoint. The diagonal expands first
  // because its operands live in its own column.
  for (int i = 0; i < N; ++i) {
    std::set<int>& rows = col_rows[static_cast<std::size_t>(i)];
    if (rows.empty()) continue;
    const std::vector<int>& nb = factor_pattern.neighbors(i);
    if (rows.count(i) != 0) {
      for (int k : nb) {
        if (k > i) rows.insert(k);
      }
    }
    for (int r : rows) {
      if (r <= i) continue;
      for (int k : nb) {
        if (k <= i) continue;
        col_rows[static_cast<std::size_t>(std::min(r, k))].insert(std::max(r, k));
      }
    }
  }

  std::vector<TileCoord> closure_tiles;
  std::vector<ColumnWork> columns;
  for (int i = 0; i < N; ++i) {
    for (int r : col_rows[static_cast<std::size_t>(i)]) closure_tiles.push_back({r, i});
  }
  for (int i = N - 1; i >= 0; --i) {
    const std::set<int>& rows = col_rows[static_cast<std::size_t>(i)];
    if (rows.empty()) continue;
    ColumnWork work;
    work.col = i;
    work.diagonal = rows.count(i) != 0;
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
      if (*it > i) work.offdiag_rows.push_back(*it);
    }
    columns.push_back(std::move(work));
  }

  SelectedTileSet out;
  out.growth_warning = closure_tiles.size() > 4 * wanted.size();
  out.requested = std::move(wanted);
  out.closure = TilePattern(layout, std::move(closure_tiles));
  out.columns = std::move(columns);
  return out;
}

namespace {

std::uint64_t fnv1a_keys(const std::vector<TileCoord>& tiles) {
  std::uint64_t h = 1469598103934665603ull;
  for (const TileCoord& t : tiles) {
    std::uint64_t key = tile_key(t.i, t.j);
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (key >> (byte * 8)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

// Runs fn(tid) on `workers` threads, rethrowing the first captured exception.
// `abort` lets waiters bail out instead of spinning on flags that will never
// be published.
void run_workers(int workers, std::atomic<bool>& abort,
                 const std::function<void(int)>& fn) {
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&](int tid) {
    try {
      fn(tid);
    } catch (...) {
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
      abort.store(true, std::memory_order_release);
    }
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int tid = 0; tid < workers; ++tid) pool.emplace_back(body, tid);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

void run_phase1_in_place(TiledFactor& f, int workers) {
  if (f.phase != PhaseTag::kFactor) {
    throw InvalidArgumentError("phase 1 expects a Cholesky factor");
  }
  if (workers < 1) throw InvalidArgumentError("worker count must be at least 1");
  const int N = f.layout.N;
  const int b = f.layout.b;

  auto do_column = [&](int i) {
    Tile l(b, TileShape::kLowerTriangular);
    l.v = f.blocks.at(i, i);
    const Tile u = trtri_tile(transpose_tile(l));
    for (int k : f.pattern.neighbors(i)) {
      if (k <= i) continue;
      std::vector<double>& wv = f.blocks.at(k, i);
      Tile w(b, TileShape::kGeneral);
      w.v = std::move(wv);
      trmm_tile(w, u, Side::kRight, Trans::kTrans);
      wv = std::move(w.v);
    }
    f.blocks.at(i, i) = u.v;
  };

  std::atomic<bool> abort{false};
  run_workers(workers, abort, [&](int tid) {
    for (int i = N - 1 - tid; i >= 0; i -= workers) do_column(i);
  });
  f.phase = PhaseTag::kPhase1;
}

}  // namespace

TiledFactor phase1(const TiledFactor& factor, int workers) {
  TiledFactor copy = factor;
  run_phase1_in_place(copy, workers);
  return copy;
}

TiledFactor phase1(TiledFactor&& factor, int workers) {
  TiledFactor f = std::move(factor);
  run_phase1_in_place(f, workers);
  return f;
}

SelectedInverse phase2(const TiledFactor& p1, const SelectedTileSet& sel, int workers) {
  if (p1.phase != PhaseTag::kPhase1) {
    throw InvalidArgumentError("phase 2 expects phase-1 transformed tiles");
  }
  if (workers < 1) throw InvalidArgumentError("worker count must be at least 1");
  const TileLayout& layout = p1.layout;
  if (sel.closure.layout().n != layout.n || sel.closure.layout().b != layout.b) {
    throw ContractError("selection closure built for a different layout");
  }
  const int b = layout.b;
  const int N = layout.N;
  const TilePattern& fpat = p1.pattern;

  std::unordered_map<std::uint64_t, Tile> fac;
  fac.reserve(fpat.size() * 2);
  for (const TileCoord& t : fpat.tiles()) {
    Tile tile(b, t.i == t.j ? TileShape::kUpperTriangular : TileShape::kGeneral);
    tile.v = p1.blocks.at(t.i, t.j);
    fac.emplace(tile_key(t.i, t.j), std::move(tile));
  }

  const std::vector<TileCoord>& ctiles = sel.closure.tiles();
  std::vector<Tile> sigma;
  sigma.reserve(ctiles.size());
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(ctiles.size() * 2);
  for (std::size_t idx = 0; idx < ctiles.size(); ++idx) {
    sigma.emplace_back(b, TileShape::kGeneral);
    index.emplace(tile_key(ctiles[idx].i, ctiles[idx].j), static_cast<int>(idx));
  }
  std::vector<std::atomic<int>> ready(ctiles.size());

  std::atomic<bool> abort{false};
  auto wait_ready = [&](int idx) {
    int spins = 0;
    while (ready[static_cast<std::size_t>(idx)].load(std::memory_order_acquire) == 0) {
      if (abort.load(std::memory_order_acquire)) {
        throw ConsistencyError("phase 2 aborted while waiting on an operand tile");
      }
      if (++spins > 256) std::this_thread::yield();
    }
  };
  auto publish = [&](int idx) {
    ready[static_cast<std::size_t>(idx)].store(1, std::memory_order_release);
  };
  auto tile_index = [&](int i, int j) {
    auto it = index.find(tile_key(i, j));
    if (it == index.end()) {
      throw ConsistencyError("operand tile (" + std::to_string(i) + ", " + std::to_string(j) +
                             ") missing from the closure");
    }
    return it->second;
  };

  auto do_column = [&](const ColumnWork& col) {
    const int i = col.col;
    const std::vector<int>& nb = fpat.neighbors(i);
    for (int j : col.offdiag_rows) {
      Tile& target = sigma[static_cast<std::size_t>(tile_index(j, i))];
      for (int k : nb) {
        if (k <= i) continue;
        const int midx = tile_index(std::max(j, k), std::min(j, k));
        wait_ready(midx);
        const Tile& m = sigma[static_cast<std::size_t>(midx)];
        gemm_tile(target, m, fac.at(tile_key(k, i)), k > j ? Trans::kTrans : Trans::kNo,
                  Trans::kNo, -1.0);
      }
      publish(tile_index(j, i));
    }
    if (col.diagonal) {
      const int didx = tile_index(i, i);
      Tile& target = sigma[static_cast<std::size_t>(didx)];
      target = lauum_tile(fac.at(tile_key(i, i)));
      for (int k : nb) {
        if (k <= i) continue;
        const int oidx = tile_index(k, i);
        wait_ready(oidx);
        gemm_tile(target, fac.at(tile_key(k, i)), sigma[static_cast<std::size_t>(oidx)],
                  Trans::kTrans, Trans::kNo, -1.0);
      }
      for (int r = 0; r < b; ++r) {
        for (int c = r + 1; c < b; ++c) target.at(r, c) = target.at(c, r);
      }
      target.shape = TileShape::kSymmetricFull;
      publish(didx);
    }
  };

  run_workers(workers, abort, [&](int tid) {
    for (const ColumnWork& col : sel.columns) {
      if ((N - 1 - col.col) % workers == tid) do_column(col);
    }
  });

  TileBlocks out(b);
  for (std::size_t idx = 0; idx < ctiles.size(); ++idx) {
    out.ensure(ctiles[idx].i, ctiles[idx].j) = std::move(sigma[idx].v);
  }
  SelectedInverse result;
  result.layout = layout;
  result.closure = sel.closure;
  result.blocks = std::move(out);
  result.requested = sel.requested;
  result.factor_checksum = payload_checksum(p1.blocks);
  result.request_digest = fnv1a_keys(sel.requested);
  return result;
}

SelectedInverse selected_inverse(const TiledFactor& factor, const SelectionRequest& request,
                                 int workers) {
  const std::vector<TileCoord> tiles = select_tiles(factor.layout, factor.pattern, request);
  const SelectedTileSet sel = symbolic_inversion(tiles, factor.pattern);
  if (factor.phase == PhaseTag::kFactor) {
    const TiledFactor p1t = phase1(factor, workers);
    return phase2(p1t, sel, workers);
  }
  if (factor.phase == PhaseTag::kPhase1) return phase2(factor, sel, workers);
  throw InvalidArgumentError("selected inversion needs factor or phase-1 input tiles");
}

SelectedInverse selected_inverse(const TiledSymmetricMatrix& matrix,
                                 const SelectionRequest& request, int workers) {
  const FactorPlan plan = symbolic_cholesky(matrix.pattern);
  TiledFactor factor = factorize(matrix, plan, workers);
  const std::vector<TileCoord> tiles = select_tiles(factor.layout, factor.pattern, request);
  const SelectedTileSet sel = symbolic_inversion(tiles, factor.pattern);
  factor = phase1(std::move(factor), workers);
  return phase2(factor, sel, workers);
}

SelectedInverse full_inverse(const TiledFactor& factor, int workers) {
  return selected_inverse(factor, SelectionRequest::all(), workers);
}

namespace {

double entry_from_closure(const SelectedInverse& sigma, long r, long c) {
  const TileAddress addr = map_entry_to_tile(sigma.layout, r, c);
  if (!sigma.blocks.has(addr.tile.i, addr.tile.j)) {
    throw ContractError("entry (" + std::to_string(r) + ", " + std::to_string(c) +
                        ") lies outside the computed closure");
  }
  return sigma.blocks.at(addr.tile.i, addr.tile.j)
      [static_cast<std::size_t>(addr.row_off) * sigma.layout.b + addr.col_off];
}

}  // namespace

std::vector<Entry> extract_entries(const SelectedInverse& sigma,
                                   const SelectionRequest& request) {
  const long n = sigma.layout.n;
  const int b = sigma.layout.b;
  std::vector<Entry> out;
  switch (request.preset) {
    case SelectionPreset::kDiagonal:
      out.reserve(static_cast<std::size_t>(n));
      for (long r = 0; r < n; ++r) out.push_back({r, r, entry_from_closure(sigma, r, r)});
      break;
    case SelectionPreset::kAll:
      for (long c = 0; c < n; ++c) {
        for (long r = c; r < n; ++r) out.push_back({r, c, entry_from_closure(sigma, r, c)});
      }
      break;
    case SelectionPreset::kFactorPattern: {
      // sigma.requested is the canonical tile expansion of the request that
      // produced this result; entries run column-major across it.
      const TilePattern req(sigma.layout, sigma.requested);
      for (int j = 0; j < sigma.layout.N; ++j) {
        for (int oc = 0; oc < b; ++oc) {
          const long c = static_cast<long>(j) * b + oc;
          if (c >= n) break;
          for (int i : req.neighbors(j)) {
            for (int or_ = 0; or_ < b; ++or_) {
              const long r = static_cast<long>(i) * b + or_;
              if (r >= n) break;
              if (r < c) continue;
              out.push_back({r, c, entry_from_closure(sigma, r, c)});
            }
          }
        }
      }
      break;
    }
    case SelectionPreset::kNone: {
      std::unordered_set<std::uint64_t> seen;
      seen.reserve(request.entries.size() * 2);
      for (const auto& [r, c] : request.entries) {
        if (r < 0 || c < 0 || r >= n || c >= n) {
          throw InvalidArgumentError("requested entry (" + std::to_string(r) + ", " +
                                     std::to_string(c) + ") outside the matrix");
        }
        const std::uint64_t key = static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(n) +
                                  static_cast<std::uint64_t>(c);
        if (!seen.insert(key).second) continue;
        out.push_back({r, c, entry_from_closure(sigma, r, c)});
      }
      break;
    }
  }
  return out;
}

void write_selected_inverse(const std::string& path, const SelectedInverse& sigma) {
  write_tile_file(path, sigma.layout, PhaseTag::kSelectedInverse, sigma.blocks);
}

}  // namespace tileinv
