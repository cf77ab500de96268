#include "tileinv/cholesky.hpp"

#include <atomic>
#include <barrier>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "tileinv/errors.hpp"
#include "tileinv/kernels.hpp"

namespace tileinv {

FactorPlan symbolic_cholesky(const TilePattern& pattern) {
  TilePattern filled = symbolic_fill(pattern);
  if (!filled.has_all_diagonals()) {
    throw StructureError("factorization needs every diagonal tile present");
  }
  const int N = filled.layout().N;

  FactorPlan plan;
  plan.tasks.reserve(filled.size() * 2);
  plan.column_begin.assign(static_cast<std::size_t>(N) + 1, 0);
  for (int j = 0; j < N; ++j) {
    plan.column_begin[static_cast<std::size_t>(j)] = plan.tasks.size();
    plan.tasks.push_back({FactorKernel::kPotrf, {j, j}, {j, j}, {j, j}});
    const std::vector<int>& nb = filled.neighbors(j);
    for (int i : nb) {
      if (i > j) plan.tasks.push_back({FactorKernel::kTrsm, {i, j}, {j, j}, {i, j}});
    }
    for (int b : nb) {
      if (b <= j) continue;
      for (int a : nb) {
        if (a < b) continue;
        if (a == b) {
          plan.tasks.push_back({FactorKernel::kSyrk, {a, a}, {a, j}, {a, j}});
        } else {
          plan.tasks.push_back({FactorKernel::kGemm, {a, b}, {a, j}, {b, j}});
        }
      }
    }
  }
  plan.column_begin[static_cast<std::size_t>(N)] = plan.tasks.size();
  plan.filled = std::move(filled);
  return plan;
}

namespace {

struct ColumnSpan {
  std::size_t potrf;
  std::size_t trsm_begin;
  std::size_t update_begin;
  std::size_t end;
};

}  // namespace

TiledFactor factorize(const TiledSymmetricMatrix& matrix, const FactorPlan& plan,
                      int workers) {
  if (workers < 1) throw InvalidArgumentError("worker count must be at least 1");
  const TileLayout& layout = matrix.layout;
  if (plan.filled.layout().n != layout.n || plan.filled.layout().b != layout.b) {
    throw ContractError("factorization plan built for a different layout");
  }
  for (const TileCoord& t : matrix.pattern.tiles()) {
    if (!plan.filled.has(t.i, t.j)) {
      throw ContractError("matrix tile outside the plan's filled pattern");
    }
  }

  const int b = layout.b;
  const int N = layout.N;
  std::unordered_map<std::uint64_t, Tile> work;
  work.reserve(plan.filled.size() * 2);
  for (const TileCoord& t : plan.filled.tiles()) {
    Tile tile(b, TileShape::kGeneral);
    if (matrix.blocks.has(t.i, t.j)) tile.v = matrix.blocks.at(t.i, t.j);
    work.emplace(tile_key(t.i, t.j), std::move(tile));
  }

  std::vector<ColumnSpan> spans(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) {
    const std::size_t begin = plan.column_begin[static_cast<std::size_t>(j)];
    const std::size_t end = plan.column_begin[static_cast<std::size_t>(j) + 1];
    std::size_t upd = begin + 1;
    while (upd < end && plan.tasks[upd].kind == FactorKernel::kTrsm) ++upd;
    spans[static_cast<std::size_t>(j)] = {begin, begin + 1, upd, end};
  }

  auto run_task = [&](const FactorTask& task) {
    switch (task.kind) {
      case FactorKernel::kPotrf: {
        Tile& d = work.at(tile_key(task.target.i, task.target.j));
        try {
          d = potrf_tile(d);
        } catch (const NotSpdError& e) {
          throw NotSpdError("matrix is not positive definite",
                            static_cast<long>(task.target.j) * b + e.pivot, task.target.i,
                            task.target.j);
        }
        break;
      }
      case FactorKernel::kTrsm: {
        const Tile& d = work.at(tile_key(task.op_a.i, task.op_a.j));
        Tile& t = work.at(tile_key(task.target.i, task.target.j));
        t = trsm_tile(d, t, Side::kRight, Trans::kTrans);
        break;
      }
      case FactorKernel::kSyrk: {
        Tile& c = work.at(tile_key(task.target.i, task.target.j));
        syrk_tile(c, work.at(tile_key(task.op_a.i, task.op_a.j)));
        break;
      }
      case FactorKernel::kGemm: {
        Tile& c = work.at(tile_key(task.target.i, task.target.j));
        gemm_tile(c, work.at(tile_key(task.op_a.i, task.op_a.j)),
                  work.at(tile_key(task.op_b.i, task.op_b.j)), Trans::kNo, Trans::kTrans,
                  -1.0);
        break;
      }
    }
  };

  if (workers == 1) {
    for (const FactorTask& task : plan.tasks) run_task(task);
  } else {
    std::atomic<bool> abort{false};
    bool stop = false;
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto capture = [&](auto&& fn) {
      try {
        fn();
      } catch (...) {
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
        abort.store(true, std::memory_order_release);
      }
    };

    // The stop decision must be made while every worker is parked, otherwise a
    // worker that already entered the next phase can set `abort` and strand a
    // peer that reads the flag and leaves. The barrier's completion step is
    // the only place with that guarantee.
    auto latch_abort = [&]() noexcept { stop = abort.load(std::memory_order_acquire); };
    std::barrier<decltype(latch_abort)> sync(workers, latch_abort);

    auto worker = [&](int tid) {
      for (int j = 0; j < N; ++j) {
        const ColumnSpan& span = spans[static_cast<std::size_t>(j)];
        if (tid == 0) capture([&] { run_task(plan.tasks[span.potrf]); });
        sync.arrive_and_wait();
        if (stop) return;
        capture([&] {
          for (std::size_t idx = span.trsm_begin + static_cast<std::size_t>(tid);
               idx < span.update_begin; idx += static_cast<std::size_t>(workers)) {
            run_task(plan.tasks[idx]);
          }
        });
        sync.arrive_and_wait();
        if (stop) return;
        capture([&] {
          for (std::size_t idx = span.update_begin + static_cast<std::size_t>(tid);
               idx < span.end; idx += static_cast<std::size_t>(workers)) {
            run_task(plan.tasks[idx]);
          }
        });
        sync.arrive_and_wait();
        if (stop) return;
      }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int tid = 0; tid < workers; ++tid) pool.emplace_back(worker, tid);
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  TileBlocks out(b);
  for (const TileCoord& t : plan.filled.tiles()) {
    out.ensure(t.i, t.j) = std::move(work.at(tile_key(t.i, t.j)).v);
  }
  return {layout, plan.filled, std::move(out), PhaseTag::kFactor};
}

}  // namespace tileinv
