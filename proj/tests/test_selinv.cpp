#include <array>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "doctest.h"
#include "tileinv/cholesky.hpp"
#include "tileinv/errors.hpp"
#include "tileinv/matgen.hpp"
#include "tileinv/oracle.hpp"
#include "tileinv/selinv.hpp"

using namespace tileinv;

namespace {

TiledSymmetricMatrix identity_matrix(long n, int b) {
  TileLayout layout = build_layout(n, b);
  TileBlocks blocks(b);
  std::vector<TileCoord> tiles;
  for (int i = 0; i < layout.N; ++i) {
    std::vector<double>& d = blocks.ensure(i, i);
    for (int k = 0; k < b; ++k) d[static_cast<std::size_t>(k) * b + k] = 1.0;
    tiles.push_back({i, i});
  }
  return {layout, TilePattern(layout, tiles), std::move(blocks)};
}

TiledFactor factor_of(const TiledSymmetricMatrix& m, int workers = 1) {
  return factorize(m, symbolic_cholesky(m.pattern), workers);
}

// Dependency rule iterated to convergence, the reference the single-sweep
// closure is checked against.
std::set<std::pair<int, int>> closure_fixpoint(const TilePattern& fpat,
                                               const std::vector<TileCoord>& requested) {
  std::set<std::pair<int, int>> s;
  for (const TileCoord& t : requested) s.insert({t.i, t.j});
  bool changed = true;
  while (changed) {
    changed = false;
    const auto snapshot = s;
    for (const auto& [row, col] : snapshot) {
      for (int k : fpat.neighbors(col)) {
        if (k <= col) continue;
        if (row == col) {
          changed |= s.insert({k, col}).second;
        } else {
          changed |= s.insert({std::max(row, k), std::min(row, k)}).second;
        }
      }
    }
  }
  return s;
}

std::set<std::pair<int, int>> as_set(const std::vector<TileCoord>& tiles) {
  std::set<std::pair<int, int>> s;
  for (const TileCoord& t : tiles) s.insert({t.i, t.j});
  return s;
}

// 2x2 block helpers for evaluating the recursion equations by hand.
using M2 = std::array<double, 4>;

M2 block_of(const DenseMatrix& a, int ti, int tj) {
  return {a.at(2 * ti, 2 * tj), a.at(2 * ti, 2 * tj + 1), a.at(2 * ti + 1, 2 * tj),
          a.at(2 * ti + 1, 2 * tj + 1)};
}

M2 tile_of(const TileBlocks& blocks, int ti, int tj) {
  const std::vector<double>& v = blocks.at(ti, tj);
  return {v[0], v[1], v[2], v[3]};
}

M2 mul(const M2& a, const M2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

M2 tr(const M2& a) { return {a[0], a[2], a[1], a[3]}; }

M2 sub(const M2& a, const M2& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]}; }

M2 neg(const M2& a) { return {-a[0], -a[1], -a[2], -a[3]}; }

M2 inv_lower(const M2& l) {
  return {1.0 / l[0], 0.0, -l[2] / (l[0] * l[3]), 1.0 / l[3]};
}

double diff(const M2& a, const M2& b) {
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

// Fully dense 6x6 SPD on a 3x3 tile grid of 2x2 tiles.
TiledSymmetricMatrix dense_three_tiles(std::uint64_t seed) {
  return generate_arrowhead({6, 5, 0, 1.0, seed}, 2).matrix;
}

}  // namespace

TEST_CASE("parse_request_text handles comments, blanks and errors") {
  SelectionRequest req = parse_request_text("# header\n3 1\n\n 0 0 # trailing comment\n");
  CHECK(req.preset == SelectionPreset::kNone);
  CHECK(req.entries == std::vector<std::pair<long, long>>{{3, 1}, {0, 0}});

  CHECK_THROWS_AS(parse_request_text("5\n"), ParseError);
  CHECK_THROWS_AS(parse_request_text("1 2 3\n"), ParseError);
}

TEST_CASE("select_tiles maps scalar requests and expands presets") {
  TileLayout layout = build_layout(6, 2);
  TilePattern fpat = band_arrow_pattern(layout, 1);

  CHECK(select_tiles(layout, fpat, SelectionRequest::of({{0, 0}})) ==
        std::vector<TileCoord>{{0, 0}});
  CHECK(select_tiles(layout, fpat, SelectionRequest::of({{5, 1}})) ==
        std::vector<TileCoord>{{2, 0}});
  // the reflected pair lands on the same tile, duplicates collapse
  CHECK(select_tiles(layout, fpat, SelectionRequest::of({{5, 1}, {1, 5}})) ==
        std::vector<TileCoord>{{2, 0}});

  CHECK(select_tiles(layout, fpat, SelectionRequest::all()) ==
        std::vector<TileCoord>{{0, 0}, {1, 0}, {2, 0}, {1, 1}, {2, 1}, {2, 2}});
  CHECK(select_tiles(layout, fpat, SelectionRequest::diagonal()) ==
        std::vector<TileCoord>{{0, 0}, {1, 1}, {2, 2}});
  CHECK(select_tiles(layout, fpat, SelectionRequest::factor_pattern()) == fpat.tiles());

  CHECK_THROWS_AS(select_tiles(layout, fpat, SelectionRequest::of({{6, 0}})),
                  InvalidArgumentError);
}

TEST_CASE("closure of a single far tile on the dense 3-grid") {
  TileLayout layout = build_layout(6, 2);
  TilePattern dense = band_arrow_pattern(layout, 3);
  SelectedTileSet sel = symbolic_inversion({{2, 0}}, dense);
  CHECK(as_set(sel.closure.tiles()) ==
        std::set<std::pair<int, int>>{{2, 0}, {2, 1}, {2, 2}});
  CHECK(as_set(sel.closure.tiles()) == closure_fixpoint(dense, {{2, 0}}));
}

TEST_CASE("single-sweep closure matches the iterated fixpoint") {
  TileLayout layout = build_layout(16, 2);  // N = 8
  for (int band : {1, 2, 3, 8}) {
    TilePattern fpat = band_arrow_pattern(layout, band);
    const std::vector<std::vector<TileCoord>> requests = {
        {{0, 0}},  {{4, 1}},  {{7, 0}, {3, 3}}, {{5, 2}, {6, 4}, {2, 0}},
        fpat.tiles(),
    };
    for (const auto& req : requests) {
      // skip requests outside this band's factor? none of these exceed N
      SelectedTileSet sel = symbolic_inversion(req, fpat);
      CHECK(as_set(sel.closure.tiles()) == closure_fixpoint(fpat, req));
    }
  }
}

TEST_CASE("band+arrow factor pattern is its own closure") {
  for (int N : {2, 4, 6}) {
    TileLayout layout = build_layout(static_cast<long>(N) * 4, 4);
    for (int band = 1; band <= N; ++band) {
      TilePattern fpat = band_arrow_pattern(layout, band);
      SelectedTileSet sel = symbolic_inversion(fpat.tiles(), fpat);
      CHECK(sel.closure == fpat);
      CHECK_FALSE(sel.growth_warning);
    }
  }
}

TEST_CASE("closure is monotone and idempotent") {
  TileLayout layout = build_layout(12, 2);
  TilePattern fpat = band_arrow_pattern(layout, 2);

  SelectedTileSet small = symbolic_inversion({{3, 1}}, fpat);
  SelectedTileSet large = symbolic_inversion({{3, 1}, {5, 0}, {2, 2}}, fpat);
  for (const TileCoord& t : small.closure.tiles()) CHECK(large.closure.has(t.i, t.j));

  SelectedTileSet again = symbolic_inversion(small.closure.tiles(), fpat);
  CHECK(again.closure == small.closure);
}

TEST_CASE("column work lists run descending with the diagonal last") {
  TileLayout layout = build_layout(12, 2);
  TilePattern fpat = band_arrow_pattern(layout, 6);
  SelectedTileSet sel = symbolic_inversion(fpat.tiles(), fpat);
  REQUIRE(sel.columns.size() == 6);
  for (std::size_t idx = 0; idx < sel.columns.size(); ++idx) {
    const ColumnWork& work = sel.columns[idx];
    CHECK(work.col == 5 - static_cast<int>(idx));
    CHECK(work.diagonal);
    for (std::size_t q = 1; q < work.offdiag_rows.size(); ++q) {
      CHECK(work.offdiag_rows[q - 1] > work.offdiag_rows[q]);
    }
  }
}

TEST_CASE("an off-pattern request warns once the closure balloons") {
  TileLayout layout = build_layout(40, 2);  // N = 20
  TilePattern fpat = band_arrow_pattern(layout, 2);
  SelectedTileSet sel = symbolic_inversion({{12, 0}}, fpat);
  CHECK(sel.growth_warning);
  CHECK(sel.closure.size() > 4);
}

TEST_CASE("symbolic_inversion rejects bad input") {
  TileLayout layout = build_layout(8, 2);
  TilePattern no_diag(layout, {{0, 0}, {1, 0}});
  CHECK_THROWS_AS(symbolic_inversion({{0, 0}}, no_diag), StructureError);

  TilePattern fpat = band_arrow_pattern(layout, 2);
  CHECK_THROWS_AS(symbolic_inversion({{4, 0}}, fpat), InvalidArgumentError);
}

TEST_CASE("phase1 on the identity and a scalar tile") {
  TiledFactor f = factor_of(identity_matrix(4, 2));
  TiledFactor p1 = phase1(f, 2);
  CHECK(p1.phase == PhaseTag::kPhase1);
  CHECK(p1.blocks.at(0, 0) == std::vector<double>{1.0, 0.0, 0.0, 1.0});
  CHECK(p1.blocks.at(1, 1) == std::vector<double>{1.0, 0.0, 0.0, 1.0});
  // the input factor is untouched
  CHECK(f.phase == PhaseTag::kFactor);

  TileLayout layout = build_layout(1, 1);
  TileBlocks blocks(1);
  blocks.ensure(0, 0) = {2.0};
  TiledFactor scalar{layout, TilePattern(layout, {{0, 0}}), std::move(blocks),
                     PhaseTag::kFactor};
  CHECK(phase1(scalar, 1).blocks.at(0, 0) == std::vector<double>{0.5});
}

TEST_CASE("phase1 produces W = L_lower * inv(L_diag) and U = inv(L_diag)^T") {
  TiledSymmetricMatrix m = dense_three_tiles(5);
  TiledFactor f = factor_of(m);
  TiledFactor p1 = phase1(f, 1);
  DenseMatrix l = dense_cholesky_ref(dense_from_tiled(m));

  for (int i = 0; i < 3; ++i) {
    const M2 linv = inv_lower(block_of(l, i, i));
    CHECK(diff(tile_of(p1.blocks, i, i), tr(linv)) <= 1e-13);
    for (int j = i + 1; j < 3; ++j) {
      CHECK(diff(tile_of(p1.blocks, j, i), mul(block_of(l, j, i), linv)) <= 1e-13);
    }
  }
}

TEST_CASE("phase1 move overload transforms in place and matches the copy") {
  TiledSymmetricMatrix m = dense_three_tiles(6);
  TiledFactor f = factor_of(m);
  TiledFactor copy = phase1(f, 1);
  TiledFactor moved = phase1(std::move(f), 1);
  CHECK(payload_checksum(copy.blocks) == payload_checksum(moved.blocks));
}

TEST_CASE("phase1 input guards") {
  TiledFactor f = factor_of(identity_matrix(4, 2));
  CHECK_THROWS_AS(phase1(f, 0), InvalidArgumentError);
  TiledFactor p1 = phase1(f, 1);
  CHECK_THROWS_AS(phase1(p1, 1), InvalidArgumentError);

  // corrupted factor: zero on a diagonal
  TiledFactor bad = f;
  bad.blocks.at(1, 1)[0] = 0.0;
  CHECK_THROWS_AS(phase1(bad, 1), SingularTileError);
}

TEST_CASE("phase2 inverts the identity and pure diagonals") {
  TiledFactor p1 = phase1(factor_of(identity_matrix(6, 2)), 1);
  SelectedTileSet sel = symbolic_inversion(select_tiles(p1.layout, p1.pattern,
                                                        SelectionRequest::all()),
                                           p1.pattern);
  SelectedInverse sigma = phase2(p1, sel, 2);
  CHECK(sigma.blocks.at(0, 0) == std::vector<double>{1.0, 0.0, 0.0, 1.0});
  CHECK(sigma.blocks.at(1, 1) == std::vector<double>{1.0, 0.0, 0.0, 1.0});
  CHECK(sigma.blocks.at(2, 2) == std::vector<double>{1.0, 0.0, 0.0, 1.0});

  TileLayout layout = build_layout(4, 2);
  TileBlocks blocks(2);
  std::vector<double>& d0 = blocks.ensure(0, 0);
  d0[0] = 4.0;
  d0[3] = 2.0;
  std::vector<double>& d1 = blocks.ensure(1, 1);
  d1[0] = 10.0;
  d1[3] = 0.5;
  TiledSymmetricMatrix diag{layout, TilePattern(layout, {{0, 0}, {1, 1}}),
                            std::move(blocks)};
  SelectedInverse inv = selected_inverse(diag, SelectionRequest::diagonal(), 1);
  std::vector<Entry> entries = extract_entries(inv, SelectionRequest::diagonal());
  REQUIRE(entries.size() == 4);
  CHECK(entries[0].value == doctest::Approx(0.25));
  CHECK(entries[1].value == doctest::Approx(0.5));
  CHECK(entries[2].value == doctest::Approx(0.1));
  CHECK(entries[3].value == doctest::Approx(2.0));
}

TEST_CASE("phase2 reproduces the recursion equations on a dense 3-grid") {
  TiledSymmetricMatrix m = dense_three_tiles(7);
  TiledFactor p1 = phase1(factor_of(m), 1);
  SelectedTileSet sel = symbolic_inversion(select_tiles(p1.layout, p1.pattern,
                                                        SelectionRequest::all()),
                                           p1.pattern);
  SelectedInverse sigma = phase2(p1, sel, 1);

  DenseMatrix l = dense_cholesky_ref(dense_from_tiled(m));
  const M2 u0 = tr(inv_lower(block_of(l, 0, 0)));
  const M2 u1 = tr(inv_lower(block_of(l, 1, 1)));
  const M2 u2 = tr(inv_lower(block_of(l, 2, 2)));
  const M2 w10 = mul(block_of(l, 1, 0), inv_lower(block_of(l, 0, 0)));
  const M2 w20 = mul(block_of(l, 2, 0), inv_lower(block_of(l, 0, 0)));
  const M2 w21 = mul(block_of(l, 2, 1), inv_lower(block_of(l, 1, 1)));

  const M2 s22 = mul(u2, tr(u2));
  const M2 s21 = neg(mul(s22, w21));
  const M2 s20 = sub(neg(mul(s21, w10)), mul(s22, w20));
  const M2 s11 = sub(mul(u1, tr(u1)), mul(tr(w21), s21));
  const M2 s10 = sub(neg(mul(s11, w10)), mul(tr(s21), w20));
  const M2 s00 = sub(sub(mul(u0, tr(u0)), mul(tr(w10), s10)), mul(tr(w20), s20));

  CHECK(diff(tile_of(sigma.blocks, 2, 2), s22) <= 1e-12);
  CHECK(diff(tile_of(sigma.blocks, 2, 1), s21) <= 1e-12);
  CHECK(diff(tile_of(sigma.blocks, 2, 0), s20) <= 1e-12);
  CHECK(diff(tile_of(sigma.blocks, 1, 1), s11) <= 1e-12);
  CHECK(diff(tile_of(sigma.blocks, 1, 0), s10) <= 1e-12);
  CHECK(diff(tile_of(sigma.blocks, 0, 0), s00) <= 1e-12);

  // and the whole thing agrees with the dense inverse
  DenseMatrix ref = dense_inverse_ref(dense_from_tiled(m));
  for (int ti = 0; ti < 3; ++ti) {
    for (int tj = 0; tj <= ti; ++tj) {
      CHECK(diff(tile_of(sigma.blocks, ti, tj), block_of(ref, ti, tj)) <= 1e-12);
    }
  }
}

TEST_CASE("phase2 diagonal tiles come out exactly symmetric") {
  TiledSymmetricMatrix m = generate_arrowhead({20, 4, 2, 0.8, 17}, 4).matrix;
  SelectedInverse sigma = selected_inverse(m, SelectionRequest::factor_pattern(), 2);
  const int b = 4;
  for (int i = 0; i < sigma.layout.N; ++i) {
    const std::vector<double>& d = sigma.blocks.at(i, i);
    for (int r = 0; r < b; ++r) {
      for (int c = 0; c < r; ++c) {
        CHECK(d[static_cast<std::size_t>(r) * b + c] == d[static_cast<std::size_t>(c) * b + r]);
      }
    }
  }
}

TEST_CASE("phase2 input guards") {
  TiledFactor f = factor_of(identity_matrix(4, 2));
  SelectedTileSet sel = symbolic_inversion(f.pattern.tiles(), f.pattern);
  CHECK_THROWS_AS(phase2(f, sel, 1), InvalidArgumentError);  // not phase-1 input

  TiledFactor p1 = phase1(f, 1);
  CHECK_THROWS_AS(phase2(p1, sel, 0), InvalidArgumentError);

  TiledFactor other = phase1(factor_of(identity_matrix(6, 3)), 1);
  CHECK_THROWS_AS(phase2(other, sel, 1), ContractError);

  // a hand-built closure that lacks an operand tile trips the internal check:
  // against a dense factor, the (1,0) target consumes sigma(1,1)
  TileLayout dense_layout = build_layout(2, 1);
  TileBlocks dense_blocks(1);
  dense_blocks.ensure(0, 0) = {4.0};
  dense_blocks.ensure(1, 0) = {2.0};
  dense_blocks.ensure(1, 1) = {5.0};
  TilePattern dense_pattern(dense_layout, {{0, 0}, {1, 0}, {1, 1}});
  TiledSymmetricMatrix dense{dense_layout, dense_pattern, std::move(dense_blocks)};
  TiledFactor dense_p1 = phase1(factor_of(dense), 1);
  SelectedTileSet broken;
  broken.closure = TilePattern(dense_layout, {{1, 0}});
  ColumnWork work;
  work.col = 0;
  work.offdiag_rows = {1};
  broken.columns = {work};
  CHECK_THROWS_AS(phase2(dense_p1, broken, 1), ConsistencyError);
}

TEST_CASE("selected_inverse of the hand 2x2") {
  TileLayout layout = build_layout(2, 2);
  TileBlocks blocks(2);
  blocks.ensure(0, 0) = {4.0, 0.0, 2.0, 5.0};
  TiledSymmetricMatrix m{layout, TilePattern(layout, {{0, 0}}), std::move(blocks)};
  SelectedInverse sigma = selected_inverse(m, SelectionRequest::all(), 1);
  std::vector<Entry> entries = extract_entries(sigma, SelectionRequest::all());
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].value == doctest::Approx(5.0 / 16.0).epsilon(1e-14));
  CHECK(entries[1].value == doctest::Approx(-1.0 / 8.0).epsilon(1e-14));
  CHECK(entries[2].value == doctest::Approx(1.0 / 4.0).epsilon(1e-14));
}

TEST_CASE("selected_inverse matches the dense oracle on a band+arrow case") {
  ArrowheadSpec spec{48, 8, 3, 0.5, 23};
  TiledSymmetricMatrix m = generate_arrowhead(spec, 8).matrix;
  DenseMatrix ref = dense_inverse_ref(dense_from_tiled(m));
  for (SelectionRequest req :
       {SelectionRequest::diagonal(), SelectionRequest::factor_pattern(),
        SelectionRequest::all(), SelectionRequest::of({{40, 2}, {11, 3}})}) {
    SelectedInverse sigma = selected_inverse(m, req, 2);
    std::vector<Entry> entries = extract_entries(sigma, req);
    REQUIRE(!entries.empty());
    std::vector<double> want, got;
    for (const Entry& e : entries) {
      want.push_back(ref.at(e.r, e.c));
      got.push_back(e.value);
    }
    CHECK(max_rel_error(want, got) <= 1e-9);
  }
}

TEST_CASE("selected_inverse is bitwise identical across worker counts") {
  ArrowheadSpec spec{40, 6, 3, 0.6, 29};
  TiledSymmetricMatrix m = generate_arrowhead(spec, 4).matrix;  // N = 10
  SelectedInverse base = selected_inverse(m, SelectionRequest::factor_pattern(), 1);
  for (int workers : {2, 4, 8}) {
    SelectedInverse other = selected_inverse(m, SelectionRequest::factor_pattern(), workers);
    CHECK(payload_checksum(other.blocks) == payload_checksum(base.blocks));
    CHECK(other.request_digest == base.request_digest);
    CHECK(other.factor_checksum == base.factor_checksum);
  }
}

TEST_CASE("full_inverse is the all-selection path") {
  TileLayout layout = build_layout(1, 1);
  TileBlocks blocks(1);
  blocks.ensure(0, 0) = {4.0};
  TiledFactor f = factor_of({layout, TilePattern(layout, {{0, 0}}), std::move(blocks)});
  SelectedInverse sigma = full_inverse(f, 1);
  CHECK(sigma.blocks.at(0, 0) == std::vector<double>{0.25});

  TiledSymmetricMatrix m = generate_arrowhead({64, 63, 0, 1.0, 3}, 8).matrix;
  TiledFactor fd = factor_of(m);
  SelectedInverse full = full_inverse(fd, 2);
  SelectedInverse all = selected_inverse(fd, SelectionRequest::all(), 2);
  CHECK(payload_checksum(full.blocks) == payload_checksum(all.blocks));
  CHECK(full.request_digest == all.request_digest);

  DenseMatrix ref = dense_inverse_ref(dense_from_tiled(m));
  std::vector<Entry> entries = extract_entries(full, SelectionRequest::all());
  std::vector<double> want, got;
  for (const Entry& e : entries) {
    want.push_back(ref.at(e.r, e.c));
    got.push_back(e.value);
  }
  CHECK(max_rel_error(want, got) <= 1e-10);
}

TEST_CASE("extract_entries ordering, symmetry and deduplication") {
  TiledSymmetricMatrix m = identity_matrix(6, 2);
  SelectedInverse sigma = selected_inverse(m, SelectionRequest::all(), 1);

  std::vector<Entry> one = extract_entries(sigma, SelectionRequest::of({{0, 0}}));
  REQUIRE(one.size() == 1);
  CHECK(one[0].value == 1.0);

  // symmetric pair reads the same stored value, request order is kept
  std::vector<Entry> pair =
      extract_entries(sigma, SelectionRequest::of({{1, 4}, {4, 1}, {1, 4}}));
  REQUIRE(pair.size() == 2);
  CHECK(pair[0].r == 1);
  CHECK(pair[0].c == 4);
  CHECK(pair[1].r == 4);
  CHECK(pair[1].c == 1);
  CHECK(pair[0].value == pair[1].value);

  std::vector<Entry> diag = extract_entries(sigma, SelectionRequest::diagonal());
  REQUIRE(diag.size() == 6);
  for (long r = 0; r < 6; ++r) {
    CHECK(diag[static_cast<std::size_t>(r)].r == r);
    CHECK(diag[static_cast<std::size_t>(r)].value == 1.0);
  }

  std::vector<Entry> all = extract_entries(sigma, SelectionRequest::all());
  CHECK(all.size() == 21);  // 6 * 7 / 2

  CHECK_THROWS_AS(extract_entries(sigma, SelectionRequest::of({{7, 0}})),
                  InvalidArgumentError);
}

TEST_CASE("extract_entries refuses entries outside the closure") {
  TiledSymmetricMatrix m = generate_arrowhead({12, 2, 1, 1.0, 4}, 2).matrix;
  SelectedInverse sigma = selected_inverse(m, SelectionRequest::of({{0, 0}}), 1);
  CHECK_NOTHROW(extract_entries(sigma, SelectionRequest::of({{0, 0}})));
  CHECK_THROWS_AS(extract_entries(sigma, SelectionRequest::of({{7, 0}})), ContractError);
}

TEST_CASE("request digests separate different requests") {
  TiledSymmetricMatrix m = identity_matrix(8, 2);
  SelectedInverse a = selected_inverse(m, SelectionRequest::diagonal(), 1);
  SelectedInverse b = selected_inverse(m, SelectionRequest::all(), 1);
  SelectedInverse c = selected_inverse(m, SelectionRequest::diagonal(), 2);
  CHECK(a.request_digest != b.request_digest);
  CHECK(a.request_digest == c.request_digest);
}
