#include "tileinv/matgen.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tileinv/errors.hpp"

namespace tileinv {

namespace {

struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  // uniform in [0, 1)
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

long long in_band_slot_count(long n, long w, long t) {
  const long rows = n - t;  // arrow rows excluded
  if (rows <= 0 || w <= 0) return 0;
  long long total = 0;
  if (rows - 1 <= w) {
    total = static_cast<long long>(rows - 1) * rows / 2;
  } else {
    total = static_cast<long long>(w) * (w + 1) / 2 +
            static_cast<long long>(rows - 1 - w) * w;
  }
  return total;
}

}  // namespace

void validate(const ArrowheadSpec& spec) {
  if (spec.n < 1) throw InvalidArgumentError("generator: n must be positive");
  if (spec.thickness < 0 || spec.thickness >= spec.n) {
    throw InvalidArgumentError("generator: thickness must satisfy 0 <= t < n");
  }
  if (spec.bandwidth < 0 || spec.bandwidth >= spec.n - spec.thickness) {
    throw InvalidArgumentError("generator: bandwidth must satisfy 0 <= w < n - t");
  }
  if (!(spec.density > 0.0) || spec.density > 1.0) {
    throw InvalidArgumentError("generator: density must lie in (0, 1]");
  }
}

GeneratedMatrix generate_arrowhead(const ArrowheadSpec& spec, int b) {
  validate(spec);
  const TileLayout layout = build_layout(spec.n, b);
  const long n = spec.n;
  const long w = spec.bandwidth;
  const long t = spec.thickness;

  TileBlocks blocks(b);
  std::vector<double> row_abs_sum(static_cast<std::size_t>(n), 0.0);
  GenStats stats;
  stats.in_band_slots = in_band_slot_count(n, w, t);

  SplitMix64 rng(spec.seed);
  auto place = [&](long r, long c, double v) {
    const int ti = static_cast<int>(r / b);
    const int tj = static_cast<int>(c / b);
    blocks.ensure(ti, tj)[static_cast<std::size_t>(r % b) * b + (c % b)] = v;
    row_abs_sum[static_cast<std::size_t>(r)] += std::abs(v);
    row_abs_sum[static_cast<std::size_t>(c)] += std::abs(v);
  };

  // Scalar draw order is fixed by (spec) alone, so the values are identical
  // for every tile size.
  for (long r = 0; r < n; ++r) {
    if (r < n - t) {
      const long c0 = std::max(0l, r - w);
      for (long c = c0; c < r; ++c) {
        if (rng.next_unit() < spec.density) {
          place(r, c, 2.0 * rng.next_unit() - 1.0);
          ++stats.in_band_nonzeros;
        }
      }
    } else {
      for (long c = 0; c < r; ++c) {
        place(r, c, 2.0 * rng.next_unit() - 1.0);
        ++stats.arrow_nonzeros;
      }
    }
  }
  for (long r = 0; r < n; ++r) {
    const int ti = static_cast<int>(r / b);
    blocks.ensure(ti, ti)[static_cast<std::size_t>(r % b) * b + (r % b)] =
        row_abs_sum[static_cast<std::size_t>(r)] + 1.0;
  }
  for (long r = n; r < layout.n_padded; ++r) {
    const int ti = static_cast<int>(r / b);
    blocks.ensure(ti, ti)[static_cast<std::size_t>(r % b) * b + (r % b)] = 1.0;
  }
  stats.measured_in_band_density =
      stats.in_band_slots > 0
          ? static_cast<double>(stats.in_band_nonzeros) / static_cast<double>(stats.in_band_slots)
          : 0.0;

  std::vector<TileCoord> tiles;
  tiles.reserve(blocks.size());
  for (const auto& [key, payload] : blocks.map()) {
    (void)payload;
    tiles.push_back({static_cast<int>(key & 0xffffffffu), static_cast<int>(key >> 32)});
  }
  TiledSymmetricMatrix matrix{layout, TilePattern(layout, std::move(tiles)), std::move(blocks)};
  return {std::move(matrix), stats};
}

double measured_density(const TiledSymmetricMatrix& matrix, const ArrowheadSpec& spec) {
  const long long slots = in_band_slot_count(spec.n, spec.bandwidth, spec.thickness);
  if (slots == 0) return 0.0;
  const int b = matrix.layout.b;
  long long nnz = 0;
  for (const auto& [key, payload] : matrix.blocks.map()) {
    const int ti = static_cast<int>(key & 0xffffffffu);
    const int tj = static_cast<int>(key >> 32);
    for (int or_ = 0; or_ < b; ++or_) {
      const long r = static_cast<long>(ti) * b + or_;
      if (r >= spec.n - spec.thickness) break;
      for (int oc = 0; oc < b; ++oc) {
        const long c = static_cast<long>(tj) * b + oc;
        if (c >= r) break;
        if (r - c > spec.bandwidth) continue;
        if (payload[static_cast<std::size_t>(or_) * b + oc] != 0.0) ++nnz;
      }
    }
  }
  return static_cast<double>(nnz) / static_cast<double>(slots);
}

namespace {

void append_entries(std::string& out, const TiledSymmetricMatrix& matrix,
                    long long* count) {
  const TileLayout& layout = matrix.layout;
  const int b = layout.b;
  char line[96];
  for (int j = 0; j < layout.N; ++j) {
    for (int oc = 0; oc < b; ++oc) {
      const long c = static_cast<long>(j) * b + oc;
      if (c >= layout.n) break;
      for (int i : matrix.pattern.neighbors(j)) {
        const std::vector<double>& payload = matrix.blocks.at(i, j);
        for (int or_ = 0; or_ < b; ++or_) {
          const long r = static_cast<long>(i) * b + or_;
          if (r >= layout.n) break;
          if (r < c) continue;
          const double v = payload[static_cast<std::size_t>(or_) * b + oc];
          if (v == 0.0) continue;
          ++*count;
          const int len = std::snprintf(line, sizeof(line), "%ld %ld %.17g\n", r + 1, c + 1, v);
          out.append(line, static_cast<std::size_t>(len));
        }
      }
    }
  }
}

}  // namespace

std::string write_matrix_market(const TiledSymmetricMatrix& matrix) {
  std::string body;
  body.reserve(matrix.blocks.size() * 16);
  long long count = 0;
  append_entries(body, matrix, &count);
  std::string out = "%%MatrixMarket matrix coordinate real symmetric\n";
  out += std::to_string(matrix.layout.n) + " " + std::to_string(matrix.layout.n) + " " +
         std::to_string(count) + "\n";
  out += body;
  return out;
}

void write_matrix_market_file(const std::string& path, const TiledSymmetricMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  const std::string text = write_matrix_market(matrix);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("short write to " + path);
}

namespace {

std::string lower_copy(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

const char* skip_ws(const char* p, const char* end) {
  while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
  return p;
}

}  // namespace

TiledSymmetricMatrix read_matrix_market(const std::string& text, int b) {
  long line_no = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();

  auto next_line = [&](const char** line_begin, const char** line_end) {
    if (p >= end) return false;
    *line_begin = p;
    const char* nl = static_cast<const char*>(std::memchr(p, '\n', static_cast<std::size_t>(end - p)));
    *line_end = nl ? nl : end;
    p = nl ? nl + 1 : end;
    ++line_no;
    return true;
  };

  const char* lb;
  const char* le;
  if (!next_line(&lb, &le)) throw ParseError("empty matrix market input", 1);
  {
    std::istringstream header(std::string(lb, le));
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw ParseError("unknown banner '" + banner + "'", line_no);
    if (lower_copy(object) != "matrix" || lower_copy(format) != "coordinate") {
      throw FormatError("unsupported matrix market layout: " + object + " " + format);
    }
    if (lower_copy(field) != "real") throw FormatError("unsupported field type: " + field);
    if (lower_copy(symmetry) != "symmetric") {
      throw FormatError("only symmetric matrices are supported, got: " + symmetry);
    }
  }

  long n = 0, m = 0;
  long long nnz = 0;
  for (;;) {
    if (!next_line(&lb, &le)) throw ParseError("missing size line", line_no);
    lb = skip_ws(lb, le);
    if (lb == le) continue;
    if (*lb == '%') continue;
    auto r1 = std::from_chars(lb, le, n);
    if (r1.ec != std::errc{}) throw ParseError("malformed size line", line_no);
    const char* q = skip_ws(r1.ptr, le);
    auto r2 = std::from_chars(q, le, m);
    if (r2.ec != std::errc{}) throw ParseError("malformed size line", line_no);
    q = skip_ws(r2.ptr, le);
    auto r3 = std::from_chars(q, le, nnz);
    if (r3.ec != std::errc{}) throw ParseError("malformed size line", line_no);
    break;
  }
  if (n != m) throw FormatError("matrix is not square: " + std::to_string(n) + " x " + std::to_string(m));
  if (n < 1) throw ParseError("non-positive dimension", line_no);

  const TileLayout layout = build_layout(n, b);
  TileBlocks blocks(b);
  std::vector<std::uint64_t> seen;
  seen.reserve(static_cast<std::size_t>(nnz));

  long long parsed = 0;
  while (parsed < nnz) {
    if (!next_line(&lb, &le)) {
      throw ParseError("expected " + std::to_string(nnz) + " entries, found " +
                           std::to_string(parsed),
                       line_no);
    }
    lb = skip_ws(lb, le);
    if (lb == le) continue;
    if (*lb == '%') continue;
    long r = 0, c = 0;
    double v = 0.0;
    auto r1 = std::from_chars(lb, le, r);
    if (r1.ec != std::errc{}) throw ParseError("malformed entry", line_no);
    const char* q = skip_ws(r1.ptr, le);
    auto r2 = std::from_chars(q, le, c);
    if (r2.ec != std::errc{}) throw ParseError("malformed entry", line_no);
    q = skip_ws(r2.ptr, le);
    auto r3 = std::from_chars(q, le, v);
    if (r3.ec != std::errc{}) throw ParseError("malformed entry value", line_no);
    if (r < 1 || c < 1 || r > n || c > n) throw ParseError("entry index out of range", line_no);
    if (c > r) {
      throw FormatError("upper-triangle entry (" + std::to_string(r) + ", " +
                        std::to_string(c) + ") in a symmetric lower-triangle file at line " +
                        std::to_string(line_no));
    }
    --r;
    --c;
    blocks.ensure(static_cast<int>(r / b), static_cast<int>(c / b))
        [static_cast<std::size_t>(r % b) * b + (c % b)] = v;
    seen.push_back(static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(n) +
                   static_cast<std::uint64_t>(c));
    ++parsed;
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw FormatError("duplicate entry in matrix market input");
  }

  // Diagonal tiles are always materialized so downstream symbolic passes
  // have them, and padding gets its identity block.
  for (int i = 0; i < layout.N; ++i) blocks.ensure(i, i);
  for (long r = n; r < layout.n_padded; ++r) {
    blocks.at(static_cast<int>(r / b), static_cast<int>(r / b))
        [static_cast<std::size_t>(r % b) * b + (r % b)] = 1.0;
  }

  std::vector<TileCoord> tiles;
  tiles.reserve(blocks.size());
  for (const auto& [key, payload] : blocks.map()) {
    (void)payload;
    tiles.push_back({static_cast<int>(key & 0xffffffffu), static_cast<int>(key >> 32)});
  }
  return {layout, TilePattern(layout, std::move(tiles)), std::move(blocks)};
}

TiledSymmetricMatrix read_matrix_market_file(const std::string& path, int b) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_matrix_market(buf.str(), b);
}

namespace {

constexpr char kIncl[] = "including arrowhead";
constexpr char kExcl[] = "excluding arrowhead";

const Preset kPresets[] = {
    {1, 10010, 100, 10, 0.408, kIncl},   {2, 10010, 200, 10, 0.605, kIncl},
    {3, 10010, 300, 10, 0.643, kIncl},   {4, 10200, 100, 200, 3.938, kIncl},
    {5, 10200, 200, 200, 4.032, kIncl},  {6, 10200, 300, 200, 4.066, kIncl},
    {7, 100010, 1000, 10, 0.121, kIncl}, {8, 100010, 2000, 10, 0.219, kIncl},
    {9, 100010, 3000, 10, 0.258, kIncl}, {10, 100200, 1000, 200, 0.498, kIncl},
    {11, 100200, 2000, 200, 0.597, kIncl}, {12, 100200, 3000, 200, 0.637, kIncl},
    {13, 500010, 1000, 10, 0.024, kIncl},  {14, 500010, 2000, 10, 0.044, kIncl},
    {15, 500010, 3000, 10, 0.052, kIncl},  {16, 500200, 1000, 200, 0.100, kIncl},
    {17, 500200, 2000, 200, 0.120, kIncl}, {18, 500200, 3000, 200, 0.128, kIncl},
    {19, 10004, 1500, 4, 0.010, kExcl},  {20, 10004, 1500, 4, 0.018, kExcl},
    {21, 10004, 1500, 4, 0.031, kExcl},  {22, 10004, 1500, 4, 0.054, kExcl},
    {23, 10004, 1500, 4, 0.095, kExcl},  {24, 10004, 1500, 4, 0.139, kExcl},
    {25, 10004, 1500, 4, 0.181, kExcl},  {26, 10004, 1500, 4, 0.227, kExcl},
    {27, 10004, 1500, 4, 0.266, kExcl},  {28, 10004, 1500, 4, 0.309, kExcl},
    {29, 10004, 1500, 4, 0.354, kExcl},  {30, 10004, 1500, 4, 0.398, kExcl},
    {31, 10004, 1500, 4, 0.437, kExcl},  {32, 10004, 1500, 4, 0.871, kExcl},
    {33, 10004, 1500, 4, 2.153, kExcl},  {34, 10004, 3000, 4, 0.010, kExcl},
    {35, 10004, 3000, 4, 0.026, kExcl},  {36, 10004, 3000, 4, 0.051, kExcl},
    {37, 10004, 3000, 4, 0.076, kExcl},  {38, 10004, 3000, 4, 0.092, kExcl},
    {39, 10004, 3000, 4, 0.255, kExcl},  {40, 10004, 3000, 4, 0.339, kExcl},
    {41, 10004, 3000, 4, 0.417, kExcl},  {42, 10004, 3000, 4, 0.501, kExcl},
    {43, 10004, 3000, 4, 0.584, kExcl},  {44, 10004, 3000, 4, 0.668, kExcl},
    {45, 10004, 3000, 4, 0.749, kExcl},  {46, 10004, 3000, 4, 0.828, kExcl},
    {47, 10004, 3000, 4, 1.651, kExcl},  {48, 10004, 3000, 4, 4.101, kExcl},
};

}  // namespace

const std::vector<Preset>& preset_table() {
  static const std::vector<Preset> table(std::begin(kPresets), std::end(kPresets));
  return table;
}

const Preset& find_preset(int id) {
  for (const Preset& p : preset_table()) {
    if (p.id == id) return p;
  }
  throw InvalidArgumentError("unknown preset id " + std::to_string(id) +
                             " (valid ids are 1..48)");
}

double preset_inclusion_probability(const Preset& p) {
  const double n = static_cast<double>(p.n);
  const double t = static_cast<double>(p.thickness);
  const long long slots = in_band_slot_count(p.n, p.bandwidth, p.thickness);
  const double target = p.density_percent / 100.0 * n * n;
  double fixed;  // entries the density convention counts besides the band
  if (std::strcmp(p.convention, kIncl) == 0) {
    fixed = n + 2.0 * t * (n - t) + t * (t - 1.0);
  } else {
    fixed = n - t;
  }
  const double prob = (target - fixed) / (2.0 * static_cast<double>(slots));
  return std::clamp(prob, 1e-9, 1.0);
}

ArrowheadSpec spec_from_preset(const Preset& p, std::uint64_t seed) {
  return {p.n, p.bandwidth, p.thickness, preset_inclusion_probability(p), seed};
}

}  // namespace tileinv
