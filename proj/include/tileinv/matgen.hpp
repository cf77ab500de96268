#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tileinv/storage.hpp"

namespace tileinv {

// Banded plus arrowhead SPD generator spec. bandwidth w: entries with
// 0 < r - c <= w may be nonzero; thickness t: the last t rows are dense in
// the lower triangle; density: Bernoulli inclusion probability per in-band
// slot (the arrowhead is always fully dense).
struct ArrowheadSpec {
  long n = 0;
  long bandwidth = 0;
  long thickness = 0;
  double density = 1.0;
  std::uint64_t seed = 0;
};

void validate(const ArrowheadSpec& spec);

struct GenStats {
  long long in_band_slots = 0;     // lower-triangle band slots, arrow rows excluded
  long long in_band_nonzeros = 0;
  long long arrow_nonzeros = 0;    // lower-triangle arrow-row entries, diagonal excluded
  double measured_in_band_density = 0.0;
};

struct GeneratedMatrix {
  TiledSymmetricMatrix matrix;
  GenStats stats;
};

// Deterministic in (spec, b); scalar values do not depend on the tile size.
// Diagonal entries are the full symmetric row's absolute off-diagonal sum
// plus one, which keeps every eigenvalue at or above 1.
GeneratedMatrix generate_arrowhead(const ArrowheadSpec& spec, int b);

// Fraction of in-band lower-triangle slots that hold a nonzero, arrow rows
// excluded from both sides of the ratio.
double measured_density(const TiledSymmetricMatrix& matrix, const ArrowheadSpec& spec);

// Matrix Market coordinate real symmetric, 1-based, lower triangle only,
// entries sorted by column then row, 17 significant digits.
std::string write_matrix_market(const TiledSymmetricMatrix& matrix);
TiledSymmetricMatrix read_matrix_market(const std::string& text, int b);
void write_matrix_market_file(const std::string& path, const TiledSymmetricMatrix& matrix);
TiledSymmetricMatrix read_matrix_market_file(const std::string& path, int b);

// Benchmark family presets. density_percent is recorded verbatim from the
// source table together with its convention ("including arrowhead" counts
// band + arrow + diagonal against n^2, "excluding arrowhead" counts band +
// band diagonal against n^2).
struct Preset {
  int id;
  long n;
  long bandwidth;
  long thickness;
  double density_percent;
  const char* convention;
};

inline constexpr char kPresetTableVersion[] = "1";
const std::vector<Preset>& preset_table();
const Preset& find_preset(int id);

// Bernoulli in-band probability reproducing the preset's recorded density in
// expectation, clamped to (0, 1].
double preset_inclusion_probability(const Preset& p);
ArrowheadSpec spec_from_preset(const Preset& p, std::uint64_t seed);

}  // namespace tileinv
