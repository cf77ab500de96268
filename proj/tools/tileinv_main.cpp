#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tileinv/cholesky.hpp"
#include "tileinv/dag.hpp"
#include "tileinv/errors.hpp"
#include "tileinv/matgen.hpp"
#include "tileinv/oracle.hpp"
#include "tileinv/selinv.hpp"
#include "tileinv/tileio.hpp"
#include "tileinv/version.hpp"

namespace {

using nlohmann::json;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

int default_threads() {
  const char* env = std::getenv("TILEINV_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long value = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || value < 1 || value > 4096) {
    throw tileinv::InvalidArgumentError("TILEINV_THREADS must be a positive integer");
  }
  return static_cast<int>(value);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tileinv::Error("cannot open " + path + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw tileinv::Error("short write to " + path);
}

void write_manifest(const std::string& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

tileinv::SelectionRequest parse_select(const std::string& spec) {
  if (spec == "diagonal") return tileinv::SelectionRequest::diagonal();
  if (spec == "pattern") return tileinv::SelectionRequest::factor_pattern();
  if (spec == "all") return tileinv::SelectionRequest::all();
  return tileinv::read_request_file(spec);
}

std::string entries_text(const std::vector<tileinv::Entry>& entries) {
  std::string out;
  out.reserve(entries.size() * 32);
  char line[96];
  for (const tileinv::Entry& e : entries) {
    const int len =
        std::snprintf(line, sizeof(line), "%ld %ld %.17g\n", e.r, e.c, e.value);
    out.append(line, static_cast<std::size_t>(len));
  }
  return out;
}

double median_of(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  return n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

struct GenArgs {
  int preset = 0;
  long n = 0;
  long bandwidth = -1;
  long thickness = -1;
  double density = 0.0;
  std::uint64_t seed = 0;
  int tile_size = 32;
  std::string out;
};

int run_gen(const GenArgs& a) {
  tileinv::ArrowheadSpec spec;
  json preset_info;
  if (a.preset > 0) {
    if (a.n > 0 || a.bandwidth >= 0 || a.thickness >= 0 || a.density > 0.0) {
      throw tileinv::InvalidArgumentError("--preset excludes the explicit spec flags");
    }
    const tileinv::Preset& p = tileinv::find_preset(a.preset);
    spec = tileinv::spec_from_preset(p, a.seed);
    preset_info = {{"id", p.id},
                   {"density_percent", p.density_percent},
                   {"convention", p.convention},
                   {"table_version", tileinv::kPresetTableVersion}};
  } else {
    if (a.n <= 0 || a.bandwidth < 0 || a.thickness < 0 || a.density <= 0.0) {
      throw tileinv::InvalidArgumentError(
          "gen needs --preset or all of --n --bandwidth --thickness --density");
    }
    spec = {a.n, a.bandwidth, a.thickness, a.density, a.seed};
  }

  Stopwatch sw;
  tileinv::GeneratedMatrix gen = tileinv::generate_arrowhead(spec, a.tile_size);
  const double t_generate = sw.lap();
  tileinv::write_matrix_market_file(a.out, gen.matrix);
  const double t_write = sw.lap();

  json manifest = {
      {"command", "gen"},
      {"version", tileinv::kVersion},
      {"workers", 1},
      {"parameters",
       {{"n", spec.n},
        {"bandwidth", spec.bandwidth},
        {"thickness", spec.thickness},
        {"density", spec.density},
        {"seed", spec.seed},
        {"tile_size", a.tile_size},
        {"preset", a.preset > 0 ? preset_info : json(nullptr)}}},
      {"outputs", {{"matrix", a.out}}},
      {"stats",
       {{"in_band_slots", gen.stats.in_band_slots},
        {"in_band_nonzeros", gen.stats.in_band_nonzeros},
        {"arrow_nonzeros", gen.stats.arrow_nonzeros},
        {"measured_in_band_density", gen.stats.measured_in_band_density}}},
      {"timings_seconds", {{"generate", t_generate}, {"write", t_write}}}};
  write_manifest(a.out + ".manifest.json", manifest);

  std::printf("wrote %s: n=%ld band_nnz=%lld arrow_nnz=%lld measured_density=%.6f\n",
              a.out.c_str(), spec.n, gen.stats.in_band_nonzeros, gen.stats.arrow_nonzeros,
              gen.stats.measured_in_band_density);
  return 0;
}

struct SelinvArgs {
  std::string matrix;
  std::string factor;
  std::string select;
  int threads = 0;
  int tile_size = 32;
  std::string out;
};

int run_selinv(const SelinvArgs& a) {
  const int threads = a.threads > 0 ? a.threads : default_threads();
  if (a.matrix.empty() == a.factor.empty()) {
    throw tileinv::InvalidArgumentError("selinv needs exactly one of --matrix or --factor");
  }
  const tileinv::SelectionRequest request = parse_select(a.select);

  Stopwatch sw;
  tileinv::TiledFactor factor;
  double t_factorize = 0.0;
  if (!a.matrix.empty()) {
    const tileinv::TiledSymmetricMatrix m =
        tileinv::read_matrix_market_file(a.matrix, a.tile_size);
    sw.lap();
    const tileinv::FactorPlan plan = tileinv::symbolic_cholesky(m.pattern);
    factor = tileinv::factorize(m, plan, threads);
    t_factorize = sw.lap();
  } else {
    factor = tileinv::factor_from_tile_file(tileinv::read_tile_file(a.factor));
  }

  const std::vector<tileinv::TileCoord> tiles =
      tileinv::select_tiles(factor.layout, factor.pattern, request);
  const tileinv::SelectedTileSet sel = tileinv::symbolic_inversion(tiles, factor.pattern);
  if (sel.growth_warning) {
    std::fprintf(stderr, "warning: closure grew to %zu tiles from %zu requested\n",
                 sel.closure.size(), sel.requested.size());
  }
  const std::uint64_t factor_checksum = tileinv::payload_checksum(factor.blocks);

  sw.lap();
  double t_phase1 = 0.0;
  if (factor.phase == tileinv::PhaseTag::kFactor) {
    factor = tileinv::phase1(std::move(factor), threads);
    t_phase1 = sw.lap();
  }
  const tileinv::SelectedInverse sigma = tileinv::phase2(factor, sel, threads);
  const double t_phase2 = sw.lap();

  const std::vector<tileinv::Entry> entries = tileinv::extract_entries(sigma, request);
  const std::string tiles_path = a.out + ".tiles";
  const std::string entries_path = a.out + ".entries.txt";
  tileinv::write_selected_inverse(tiles_path, sigma);
  write_text_file(entries_path, entries_text(entries));

  json manifest = {
      {"command", "selinv"},
      {"version", tileinv::kVersion},
      {"workers", threads},
      {"parameters",
       {{"matrix", a.matrix.empty() ? json(nullptr) : json(a.matrix)},
        {"factor", a.factor.empty() ? json(nullptr) : json(a.factor)},
        {"select", a.select},
        {"tile_size", a.tile_size}}},
      {"outputs", {{"tiles", tiles_path}, {"entries", entries_path}}},
      {"result",
       {{"n", sigma.layout.n},
        {"n_tiles", sigma.layout.N},
        {"requested_tiles", sigma.requested.size()},
        {"closure_tiles", sigma.closure.size()},
        {"entry_count", entries.size()},
        {"growth_warning", sel.growth_warning},
        {"factor_checksum", hex64(factor_checksum)},
        {"result_checksum", hex64(tileinv::payload_checksum(sigma.blocks))},
        {"request_digest", hex64(sigma.request_digest)}}},
      {"timings_seconds",
       {{"factorize", t_factorize}, {"phase1", t_phase1}, {"phase2", t_phase2}}}};
  write_manifest(a.out + ".manifest.json", manifest);

  std::printf("selected inverse: %zu closure tiles, %zu entries, workers=%d\n",
              sigma.closure.size(), entries.size(), threads);
  return 0;
}

struct DagArgs {
  int n_tiles = 0;
  int band = 0;
  std::string matrix;
  std::string select = "pattern";
  int tile_size = 32;
  int cores = 0;
  std::string dot;
  std::string json_path;
};

int run_dag(const DagArgs& a) {
  tileinv::TaskDag dag;
  if (a.n_tiles > 0) {
    dag = tileinv::build_band_arrow_dag(a.n_tiles, a.band > 0 ? a.band : a.n_tiles);
  } else if (!a.matrix.empty()) {
    const tileinv::TiledSymmetricMatrix m =
        tileinv::read_matrix_market_file(a.matrix, a.tile_size);
    const tileinv::FactorPlan plan = tileinv::symbolic_cholesky(m.pattern);
    const tileinv::SelectionRequest request = parse_select(a.select);
    const std::vector<tileinv::TileCoord> tiles =
        tileinv::select_tiles(m.layout, plan.filled, request);
    dag = tileinv::build_dag(tileinv::symbolic_inversion(tiles, plan.filled), plan.filled);
  } else {
    throw tileinv::InvalidArgumentError("dag needs --n-tiles or --matrix");
  }
  if (a.cores > 0) dag = tileinv::assign_cores(dag, a.cores);

  const std::string report = tileinv::report_to_json(tileinv::count_kernels(dag));
  if (!a.dot.empty()) write_text_file(a.dot, tileinv::export_dot(dag));
  if (!a.json_path.empty()) write_text_file(a.json_path, report);
  std::fputs(report.c_str(), stdout);
  return 0;
}

struct VerifyArgs {
  std::string matrix;
  std::string factor;
  std::string select = "pattern";
  std::vector<int> threads;
  double tol = 1e-9;
  int tile_size = 32;
};

int run_verify(const VerifyArgs& a) {
  const tileinv::TiledSymmetricMatrix m =
      tileinv::read_matrix_market_file(a.matrix, a.tile_size);
  if (m.layout.n > tileinv::kOracleSizeLimit) {
    std::fprintf(stderr, "verify refuses n=%ld: the dense oracle is limited to n <= %ld\n",
                 m.layout.n, tileinv::kOracleSizeLimit);
    return 2;
  }
  const tileinv::SelectionRequest request = parse_select(a.select);
  std::vector<int> threads = a.threads;
  if (threads.empty()) threads = {1, 2, 4, 8};
  for (int t : threads) {
    if (t < 1) throw tileinv::InvalidArgumentError("thread counts must be positive");
  }

  const tileinv::DenseMatrix ref = tileinv::dense_inverse_ref(tileinv::dense_from_tiled(m));

  tileinv::TiledFactor factor;
  const bool use_factor = !a.factor.empty();
  if (use_factor) factor = tileinv::factor_from_tile_file(tileinv::read_tile_file(a.factor));

  bool pass = true;
  std::uint64_t first_digest = 0;
  double worst = 0.0;
  for (std::size_t idx = 0; idx < threads.size(); ++idx) {
    const int t = threads[idx];
    const tileinv::SelectedInverse sigma = use_factor
                                               ? tileinv::selected_inverse(factor, request, t)
                                               : tileinv::selected_inverse(m, request, t);
    const std::uint64_t digest = tileinv::payload_checksum(sigma.blocks);
    const std::vector<tileinv::Entry> entries = tileinv::extract_entries(sigma, request);
    std::vector<double> want, got;
    want.reserve(entries.size());
    got.reserve(entries.size());
    for (const tileinv::Entry& e : entries) {
      want.push_back(ref.at(e.r, e.c));
      got.push_back(e.value);
    }
    const double err = tileinv::max_rel_error(want, got);
    worst = std::max(worst, err);
    std::printf("threads %d: digest %s max_rel_error %.3e\n", t, hex64(digest).c_str(), err);
    if (idx == 0) {
      first_digest = digest;
    } else if (digest != first_digest) {
      std::printf("digest mismatch: threads %d differs from threads %d\n", t, threads[0]);
      pass = false;
    }
    if (!(err <= a.tol)) {
      std::printf("max_rel_error %.3e exceeds tolerance %.3e at %d threads\n", err, a.tol, t);
      pass = false;
    }
  }
  std::printf("%s (worst max_rel_error %.3e, tolerance %.3e)\n", pass ? "PASS" : "FAIL",
              worst, a.tol);
  return pass ? 0 : 1;
}

struct BenchArgs {
  std::string matrix;
  int preset = 0;
  std::uint64_t seed = 0;
  std::vector<int> threads;
  int repeat = 3;
  int tile_size = 120;
  std::string out;
};

int run_bench(const BenchArgs& a) {
  if (a.matrix.empty() == (a.preset == 0)) {
    throw tileinv::InvalidArgumentError("bench needs exactly one of --matrix or --preset");
  }
  if (a.repeat < 1) throw tileinv::InvalidArgumentError("--repeat must be positive");
  std::vector<int> threads = a.threads;
  if (threads.empty()) threads = {1, 2, 4, 8};
  if (std::find(threads.begin(), threads.end(), 1) == threads.end()) {
    throw tileinv::InvalidArgumentError("the speedup baseline needs 1 in --threads");
  }
  const int max_threads = *std::max_element(threads.begin(), threads.end());

  tileinv::TiledSymmetricMatrix m;
  if (!a.matrix.empty()) {
    m = tileinv::read_matrix_market_file(a.matrix, a.tile_size);
  } else {
    const tileinv::Preset& p = tileinv::find_preset(a.preset);
    m = tileinv::generate_arrowhead(tileinv::spec_from_preset(p, a.seed), a.tile_size).matrix;
  }

  Stopwatch sw;
  const tileinv::FactorPlan plan = tileinv::symbolic_cholesky(m.pattern);
  const tileinv::TiledFactor factor = tileinv::factorize(m, plan, max_threads);
  const double t_factorize = sw.lap();
  const tileinv::SelectedTileSet sel = tileinv::symbolic_inversion(
      tileinv::select_tiles(factor.layout, factor.pattern,
                            tileinv::SelectionRequest::factor_pattern()),
      factor.pattern);

  json samples = json::object();
  json medians = json::object();
  json checksums = json::object();
  double base_median = 0.0;
  json speedups = json::object();
  for (int t : threads) {
    std::vector<double> runs;
    std::uint64_t checksum = 0;
    for (int rep = 0; rep < a.repeat; ++rep) {
      tileinv::TiledFactor working = factor;
      Stopwatch timer;
      const tileinv::TiledFactor p1t = tileinv::phase1(std::move(working), t);
      const tileinv::SelectedInverse sigma = tileinv::phase2(p1t, sel, t);
      runs.push_back(timer.lap());
      checksum = tileinv::payload_checksum(sigma.blocks);
    }
    const double med = median_of(runs);
    const std::string key = std::to_string(t);
    samples[key] = runs;
    medians[key] = med;
    checksums[key] = hex64(checksum);
    if (t == 1) base_median = med;
  }
  for (int t : threads) {
    speedups[std::to_string(t)] = base_median / medians[std::to_string(t)].get<double>();
  }

  json doc = {{"command", "bench"},
              {"version", tileinv::kVersion},
              {"matrix",
               {{"source", a.matrix.empty() ? "preset " + std::to_string(a.preset) : a.matrix},
                {"n", m.layout.n},
                {"tile_size", m.layout.b},
                {"n_tiles", m.layout.N},
                {"closure_tiles", sel.closure.size()}}},
              {"threads", threads},
              {"repeat", a.repeat},
              {"factorize_seconds", t_factorize},
              {"samples_seconds", samples},
              {"median_seconds", medians},
              {"speedup", speedups},
              {"result_checksums", checksums}};
  const std::string text = doc.dump(2) + "\n";
  if (!a.out.empty()) write_text_file(a.out, text);
  std::fputs(text.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tiled selected inversion for banded plus arrowhead SPD matrices"};
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "Generate a banded plus arrowhead SPD matrix");
  gen->add_option("--preset", gen_args.preset, "Preset id (1..48)");
  gen->add_option("--n", gen_args.n, "Matrix size");
  gen->add_option("--bandwidth", gen_args.bandwidth, "Scalar bandwidth w");
  gen->add_option("--thickness", gen_args.thickness, "Arrowhead thickness t");
  gen->add_option("--density", gen_args.density, "In-band inclusion probability (0, 1]");
  gen->add_option("--seed", gen_args.seed, "RNG seed");
  gen->add_option("--tile-size", gen_args.tile_size, "Tile size b")->default_val(32);
  gen->add_option("--out", gen_args.out, "Output Matrix Market path")->required();

  SelinvArgs selinv_args;
  CLI::App* selinv = app.add_subcommand("selinv", "Factor and invert selected entries");
  selinv->add_option("--matrix", selinv_args.matrix, "Matrix Market input");
  selinv->add_option("--factor", selinv_args.factor, "Tile-file factor input");
  selinv->add_option("--select", selinv_args.select,
                     "diagonal | pattern | all | request file")->required();
  selinv->add_option("--threads", selinv_args.threads, "Worker count");
  selinv->add_option("--tile-size", selinv_args.tile_size, "Tile size b")->default_val(32);
  selinv->add_option("--out", selinv_args.out, "Output path prefix")->required();

  DagArgs dag_args;
  CLI::App* dag = app.add_subcommand("dag", "Build and analyze the task graph");
  dag->add_option("--n-tiles", dag_args.n_tiles, "Synthetic grid size N");
  dag->add_option("--band", dag_args.band, "Tile band width B (default: dense)");
  dag->add_option("--matrix", dag_args.matrix, "Matrix Market input");
  dag->add_option("--select", dag_args.select, "diagonal | pattern | all | request file");
  dag->add_option("--tile-size", dag_args.tile_size, "Tile size b")->default_val(32);
  dag->add_option("--cores", dag_args.cores, "Assign cores round-robin");
  dag->add_option("--dot", dag_args.dot, "Write DOT text here");
  dag->add_option("--json", dag_args.json_path, "Write the complexity report here");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "Check results against the dense oracle");
  verify->add_option("--matrix", verify_args.matrix, "Matrix Market input")->required();
  verify->add_option("--factor", verify_args.factor, "Tile-file factor to verify instead");
  verify->add_option("--select", verify_args.select, "diagonal | pattern | all | request file");
  verify->add_option("--threads", verify_args.threads, "Comma-separated worker counts")
      ->delimiter(',');
  verify->add_option("--tol", verify_args.tol, "Relative error tolerance")->default_val(1e-9);
  verify->add_option("--tile-size", verify_args.tile_size, "Tile size b")->default_val(32);

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Time phase 1 + phase 2 across worker counts");
  bench->add_option("--matrix", bench_args.matrix, "Matrix Market input");
  bench->add_option("--preset", bench_args.preset, "Preset id (1..48)");
  bench->add_option("--seed", bench_args.seed, "RNG seed for --preset");
  bench->add_option("--threads", bench_args.threads, "Comma-separated worker counts")
      ->delimiter(',');
  bench->add_option("--repeat", bench_args.repeat, "Samples per point")->default_val(3);
  bench->add_option("--tile-size", bench_args.tile_size, "Tile size b")->default_val(120);
  bench->add_option("--out", bench_args.out, "Write the timing JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(gen)) return run_gen(gen_args);
    if (app.got_subcommand(selinv)) return run_selinv(selinv_args);
    if (app.got_subcommand(dag)) return run_dag(dag_args);
    if (app.got_subcommand(verify)) return run_verify(verify_args);
    if (app.got_subcommand(bench)) return run_bench(bench_args);
  } catch (const tileinv::NotSpdError& e) {
    std::fprintf(stderr, "numeric error: %s (pivot %ld, tile %d,%d)\n", e.what(), e.pivot,
                 e.tile_i, e.tile_j);
    return 3;
  } catch (const tileinv::SingularTileError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
