#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "tileinv/cholesky.hpp"
#include "tileinv/dag.hpp"
#include "tileinv/matgen.hpp"
#include "tileinv/tileio.hpp"

using namespace tileinv;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("tileinv_cli_" + std::to_string(static_cast<long>(::getpid())));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path_in_scratch(const std::string& name) {
  return (scratch_dir() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

struct CliResult {
  int status = -1;
  std::string out;
  std::string err;
};

// Runs the binary through the shell so env prefixes and redirects work.
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const std::string out_path = path_in_scratch("stdout_" + std::to_string(counter));
  const std::string err_path = path_in_scratch("stderr_" + std::to_string(counter));
  ++counter;
  std::string cmd;
  if (!env_prefix.empty()) cmd += env_prefix + " ";
  cmd += std::string(TILEINV_BIN) + " " + args + " > " + out_path + " 2> " + err_path;
  const int rc = std::system(cmd.c_str());
  CliResult res;
  res.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  res.out = slurp(out_path);
  res.err = slurp(err_path);
  return res;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string write_generated_matrix(const std::string& name, const ArrowheadSpec& spec,
                                   int tile_size) {
  const std::string path = path_in_scratch(name);
  write_matrix_market_file(path, generate_arrowhead(spec, tile_size).matrix);
  return path;
}

}  // namespace

TEST_CASE("dag subcommand prints the complexity report") {
  CliResult dense = run_cli("dag --n-tiles 6");
  REQUIRE(dense.status == 0);
  json rep = json::parse(dense.out);
  CHECK(rep.at("n_tiles") == 6);
  CHECK(rep.at("band_b") == 6);
  CHECK(rep.at("gemm_actual") == 70);
  CHECK(rep.at("gemm_predicted") == 70);
  CHECK(rep.at("match") == true);
  CHECK(rep.at("critical_path") == 32);

  CliResult band = run_cli("dag --n-tiles 6 --band 2");
  REQUIRE(band.status == 0);
  json brep = json::parse(band.out);
  CHECK(brep.at("trmm") == 9);
  CHECK(brep.at("gemm_actual") == 26);
  CHECK(brep.at("match") == true);
  CHECK(brep.at("critical_path") == 20);

  CliResult one = run_cli("dag --n-tiles 1");
  REQUIRE(one.status == 0);
  CHECK(json::parse(one.out).at("critical_path") == 2);
}

TEST_CASE("dag subcommand writes DOT and JSON artifacts") {
  const std::string dot_path = path_in_scratch("one.dot");
  const std::string json_path = path_in_scratch("one.json");
  CliResult res = run_cli("dag --n-tiles 1 --dot " + dot_path + " --json " + json_path);
  REQUIRE(res.status == 0);

  TaskDag dag = build_band_arrow_dag(1, 1);
  CHECK(slurp(dot_path) == export_dot(dag));
  const std::string report = report_to_json(count_kernels(dag));
  CHECK(slurp(json_path) == report);
  CHECK(res.out == report);
}

TEST_CASE("dag subcommand analyzes a matrix file") {
  const std::string path =
      write_generated_matrix("dag_input.mtx", {24, 7, 2, 1.0, 5}, 4);
  CliResult res = run_cli("dag --matrix " + path + " --select diagonal --tile-size 4");
  REQUIRE(res.status == 0);
  json rep = json::parse(res.out);
  CHECK(rep.at("n_tiles") == 6);
  CHECK(rep.at("match") == true);
}

TEST_CASE("gen with a preset id records the table row in the manifest") {
  const std::string p1 = path_in_scratch("preset1.mtx");
  CliResult res = run_cli("gen --preset 1 --seed 1 --out " + p1);
  REQUIRE(res.status == 0);
  CHECK(contains(res.out, "wrote "));
  CHECK(contains(slurp(p1), "%%MatrixMarket matrix coordinate real symmetric"));

  json manifest = json::parse(slurp(p1 + ".manifest.json"));
  CHECK(manifest.at("command") == "gen");
  const json& params = manifest.at("parameters");
  CHECK(params.at("n") == 10010);
  CHECK(params.at("bandwidth") == 100);
  CHECK(params.at("thickness") == 10);
  CHECK(params.at("preset").at("id") == 1);
  CHECK(params.at("preset").at("table_version") == "1");
  CHECK(manifest.at("stats").at("measured_in_band_density").get<double>() > 0.0);

  const std::string p19 = path_in_scratch("preset19.mtx");
  CliResult res19 = run_cli("gen --preset 19 --seed 2 --out " + p19);
  REQUIRE(res19.status == 0);
  json m19 = json::parse(slurp(p19 + ".manifest.json"));
  CHECK(m19.at("parameters").at("n") == 10004);
  CHECK(m19.at("parameters").at("preset").at("density_percent").get<double>() ==
        doctest::Approx(0.010));
  CHECK(m19.at("parameters").at("preset").at("convention") == "excluding arrowhead");
}

TEST_CASE("gen refuses a preset mixed with explicit spec flags") {
  CliResult res = run_cli("gen --preset 1 --n 5 --out " + path_in_scratch("mix.mtx"));
  CHECK(res.status == 2);
  CHECK(contains(res.err, "excludes"));
}

TEST_CASE("selinv emits exact entries for a two by two matrix") {
  const std::string mtx = path_in_scratch("two.mtx");
  spit(mtx,
       "%%MatrixMarket matrix coordinate real symmetric\n"
       "2 2 3\n"
       "1 1 4\n"
       "2 1 2\n"
       "2 2 5\n");
  const std::string out = path_in_scratch("two_sel");
  CliResult res = run_cli("selinv --matrix " + mtx + " --select all --out " + out);
  REQUIRE(res.status == 0);
  CHECK(slurp(out + ".entries.txt") ==
        "0 0 0.3125\n"
        "1 0 -0.125\n"
        "1 1 0.25\n");

  json manifest = json::parse(slurp(out + ".manifest.json"));
  CHECK(manifest.at("command") == "selinv");
  CHECK(manifest.at("workers") == 1);
  CHECK(manifest.at("result").at("n") == 2);
  CHECK(manifest.at("result").at("entry_count") == 3);
  CHECK(manifest.at("result").at("growth_warning") == false);

  // The worker default comes from the environment when no flag is given.
  CliResult env_res = run_cli("selinv --matrix " + mtx + " --select all --out " + out,
                              "TILEINV_THREADS=3");
  REQUIRE(env_res.status == 0);
  CHECK(json::parse(slurp(out + ".manifest.json")).at("workers") == 3);

  CliResult bad_env = run_cli("selinv --matrix " + mtx + " --select all --out " + out,
                              "TILEINV_THREADS=zero");
  CHECK(bad_env.status == 2);
}

TEST_CASE("selinv accepts a factor tile file in place of a matrix") {
  // The generator puts diagonal = off-row abs sum + 1; with no band and no
  // arrow that is exactly the identity.
  TiledSymmetricMatrix m = read_matrix_market_file(
      write_generated_matrix("identity.mtx", {3, 0, 0, 1.0, 9}, 2), 2);
  TiledFactor factor = factorize(m, symbolic_cholesky(m.pattern), 1);
  const std::string tiles = path_in_scratch("identity.tiles");
  write_tile_file(tiles, factor.layout, factor.phase, factor.blocks);

  const std::string out = path_in_scratch("identity_sel");
  CliResult res = run_cli("selinv --factor " + tiles + " --select diagonal --out " + out);
  REQUIRE(res.status == 0);
  CHECK(slurp(out + ".entries.txt") ==
        "0 0 1\n"
        "1 1 1\n"
        "2 2 1\n");

  CliResult both = run_cli("selinv --matrix a --factor b --select all --out " +
                           path_in_scratch("nope"));
  CHECK(both.status == 2);
  CHECK(contains(both.err, "exactly one"));
}

TEST_CASE("verify passes against the dense oracle and flags a perturbed factor") {
  const ArrowheadSpec spec{40, 6, 2, 0.7, 11};
  const std::string mtx = write_generated_matrix("verify.mtx", spec, 8);

  CliResult good = run_cli("verify --matrix " + mtx +
                           " --select pattern --threads 1,2 --tile-size 8");
  REQUIRE(good.status == 0);
  CHECK(contains(good.out, "PASS"));
  CHECK(contains(good.out, "threads 1:"));
  CHECK(contains(good.out, "threads 2:"));

  TiledSymmetricMatrix m = read_matrix_market_file(mtx, 8);
  TiledFactor factor = factorize(m, symbolic_cholesky(m.pattern), 1);
  factor.blocks.at(0, 0)[0] *= 1.5;
  const std::string tiles = path_in_scratch("perturbed.tiles");
  write_tile_file(tiles, factor.layout, factor.phase, factor.blocks);

  CliResult bad = run_cli("verify --matrix " + mtx + " --factor " + tiles +
                          " --select diagonal --threads 1 --tile-size 8");
  CHECK(bad.status == 1);
  CHECK(contains(bad.out, "FAIL"));
  CHECK(contains(bad.out, "exceeds tolerance"));
}

TEST_CASE("usage errors exit with code two") {
  CHECK(run_cli("").status == 2);
  CHECK(run_cli("frobnicate").status == 2);
  CHECK(run_cli("dag --bogus 1").status == 2);

  CliResult no_input = run_cli("dag");
  CHECK(no_input.status == 2);
  CHECK(contains(no_input.err, "dag needs"));

  CliResult missing_request = run_cli(
      "selinv --matrix " + path_in_scratch("absent.mtx") + " --select no_such_request --out " +
      path_in_scratch("absent_out"));
  CHECK(missing_request.status == 2);
}

TEST_CASE("an indefinite matrix exits with code three") {
  const std::string mtx = path_in_scratch("indefinite.mtx");
  spit(mtx,
       "%%MatrixMarket matrix coordinate real symmetric\n"
       "2 2 3\n"
       "1 1 1\n"
       "2 1 2\n"
       "2 2 1\n");
  CliResult res = run_cli("selinv --matrix " + mtx + " --select diagonal --out " +
                          path_in_scratch("indefinite_out"));
  CHECK(res.status == 3);
  CHECK(contains(res.err, "numeric error"));
  CHECK(contains(res.err, "pivot"));
}

TEST_CASE("bench keeps raw samples and a unit self-speedup") {
  const std::string mtx =
      write_generated_matrix("bench.mtx", {40, 6, 2, 0.7, 11}, 8);
  const std::string out = path_in_scratch("bench.json");
  CliResult res = run_cli("bench --matrix " + mtx +
                          " --threads 1,2 --repeat 3 --tile-size 8 --out " + out);
  REQUIRE(res.status == 0);

  json doc = json::parse(slurp(out));
  CHECK(doc.at("repeat") == 3);
  CHECK(doc.at("threads") == json::array({1, 2}));
  CHECK(doc.at("samples_seconds").at("1").size() == 3);
  CHECK(doc.at("samples_seconds").at("2").size() == 3);
  CHECK(doc.at("speedup").at("1").get<double>() == doctest::Approx(1.0));
  CHECK(doc.at("result_checksums").at("1") == doc.at("result_checksums").at("2"));

  CliResult no_baseline = run_cli("bench --matrix " + mtx + " --threads 2,4");
  CHECK(no_baseline.status == 2);
  CHECK(contains(no_baseline.err, "baseline"));
}
