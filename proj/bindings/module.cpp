#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "tileinv/cholesky.hpp"
#include "tileinv/dag.hpp"
#include "tileinv/errors.hpp"
#include "tileinv/matgen.hpp"
#include "tileinv/oracle.hpp"
#include "tileinv/selinv.hpp"
#include "tileinv/version.hpp"

namespace py = pybind11;

namespace {

struct PyMatrix {
  tileinv::TiledSymmetricMatrix m;
};

struct PyFactor {
  tileinv::TiledFactor f;
};

struct PyResult {
  tileinv::SelectedInverse sigma;
  tileinv::SelectionRequest request;
};

tileinv::SelectionRequest request_from(const py::object& selection) {
  if (py::isinstance<py::str>(selection)) {
    const auto name = selection.cast<std::string>();
    if (name == "diagonal") return tileinv::SelectionRequest::diagonal();
    if (name == "pattern") return tileinv::SelectionRequest::factor_pattern();
    if (name == "all") return tileinv::SelectionRequest::all();
    throw py::value_error("selection must be 'diagonal', 'pattern', 'all', or a pair list");
  }
  return tileinv::SelectionRequest::of(
      selection.cast<std::vector<std::pair<long, long>>>());
}

PyMatrix from_dense(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr,
                    int tile_size) {
  if (arr.ndim() != 2 || arr.shape(0) != arr.shape(1)) {
    throw py::value_error("from_dense needs a square 2-D array");
  }
  const long n = static_cast<long>(arr.shape(0));
  const tileinv::TileLayout layout = tileinv::build_layout(n, tile_size);
  tileinv::TileBlocks blocks(tile_size);
  const auto a = arr.unchecked<2>();
  for (long r = 0; r < n; ++r) {
    for (long c = 0; c <= r; ++c) {
      const double v = a(r, c);
      if (v == 0.0 && r != c) continue;
      blocks.ensure(static_cast<int>(r / tile_size), static_cast<int>(c / tile_size))
          [static_cast<std::size_t>(r % tile_size) * tile_size + (c % tile_size)] = v;
    }
  }
  for (int i = 0; i < layout.N; ++i) blocks.ensure(i, i);
  for (long r = n; r < layout.n_padded; ++r) {
    blocks.at(static_cast<int>(r / tile_size), static_cast<int>(r / tile_size))
        [static_cast<std::size_t>(r % tile_size) * tile_size + (r % tile_size)] = 1.0;
  }
  std::vector<tileinv::TileCoord> tiles;
  for (const auto& [key, payload] : blocks.map()) {
    (void)payload;
    tiles.push_back({static_cast<int>(key & 0xffffffffu), static_cast<int>(key >> 32)});
  }
  return {{layout, tileinv::TilePattern(layout, std::move(tiles)), std::move(blocks)}};
}

py::array_t<double> matrix_to_dense(const PyMatrix& mat) {
  const tileinv::DenseMatrix d = tileinv::dense_from_tiled(mat.m);
  py::array_t<double> out({d.n, d.n});
  std::copy(d.a.begin(), d.a.end(), out.mutable_data());
  return out;
}

py::array_t<double> result_to_dense(const PyResult& res) {
  const long n = res.sigma.layout.n;
  const int b = res.sigma.layout.b;
  py::array_t<double> out({n, n});
  auto view = out.mutable_unchecked<2>();
  for (long r = 0; r < n; ++r) {
    for (long c = 0; c < n; ++c) view(r, c) = 0.0;
  }
  for (const auto& [key, payload] : res.sigma.blocks.map()) {
    const int ti = static_cast<int>(key & 0xffffffffu);
    const int tj = static_cast<int>(key >> 32);
    for (int or_ = 0; or_ < b; ++or_) {
      const long r = static_cast<long>(ti) * b + or_;
      if (r >= n) break;
      for (int oc = 0; oc < b; ++oc) {
        const long c = static_cast<long>(tj) * b + oc;
        if (c >= n || c > r) break;
        const double v = payload[static_cast<std::size_t>(or_) * b + oc];
        view(r, c) = v;
        view(c, r) = v;
      }
    }
  }
  return out;
}

py::dict report_to_dict(const tileinv::ComplexityReport& r) {
  py::dict out;
  out["n_tiles"] = r.n_tiles;
  out["band_b"] = r.band_b ? py::cast(*r.band_b) : py::none();
  out["trsm"] = r.trsm;
  out["trmm"] = r.trmm;
  out["lauum"] = r.lauum;
  out["gemm_actual"] = r.gemm_actual;
  out["gemm_predicted"] = r.gemm_predicted ? py::cast(*r.gemm_predicted) : py::none();
  out["critical_path"] = r.critical_path;
  out["match"] = r.match;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Tiled Cholesky and selected inversion for banded plus arrowhead SPD matrices";
  mod.attr("__version__") = tileinv::kVersion;

  // Translators run newest-first, so the base class has to go in before the
  // derived one or it swallows every NotSpdError.
  py::register_exception<tileinv::Error>(mod, "TileinvError", PyExc_RuntimeError);
  py::register_exception<tileinv::NotSpdError>(mod, "NotSpdError", PyExc_ArithmeticError);

  py::class_<PyMatrix>(mod, "Matrix")
      .def_property_readonly("n", [](const PyMatrix& s) { return s.m.layout.n; })
      .def_property_readonly("tile_size", [](const PyMatrix& s) { return s.m.layout.b; })
      .def_property_readonly("n_tiles", [](const PyMatrix& s) { return s.m.layout.N; })
      .def_property_readonly("stored_tiles", [](const PyMatrix& s) { return s.m.blocks.size(); })
      .def("to_dense", &matrix_to_dense);

  py::class_<PyFactor>(mod, "Factor")
      .def_property_readonly("n", [](const PyFactor& s) { return s.f.layout.n; })
      .def_property_readonly("tile_size", [](const PyFactor& s) { return s.f.layout.b; })
      .def_property_readonly("stored_tiles", [](const PyFactor& s) { return s.f.blocks.size(); })
      .def_property_readonly("checksum",
                             [](const PyFactor& s) { return tileinv::payload_checksum(s.f.blocks); });

  py::class_<PyResult>(mod, "SelectedInverseResult")
      .def_property_readonly("n", [](const PyResult& s) { return s.sigma.layout.n; })
      .def_property_readonly("closure_tiles",
                             [](const PyResult& s) { return s.sigma.closure.size(); })
      .def_property_readonly("checksum",
                             [](const PyResult& s) { return tileinv::payload_checksum(s.sigma.blocks); })
      .def("entries",
           [](const PyResult& s) {
             std::vector<std::tuple<long, long, double>> out;
             for (const tileinv::Entry& e : tileinv::extract_entries(s.sigma, s.request)) {
               out.emplace_back(e.r, e.c, e.value);
             }
             return out;
           })
      .def("to_dense", &result_to_dense);

  mod.def(
      "generate",
      [](long n, long bandwidth, long thickness, double density, std::uint64_t seed,
         int tile_size) {
        return PyMatrix{
            tileinv::generate_arrowhead({n, bandwidth, thickness, density, seed}, tile_size)
                .matrix};
      },
      py::arg("n"), py::arg("bandwidth"), py::arg("thickness"), py::arg("density"),
      py::arg("seed") = 0, py::arg("tile_size") = 32);

  mod.def("from_dense", &from_dense, py::arg("array"), py::arg("tile_size") = 32);

  mod.def(
      "read_matrix_market",
      [](const std::string& path, int tile_size) {
        return PyMatrix{tileinv::read_matrix_market_file(path, tile_size)};
      },
      py::arg("path"), py::arg("tile_size") = 32);

  mod.def(
      "write_matrix_market",
      [](const PyMatrix& m, const std::string& path) {
        tileinv::write_matrix_market_file(path, m.m);
      },
      py::arg("matrix"), py::arg("path"));

  mod.def(
      "factorize",
      [](const PyMatrix& m, int workers) {
        const tileinv::FactorPlan plan = tileinv::symbolic_cholesky(m.m.pattern);
        return PyFactor{tileinv::factorize(m.m, plan, workers)};
      },
      py::arg("matrix"), py::arg("workers") = 1);

  mod.def(
      "selected_inverse",
      [](const PyMatrix& m, const py::object& selection, int workers) {
        tileinv::SelectionRequest request = request_from(selection);
        tileinv::SelectedInverse sigma = tileinv::selected_inverse(m.m, request, workers);
        return PyResult{std::move(sigma), std::move(request)};
      },
      py::arg("matrix"), py::arg("selection") = "pattern", py::arg("workers") = 1);

  mod.def(
      "selected_inverse_of_factor",
      [](const PyFactor& f, const py::object& selection, int workers) {
        tileinv::SelectionRequest request = request_from(selection);
        tileinv::SelectedInverse sigma = tileinv::selected_inverse(f.f, request, workers);
        return PyResult{std::move(sigma), std::move(request)};
      },
      py::arg("factor"), py::arg("selection") = "pattern", py::arg("workers") = 1);

  mod.def(
      "dag_report",
      [](int n_tiles, int band) {
        return report_to_dict(tileinv::count_kernels(
            tileinv::build_band_arrow_dag(n_tiles, band > 0 ? band : n_tiles)));
      },
      py::arg("n_tiles"), py::arg("band") = 0);

  mod.def(
      "export_dot",
      [](int n_tiles, int band, int cores) {
        tileinv::TaskDag dag =
            tileinv::build_band_arrow_dag(n_tiles, band > 0 ? band : n_tiles);
        if (cores > 0) dag = tileinv::assign_cores(dag, cores);
        return tileinv::export_dot(dag);
      },
      py::arg("n_tiles"), py::arg("band") = 0, py::arg("cores") = 0);

  mod.def("predict_gemm_count", &tileinv::predict_gemm_count, py::arg("n_tiles"),
          py::arg("band"));
}
