#include "hybridfpca/config.hpp"
#include "hybridfpca/error.hpp"
#include "hybridfpca/fofreg.hpp"
#include "hybridfpca/hpca.hpp"
#include "hybridfpca/io.hpp"
#include "hybridfpca/metrics.hpp"
#include "hybridfpca/pooling.hpp"
#include "hybridfpca/selection.hpp"
#include "hybridfpca/simgen.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace hybridfpca;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

PyObject* g_error_type = nullptr;

HybridTensor tensor_from_numpy(const DoubleArray& values, std::vector<double> omega, std::vector<double> s,
                               std::optional<Mask> observed) {
    if (values.ndim() != 4) fail(ErrorKind::Shape, "values must be a 4-d array (subject, region, omega, s)");
    const auto n = static_cast<int>(values.shape(0));
    const auto r = static_cast<int>(values.shape(1));
    if (values.shape(2) != static_cast<py::ssize_t>(omega.size()) ||
        values.shape(3) != static_cast<py::ssize_t>(s.size())) {
        fail(ErrorKind::Shape, "values extents do not match the omega/s grids");
    }
    std::vector<double> flat(values.data(), values.data() + values.size());
    return HybridTensor(n, r, Grid1D::trapezoid(std::move(omega)), Grid1D::trapezoid(std::move(s)), std::move(flat),
                        std::move(observed));
}

py::array_t<double> tensor_values(const HybridTensor& t) {
    py::array_t<double> out({t.subjects(), t.regions(), t.omega_size(), t.s_size()});
    std::copy(t.values().begin(), t.values().end(), out.mutable_data());
    return out;
}

std::vector<double> as_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hybrid functional PCA and function-on-function regression";

    g_error_type = PyErr_NewException("hybridfpca._core.Error", PyExc_RuntimeError, nullptr);
    m.attr("Error") = py::handle(g_error_type);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object inst = py::reinterpret_borrow<py::object>(g_error_type)(e.what());
            inst.attr("kind") = to_string(e.kind());
            PyErr_SetObject(g_error_type, inst.ptr());
        }
    });

    py::class_<Grid1D>(m, "Grid1D")
        .def(py::init([](std::vector<double> points) { return Grid1D::trapezoid(std::move(points)); }),
             py::arg("points"))
        .def_static("uniform", &Grid1D::uniform, py::arg("first"), py::arg("last"), py::arg("count"))
        .def_property_readonly("points", &Grid1D::points)
        .def_property_readonly("weights", &Grid1D::weights)
        .def("__len__", &Grid1D::size);

    py::class_<HybridTensor>(m, "HybridTensor")
        .def(py::init(&tensor_from_numpy), py::arg("values"), py::arg("omega"), py::arg("s"),
             py::arg("observed") = std::nullopt)
        .def_property_readonly("values", &tensor_values)
        .def_property_readonly("omega_grid", &HybridTensor::omega_grid)
        .def_property_readonly("s_grid", &HybridTensor::s_grid)
        .def_property_readonly("observed", &HybridTensor::observed_mask)
        .def_property_readonly("subjects", &HybridTensor::subjects)
        .def_property_readonly("regions", &HybridTensor::regions);

    py::class_<FunctionalSample>(m, "FunctionalSample")
        .def(py::init([](Matrix curves, std::vector<double> grid) {
                 return FunctionalSample(std::move(curves), Grid1D::trapezoid(std::move(grid)));
             }),
             py::arg("curves"), py::arg("grid"))
        .def_property_readonly("curves", &FunctionalSample::curves)
        .def_property_readonly("grid", &FunctionalSample::grid)
        .def_property_readonly("subjects", &FunctionalSample::subjects);

    m.def("weighted_inner_product", [](std::vector<double> f, std::vector<double> g, const Grid1D& grid) {
        return weighted_inner_product(f, g, grid);
    });
    m.def("center", [](const HybridTensor& t) {
        auto c = center(t);
        return py::make_tuple(c.mean, c.demeaned);
    }, "Returns (mean in tensor layout, demeaned tensor).");

    py::class_<MarginalBasis>(m, "MarginalBasis")
        .def_readonly("vectors", &MarginalBasis::vectors)
        .def_readonly("eigenvalues", &MarginalBasis::eigenvalues)
        .def_readonly("fve", &MarginalBasis::fve)
        .def_property_readonly("retained", &MarginalBasis::retained);

    py::class_<HpcaModel>(m, "HpcaModel")
        .def_readonly("basis_region", &HpcaModel::basis_region)
        .def_readonly("basis_omega", &HpcaModel::basis_omega)
        .def_readonly("basis_s", &HpcaModel::basis_s)
        .def_readonly("scores", &HpcaModel::scores)
        .def_readonly("score_variance", &HpcaModel::score_variance)
        .def_readonly("mean", &HpcaModel::mean)
        .def_property_readonly("ranking", [](const HpcaModel& model) {
            std::vector<std::tuple<int, int, int>> out;
            for (const auto& t : model.ranking) out.emplace_back(t.k, t.l, t.m);
            return out;
        })
        .def_property_readonly("components", &HpcaModel::components)
        .def("save", [](const HpcaModel& model, const std::filesystem::path& dir) { write_hpca_model(dir, model); })
        .def_static("load", &read_hpca_model);

    m.def("fit_hpca", [](const HybridTensor& t, double fve, const std::string& ranking) {
        return fit_hpca(t, HpcaOptions{fve, ranking_order_from_string(ranking)});
    }, py::arg("tensor"), py::arg("fve_target") = 0.9, py::arg("ranking") = "variance");
    m.def("reconstruct", &reconstruct, py::arg("model"), py::arg("q"));
    m.def("pool_to_curve", &pool_to_curve, py::arg("tensor"));
    m.def("pool_reconstruction", &pool_reconstruction, py::arg("model"), py::arg("q"));
    m.def("pooled_response", &pooled_response, py::arg("model"), py::arg("demeaned"), py::arg("q"));

    py::class_<FofConfig>(m, "FofConfig")
        .def(py::init<>())
        .def_readwrite("n_basis_g", &FofConfig::n_basis_g)
        .def_readwrite("n_basis_s", &FofConfig::n_basis_s)
        .def_readwrite("predictor_fve", &FofConfig::predictor_fve)
        .def_readwrite("penalty_grid", &FofConfig::penalty_grid)
        .def_readwrite("train_fraction", &FofConfig::train_fraction)
        .def_readwrite("seed", &FofConfig::seed)
        .def_readwrite("max_components", &FofConfig::max_components);

    py::class_<FofModel>(m, "FofModel")
        .def_property_readonly("intercept", [](const FofModel& f) { return as_vector(f.intercept); })
        .def_readonly("chosen_penalty", &FofModel::chosen_penalty)
        .def_readonly("train_mspe", &FofModel::train_mspe)
        .def_readonly("gcv_trace", &FofModel::gcv_trace)
        .def_property_readonly("predictors", &FofModel::predictors)
        .def("surface", [](const FofModel& f, int j, std::vector<double> g, std::vector<double> s) {
            return coefficient_surface(f, j, g, s);
        }, py::arg("j"), py::arg("g"), py::arg("s"))
        .def("save", [](const FofModel& f, const std::filesystem::path& dir) { write_fof_model(dir, f); })
        .def_static("load", &read_fof_model);

    m.def("fit_fof", [](const FunctionalSample& y, const std::vector<FunctionalSample>& xs, const FofConfig& cfg) {
        return fit_fof(y, xs, cfg);
    }, py::arg("response"), py::arg("predictors"), py::arg("config") = FofConfig{});
    m.def("predict", [](const FofModel& f, const std::vector<FunctionalSample>& xs) { return predict(f, xs); },
          py::arg("model"), py::arg("predictors"));

    py::class_<SelectionResult>(m, "SelectionResult")
        .def_readonly("mspe_test", &SelectionResult::mspe_test)
        .def_readonly("mspe_train", &SelectionResult::mspe_train)
        .def_readonly("seconds", &SelectionResult::seconds)
        .def_readonly("q_min", &SelectionResult::q_min);
    py::class_<ResplitSummary>(m, "ResplitSummary")
        .def_readonly("resplits", &ResplitSummary::resplits)
        .def_readonly("mean_mspe_test", &ResplitSummary::mean_mspe_test)
        .def_readonly("mean_mspe_train", &ResplitSummary::mean_mspe_train)
        .def_readonly("q_min", &ResplitSummary::q_min)
        .def_readonly("q_min_counts", &ResplitSummary::q_min_counts)
        .def_readonly("components", &ResplitSummary::components);

    m.def("select_num_components",
          [](const HybridTensor& t, const std::vector<FunctionalSample>& xs, const FofConfig& cfg, double fve,
             int threads) { return select_num_components(t, xs, cfg, fve, threads); },
          py::arg("tensor"), py::arg("predictors"), py::arg("config") = FofConfig{}, py::arg("fve_target") = 0.9,
          py::arg("threads") = 1);
    m.def("select_resplits",
          [](const HybridTensor& t, const std::vector<FunctionalSample>& xs, const FofConfig& cfg, double fve,
             int resplits, int threads) {
              return select_resplits(t, xs, cfg, HpcaOptions{fve, RankingOrder::Variance}, resplits, threads);
          },
          py::arg("tensor"), py::arg("predictors"), py::arg("config") = FofConfig{}, py::arg("fve_target") = 0.9,
          py::arg("resplits") = 20, py::arg("threads") = 1);

    m.def("mspe", py::overload_cast<const Matrix&, const Matrix&>(&mspe));
    m.def("prediction_mspe", py::overload_cast<const Matrix&, const Matrix&>(&prediction_mspe));
    m.def("prediction_correlation", py::overload_cast<const Matrix&, const Matrix&>(&prediction_correlation));
    m.def("mse_beta", &mse_beta, py::arg("truth"), py::arg("estimate"), py::arg("subjects") = std::nullopt);

    m.def("gen_hybrid",
          [](int n, int R, int omega_points, int s_points, double noise_sd, const std::string& omega_sampling,
             std::uint64_t seed) {
              HybridGenConfig c;
              c.n = n;
              c.R = R;
              c.omega_points = omega_points;
              c.s_points = s_points;
              c.noise_sd = noise_sd;
              c.omega_sampling = omega_sampling_from_string(omega_sampling);
              c.seed = seed;
              auto d = gen_hybrid(c);
              return py::make_tuple(std::move(d.tensor), d.truth.scores);
          },
          py::arg("n") = 20, py::arg("R") = 4, py::arg("omega_points") = 21, py::arg("s_points") = 21,
          py::arg("noise_sd") = 1.0, py::arg("omega_sampling") = "complete", py::arg("seed") = 1,
          "Returns (tensor, true scores).");
    m.def("gen_fof",
          [](int n, int p, int g_points, int s_points, double noise_sd, const std::string& mode,
             std::uint64_t seed) {
              FofGenConfig c;
              c.n = n;
              c.p = p;
              c.g_points = g_points;
              c.s_points = s_points;
              c.noise_sd = noise_sd;
              c.coefficient_mode = coefficient_mode_from_string(mode);
              c.seed = seed;
              auto d = gen_fof(c);
              return py::make_tuple(std::move(d.response), std::move(d.predictors));
          },
          py::arg("n") = 20, py::arg("p") = 10, py::arg("g_points") = 21, py::arg("s_points") = 21,
          py::arg("noise_sd") = 0.1, py::arg("coefficient_mode") = "complete", py::arg("seed") = 1,
          "Returns (response, predictors).");

    m.def("read_tensor_csv", [](const std::filesystem::path& p) {
        auto t = read_tensor_csv(p);
        return py::make_tuple(std::move(t.tensor), t.subjects, t.regions);
    });
    m.def("read_sample_csv", [](const std::filesystem::path& p) {
        auto s = read_sample_csv(p);
        return py::make_tuple(std::move(s.sample), s.subjects);
    });
    m.def("write_tensor_csv", [](const std::filesystem::path& p, const HybridTensor& t) { write_tensor_csv(p, t); });
    m.def("write_sample_csv",
          [](const std::filesystem::path& p, const FunctionalSample& s) { write_sample_csv(p, s); });
}
