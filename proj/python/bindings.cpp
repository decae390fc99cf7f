#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "scct/concept_coder.hpp"
#include "scct/dataset.hpp"
#include "scct/error.hpp"
#include "scct/eval.hpp"
#include "scct/recognizer.hpp"
#include "scct/tetrolet.hpp"
#include "scct/tetromino.hpp"

namespace py = pybind11;
using namespace scct;

namespace {

using Image = py::array_t<double, py::array::c_style | py::array::forcecast>;

Eigen::MatrixXd to_matrix(const Image& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    const auto r = a.unchecked<2>();
    Eigen::MatrixXd m(r.shape(0), r.shape(1));
    for (py::ssize_t i = 0; i < r.shape(0); ++i)
        for (py::ssize_t j = 0; j < r.shape(1); ++j) m(i, j) = r(i, j);
    return m;
}

// N×H×W stack, or a list of 2-D arrays.
std::vector<ImageGrid> to_grids(const py::object& images) {
    std::vector<ImageGrid> out;
    for (const auto& item : images) out.emplace_back(to_matrix(py::cast<Image>(item)));
    return out;
}

CoveringMode make_mode(const std::string& mode, double lambda) {
    if (mode == "strict") return CoveringMode::strict();
    if (mode == "relaxed") return CoveringMode::relaxed(lambda);
    throw std::invalid_argument("mode must be 'strict' or 'relaxed'");
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
    return {reinterpret_cast<const char*>(v.data()), v.size()};
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
    const std::string s = b;
    return {s.begin(), s.end()};
}

LabeledDataset make_dataset(const py::object& images, const std::vector<int>& labels) {
    LabeledDataset data;
    data.images = to_grids(images);
    data.labels = labels;
    for (int l : labels) data.class_names.emplace(l, std::to_string(l));
    data.validate();
    return data;
}

PipelineConfig make_config(int k, double tau, double rho, int levels, const std::string& mode, double lambda) {
    PipelineConfig cfg;
    cfg.coder.k = k;
    cfg.coder.tau = tau;
    cfg.coder.rho = rho;
    cfg.coder.validate();
    cfg.transform.levels = levels;
    cfg.transform.mode = make_mode(mode, lambda);
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Tetrolet transform, sparse concept coding and nearest-column recognition";

    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<CorruptPyramid>(m, "CorruptPyramid", PyExc_ValueError);
    py::register_exception<ConvergeFailure>(m, "ConvergeFailure", PyExc_RuntimeError);

    m.def("coverings", [] {
        std::vector<std::vector<std::vector<int>>> out;
        for (const auto& cov : covering_catalog().coverings()) {
            auto& parts = out.emplace_back();
            for (const auto& t : cov.tetrominoes) parts.emplace_back(t.cells.begin(), t.cells.end());
        }
        return out;
    }, "The 117 coverings of a 4×4 block, as lists of column-major cell indices.");

    py::class_<PyramidLevel>(m, "PyramidLevel")
        .def_property_readonly("highpass", [](const PyramidLevel& l) {
            return std::vector<Eigen::MatrixXd>(l.highpass.begin(), l.highpass.end());
        })
        .def_readonly("coverings", &PyramidLevel::coverings);

    py::class_<TetroletPyramid>(m, "Pyramid")
        .def_readonly("side", &TetroletPyramid::side)
        .def_readonly("levels", &TetroletPyramid::levels)
        .def_readonly("lowpass", &TetroletPyramid::lowpass)
        .def_property_readonly("covering_count", &TetroletPyramid::covering_count)
        .def("flatten", [](const TetroletPyramid& p) { return flatten(p); })
        .def("covering_stream", [](const TetroletPyramid& p) { return covering_stream(p); })
        .def("serialize", [](const TetroletPyramid& p) { return to_bytes(serialize_pyramid(p)); });

    m.def("forward", [](const Image& image, int levels, const std::string& mode, double lambda) {
        return forward(ImageGrid(to_matrix(image)), levels, make_mode(mode, lambda));
    }, py::arg("image"), py::arg("levels") = 4, py::arg("mode") = "relaxed", py::arg("lam") = 25.0);
    m.def("inverse", [](const TetroletPyramid& p) { return inverse(p).pixels(); }, py::arg("pyramid"));
    m.def("shrink", [](const TetroletPyramid& p, double threshold) {
        return shrink(p, {ShrinkageMode::hard_positive_part, threshold});
    }, py::arg("pyramid"), py::arg("threshold"));
    m.def("deserialize_pyramid", [](const py::bytes& b) { return deserialize_pyramid(from_bytes(b)); });
    m.def("bits_per_symbol", [](const std::vector<std::int64_t>& s) { return bits_per_pixel(s); });
    m.def("side_info_cost", &side_info_cost, py::arg("side"), py::arg("levels"));

    m.def("normalize", [](const Image& raw, double max_value, int target) {
        const auto mat = to_matrix(raw);
        RawImage img{static_cast<int>(mat.rows()), static_cast<int>(mat.cols()), {}, max_value};
        for (Eigen::Index r = 0; r < mat.rows(); ++r)
            for (Eigen::Index c = 0; c < mat.cols(); ++c) img.pixels.push_back(mat(r, c));
        return normalize(img, target).pixels();
    }, py::arg("raw"), py::arg("max_value") = 255.0, py::arg("target") = 32);

    m.def("load_dataset", [](const std::string& path) {
        const auto data = load_dataset(path);
        py::array_t<double> images({static_cast<py::ssize_t>(data.size()), py::ssize_t{32}, py::ssize_t{32}});
        auto w = images.mutable_unchecked<3>();
        for (std::size_t n = 0; n < data.size(); ++n)
            for (int r = 0; r < 32; ++r)
                for (int c = 0; c < 32; ++c) w(n, r, c) = data.images[n](r, c);
        return py::make_tuple(images, py::array(py::cast(data.labels)), data.class_names);
    }, py::arg("path"), "Returns (images N×32×32, labels, class names).");

    m.def("spectral_embedding", [](const Eigen::MatrixXd& X, int k, int graph_p) {
        CoderConfig cfg;
        cfg.k = k;
        cfg.graph_p = graph_p;
        const auto e = spectral_embedding(FeatureMatrix{X, {}}, cfg);
        return py::make_tuple(e.Y, e.eigenvalues);
    }, py::arg("X"), py::arg("k"), py::arg("graph_p") = 5);
    m.def("learn_basis", [](const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double tau) {
        return learn_basis(FeatureMatrix{X, {}}, Embedding{Y, {}}, tau).U;
    }, py::arg("X"), py::arg("Y"), py::arg("tau"));
    m.def("lasso_encode", [](const Eigen::VectorXd& x, const Eigen::MatrixXd& U, double rho, double tol, int max_iter) {
        return lasso_encode(x, ConceptBasis{U, 0.0}, rho, tol, max_iter);
    }, py::arg("x"), py::arg("U"), py::arg("rho"), py::arg("tol") = 1e-7, py::arg("max_iter") = 10000);
    m.def("score", &score, py::arg("a"), py::arg("class_codes"));

    m.def("accuracy", [](const std::vector<int>& pred, const std::vector<int>& truth, int classes) {
        return accuracy(confusion_matrix(pred, truth, classes));
    }, py::arg("predictions"), py::arg("truths"), py::arg("classes"));

    py::class_<RecognitionModel>(m, "Model")
        .def_static("train", [](const py::object& images, const std::vector<int>& labels, int k, double tau,
                                double rho, int levels, const std::string& mode, double lambda) {
            const auto data = make_dataset(images, labels);
            std::vector<std::size_t> all(data.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            py::gil_scoped_release release;
            return train_model(data, all, make_config(k, tau, rho, levels, mode, lambda));
        }, py::arg("images"), py::arg("labels"), py::arg("k") = 64, py::arg("tau") = CoderConfig{}.tau,
           py::arg("rho") = CoderConfig{}.rho, py::arg("levels") = 4, py::arg("mode") = "relaxed",
           py::arg("lam") = 25.0)
        .def("recognize", [](const RecognitionModel& model, const Image& image) {
            const auto c = model.recognize(ImageGrid(to_matrix(image)));
            return py::make_tuple(c.class_id, c.score);
        }, py::arg("image"), "Returns (class id, score).")
        .def_property_readonly("basis", [](const RecognitionModel& model) { return model.training.basis.U; })
        .def_property_readonly("class_codes", [](const RecognitionModel& model) { return model.training.class_codes; })
        .def("to_bytes", [](const RecognitionModel& model) { return to_bytes(serialize_model(model)); })
        .def_static("from_bytes", [](const py::bytes& b) { return deserialize_model(from_bytes(b)); });

    m.def("cross_validate", [](const py::object& images, const std::vector<int>& labels, int folds,
                               std::uint64_t seed, int k, double tau, double rho) {
        const auto data = make_dataset(images, labels);
        const auto plan = stratified_folds(data.labels, folds, seed);
        const auto cfg = make_config(k, tau, rho, 4, "relaxed", 25.0);
        py::gil_scoped_release release;
        return report_csv(cross_validate(data, cfg, plan), false);
    }, py::arg("images"), py::arg("labels"), py::arg("folds") = 5, py::arg("seed") = 0, py::arg("k") = 64,
       py::arg("tau") = CoderConfig{}.tau, py::arg("rho") = CoderConfig{}.rho,
       "Stratified cross-validation; returns the CSV report. Labels must be 0..P-1.");
}
