#include "scct/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "binary_io.hpp"
#include "scct/error.hpp"

namespace scct {

namespace {

constexpr char kModelMagic[4] = {'S', 'C', 'C', 'B'};
constexpr std::uint32_t kModelVersion = 1;

Eigen::VectorXd l1_normalized(const Eigen::VectorXd& v) {
    const double l1 = v.lpNorm<1>();
    if (l1 == 0.0) return Eigen::VectorXd::Constant(v.size(), 1.0 / static_cast<double>(v.size()));
    return v / l1;
}

}  // namespace

Eigen::VectorXd tetrolet_features(const ImageGrid& image, const TransformConfig& config) {
    return flatten(shrink(forward(image, config.levels, config.mode), config.shrinkage));
}

Eigen::Index TrainingSet::total_columns() const {
    Eigen::Index n = 0;
    for (const auto& [id, codes] : class_codes) n += codes.cols();
    return n;
}

TrainingSet build_training_set(const std::map<int, FeatureMatrix>& per_class, const ConceptBasis& basis,
                               const CoderConfig& config) {
    TrainingSet out;
    out.basis = basis;
    for (const auto& [id, features] : per_class) {
        if (features.count() == 0) throw std::invalid_argument("class " + std::to_string(id) + " has no samples");
        out.class_codes.emplace(id, encode_matrix(features, basis, config).A);
    }
    return out;
}

double score(const Eigen::VectorXd& a_scc, const Eigen::MatrixXd& class_codes) {
    if (class_codes.cols() == 0) throw std::invalid_argument("class dictionary is empty");
    if (class_codes.rows() != a_scc.size())
        throw std::invalid_argument("code length " + std::to_string(a_scc.size()) + " does not match dictionary rows " +
                                    std::to_string(class_codes.rows()));
    const Eigen::VectorXd probe = l1_normalized(a_scc);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < class_codes.cols(); ++j)
        best = std::min(best, (probe - l1_normalized(class_codes.col(j))).norm());
    return best;
}

Classification classify(const Eigen::VectorXd& a_scc, const TrainingSet& training) {
    if (training.class_codes.empty()) throw std::invalid_argument("training set has no classes");
    Classification out;
    out.score = std::numeric_limits<double>::infinity();
    for (const auto& [id, codes] : training.class_codes) {
        const double s = score(a_scc, codes);
        out.per_class.push_back({id, s});
        if (s < out.score) {
            out.score = s;
            out.class_id = id;
        }
    }
    return out;
}

Classification recognize_image(const ImageGrid& image, const TrainingSet& training, const TransformConfig& config) {
    return classify(project_test(tetrolet_features(image, config), training.basis), training);
}

std::vector<std::uint8_t> serialize_model(const RecognitionModel& model) {
    const auto& basis = model.training.basis;
    detail::ByteWriter w;
    w.raw(kModelMagic, sizeof kModelMagic);
    w.u32(kModelVersion);
    w.u32(static_cast<std::uint32_t>(basis.dim()));
    w.u32(static_cast<std::uint32_t>(basis.k()));
    w.u32(static_cast<std::uint32_t>(model.training.total_columns()));
    w.f64(basis.tau);
    w.f64(model.coder.rho);
    w.u32(static_cast<std::uint32_t>(model.transform.levels));
    w.u8(static_cast<std::uint8_t>(model.transform.mode.kind));
    w.f64(model.transform.mode.lambda);
    w.u8(static_cast<std::uint8_t>(model.transform.shrinkage.mode));
    w.f64(model.transform.shrinkage.threshold);
    w.raw(basis.U.data(), static_cast<std::size_t>(basis.U.size()) * sizeof(double));

    w.u32(static_cast<std::uint32_t>(model.training.class_codes.size()));
    for (const auto& [id, codes] : model.training.class_codes) {
        w.u32(static_cast<std::uint32_t>(id));
        w.u32(static_cast<std::uint32_t>(codes.cols()));
        w.raw(codes.data(), static_cast<std::size_t>(codes.size()) * sizeof(double));
    }
    w.u32(static_cast<std::uint32_t>(model.class_names.size()));
    for (const auto& [id, name] : model.class_names) {
        w.u32(static_cast<std::uint32_t>(id));
        w.str(name);
    }
    return w.take();
}

RecognitionModel deserialize_model(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    char magic[4];
    r.raw(magic, sizeof magic, "magic");
    if (!std::equal(magic, magic + 4, kModelMagic)) throw FormatError("not an SCCB model file", 0);
    if (const auto v = r.u32(); v != kModelVersion)
        throw FormatError("unsupported model version " + std::to_string(v), 4);

    RecognitionModel model;
    const auto dim = r.u32();
    const auto k = r.u32();
    const auto total = r.u32();
    model.training.basis.tau = r.f64();
    model.coder.rho = r.f64();
    model.coder.tau = model.training.basis.tau;
    model.coder.k = static_cast<int>(k);
    model.transform.levels = static_cast<int>(r.u32());
    const auto cover = r.u8();
    if (cover > 1) throw FormatError("bad covering mode", r.offset() - 1);
    model.transform.mode.kind = static_cast<CoveringKind>(cover);
    model.transform.mode.lambda = r.f64();
    const auto shrink_mode = r.u8();
    if (shrink_mode > 1) throw FormatError("bad shrinkage mode", r.offset() - 1);
    model.transform.shrinkage.mode = static_cast<ShrinkageMode>(shrink_mode);
    model.transform.shrinkage.threshold = r.f64();

    if (dim == 0 || k == 0 || static_cast<std::uint64_t>(dim) * k * sizeof(double) > bytes.size())
        throw FormatError("implausible basis shape", r.offset());
    model.training.basis.U.resize(dim, k);
    r.raw(model.training.basis.U.data(), static_cast<std::size_t>(dim) * k * sizeof(double), "basis");

    const auto classes = r.u32();
    std::uint64_t seen = 0;
    for (std::uint32_t p = 0; p < classes; ++p) {
        const auto id = static_cast<int>(r.u32());
        const auto cols = r.u32();
        if (static_cast<std::uint64_t>(cols) * k * sizeof(double) > bytes.size() - r.offset())
            throw FormatError("truncated class codes", r.offset());
        Eigen::MatrixXd codes(k, cols);
        r.raw(codes.data(), static_cast<std::size_t>(codes.size()) * sizeof(double), "codes");
        if (!model.training.class_codes.emplace(id, std::move(codes)).second)
            throw FormatError("duplicate class id " + std::to_string(id), r.offset());
        seen += cols;
    }
    if (seen != total) throw FormatError("column count does not match header", r.offset());

    const auto labels = r.u32();
    for (std::uint32_t n = 0; n < labels; ++n) {
        const auto id = static_cast<int>(r.u32());
        model.class_names[id] = r.str();
    }
    if (!r.done()) throw FormatError("trailing bytes after model", r.offset());
    return model;
}

}  // namespace scct
