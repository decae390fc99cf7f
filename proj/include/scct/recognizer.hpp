#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scct/concept_coder.hpp"
#include "scct/tetrolet.hpp"

namespace scct {

/// Transform settings used to turn an image into a feature vector.
struct TransformConfig {
    int levels = 4;
    CoveringMode mode = CoveringMode::relaxed(25.0);
    ShrinkageConfig shrinkage{};
};

/// flatten(shrink(forward(image))).
Eigen::VectorXd tetrolet_features(const ImageGrid& image, const TransformConfig& config);

/// Per-class dictionaries of sparse concept codes sharing one basis.
struct TrainingSet {
    std::map<int, Eigen::MatrixXd> class_codes;  // class id -> k × M_p
    ConceptBasis basis;

    int class_count() const noexcept { return static_cast<int>(class_codes.size()); }
    Eigen::Index total_columns() const;
};

/// Lasso-codes each class's columns with `basis`. Throws std::invalid_argument
/// naming the first empty class.
TrainingSet build_training_set(const std::map<int, FeatureMatrix>& per_class, const ConceptBasis& basis,
                               const CoderConfig& config);

/// min_j ‖a/‖a‖₁ − A_j/‖A_j‖₁‖₂. An all-zero vector is replaced by the uniform
/// vector before normalization.
double score(const Eigen::VectorXd& a_scc, const Eigen::MatrixXd& class_codes);

struct ClassScore {
    int class_id = 0;
    double score = 0.0;
};

struct Classification {
    int class_id = 0;
    double score = 0.0;
    std::vector<ClassScore> per_class;  // ascending class id
};

/// Class with the smallest score; ties go to the lowest class id.
Classification classify(const Eigen::VectorXd& a_scc, const TrainingSet& training);

Classification recognize_image(const ImageGrid& image, const TrainingSet& training,
                               const TransformConfig& config);

/// Everything needed to recognize images: transform and coder settings, the
/// trained dictionaries and the class names.
struct RecognitionModel {
    TransformConfig transform;
    CoderConfig coder;
    TrainingSet training;
    std::map<int, std::string> class_names;

    Classification recognize(const ImageGrid& image) const {
        return recognize_image(image, training, transform);
    }
};

/// "SCCB" model file, little-endian:
///   magic, u32 version, u32 D, u32 k, u32 M, f64 tau, f64 rho,
///   u32 levels, u8 covering mode, f64 lambda, u8 shrinkage mode, f64 threshold,
///   U* as D·k f64 column-major,
///   u32 P, then per class: u32 class id, u32 columns, k·M_p f64 column-major,
///   u32 label count, then per label: u32 class id, u32 byte length, UTF-8 bytes.
std::vector<std::uint8_t> serialize_model(const RecognitionModel& model);
RecognitionModel deserialize_model(std::span<const std::uint8_t> bytes);

}  // namespace scct
