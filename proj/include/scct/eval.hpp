#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scct/concept_coder.hpp"
#include "scct/dataset.hpp"
#include "scct/recognizer.hpp"

namespace scct {

/// counts(t, p): samples of true class t predicted as p. Classes are 0..P-1.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int classes);

    void add(int truth, int prediction);

    int classes() const noexcept { return classes_; }
    std::int64_t operator()(int truth, int prediction) const;
    std::int64_t total() const;
    std::int64_t true_positives(int k) const { return (*this)(k, k); }
    std::int64_t row_sum(int k) const;
    std::int64_t col_sum(int k) const;

private:
    int classes_;
    std::vector<std::int64_t> counts_;
};

/// Throws std::invalid_argument on length mismatch or labels outside 0..classes-1.
ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> truths, int classes);

/// Recall and precision of one class. An empty denominator yields 0 with the
/// matching `*_defined` flag cleared.
struct ClassMetrics {
    double recall = 0.0;
    double precision = 0.0;
    bool recall_defined = true;
    bool precision_defined = true;
};

std::vector<ClassMetrics> recall_precision(const ConfusionMatrix& cm);

/// Mean per-class recall, in percent.
double accuracy(const ConfusionMatrix& cm);

/// Fraction of correctly classified samples, in percent.
double micro_accuracy(const ConfusionMatrix& cm);

struct PipelineConfig {
    TransformConfig transform;
    CoderConfig coder;
};

/// Trains a model on the samples of `data` selected by `indices`.
RecognitionModel train_model(const LabeledDataset& data, std::span<const std::size_t> indices,
                             const PipelineConfig& config);

/// Same as train_model, with the transform features of every sample already
/// computed (one column per sample of `data`).
RecognitionModel train_model_from_features(const LabeledDataset& data, const Eigen::MatrixXd& features,
                                           std::span<const std::size_t> indices, const PipelineConfig& config);

Eigen::MatrixXd dataset_features(const LabeledDataset& data, const TransformConfig& config);

struct FoldResult {
    int fold = 0;
    int k = 0;
    double accuracy_macro = 0.0;
    double accuracy_micro = 0.0;
    double mean_latency_ms = 0.0;
    double train_seconds = 0.0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
};

struct EvalReport {
    int k = 0;
    std::vector<FoldResult> folds;
    double mean_accuracy_macro = 0.0;
    double mean_accuracy_micro = 0.0;
    double mean_latency_ms = 0.0;
    std::vector<ClassMetrics> per_class;  // from the confusion matrix pooled over folds
    ConfusionMatrix pooled{0};
    std::map<int, std::string> class_names;
};

/// Trains on the out-of-fold samples and tests on each fold in turn. Class ids
/// must be 0..P-1.
EvalReport cross_validate(const LabeledDataset& data, const PipelineConfig& config, const FoldPlan& plan);

struct SweepRow {
    int k = 0;
    std::optional<EvalReport> report;  // empty when skipped
    std::string skipped_reason;
    double train_seconds = 0.0;
};

/// One cross-validation per k over identical folds.
std::vector<SweepRow> sweep_k(const LabeledDataset& data, std::span<const int> ks, const PipelineConfig& config,
                              const FoldPlan& plan);

/// CSV with columns fold,k,accuracy_macro,accuracy_micro,mean_latency_ms and a
/// final "mean" row. Latency is written as NA unless `with_timing`, which
/// keeps the file reproducible byte for byte.
std::string report_csv(const EvalReport& report, bool with_timing);
std::string report_json(const EvalReport& report, const std::string& dataset_note, bool with_timing);
std::string report_table(const EvalReport& report);

/// CSV columns k,status,accuracy_macro,accuracy_micro,train_seconds,mean_latency_ms.
std::string sweep_csv(std::span<const SweepRow> rows, bool with_timing);

}  // namespace scct
