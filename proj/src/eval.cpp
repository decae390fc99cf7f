#include "scct/eval.hpp"

#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scct {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

int class_count(const LabeledDataset& data) {
    int p = 0;
    for (int l : data.labels) {
        if (l < 0) throw std::invalid_argument("negative class id");
        p = std::max(p, l + 1);
    }
    return std::max<int>(p, static_cast<int>(data.class_names.size()));
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(int classes)
    : classes_(classes), counts_(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0) {
    if (classes < 0) throw std::invalid_argument("negative class count");
}

void ConfusionMatrix::add(int truth, int prediction) {
    if (truth < 0 || truth >= classes_ || prediction < 0 || prediction >= classes_)
        throw std::invalid_argument("label outside 0.." + std::to_string(classes_ - 1));
    ++counts_[static_cast<std::size_t>(truth) * classes_ + prediction];
}

std::int64_t ConfusionMatrix::operator()(int truth, int prediction) const {
    return counts_.at(static_cast<std::size_t>(truth) * classes_ + prediction);
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t n = 0;
    for (auto c : counts_) n += c;
    return n;
}

std::int64_t ConfusionMatrix::row_sum(int k) const {
    std::int64_t n = 0;
    for (int p = 0; p < classes_; ++p) n += (*this)(k, p);
    return n;
}

std::int64_t ConfusionMatrix::col_sum(int k) const {
    std::int64_t n = 0;
    for (int t = 0; t < classes_; ++t) n += (*this)(t, k);
    return n;
}

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> truths, int classes) {
    if (predictions.size() != truths.size())
        throw std::invalid_argument("prediction and truth lengths differ");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < truths.size(); ++i) cm.add(truths[i], predictions[i]);
    return cm;
}

std::vector<ClassMetrics> recall_precision(const ConfusionMatrix& cm) {
    std::vector<ClassMetrics> out(static_cast<std::size_t>(cm.classes()));
    for (int k = 0; k < cm.classes(); ++k) {
        const auto tp = static_cast<double>(cm.true_positives(k));
        const auto actual = cm.row_sum(k);     // TP + FN
        const auto predicted = cm.col_sum(k);  // TP + FP
        auto& m = out[static_cast<std::size_t>(k)];
        m.recall_defined = actual > 0;
        m.precision_defined = predicted > 0;
        m.recall = m.recall_defined ? tp / static_cast<double>(actual) : 0.0;
        m.precision = m.precision_defined ? tp / static_cast<double>(predicted) : 0.0;
    }
    return out;
}

double accuracy(const ConfusionMatrix& cm) {
    if (cm.classes() == 0) return 0.0;
    double sum = 0.0;
    for (const auto& m : recall_precision(cm)) sum += m.recall;
    return 100.0 * sum / cm.classes();
}

double micro_accuracy(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    if (total == 0) return 0.0;
    std::int64_t tp = 0;
    for (int k = 0; k < cm.classes(); ++k) tp += cm.true_positives(k);
    return 100.0 * static_cast<double>(tp) / static_cast<double>(total);
}

Eigen::MatrixXd dataset_features(const LabeledDataset& data, const TransformConfig& config) {
    if (data.images.empty()) throw std::invalid_argument("dataset is empty");
    const Eigen::Index dim = static_cast<Eigen::Index>(data.images.front().side()) * data.images.front().side();
    Eigen::MatrixXd out(dim, static_cast<Eigen::Index>(data.size()));
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < out.cols(); ++i)
        out.col(i) = tetrolet_features(data.images[static_cast<std::size_t>(i)], config);
    return out;
}

RecognitionModel train_model_from_features(const LabeledDataset& data, const Eigen::MatrixXd& features,
                                           std::span<const std::size_t> indices, const PipelineConfig& config) {
    if (indices.empty()) throw std::invalid_argument("no training samples");
    FeatureMatrix all;
    all.columns.resize(features.rows(), static_cast<Eigen::Index>(indices.size()));
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t n = 0; n < indices.size(); ++n) {
        all.columns.col(static_cast<Eigen::Index>(n)) = features.col(static_cast<Eigen::Index>(indices[n]));
        all.labels.push_back(data.labels.at(indices[n]));
        by_class[all.labels.back()].push_back(n);
    }

    const Embedding embedding = spectral_embedding(all, config.coder);
    const ConceptBasis basis = learn_basis(all, embedding, config.coder.tau);

    std::map<int, FeatureMatrix> per_class;
    for (const auto& [label, cols] : by_class) {
        FeatureMatrix fm;
        fm.columns.resize(all.dim(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t n = 0; n < cols.size(); ++n)
            fm.columns.col(static_cast<Eigen::Index>(n)) = all.columns.col(static_cast<Eigen::Index>(cols[n]));
        fm.labels.assign(cols.size(), label);
        per_class.emplace(label, std::move(fm));
    }

    RecognitionModel model;
    model.transform = config.transform;
    model.coder = config.coder;
    model.training = build_training_set(per_class, basis, config.coder);
    for (const auto& [label, cols] : by_class) {
        const auto it = data.class_names.find(label);
        model.class_names[label] = it != data.class_names.end() ? it->second : std::to_string(label);
    }
    return model;
}

RecognitionModel train_model(const LabeledDataset& data, std::span<const std::size_t> indices,
                             const PipelineConfig& config) {
    LabeledDataset picked = subset(data, indices);
    std::vector<std::size_t> all(picked.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return train_model_from_features(picked, dataset_features(picked, config.transform), all, config);
}

namespace {

EvalReport cross_validate_features(const LabeledDataset& data, const Eigen::MatrixXd& features,
                                   const PipelineConfig& config, const FoldPlan& plan) {
    data.validate();
    if (plan.assignments.size() != data.size()) throw std::invalid_argument("fold plan does not match dataset size");
    const int classes = class_count(data);

    EvalReport report;
    report.k = config.coder.k;
    report.pooled = ConfusionMatrix(classes);
    report.class_names = data.class_names;

    for (int fold = 0; fold < plan.fold_count; ++fold) {
        const auto train = plan.train_indices(fold);
        const auto test = plan.test_indices(fold);
        {
            const std::set<std::size_t> seen(train.begin(), train.end());
            for (auto i : test)
                if (seen.contains(i)) throw std::logic_error("sample " + std::to_string(i) + " in train and test");
        }

        FoldResult result;
        result.fold = fold;
        result.k = config.coder.k;
        result.train_size = train.size();
        result.test_size = test.size();

        const auto start = Clock::now();
        RecognitionModel model;
        try {
            model = train_model_from_features(data, features, train, config);
        } catch (const std::exception& e) {
            throw std::runtime_error("fold " + std::to_string(fold) + ": " + e.what());
        }
        result.train_seconds = seconds_since(start);

        ConfusionMatrix cm(classes);
        double elapsed = 0.0;
        for (auto i : test) {
            const auto t0 = Clock::now();
            const auto c = model.recognize(data.images[i]);
            elapsed += seconds_since(t0);
            cm.add(data.labels[i], c.class_id);
            report.pooled.add(data.labels[i], c.class_id);
        }
        result.accuracy_macro = accuracy(cm);
        result.accuracy_micro = micro_accuracy(cm);
        result.mean_latency_ms = test.empty() ? 0.0 : 1000.0 * elapsed / static_cast<double>(test.size());
        report.folds.push_back(result);
    }

    const double n = static_cast<double>(report.folds.size());
    for (const auto& f : report.folds) {
        report.mean_accuracy_macro += f.accuracy_macro / n;
        report.mean_accuracy_micro += f.accuracy_micro / n;
        report.mean_latency_ms += f.mean_latency_ms / n;
    }
    report.per_class = recall_precision(report.pooled);
    return report;
}

}  // namespace

EvalReport cross_validate(const LabeledDataset& data, const PipelineConfig& config, const FoldPlan& plan) {
    return cross_validate_features(data, dataset_features(data, config.transform), config, plan);
}

std::vector<SweepRow> sweep_k(const LabeledDataset& data, std::span<const int> ks, const PipelineConfig& config,
                              const FoldPlan& plan) {
    const Eigen::MatrixXd features = dataset_features(data, config.transform);
    std::size_t smallest_train = data.size();
    for (int fold = 0; fold < plan.fold_count; ++fold)
        smallest_train = std::min(smallest_train, plan.train_indices(fold).size());

    std::vector<SweepRow> rows;
    for (int k : ks) {
        SweepRow row;
        row.k = k;
        if (k < 1 || static_cast<std::size_t>(k) >= smallest_train) {
            row.skipped_reason = "k=" + std::to_string(k) + " needs more than " + std::to_string(k) +
                                 " training samples per fold, smallest fold has " + std::to_string(smallest_train);
            rows.push_back(std::move(row));
            continue;
        }
        PipelineConfig cfg = config;
        cfg.coder.k = k;
        try {
            row.report = cross_validate_features(data, features, cfg, plan);
            for (const auto& f : row.report->folds) row.train_seconds += f.train_seconds;
        } catch (const std::exception& e) {
            row.skipped_reason = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string report_csv(const EvalReport& report, bool with_timing) {
    std::ostringstream out;
    out << "fold,k,accuracy_macro,accuracy_micro,mean_latency_ms\n";
    auto latency = [&](double ms) { return with_timing ? fmt(ms, 3) : std::string("NA"); };
    for (const auto& f : report.folds)
        out << f.fold << ',' << f.k << ',' << fmt(f.accuracy_macro) << ',' << fmt(f.accuracy_micro) << ','
            << latency(f.mean_latency_ms) << '\n';
    out << "mean," << report.k << ',' << fmt(report.mean_accuracy_macro) << ',' << fmt(report.mean_accuracy_micro)
        << ',' << latency(report.mean_latency_ms) << '\n';
    return out.str();
}

std::string report_json(const EvalReport& report, const std::string& dataset_note, bool with_timing) {
    nlohmann::ordered_json j;
    j["dataset"] = dataset_note;
    j["k"] = report.k;
    j["mean_accuracy_macro"] = report.mean_accuracy_macro;
    j["mean_accuracy_micro"] = report.mean_accuracy_micro;
    if (with_timing) j["mean_latency_ms"] = report.mean_latency_ms;
    auto& folds = j["folds"] = nlohmann::ordered_json::array();
    for (const auto& f : report.folds) {
        nlohmann::ordered_json row{{"fold", f.fold},
                                   {"train_size", f.train_size},
                                   {"test_size", f.test_size},
                                   {"accuracy_macro", f.accuracy_macro},
                                   {"accuracy_micro", f.accuracy_micro}};
        if (with_timing) {
            row["mean_latency_ms"] = f.mean_latency_ms;
            row["train_seconds"] = f.train_seconds;
        }
        folds.push_back(row);
    }
    auto& classes = j["classes"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < report.per_class.size(); ++k) {
        const auto& m = report.per_class[k];
        const auto it = report.class_names.find(static_cast<int>(k));
        classes.push_back({{"id", k},
                           {"name", it != report.class_names.end() ? it->second : std::to_string(k)},
                           {"recall", m.recall},
                           {"precision", m.precision},
                           {"recall_defined", m.recall_defined},
                           {"precision_defined", m.precision_defined}});
    }
    return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
    std::ostringstream out;
    out << "fold  train   test   macro%    micro%   latency(ms)  train(s)\n";
    for (const auto& f : report.folds) {
        char line[160];
        std::snprintf(line, sizeof line, "%4d %6zu %6zu %8.3f  %8.3f  %11.3f  %8.2f\n", f.fold, f.train_size,
                      f.test_size, f.accuracy_macro, f.accuracy_micro, f.mean_latency_ms, f.train_seconds);
        out << line;
    }
    char line[160];
    std::snprintf(line, sizeof line, "mean               %8.3f  %8.3f  %11.3f\n", report.mean_accuracy_macro,
                  report.mean_accuracy_micro, report.mean_latency_ms);
    out << line << "\nclass        recall  precision\n";
    for (std::size_t k = 0; k < report.per_class.size(); ++k) {
        const auto& m = report.per_class[k];
        const auto it = report.class_names.find(static_cast<int>(k));
        const std::string name = it != report.class_names.end() ? it->second : std::to_string(k);
        std::snprintf(line, sizeof line, "%-10s %8.4f%s %9.4f%s\n", name.c_str(), m.recall,
                      m.recall_defined ? " " : "*", m.precision, m.precision_defined ? " " : "*");
        out << line;
    }
    bool flagged = false;
    for (const auto& m : report.per_class) flagged |= !m.recall_defined || !m.precision_defined;
    if (flagged) out << "* empty denominator, reported as 0\n";
    return out.str();
}

std::string sweep_csv(std::span<const SweepRow> rows, bool with_timing) {
    std::ostringstream out;
    out << "k,status,accuracy_macro,accuracy_micro,train_seconds,mean_latency_ms\n";
    for (const auto& row : rows) {
        if (!row.report) {
            out << row.k << ",skipped,NA,NA,NA,NA\n";
            continue;
        }
        out << row.k << ",ok," << fmt(row.report->mean_accuracy_macro) << ','
            << fmt(row.report->mean_accuracy_micro) << ','
            << (with_timing ? fmt(row.train_seconds, 3) : std::string("NA")) << ','
            << (with_timing ? fmt(row.report->mean_latency_ms, 3) : std::string("NA")) << '\n';
    }
    return out.str();
}

}  // namespace scct
