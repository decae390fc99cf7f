// Command-line front end: transform, reconstruct, train, classify, evaluate, sweep.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scct/dataset.hpp"
#include "scct/error.hpp"
#include "scct/eval.hpp"
#include "scct/recognizer.hpp"
#include "scct/tetrolet.hpp"

namespace fs = std::filesystem;
using namespace scct;

namespace {

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

bool is_power_of_two(int n) { return n >= 4 && (n & (n - 1)) == 0; }

// Square power-of-two inputs keep their size; anything else goes to 32×32.
ImageGrid load_grid(const fs::path& path) {
    const auto raw = read_image_file(path);
    const int target = raw.rows == raw.cols && is_power_of_two(raw.rows) ? raw.rows : 32;
    return normalize(raw, target);
}

CoveringMode parse_mode(const std::string& mode, double lambda) {
    if (mode == "strict") return CoveringMode::strict();
    return CoveringMode::relaxed(lambda);
}

// Flags shared by train, evaluate and sweep.
struct PipelineFlags {
    int levels = 4;
    std::string mode = "relaxed";
    double lambda = 25.0;
    double tau = CoderConfig{}.tau;
    double rho = CoderConfig{}.rho;

    void attach(CLI::App* cmd) {
        cmd->add_option("--levels", levels, "Transform levels")->capture_default_str();
        cmd->add_option("--mode", mode, "Covering rule")
            ->check(CLI::IsMember({"strict", "relaxed"}))
            ->capture_default_str();
        cmd->add_option("--lambda", lambda, "Relaxation tolerance")->capture_default_str();
        cmd->add_option("--tau", tau, "Ridge regularizer")->capture_default_str();
        cmd->add_option("--rho", rho, "Lasso regularizer")->capture_default_str();
    }

    PipelineConfig config(int k, std::uint64_t seed) const {
        PipelineConfig cfg;
        cfg.transform.levels = levels;
        cfg.transform.mode = parse_mode(mode, lambda);
        cfg.coder.k = k;
        cfg.coder.tau = tau;
        cfg.coder.rho = rho;
        cfg.coder.seed = seed;
        cfg.coder.validate();
        return cfg;
    }
};

LabeledDataset load_limited(const std::string& path, int limit, std::uint64_t seed) {
    auto data = load_dataset(path);
    if (limit > 0) {
        const auto keep = scct::limit_per_class(data.labels, static_cast<std::size_t>(limit), seed);
        data = subset(data, keep);
    }
    return data;
}

std::string describe(const LabeledDataset& data, const std::string& path, int limit, std::uint64_t seed) {
    std::ostringstream out;
    out << path << ": " << data.size() << " images, " << data.class_names.size() << " classes";
    if (limit > 0) out << ", at most " << limit << " per class (seed " << seed << ")";
    return out.str();
}

int run_transform(const std::string& input, int levels, const std::string& mode, double lambda,
                  const std::string& out, double quant_step) {
    const auto image = load_grid(input);
    const auto pyramid = forward(image, levels, parse_mode(mode, lambda));
    write_bytes(out, serialize_pyramid(pyramid));

    const auto coeffs = flatten(pyramid);
    std::vector<std::int64_t> quantized(static_cast<std::size_t>(coeffs.size()));
    std::size_t nonzero = 0;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        quantized[i] = static_cast<std::int64_t>(std::llround(coeffs(i) / quant_step));
        if (quantized[i] != 0) ++nonzero;
    }
    const auto stream = covering_stream(pyramid);

    std::printf("image side: %d\n", pyramid.side);
    std::printf("levels: %d\n", pyramid.levels_count());
    std::printf("coverings stored: %zu\n", pyramid.covering_count());
    std::printf("side information: %.0f indices (%.4f per pixel)\n", side_info_cost(pyramid.side, levels),
                side_info_cost(pyramid.side, levels) / (pyramid.side * pyramid.side));
    std::printf("covering entropy: %.6f bits/symbol\n", bits_per_pixel(stream));
    std::printf("coefficients: %zu, nonzero after quantization (step %g): %zu\n", pyramid.coefficient_count(),
                quant_step, nonzero);
    std::printf("quantized coefficient entropy: %.6f bits/symbol\n", bits_per_pixel(quantized));
    return 0;
}

int run_reconstruct(const std::string& in, const std::string& out) {
    const auto pyramid = deserialize_pyramid(read_file_bytes(in));
    write_image_file(out, inverse(pyramid));
    return 0;
}

int run_train(const std::string& data_path, int k, const PipelineFlags& flags, std::uint64_t seed, int limit,
              const std::string& out) {
    const auto data = load_limited(data_path, limit, seed);
    std::cerr << describe(data, data_path, limit, seed) << "\n";
    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto model = train_model(data, all, flags.config(k, seed));
    write_bytes(out, serialize_model(model));
    std::printf("trained k=%d on %zu images, %d classes -> %s\n", k, data.size(), model.training.class_count(),
                out.c_str());
    return 0;
}

bool looks_like_idx_images(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char magic[4] = {};
    in.read(reinterpret_cast<char*>(magic), 4);
    return in && magic[0] == 0 && magic[1] == 0 && magic[2] == 8 && magic[3] == 3;
}

std::string label_of(const RecognitionModel& model, int id) {
    const auto it = model.class_names.find(id);
    return it == model.class_names.end() ? std::to_string(id) : it->second;
}

int run_classify(const std::string& model_path, const std::string& input, bool verbose) {
    const auto model = deserialize_model(read_file_bytes(model_path));
    auto print = [&](const std::string& name, const Classification& c) {
        std::printf("%s\t%s\t%.6f", name.c_str(), label_of(model, c.class_id).c_str(), c.score);
        if (verbose)
            for (const auto& s : c.per_class) std::printf("\t%s:%.6f", label_of(model, s.class_id).c_str(), s.score);
        std::printf("\n");
    };

    if (looks_like_idx_images(input)) {
        const auto raw = parse_idx_images(read_file_bytes(input));
        for (std::size_t i = 0; i < raw.size(); ++i) print(std::to_string(i), model.recognize(normalize(raw[i])));
    } else {
        print(input, model.recognize(normalize(read_image_file(input))));
    }
    return 0;
}

int run_evaluate(const std::string& data_path, int folds, std::uint64_t seed, int k, int limit,
                 const PipelineFlags& flags, const std::string& csv, const std::string& json, bool timing) {
    const auto data = load_limited(data_path, limit, seed);
    const auto note = describe(data, data_path, limit, seed);
    std::cerr << note << "\n";
    const auto plan = stratified_folds(data.labels, folds, seed);
    const auto report = cross_validate(data, flags.config(k, seed), plan);

    std::cout << report_table(report);
    if (!csv.empty()) write_text(csv, report_csv(report, timing));
    if (!json.empty()) write_text(json, report_json(report, note, timing));
    if (csv.empty() && json.empty()) std::cout << "\n" << report_csv(report, timing);
    return 0;
}

std::vector<int> parse_ks(const std::string& text) {
    std::vector<int> ks;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        const int k = std::stoi(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad k value '" + item + "'");
        ks.push_back(k);
    }
    if (ks.empty()) throw std::invalid_argument("--ks is empty");
    return ks;
}

int run_sweep(const std::string& data_path, const std::string& ks_text, int folds, std::uint64_t seed, int limit,
              const PipelineFlags& flags, const std::string& csv, bool timing) {
    const auto ks = parse_ks(ks_text);
    const auto data = load_limited(data_path, limit, seed);
    std::cerr << describe(data, data_path, limit, seed) << "\n";
    const auto plan = stratified_folds(data.labels, folds, seed);
    const auto rows = sweep_k(data, ks, flags.config(ks.front(), seed), plan);
    const auto table = sweep_csv(rows, timing);
    std::cout << table;
    for (const auto& row : rows)
        if (!row.report) std::cerr << "k=" << row.k << " skipped: " << row.skipped_reason << "\n";
    if (!csv.empty()) write_text(csv, table);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tetrolet transform and sparse concept coding recognizer"};
    app.require_subcommand(1);

    std::string input, out, in, mode = "relaxed";
    int levels = 4;
    double lambda = 25.0, quant_step = 1.0 / 255.0;
    auto* transform = app.add_subcommand("transform", "Forward transform of one image");
    transform->add_option("--input", input, "Input image (PGM or PNG)")->required()->check(CLI::ExistingFile);
    transform->add_option("--levels", levels, "Decomposition levels")->capture_default_str();
    transform->add_option("--mode", mode, "Covering rule")
        ->check(CLI::IsMember({"strict", "relaxed"}))
        ->capture_default_str();
    transform->add_option("--lambda", lambda, "Relaxation tolerance")->capture_default_str();
    transform->add_option("--out", out, "Pyramid file")->required();
    transform->add_option("--quant-step", quant_step, "Quantizer step for the coefficient entropy")
        ->check(CLI::PositiveNumber);

    auto* reconstruct = app.add_subcommand("reconstruct", "Inverse transform of a pyramid file");
    reconstruct->add_option("--in", in, "Pyramid file")->required()->check(CLI::ExistingFile);
    reconstruct->add_option("--out", out, "Output image (.pgm or .png)")->required();

    std::string data_path, model_path, csv, json, ks_text = "64,100,200,300,400";
    int k = 64, folds = 5, limit = 0;
    std::uint64_t seed = 0;
    bool timing = false, verbose = false;
    PipelineFlags train_flags, eval_flags, sweep_flags;

    auto* train = app.add_subcommand("train", "Learn a basis and training dictionary");
    train->add_option("--data", data_path, "IDX directory or class-directory corpus")->required();
    train->add_option("--k", k, "Concept dimension")->capture_default_str();
    train->add_option("--seed", seed, "Seed for per-class sampling")->capture_default_str();
    train->add_option("--limit-per-class", limit, "Use at most this many images per class");
    train->add_option("--out", out, "Model file")->required();
    train_flags.attach(train);

    auto* classify = app.add_subcommand("classify", "Recognize an image or every image of an IDX file");
    classify->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
    classify->add_option("--input", input, "Image or IDX image file")->required()->check(CLI::ExistingFile);
    classify->add_flag("--scores", verbose, "Print every class score");

    auto* evaluate = app.add_subcommand("evaluate", "Stratified cross-validation");
    evaluate->add_option("--data", data_path, "IDX directory or class-directory corpus")->required();
    evaluate->add_option("--folds", folds, "Fold count")->capture_default_str();
    evaluate->add_option("--seed", seed, "Fold and sampling seed")->capture_default_str();
    evaluate->add_option("--k", k, "Concept dimension")->capture_default_str();
    evaluate->add_option("--limit-per-class", limit, "Use at most this many images per class");
    evaluate->add_option("--csv", csv, "Write the fold table as CSV");
    evaluate->add_option("--json", json, "Write the full report as JSON");
    evaluate->add_flag("--timing", timing, "Include wall-clock columns in CSV/JSON");
    eval_flags.attach(evaluate);

    auto* sweep = app.add_subcommand("sweep", "Cross-validation for several concept dimensions");
    sweep->add_option("--data", data_path, "IDX directory or class-directory corpus")->required();
    sweep->add_option("--ks", ks_text, "Comma-separated concept dimensions")->capture_default_str();
    sweep->add_option("--seed", seed, "Fold and sampling seed")->capture_default_str();
    sweep->add_option("--folds", folds, "Fold count")->capture_default_str();
    sweep->add_option("--limit-per-class", limit, "Use at most this many images per class");
    sweep->add_option("--csv", csv, "Write the table as CSV");
    sweep->add_flag("--timing", timing, "Include wall-clock columns");
    sweep_flags.attach(sweep);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*transform) return run_transform(input, levels, mode, lambda, out, quant_step);
        if (*reconstruct) return run_reconstruct(in, out);
        if (*train) return run_train(data_path, k, train_flags, seed, limit, out);
        if (*classify) return run_classify(model_path, input, verbose);
        if (*evaluate) return run_evaluate(data_path, folds, seed, k, limit, eval_flags, csv, json, timing);
        if (*sweep) return run_sweep(data_path, ks_text, folds, seed, limit, sweep_flags, csv, timing);
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << " (byte " << e.offset() << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
