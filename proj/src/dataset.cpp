#include "scct/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <png.h>

#include "scct/error.hpp"

namespace fs = std::filesystem;

namespace scct {

namespace {

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    if (bytes.size() < offset + 4) throw FormatError("truncated IDX header", bytes.size());
    return std::uint32_t{bytes[offset]} << 24 | std::uint32_t{bytes[offset + 1]} << 16 |
           std::uint32_t{bytes[offset + 2]} << 8 | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void check_magic(std::span<const std::uint8_t> bytes, std::uint32_t expected) {
    const auto magic = read_be32(bytes, 0);
    if (magic != expected) {
        std::ostringstream msg;
        msg << "IDX magic 0x" << std::hex << magic << ", expected 0x" << expected;
        throw FormatError(msg.str(), 0);
    }
}

// Samples `src` (length n) at output position d of an m-sample grid.
struct Tap {
    int lo, hi;
    double frac;
};

Tap bilinear_tap(int d, int n, int m) {
    double s = (d + 0.5) * static_cast<double>(n) / m - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(n - 1));
    const int lo = static_cast<int>(std::floor(s));
    return {lo, std::min(lo + 1, n - 1), s - lo};
}

bool has_extension(const fs::path& p, std::initializer_list<const char*> exts) {
    std::string ext = p.extension().string();
    std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return std::ranges::any_of(exts, [&](const char* e) { return ext == e; });
}

RawImage read_pgm(const fs::path& path) {
    const auto bytes = read_file_bytes(path);
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&] {
        skip_space();
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw FormatError("malformed PGM header", pos);
        long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2'))
        throw FormatError("not a PGM file", 0);
    const bool binary = bytes[1] == '5';
    pos = 2;
    RawImage img;
    img.cols = static_cast<int>(read_int());
    img.rows = static_cast<int>(read_int());
    const long maxval = read_int();
    if (img.cols <= 0 || img.rows <= 0 || maxval <= 0 || maxval > 65535) throw FormatError("bad PGM header", pos);
    img.max_value = static_cast<double>(maxval);
    const std::size_t n = static_cast<std::size_t>(img.rows) * img.cols;
    img.pixels.resize(n);
    if (binary) {
        ++pos;  // single whitespace after maxval
        const std::size_t width = maxval > 255 ? 2 : 1;
        if (bytes.size() < pos + n * width) throw FormatError("truncated PGM payload", bytes.size());
        for (std::size_t i = 0; i < n; ++i) {
            img.pixels[i] = width == 1 ? bytes[pos + i] : (bytes[pos + 2 * i] << 8 | bytes[pos + 2 * i + 1]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) img.pixels[i] = static_cast<double>(read_int());
    }
    return img;
}

RawImage read_png(const fs::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw std::runtime_error("cannot read PNG " + path.string() + ": " + image.message);
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&image);
        throw std::runtime_error("cannot decode PNG " + path.string() + ": " + image.message);
    }
    RawImage img;
    img.rows = static_cast<int>(image.height);
    img.cols = static_cast<int>(image.width);
    img.pixels.assign(buf.begin(), buf.end());
    img.max_value = 255.0;
    return img;
}

}  // namespace

std::vector<RawImage> parse_idx_images(std::span<const std::uint8_t> bytes) {
    check_magic(bytes, kIdxImages);
    const auto count = read_be32(bytes, 4);
    const auto rows = read_be32(bytes, 8);
    const auto cols = read_be32(bytes, 12);
    if (rows == 0 || cols == 0) throw FormatError("zero image dimension", 8);
    const std::uint64_t per = std::uint64_t{rows} * cols;
    const std::uint64_t expected = 16 + per * count;
    if (bytes.size() < expected) throw FormatError("truncated IDX image payload", bytes.size());

    std::vector<RawImage> out(count);
    std::size_t pos = 16;
    for (auto& img : out) {
        img.rows = static_cast<int>(rows);
        img.cols = static_cast<int>(cols);
        img.max_value = 255.0;
        img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                          bytes.begin() + static_cast<std::ptrdiff_t>(pos + per));
        pos += per;
    }
    return out;
}

std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes) {
    check_magic(bytes, kIdxLabels);
    const auto count = read_be32(bytes, 4);
    if (bytes.size() < 8 + std::uint64_t{count}) throw FormatError("truncated IDX label payload", bytes.size());
    std::vector<int> out(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const int v = bytes[8 + i];
        if (v > 9) throw FormatError("label " + std::to_string(v) + " outside 0..9", 8 + i);
        out[i] = v;
    }
    return out;
}

std::vector<std::uint8_t> write_idx_images(std::span<const RawImage> images) {
    std::vector<std::uint8_t> out;
    const int rows = images.empty() ? 0 : images[0].rows;
    const int cols = images.empty() ? 0 : images[0].cols;
    write_be32(out, kIdxImages);
    write_be32(out, static_cast<std::uint32_t>(images.size()));
    write_be32(out, static_cast<std::uint32_t>(rows));
    write_be32(out, static_cast<std::uint32_t>(cols));
    for (const auto& img : images) {
        if (img.rows != rows || img.cols != cols) throw std::invalid_argument("IDX images must share dimensions");
        for (double v : img.pixels) out.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)));
    }
    return out;
}

std::vector<std::uint8_t> write_idx_labels(std::span<const int> labels) {
    std::vector<std::uint8_t> out;
    write_be32(out, kIdxLabels);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) {
        if (l < 0 || l > 255) throw std::invalid_argument("IDX label out of byte range");
        out.push_back(static_cast<std::uint8_t>(l));
    }
    return out;
}

ImageGrid normalize(const RawImage& raw, int target) {
    if (raw.rows <= 0 || raw.cols <= 0 || raw.pixels.empty()) throw std::invalid_argument("empty image");
    if (raw.pixels.size() != static_cast<std::size_t>(raw.rows) * raw.cols)
        throw std::invalid_argument("pixel count does not match dimensions");
    if (!(raw.max_value > 0.0)) throw std::invalid_argument("max_value must be positive");
    const double scale = 1.0 / raw.max_value;

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(target, target);
    if (raw.rows == 28 && raw.cols == 28 && target >= 28) {
        const int pad = (target - 28) / 2;
        for (int r = 0; r < 28; ++r)
            for (int c = 0; c < 28; ++c) out(r + pad, c + pad) = raw.at(r, c) * scale;
        return ImageGrid(std::move(out));
    }
    for (int r = 0; r < target; ++r) {
        const Tap tr = bilinear_tap(r, raw.rows, target);
        for (int c = 0; c < target; ++c) {
            const Tap tc = bilinear_tap(c, raw.cols, target);
            const double top = (1 - tc.frac) * raw.at(tr.lo, tc.lo) + tc.frac * raw.at(tr.lo, tc.hi);
            const double bot = (1 - tc.frac) * raw.at(tr.hi, tc.lo) + tc.frac * raw.at(tr.hi, tc.hi);
            out(r, c) = ((1 - tr.frac) * top + tr.frac * bot) * scale;
        }
    }
    return ImageGrid(std::move(out));
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RawImage read_image_file(const fs::path& path) {
    if (has_extension(path, {".png"})) return read_png(path);
    if (has_extension(path, {".pgm"})) return read_pgm(path);
    throw std::invalid_argument("unsupported image format: " + path.string());
}

void write_image_file(const fs::path& path, const ImageGrid& image) {
    const int n = image.side();
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            buf[static_cast<std::size_t>(r) * n + c] =
                static_cast<std::uint8_t>(std::lround(std::clamp(image(r, c), 0.0, 1.0) * 255.0));

    if (has_extension(path, {".png"})) {
        png_image png{};
        png.version = PNG_IMAGE_VERSION;
        png.width = static_cast<png_uint_32>(n);
        png.height = static_cast<png_uint_32>(n);
        png.format = PNG_FORMAT_GRAY;
        if (!png_image_write_to_file(&png, path.c_str(), 0, buf.data(), 0, nullptr))
            throw std::runtime_error("cannot write PNG " + path.string() + ": " + png.message);
        return;
    }
    if (!has_extension(path, {".pgm"})) throw std::invalid_argument("unsupported image format: " + path.string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << n << ' ' << n << "\n255\n";
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void LabeledDataset::validate() const {
    if (images.size() != labels.size()) throw std::invalid_argument("image and label counts differ");
    for (int l : labels)
        if (!class_names.contains(l)) throw std::invalid_argument("label " + std::to_string(l) + " has no name");
}

LabeledDataset load_directory(const fs::path& root) {
    if (!fs::is_directory(root)) throw std::invalid_argument("not a directory: " + root.string());
    std::vector<fs::path> classes;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) classes.push_back(entry.path());
    std::ranges::sort(classes);
    if (classes.empty()) throw std::invalid_argument("no class directories under " + root.string());

    LabeledDataset data;
    for (std::size_t id = 0; id < classes.size(); ++id) {
        const std::string name = classes[id].filename().string();
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(classes[id]))
            if (entry.is_regular_file() && has_extension(entry.path(), {".png", ".pgm"}))
                files.push_back(entry.path());
        std::ranges::sort(files);

        std::size_t loaded = 0;
        for (const auto& file : files) {
            try {
                data.images.push_back(normalize(read_image_file(file)));
                data.labels.push_back(static_cast<int>(id));
                ++loaded;
            } catch (const std::exception& e) {
                std::cerr << "warning: skipping " << file.string() << ": " << e.what() << '\n';
            }
        }
        if (loaded == 0) throw std::invalid_argument("class '" + name + "' has no readable images");
        data.class_names[static_cast<int>(id)] = name;
    }
    return data;
}

LabeledDataset load_mnist_directory(const fs::path& dir) {
    std::vector<std::pair<fs::path, fs::path>> pairs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        for (const auto& [marker, label_marker] : {std::pair<std::string, std::string>{"-images-idx3-ubyte", "-labels-idx1-ubyte"},
                                                   {"-images.idx3-ubyte", "-labels.idx1-ubyte"}}) {
            const auto at = name.find(marker);
            if (at == std::string::npos) continue;
            std::string label_name = name;
            label_name.replace(at, marker.size(), label_marker);
            const fs::path label_path = dir / label_name;
            if (!fs::exists(label_path)) throw std::invalid_argument("missing label file " + label_path.string());
            pairs.emplace_back(entry.path(), label_path);
        }
    }
    if (pairs.empty()) throw std::invalid_argument("no IDX image files in " + dir.string());
    std::ranges::sort(pairs);

    LabeledDataset data;
    for (const auto& [img_path, lbl_path] : pairs) {
        const auto images = parse_idx_images(read_file_bytes(img_path));
        const auto labels = parse_idx_labels(read_file_bytes(lbl_path));
        if (images.size() != labels.size())
            throw std::invalid_argument(img_path.string() + ": image and label counts differ");
        for (std::size_t i = 0; i < images.size(); ++i) {
            data.images.push_back(normalize(images[i]));
            data.labels.push_back(labels[i]);
        }
    }
    for (int l : data.labels) data.class_names.try_emplace(l, std::to_string(l));
    return data;
}

LabeledDataset load_dataset(const fs::path& path) {
    if (!fs::is_directory(path)) throw std::invalid_argument("not a directory: " + path.string());
    for (const auto& entry : fs::directory_iterator(path))
        if (entry.path().filename().string().find("idx3-ubyte") != std::string::npos)
            return load_mnist_directory(path);
    return load_directory(path);
}

std::vector<std::size_t> limit_per_class(std::span<const int> labels, std::size_t per_class, std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> keep;
    for (auto& [label, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(std::min(idx.size(), per_class));
        keep.insert(keep.end(), idx.begin(), idx.end());
    }
    std::ranges::sort(keep);
    return keep;
}

LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> indices) {
    LabeledDataset out;
    out.class_names = data.class_names;
    for (auto i : indices) {
        out.images.push_back(data.images.at(i));
        out.labels.push_back(data.labels.at(i));
    }
    return out;
}

std::vector<std::size_t> FoldPlan::test_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] != fold) out.push_back(i);
    return out;
}

FoldPlan stratified_folds(std::span<const int> labels, int fold_count, std::uint64_t seed) {
    if (fold_count < 2) throw std::invalid_argument("fold_count must be >= 2");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (const auto& [label, idx] : by_class)
        if (static_cast<int>(idx.size()) < fold_count)
            throw std::invalid_argument("class " + std::to_string(label) + " has " + std::to_string(idx.size()) +
                                        " samples, fewer than " + std::to_string(fold_count) + " folds");

    FoldPlan plan;
    plan.fold_count = fold_count;
    plan.seed = seed;
    plan.assignments.assign(labels.size(), -1);
    std::mt19937_64 rng(seed);
    std::size_t dealt = 0;  // rotates the starting fold so fold totals stay balanced
    for (auto& [label, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t n = 0; n < idx.size(); ++n)
            plan.assignments[idx[n]] = static_cast<int>((dealt + n) % static_cast<std::size_t>(fold_count));
        dealt += idx.size();
    }
    return plan;
}

}  // namespace scct
