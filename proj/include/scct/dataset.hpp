#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scct/tetrolet.hpp"

namespace scct {

/// Grayscale raster as read from disk, row-major. `max_value` is the largest
/// value the source encoding can represent (255 for 8-bit data).
struct RawImage {
    int rows = 0;
    int cols = 0;
    std::vector<double> pixels;
    double max_value = 255.0;

    double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * cols + c]; }
};

/// IDX image container (magic 0x00000803). Throws FormatError with the byte
/// offset on a bad magic number or truncated payload.
std::vector<RawImage> parse_idx_images(std::span<const std::uint8_t> bytes);

/// IDX label container (magic 0x00000801), labels 0..9.
std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> write_idx_images(std::span<const RawImage> images);
std::vector<std::uint8_t> write_idx_labels(std::span<const int> labels);

/// 28×28 sources are zero-padded by two pixels on each side; any other size is
/// bilinearly resampled. Values are divided by the source's max_value.
ImageGrid normalize(const RawImage& raw, int target = 32);

/// Reads a binary or ASCII PGM, or a PNG (converted to grayscale).
RawImage read_image_file(const std::filesystem::path& path);

/// Writes an image with values clamped to [0,1] as 8-bit PGM or PNG, chosen by
/// extension.
void write_image_file(const std::filesystem::path& path, const ImageGrid& image);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

struct LabeledDataset {
    std::vector<ImageGrid> images;
    std::vector<int> labels;
    std::map<int, std::string> class_names;

    std::size_t size() const noexcept { return images.size(); }
    void validate() const;
};

/// `<root>/<class_name>/<file>.png|.pgm`; classes and files in sorted order,
/// class ids 0..P-1. Unreadable files are skipped with a warning on stderr.
LabeledDataset load_directory(const std::filesystem::path& root);

/// Every `<prefix>-images-idx3-ubyte` / `<prefix>-labels-idx1-ubyte` pair in
/// `dir` (also the `.idx3-ubyte` spelling), concatenated in prefix order.
LabeledDataset load_mnist_directory(const std::filesystem::path& dir);

/// IDX directory if it contains an idx3 file, class-directory corpus otherwise.
LabeledDataset load_dataset(const std::filesystem::path& path);

/// Keeps at most `per_class` samples of each class, picked with `seed`,
/// returned in ascending original order.
std::vector<std::size_t> limit_per_class(std::span<const int> labels, std::size_t per_class, std::uint64_t seed);

LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> indices);

struct FoldPlan {
    int fold_count = 5;
    std::vector<int> assignments;  // fold id per sample
    std::uint64_t seed = 0;

    std::vector<std::size_t> test_indices(int fold) const;
    std::vector<std::size_t> train_indices(int fold) const;
};

/// Shuffles each class with `seed` and deals it round-robin across folds, so
/// per-class fold sizes differ by at most one.
FoldPlan stratified_folds(std::span<const int> labels, int fold_count, std::uint64_t seed);

}  // namespace scct
