#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scct/tetromino.hpp"

namespace scct {

/// Square image of side N = 2^n (n >= 2) with finite pixel values.
class ImageGrid {
public:
    ImageGrid() = default;
    explicit ImageGrid(Eigen::MatrixXd pixels);

    static ImageGrid constant(int side, double value);

    int side() const noexcept { return static_cast<int>(pixels_.rows()); }
    const Eigen::MatrixXd& pixels() const noexcept { return pixels_; }
    double operator()(int i, int j) const { return pixels_(i, j); }

private:
    Eigen::MatrixXd pixels_;
};

enum class CoveringKind : std::uint8_t { strict = 0, relaxed = 1 };

/// Covering selection rule. `lambda` is the cost tolerance of relaxed mode.
struct CoveringMode {
    CoveringKind kind = CoveringKind::strict;
    double lambda = 0.0;

    static CoveringMode strict() { return {CoveringKind::strict, 0.0}; }
    static CoveringMode relaxed(double lambda = 25.0) { return {CoveringKind::relaxed, lambda}; }

    friend bool operator==(const CoveringMode&, const CoveringMode&) = default;
};

/// How often each catalog entry has been picked so far (index c-1).
using CoveringFrequency = std::array<std::int64_t, kCoveringCount>;

struct BlockAnalysis {
    std::array<double, 4> lowpass{};
    std::array<std::array<double, 4>, 3> highpass{};  // [l-1][α]
    int chosen = 1;                                   // catalog index, 1-based
    double chosen_cost = 0.0;
    double min_cost = 0.0;
};

/// l1 norm of the twelve high-pass responses of `block` under covering `cov`.
double covering_cost(const Eigen::Matrix4d& block, const Covering& cov);

/// Analyzes one 4×4 block under every covering and keeps the cheapest (strict)
/// or the most frequently used one within `lambda` of the cheapest (relaxed).
BlockAnalysis analyze_block(const Eigen::Matrix4d& block, const CoveringCatalog& catalog,
                            const CoveringMode& mode, const CoveringFrequency& freq);

/// One decomposition level: three high-pass planes and the chosen covering of
/// each 4×4 block of the previous low-pass plane.
struct PyramidLevel {
    std::array<Eigen::MatrixXd, 3> highpass;
    Eigen::MatrixXi coverings;
};

struct TetroletPyramid {
    int side = 0;
    CoveringMode mode;
    std::vector<PyramidLevel> levels;  // levels[0] is the finest
    Eigen::MatrixXd lowpass;

    int levels_count() const noexcept { return static_cast<int>(levels.size()); }
    std::size_t coefficient_count() const;
    std::size_t covering_count() const;
};

/// Largest admissible level count for an image of side `side`.
int max_levels(int side);

/// Called once per analyzed block with its 1-based level.
using BlockObserver = std::function<void(int level, const Eigen::Matrix4d& block, const BlockAnalysis& result)>;

/// Decomposes `image` over `levels` levels, blocks in row-major order within a
/// level. In relaxed mode the covering frequencies accumulate across all
/// blocks of the image.
TetroletPyramid forward(const ImageGrid& image, int levels, const CoveringMode& mode,
                        const CoveringCatalog& catalog = covering_catalog(), const BlockObserver& observer = {});

/// Exact synthesis. Throws CorruptPyramid on malformed side information.
ImageGrid inverse(const TetroletPyramid& pyramid,
                  const CoveringCatalog& catalog = covering_catalog());

enum class ShrinkageMode : std::uint8_t { none, hard_positive_part };

struct ShrinkageConfig {
    ShrinkageMode mode = ShrinkageMode::none;
    double threshold = 0.0;
};

/// Soft-thresholds every high-pass coefficient with the positive-part function.
TetroletPyramid shrink(const TetroletPyramid& pyramid, const ShrinkageConfig& config);

/// Final low-pass plane, then w1, w2, w3 of each level from coarsest to
/// finest. Planes are read row by row.
Eigen::VectorXd flatten(const TetroletPyramid& pyramid);

/// Covering indices in processing order: level by level, finest first, blocks
/// row by row.
std::vector<std::int64_t> covering_stream(const TetroletPyramid& pyramid);

/// Empirical Shannon entropy in bits per symbol.
double bits_per_pixel(std::span<const std::int64_t> symbols);

/// Number of covering values stored by a J-level decomposition of an N×N image.
double side_info_cost(int side, int levels);

/// Little-endian binary layout: u32 N, u32 J, u8 mode, f64 lambda, covering maps
/// as u8 in covering_stream order, coefficients as f64 in flatten order.
std::vector<std::uint8_t> serialize_pyramid(const TetroletPyramid& pyramid);
TetroletPyramid deserialize_pyramid(std::span<const std::uint8_t> bytes);

}  // namespace scct
