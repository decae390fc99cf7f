#include "scct/tetrolet.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "binary_io.hpp"
#include "scct/error.hpp"

namespace scct {

namespace {

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

// Responses of a block under one covering: row 0 low-pass, rows 1..3 high-pass.
Eigen::Matrix4d block_responses(const Eigen::Matrix4d& block, const Covering& cov) {
    Eigen::Matrix4d r = Eigen::Matrix4d::Zero();
    for (int cell = 0; cell < kBlockCells; ++cell) {
        const double v = block(cell % kBlockSide, cell / kBlockSide);
        const int a = cov.owner[cell];
        const int g = cov.order[cell];
        for (int l = 0; l < 4; ++l) r(l, a) += haar_coefficient(l, g) * v;
    }
    return r;
}

// Position of coefficient α inside its block's 2×2 output tile.
constexpr int tile_row(int alpha) { return alpha % 2; }
constexpr int tile_col(int alpha) { return alpha / 2; }

}  // namespace

ImageGrid::ImageGrid(Eigen::MatrixXd pixels) : pixels_(std::move(pixels)) {
    if (pixels_.rows() != pixels_.cols())
        throw std::invalid_argument("image must be square");
    if (!is_power_of_two(pixels_.rows()) || pixels_.rows() < 4)
        throw std::invalid_argument("image side " + std::to_string(pixels_.rows()) +
                                    " is not a power of two >= 4");
    if (!pixels_.allFinite()) throw std::invalid_argument("image contains non-finite pixels");
}

ImageGrid ImageGrid::constant(int side, double value) {
    return ImageGrid(Eigen::MatrixXd::Constant(side, side, value));
}

double covering_cost(const Eigen::Matrix4d& block, const Covering& cov) {
    return block_responses(block, cov).bottomRows<3>().cwiseAbs().sum();
}

BlockAnalysis analyze_block(const Eigen::Matrix4d& block, const CoveringCatalog& catalog,
                            const CoveringMode& mode, const CoveringFrequency& freq) {
    if (!block.allFinite()) throw std::invalid_argument("block contains non-finite values");
    if (mode.kind == CoveringKind::relaxed && !(mode.lambda >= 0.0 && std::isfinite(mode.lambda)))
        throw std::invalid_argument("relaxation tolerance must be finite and >= 0");

    const int count = static_cast<int>(catalog.size());
    std::vector<Eigen::Matrix4d> responses(count);
    std::vector<double> costs(count);
    double min_cost = std::numeric_limits<double>::infinity();
    int best = 0;
    for (int c = 0; c < count; ++c) {
        responses[c] = block_responses(block, catalog.coverings()[c]);
        costs[c] = responses[c].bottomRows<3>().cwiseAbs().sum();
        if (costs[c] < min_cost) {
            min_cost = costs[c];
            best = c;
        }
    }

    if (mode.kind == CoveringKind::relaxed) {
        const double bound = min_cost + mode.lambda;
        std::int64_t best_freq = -1;
        for (int c = 0; c < count; ++c) {
            if (costs[c] <= bound && freq[c] > best_freq) {
                best_freq = freq[c];
                best = c;
            }
        }
    }

    BlockAnalysis out;
    out.chosen = best + 1;
    out.chosen_cost = costs[best];
    out.min_cost = min_cost;
    for (int a = 0; a < 4; ++a) {
        out.lowpass[a] = responses[best](0, a);
        for (int l = 1; l < 4; ++l) out.highpass[l - 1][a] = responses[best](l, a);
    }
    return out;
}

std::size_t TetroletPyramid::coefficient_count() const {
    std::size_t n = static_cast<std::size_t>(lowpass.size());
    for (const auto& level : levels)
        for (const auto& plane : level.highpass) n += static_cast<std::size_t>(plane.size());
    return n;
}

std::size_t TetroletPyramid::covering_count() const {
    std::size_t n = 0;
    for (const auto& level : levels) n += static_cast<std::size_t>(level.coverings.size());
    return n;
}

int max_levels(int side) {
    if (side < 4 || !is_power_of_two(side))
        throw std::invalid_argument("side " + std::to_string(side) + " is not a power of two >= 4");
    return std::bit_width(static_cast<unsigned>(side)) - 2;
}

TetroletPyramid forward(const ImageGrid& image, int levels, const CoveringMode& mode,
                        const CoveringCatalog& catalog, const BlockObserver& observer) {
    const int side = image.side();
    if (side == 0) throw std::invalid_argument("empty image");
    if (levels < 1 || levels > max_levels(side))
        throw std::invalid_argument("level count " + std::to_string(levels) + " outside [1, " +
                                    std::to_string(max_levels(side)) + "]");

    TetroletPyramid pyr;
    pyr.side = side;
    pyr.mode = mode;
    CoveringFrequency freq{};
    Eigen::MatrixXd low = image.pixels();

    for (int m = 1; m <= levels; ++m) {
        const Eigen::Index blocks = low.rows() / kBlockSide;
        const Eigen::Index half = low.rows() / 2;
        PyramidLevel level;
        for (auto& plane : level.highpass) plane.setZero(half, half);
        level.coverings.setZero(blocks, blocks);
        Eigen::MatrixXd next(half, half);

        for (Eigen::Index bi = 0; bi < blocks; ++bi) {
            for (Eigen::Index bj = 0; bj < blocks; ++bj) {
                const Eigen::Matrix4d block = low.block<4, 4>(bi * kBlockSide, bj * kBlockSide);
                const auto res = analyze_block(block, catalog, mode, freq);
                if (observer) observer(m, block, res);
                ++freq[res.chosen - 1];
                level.coverings(bi, bj) = res.chosen;
                for (int a = 0; a < 4; ++a) {
                    const Eigen::Index r = 2 * bi + tile_row(a);
                    const Eigen::Index c = 2 * bj + tile_col(a);
                    next(r, c) = res.lowpass[a];
                    for (int l = 0; l < 3; ++l) level.highpass[l](r, c) = res.highpass[l][a];
                }
            }
        }
        pyr.levels.push_back(std::move(level));
        low = std::move(next);
    }
    pyr.lowpass = std::move(low);
    return pyr;
}

ImageGrid inverse(const TetroletPyramid& pyramid, const CoveringCatalog& catalog) {
    if (pyramid.levels.empty()) throw CorruptPyramid("pyramid has no levels");
    Eigen::MatrixXd low = pyramid.lowpass;

    for (auto it = pyramid.levels.rbegin(); it != pyramid.levels.rend(); ++it) {
        const auto& level = *it;
        const Eigen::Index half = low.rows();
        if (low.cols() != half || level.coverings.rows() * 2 != half ||
            level.coverings.cols() * 2 != half)
            throw CorruptPyramid("inconsistent plane sizes in pyramid");
        for (const auto& plane : level.highpass)
            if (plane.rows() != half || plane.cols() != half)
                throw CorruptPyramid("inconsistent high-pass plane size");

        Eigen::MatrixXd out(2 * half, 2 * half);
        for (Eigen::Index bi = 0; bi < level.coverings.rows(); ++bi) {
            for (Eigen::Index bj = 0; bj < level.coverings.cols(); ++bj) {
                const int c = level.coverings(bi, bj);
                if (c < 1 || c > static_cast<int>(catalog.size()))
                    throw CorruptPyramid("covering index " + std::to_string(c) + " outside 1.." +
                                         std::to_string(catalog.size()));
                const Covering& cov = catalog.at(c);
                Eigen::Matrix4d coef;  // row 0 low-pass, rows 1..3 high-pass
                for (int a = 0; a < 4; ++a) {
                    const Eigen::Index r = 2 * bi + tile_row(a);
                    const Eigen::Index col = 2 * bj + tile_col(a);
                    coef(0, a) = low(r, col);
                    for (int l = 0; l < 3; ++l) coef(l + 1, a) = level.highpass[l](r, col);
                }
                for (int cell = 0; cell < kBlockCells; ++cell) {
                    const int a = cov.owner[cell];
                    const int g = cov.order[cell];
                    double v = 0.0;
                    for (int l = 0; l < 4; ++l) v += haar_coefficient(l, g) * coef(l, a);
                    out(bi * kBlockSide + cell % kBlockSide, bj * kBlockSide + cell / kBlockSide) = v;
                }
            }
        }
        low = std::move(out);
    }
    if (low.rows() != pyramid.side) throw CorruptPyramid("reconstructed side does not match header");
    return ImageGrid(std::move(low));
}

TetroletPyramid shrink(const TetroletPyramid& pyramid, const ShrinkageConfig& config) {
    if (!(config.threshold >= 0.0) || !std::isfinite(config.threshold))
        throw std::invalid_argument("shrinkage threshold must be finite and >= 0");
    TetroletPyramid out = pyramid;
    if (config.mode == ShrinkageMode::none) return out;
    const double t = config.threshold;
    for (auto& level : out.levels) {
        for (auto& plane : level.highpass) {
            plane = plane.unaryExpr([t](double w) {
                const double mag = std::max(std::abs(w) - t, 0.0);  // (|w| - t)_+
                return w < 0.0 ? -mag : mag;
            });
        }
    }
    return out;
}

Eigen::VectorXd flatten(const TetroletPyramid& pyramid) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(pyramid.coefficient_count()));
    Eigen::Index pos = 0;
    auto append = [&](const Eigen::MatrixXd& plane) {
        for (Eigen::Index r = 0; r < plane.rows(); ++r)
            for (Eigen::Index c = 0; c < plane.cols(); ++c) out(pos++) = plane(r, c);
    };
    append(pyramid.lowpass);
    for (auto it = pyramid.levels.rbegin(); it != pyramid.levels.rend(); ++it)
        for (const auto& plane : it->highpass) append(plane);
    return out;
}

std::vector<std::int64_t> covering_stream(const TetroletPyramid& pyramid) {
    std::vector<std::int64_t> out;
    out.reserve(pyramid.covering_count());
    for (const auto& level : pyramid.levels)
        for (Eigen::Index r = 0; r < level.coverings.rows(); ++r)
            for (Eigen::Index c = 0; c < level.coverings.cols(); ++c)
                out.push_back(level.coverings(r, c));
    return out;
}

double bits_per_pixel(std::span<const std::int64_t> symbols) {
    if (symbols.empty()) throw std::invalid_argument("entropy of an empty symbol stream");
    std::map<std::int64_t, std::size_t> counts;
    for (auto s : symbols) ++counts[s];
    const double n = static_cast<double>(symbols.size());
    double bits = 0.0;
    for (const auto& [sym, cnt] : counts) {
        const double p = static_cast<double>(cnt) / n;
        bits -= p * std::log2(p);
    }
    return bits;
}

double side_info_cost(int side, int levels) {
    if (levels < 1 || levels > max_levels(side))
        throw std::invalid_argument("level count " + std::to_string(levels) + " invalid for side " +
                                    std::to_string(side));
    const double n2 = static_cast<double>(side) * side;
    return n2 / 12.0 * (1.0 - std::pow(4.0, -levels));
}

std::vector<std::uint8_t> serialize_pyramid(const TetroletPyramid& pyramid) {
    detail::ByteWriter w;
    w.u32(static_cast<std::uint32_t>(pyramid.side));
    w.u32(static_cast<std::uint32_t>(pyramid.levels_count()));
    w.u8(static_cast<std::uint8_t>(pyramid.mode.kind));
    w.f64(pyramid.mode.lambda);
    for (auto c : covering_stream(pyramid)) w.u8(static_cast<std::uint8_t>(c));
    const Eigen::VectorXd coef = flatten(pyramid);
    w.raw(coef.data(), static_cast<std::size_t>(coef.size()) * sizeof(double));
    return w.take();
}

TetroletPyramid deserialize_pyramid(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    const auto side = r.u32();
    const auto levels = r.u32();
    if (side < 4 || side > (1u << 15) || (side & (side - 1)) != 0)
        throw FormatError("bad pyramid side " + std::to_string(side), 0);
    if (levels < 1 || static_cast<int>(levels) > max_levels(static_cast<int>(side)))
        throw FormatError("bad pyramid level count " + std::to_string(levels), 4);
    const auto kind = r.u8();
    if (kind > 1) throw FormatError("bad covering mode " + std::to_string(kind), 8);

    TetroletPyramid pyr;
    pyr.side = static_cast<int>(side);
    pyr.mode.kind = static_cast<CoveringKind>(kind);
    pyr.mode.lambda = r.f64();

    Eigen::Index plane = static_cast<Eigen::Index>(side);
    for (std::uint32_t m = 0; m < levels; ++m) {
        PyramidLevel level;
        level.coverings.resize(plane / 4, plane / 4);
        for (Eigen::Index i = 0; i < plane / 4; ++i)
            for (Eigen::Index j = 0; j < plane / 4; ++j) level.coverings(i, j) = r.u8();
        plane /= 2;
        for (auto& hp : level.highpass) hp.resize(plane, plane);
        pyr.levels.push_back(std::move(level));
    }
    pyr.lowpass.resize(plane, plane);

    auto read_plane = [&](Eigen::MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
    };
    read_plane(pyr.lowpass);
    for (auto it = pyr.levels.rbegin(); it != pyr.levels.rend(); ++it)
        for (auto& hp : it->highpass) read_plane(hp);
    if (!r.done()) throw FormatError("trailing bytes after pyramid", r.offset());
    return pyr;
}

}  // namespace scct
