#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace scct {

/// Row/column position on an N×N grid.
struct GridIndex {
    int i = 0;  // row
    int j = 0;  // column

    friend bool operator==(const GridIndex&, const GridIndex&) = default;
    friend auto operator<=>(const GridIndex&, const GridIndex&) = default;
};

/// In-grid subset of the four-neighbourhood of `idx`. Throws
/// std::invalid_argument when `idx` lies outside the grid.
std::vector<GridIndex> four_neighborhood(GridIndex idx, int n);

/// Column-major linear index j*n + i.
int linear_index(GridIndex idx, int n);
GridIndex from_linear_index(int index, int n);

inline constexpr int kBlockSide = 4;
inline constexpr int kBlockCells = kBlockSide * kBlockSide;
inline constexpr int kCoveringCount = 117;

/// Four cells of a 4×4 block, stored by ascending linear index. The position
/// of a cell in `cells` is its pixel order Γ.
struct Tetromino {
    std::array<int, 4> cells{};

    friend bool operator==(const Tetromino&, const Tetromino&) = default;
    friend auto operator<=>(const Tetromino&, const Tetromino&) = default;
};

/// True when the four cells are distinct, inside the block and 4-connected.
bool is_tetromino(const std::array<int, 4>& cells);

/// A partition of the 4×4 block into four tetrominoes, ordered by their
/// smallest cell.
struct Covering {
    std::array<Tetromino, 4> tetrominoes{};

    /// owner[cell] = α, order[cell] = Γ for each of the 16 block cells.
    std::array<int, kBlockCells> owner{};
    std::array<int, kBlockCells> order{};

    friend bool operator==(const Covering& a, const Covering& b) {
        return a.tetrominoes == b.tetrominoes;
    }
};

/// Builds a covering from four cell sets; sorts cells and tetrominoes into
/// canonical order and fills the lookup tables. Throws std::invalid_argument
/// if the sets do not form a partition into tetrominoes.
Covering make_covering(std::array<std::array<int, 4>, 4> parts);

/// The 117 tetromino coverings of the 4×4 block in canonical order. Catalog
/// index c (1-based) refers to entry c-1.
class CoveringCatalog {
public:
    explicit CoveringCatalog(std::vector<Covering> coverings);

    std::size_t size() const noexcept { return coverings_.size(); }
    const Covering& at(int c) const;  // 1-based
    const std::vector<Covering>& coverings() const noexcept { return coverings_; }

private:
    std::vector<Covering> coverings_;
};

/// Depth-first tiler: fills the lowest empty cell with every fixed tetromino
/// shape anchored there.
CoveringCatalog enumerate_coverings();

/// Shared catalog, built on first use.
const CoveringCatalog& covering_catalog();

/// Entry ε[l, γ] of the orthonormal 4×4 Haar matrix.
double haar_coefficient(int l, int gamma);

}  // namespace scct
