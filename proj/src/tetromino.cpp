#include "scct/tetromino.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace scct {

namespace {

bool in_grid(GridIndex idx, int n) { return idx.i >= 0 && idx.j >= 0 && idx.i < n && idx.j < n; }

void require_in_grid(GridIndex idx, int n) {
    if (n <= 0 || !in_grid(idx, n))
        throw std::invalid_argument("grid index (" + std::to_string(idx.i) + "," +
                                    std::to_string(idx.j) + ") outside " +
                                    std::to_string(n) + "x" + std::to_string(n) + " grid");
}

bool adjacent(int a, int b) {
    const auto pa = from_linear_index(a, kBlockSide);
    const auto pb = from_linear_index(b, kBlockSide);
    return std::abs(pa.i - pb.i) + std::abs(pa.j - pb.j) == 1;
}

// Every 4-connected 4-cell subset of the block that contains `anchor` and
// otherwise only cells above it in linear order.
std::vector<std::array<int, 4>> shapes_anchored_at(int anchor, unsigned occupied) {
    std::set<std::array<int, 4>> found;
    std::vector<int> cur{anchor};
    auto grow = [&](auto&& self) -> void {
        if (cur.size() == 4) {
            std::array<int, 4> cells{cur[0], cur[1], cur[2], cur[3]};
            std::ranges::sort(cells);
            found.insert(cells);
            return;
        }
        for (int c : std::vector<int>(cur)) {
            for (auto nb : four_neighborhood(from_linear_index(c, kBlockSide), kBlockSide)) {
                const int cell = linear_index(nb, kBlockSide);
                if (cell < anchor || (occupied >> cell & 1u) || std::ranges::find(cur, cell) != cur.end())
                    continue;
                cur.push_back(cell);
                self(self);
                cur.pop_back();
            }
        }
    };
    grow(grow);
    return {found.begin(), found.end()};
}

}  // namespace

std::vector<GridIndex> four_neighborhood(GridIndex idx, int n) {
    require_in_grid(idx, n);
    std::vector<GridIndex> out;
    for (GridIndex nb : {GridIndex{idx.i - 1, idx.j}, GridIndex{idx.i + 1, idx.j},
                         GridIndex{idx.i, idx.j - 1}, GridIndex{idx.i, idx.j + 1}}) {
        if (in_grid(nb, n)) out.push_back(nb);
    }
    return out;
}

int linear_index(GridIndex idx, int n) {
    require_in_grid(idx, n);
    return idx.j * n + idx.i;
}

GridIndex from_linear_index(int index, int n) {
    if (n <= 0 || index < 0 || index >= n * n)
        throw std::invalid_argument("linear index " + std::to_string(index) + " out of range");
    return {index % n, index / n};
}

bool is_tetromino(const std::array<int, 4>& cells) {
    for (int c : cells)
        if (c < 0 || c >= kBlockCells) return false;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            if (cells[a] == cells[b]) return false;

    // Connectivity by flood fill from the first cell.
    std::array<bool, 4> seen{true, false, false, false};
    for (bool grew = true; grew;) {
        grew = false;
        for (int a = 0; a < 4; ++a) {
            if (!seen[a]) continue;
            for (int b = 0; b < 4; ++b) {
                if (!seen[b] && adjacent(cells[a], cells[b])) {
                    seen[b] = true;
                    grew = true;
                }
            }
        }
    }
    return std::ranges::all_of(seen, [](bool s) { return s; });
}

Covering make_covering(std::array<std::array<int, 4>, 4> parts) {
    Covering cov;
    unsigned used = 0;
    for (std::size_t a = 0; a < 4; ++a) {
        std::ranges::sort(parts[a]);
        if (!is_tetromino(parts[a])) throw std::invalid_argument("part is not a tetromino");
        for (int c : parts[a]) {
            if (used >> c & 1u) throw std::invalid_argument("tetrominoes overlap");
            used |= 1u << c;
        }
        cov.tetrominoes[a].cells = parts[a];
    }
    std::ranges::sort(cov.tetrominoes);
    for (int a = 0; a < 4; ++a) {
        for (int g = 0; g < 4; ++g) {
            const int cell = cov.tetrominoes[a].cells[g];
            cov.owner[cell] = a;
            cov.order[cell] = g;
        }
    }
    return cov;
}

CoveringCatalog::CoveringCatalog(std::vector<Covering> coverings) : coverings_(std::move(coverings)) {}

const Covering& CoveringCatalog::at(int c) const {
    if (c < 1 || c > static_cast<int>(coverings_.size()))
        throw std::out_of_range("covering index " + std::to_string(c) + " outside catalog");
    return coverings_[c - 1];
}

CoveringCatalog enumerate_coverings() {
    std::vector<Covering> out;
    std::array<std::array<int, 4>, 4> parts{};
    auto fill = [&](auto&& self, unsigned occupied, int placed) -> void {
        if (placed == 4) {
            out.push_back(make_covering(parts));
            return;
        }
        int anchor = 0;
        while (occupied >> anchor & 1u) ++anchor;
        for (const auto& shape : shapes_anchored_at(anchor, occupied)) {
            unsigned mask = 0;
            for (int c : shape) mask |= 1u << c;
            parts[placed] = shape;
            self(self, occupied | mask, placed + 1);
        }
    };
    fill(fill, 0u, 0);

    std::ranges::sort(out, [](const Covering& a, const Covering& b) {
        return a.tetrominoes < b.tetrominoes;
    });
    return CoveringCatalog(std::move(out));
}

const CoveringCatalog& covering_catalog() {
    static const CoveringCatalog catalog = enumerate_coverings();
    return catalog;
}

double haar_coefficient(int l, int gamma) {
    static constexpr int kSigns[4][4] = {
        {1, 1, 1, 1},
        {1, -1, 1, -1},
        {1, 1, -1, -1},
        {1, -1, -1, 1},
    };
    if (l < 0 || l > 3 || gamma < 0 || gamma > 3)
        throw std::invalid_argument("Haar index out of range");
    return 0.5 * kSigns[l][gamma];
}

}  // namespace scct
