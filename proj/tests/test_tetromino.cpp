#include "doctest.h"

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "scct/tetromino.hpp"

using namespace scct;

TEST_CASE("four_neighborhood") {
    SUBCASE("interior") {
        auto nb = four_neighborhood({2, 2}, 8);
        std::ranges::sort(nb);
        CHECK(nb == std::vector<GridIndex>{{1, 2}, {2, 1}, {2, 3}, {3, 2}});
    }
    SUBCASE("corner") {
        auto nb = four_neighborhood({0, 0}, 4);
        std::ranges::sort(nb);
        CHECK(nb == std::vector<GridIndex>{{0, 1}, {1, 0}});
    }
    SUBCASE("bottom-left edge") {
        auto nb = four_neighborhood({3, 0}, 4);
        std::ranges::sort(nb);
        CHECK(nb == std::vector<GridIndex>{{2, 0}, {3, 1}});
    }
    SUBCASE("outside grid") {
        CHECK_THROWS_AS(four_neighborhood({4, 0}, 4), std::invalid_argument);
        CHECK_THROWS_AS(four_neighborhood({0, -1}, 4), std::invalid_argument);
    }
}

TEST_CASE("linear_index") {
    CHECK(linear_index({0, 0}, 4) == 0);
    CHECK(linear_index({2, 3}, 4) == 14);
    CHECK_THROWS_AS(linear_index({0, 4}, 4), std::invalid_argument);

    std::set<int> seen;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const int idx = linear_index({i, j}, 4);
            seen.insert(idx);
            CHECK(from_linear_index(idx, 4) == GridIndex{i, j});
        }
    CHECK(seen.size() == 16);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 15);
}

TEST_CASE("is_tetromino") {
    CHECK(is_tetromino({0, 1, 2, 3}));     // vertical I
    CHECK(is_tetromino({0, 4, 8, 12}));    // horizontal I
    CHECK(is_tetromino({0, 1, 4, 5}));     // O
    CHECK_FALSE(is_tetromino({0, 1, 2, 2}));
    CHECK_FALSE(is_tetromino({0, 1, 8, 9}));   // two dominoes
    CHECK_FALSE(is_tetromino({0, 5, 10, 15})); // diagonal
    CHECK_FALSE(is_tetromino({0, 1, 2, 16}));
}

TEST_CASE("enumerate_coverings matches the brute-force tiler") {
    const auto catalog = enumerate_coverings();
    REQUIRE(catalog.size() == 117);

    const auto expected = oracle::brute_force_tilings();
    REQUIRE(expected.size() == 117);
    for (std::size_t c = 0; c < expected.size(); ++c) {
        const auto& cov = catalog.coverings()[c];
        for (int a = 0; a < 4; ++a) CHECK(cov.tetrominoes[a].cells == expected[c][a]);
    }
}

TEST_CASE("catalog invariants") {
    const auto& catalog = covering_catalog();
    std::set<std::array<Tetromino, 4>> distinct;
    for (const auto& cov : catalog.coverings()) {
        distinct.insert(cov.tetrominoes);
        unsigned covered = 0;
        for (int a = 0; a < 4; ++a) {
            const auto& t = cov.tetrominoes[a];
            CHECK(is_tetromino(t.cells));
            CHECK(oracle::connected(t.cells));
            std::set<int> orders;
            for (int g = 0; g < 4; ++g) {
                const int cell = t.cells[g];
                CHECK((covered >> cell & 1u) == 0u);
                covered |= 1u << cell;
                CHECK(cov.owner[cell] == a);
                orders.insert(cov.order[cell]);
            }
            CHECK(orders == std::set<int>{0, 1, 2, 3});  // Γ is a bijection
            CHECK(std::ranges::is_sorted(t.cells));
        }
        CHECK(covered == 0xFFFFu);
        CHECK(std::ranges::is_sorted(cov.tetrominoes));
    }
    CHECK(distinct.size() == 117);
    CHECK(std::ranges::is_sorted(catalog.coverings(), [](const Covering& a, const Covering& b) {
        return a.tetrominoes < b.tetrominoes;
    }));
}

TEST_CASE("enumeration is deterministic") {
    const auto a = enumerate_coverings();
    const auto b = enumerate_coverings();
    CHECK(a.coverings() == b.coverings());
}

TEST_CASE("catalog index is 1-based") {
    const auto& catalog = covering_catalog();
    CHECK(catalog.at(1) == catalog.coverings().front());
    CHECK(catalog.at(117) == catalog.coverings().back());
    CHECK_THROWS(catalog.at(0));
    CHECK_THROWS(catalog.at(118));
}

TEST_CASE("make_covering rejects bad partitions") {
    CHECK_THROWS_AS(make_covering({{{0, 1, 2, 3}, {0, 4, 8, 12}, {5, 6, 7, 9}, {10, 11, 13, 14}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_covering({{{0, 1, 8, 9}, {2, 3, 6, 7}, {4, 5, 12, 13}, {10, 11, 14, 15}}}),
                    std::invalid_argument);
}

TEST_CASE("Haar matrix") {
    for (int g = 0; g < 4; ++g) CHECK(haar_coefficient(0, g) == 0.5);
    for (int l = 0; l < 4; ++l) {
        for (int m = 0; m < 4; ++m) {
            double dot = 0.0;
            for (int g = 0; g < 4; ++g) dot += haar_coefficient(l, g) * haar_coefficient(m, g);
            CHECK(dot == doctest::Approx(l == m ? 1.0 : 0.0));
        }
    }
    CHECK_THROWS_AS(haar_coefficient(4, 0), std::invalid_argument);
    CHECK_THROWS_AS(haar_coefficient(0, -1), std::invalid_argument);
}
