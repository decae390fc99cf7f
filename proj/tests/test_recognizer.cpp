#include "doctest.h"

#include <cmath>

#include "scct/error.hpp"
#include "scct/recognizer.hpp"
#include "test_util.hpp"

using namespace scct;
using testutil::random_matrix;

namespace {

FeatureMatrix features(Eigen::MatrixXd cols) {
    FeatureMatrix fm;
    fm.columns = std::move(cols);
    return fm;
}

// Normalized distance computed directly, column by column.
double brute_score(const Eigen::VectorXd& a, const Eigen::MatrixXd& A) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        double sq = 0.0;
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            const double d = a(i) / a.cwiseAbs().sum() - A(i, j) / A.col(j).cwiseAbs().sum();
            sq += d * d;
        }
        best = std::min(best, std::sqrt(sq));
    }
    return best;
}

TrainingSet training_of(std::map<int, Eigen::MatrixXd> codes, int k) {
    TrainingSet t;
    t.class_codes = std::move(codes);
    t.basis.U = Eigen::MatrixXd::Identity(k, k);
    t.basis.tau = 1.0;
    return t;
}

}  // namespace

TEST_CASE("score examples") {
    const Eigen::Vector4d a(0.3, -0.2, 0.0, 1.5);
    Eigen::MatrixXd A(4, 2);
    A.col(0) = Eigen::Vector4d(1, 1, 1, 1);
    A.col(1) = 7.5 * a;
    CHECK(score(a, A) == doctest::Approx(0.0).epsilon(1e-15));

    const Eigen::MatrixXd single = Eigen::Vector4d(0, 1, 0, 0);
    CHECK(score(Eigen::Vector4d(1, 0, 0, 0), single) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("score is the minimum over columns") {
    std::mt19937_64 rng(70);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd a = random_matrix(6, 1, rng, -1, 1);
        const Eigen::MatrixXd A = random_matrix(6, 5, rng, -1, 1);
        CHECK(score(a, A) == doctest::Approx(brute_score(a, A)).epsilon(1e-12));
        for (double c : {0.01, 3.0, 1e6}) CHECK(score(c * a, A) == doctest::Approx(score(a, A)).epsilon(1e-12));

        Eigen::MatrixXd grown(6, 6);
        grown << A, random_matrix(6, 1, rng, -1, 1);
        CHECK(score(a, grown) <= score(a, A));
    }
}

TEST_CASE("score zero guard") {
    const Eigen::MatrixXd uniform = Eigen::Vector3d(2, 2, 2);
    CHECK(score(Eigen::Vector3d::Zero(), uniform) == doctest::Approx(0.0));

    Eigen::MatrixXd with_zero(3, 1);
    with_zero.setZero();
    const double s = score(Eigen::Vector3d(1, 0, 0), with_zero);
    CHECK(std::isfinite(s));
    CHECK(s == doctest::Approx((Eigen::Vector3d(1, 0, 0) - Eigen::Vector3d::Constant(1.0 / 3)).norm()));

    CHECK_THROWS_AS(score(Eigen::Vector2d(1, 0), with_zero), std::invalid_argument);
}

TEST_CASE("classify") {
    std::mt19937_64 rng(71);
    SUBCASE("exact training column wins with score 0") {
        std::map<int, Eigen::MatrixXd> codes;
        for (int p = 1; p <= 4; ++p) codes[p] = random_matrix(5, 3, rng, -1, 1);
        const auto t = training_of(codes, 5);
        const auto c = classify(codes[3].col(1), t);
        CHECK(c.class_id == 3);
        CHECK(c.score == doctest::Approx(0.0).epsilon(1e-15));
        REQUIRE(c.per_class.size() == 4);
        for (int p = 0; p < 4; ++p) CHECK(c.per_class[p].class_id == p + 1);
    }
    SUBCASE("identical dictionaries tie to the lowest id") {
        const Eigen::MatrixXd shared = random_matrix(5, 3, rng, -1, 1);
        const auto t = training_of({{1, shared}, {2, shared}}, 5);
        CHECK(classify(random_matrix(5, 1, rng, -1, 1), t).class_id == 1);
    }
    SUBCASE("argmin contract") {
        std::map<int, Eigen::MatrixXd> codes;
        for (int p = 1; p <= 6; ++p) codes[p] = random_matrix(8, 4, rng, -1, 1);
        const auto t = training_of(codes, 8);
        for (int trial = 0; trial < 30; ++trial) {
            const auto c = classify(random_matrix(8, 1, rng, -1, 1), t);
            CHECK(codes.contains(c.class_id));
            double lowest = std::numeric_limits<double>::infinity();
            for (const auto& s : c.per_class) lowest = std::min(lowest, s.score);
            CHECK(c.score == lowest);
        }
    }
    SUBCASE("adding a column only touches its own class") {
        std::map<int, Eigen::MatrixXd> codes;
        for (int p = 1; p <= 3; ++p) codes[p] = random_matrix(5, 2, rng, -1, 1);
        const Eigen::VectorXd a = random_matrix(5, 1, rng, -1, 1);
        const auto before = classify(a, training_of(codes, 5));
        Eigen::MatrixXd grown(5, 3);
        grown << codes[2], random_matrix(5, 1, rng, -1, 1);
        codes[2] = grown;
        const auto after = classify(a, training_of(codes, 5));
        CHECK(after.per_class[0].score == before.per_class[0].score);
        CHECK(after.per_class[1].score <= before.per_class[1].score);
        CHECK(after.per_class[2].score == before.per_class[2].score);
    }
    SUBCASE("empty training set") {
        CHECK_THROWS_AS(classify(Eigen::Vector2d(1, 0), TrainingSet{}), std::invalid_argument);
    }
}

TEST_CASE("build_training_set") {
    std::mt19937_64 rng(72);
    ConceptBasis basis;
    basis.U = random_matrix(10, 4, rng, -1, 1);
    basis.tau = 1.0;
    CoderConfig cfg;
    cfg.rho = 0.05;

    SUBCASE("one column per class") {
        const Eigen::MatrixXd x1 = random_matrix(10, 1, rng), x2 = random_matrix(10, 1, rng);
        const auto t = build_training_set({{1, features(x1)}, {2, features(x2)}}, basis, cfg);
        REQUIRE(t.class_count() == 2);
        CHECK(t.class_codes.at(1) == lasso_encode(x1.col(0), basis, cfg.rho, cfg.tol, cfg.max_iter));
        CHECK(t.class_codes.at(2) == lasso_encode(x2.col(0), basis, cfg.rho, cfg.tol, cfg.max_iter));
        CHECK(t.total_columns() == 2);
    }
    SUBCASE("column permutation and conservation") {
        const Eigen::MatrixXd x = random_matrix(10, 4, rng);
        Eigen::MatrixXd swapped = x;
        swapped.col(0).swap(swapped.col(3));
        const auto t = build_training_set({{1, features(x)}, {2, features(swapped)}, {5, features(x.leftCols(1))}},
                                          basis, cfg);
        Eigen::MatrixXd expected = t.class_codes.at(1);
        expected.col(0).swap(expected.col(3));
        CHECK(t.class_codes.at(2) == expected);
        CHECK(t.total_columns() == 9);
    }
    SUBCASE("empty class is named") {
        CHECK_THROWS_WITH_AS(
            build_training_set({{1, features(random_matrix(10, 2, rng))}, {4, features(Eigen::MatrixXd(10, 0))}},
                               basis, cfg),
            doctest::Contains("class 4"), std::invalid_argument);
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(build_training_set({{1, features(random_matrix(9, 2, rng))}}, basis, cfg),
                        std::invalid_argument);
    }
}

TEST_CASE("recognize_image") {
    std::mt19937_64 rng(73);
    TransformConfig transform;
    transform.mode = CoveringMode::strict();

    // With U = I on the Tetrolet coefficients, the test projection is the
    // vector itself and ρ→0 codes reproduce the training vectors.
    std::vector<ImageGrid> images;
    std::map<int, FeatureMatrix> per_class;
    for (int p = 1; p <= 3; ++p) {
        Eigen::MatrixXd cols(1024, 2);
        for (int j = 0; j < 2; ++j) {
            images.push_back(testutil::random_image(32, rng));
            cols.col(j) = tetrolet_features(images.back(), transform);
        }
        per_class[p] = features(cols);
    }
    ConceptBasis basis;
    basis.U = Eigen::MatrixXd::Identity(1024, 1024);
    basis.tau = 1.0;
    CoderConfig cfg;
    cfg.rho = 0.0;
    const auto training = build_training_set(per_class, basis, cfg);

    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto c = recognize_image(images[i], training, transform);
        CHECK(c.class_id == static_cast<int>(i / 2) + 1);
        CHECK(c.score < 1e-12);
        const auto again = recognize_image(images[i], training, transform);
        CHECK(again.class_id == c.class_id);
        CHECK(again.score == c.score);
    }
}

TEST_CASE("model serialization") {
    std::mt19937_64 rng(74);
    RecognitionModel model;
    model.transform.levels = 3;
    model.transform.mode = CoveringMode::relaxed(0.75);
    model.transform.shrinkage = {ShrinkageMode::hard_positive_part, 0.01};
    model.coder.rho = 0.002;
    model.training.basis.U = random_matrix(16, 3, rng);
    model.training.basis.tau = 42.0;
    model.training.class_codes = {{0, random_matrix(3, 2, rng)}, {7, random_matrix(3, 4, rng)}};
    model.class_names = {{0, "zero"}, {7, "seven \xc3\xa9"}};

    const auto bytes = serialize_model(model);
    CHECK(bytes.size() == 4 + 4 * 4 + 8 * 2 + 4 + 1 + 8 + 1 + 8 + 16 * 3 * 8 + 4 + (8 + 6 * 8) + (8 + 8 * 12) + 4 +
                              (8 + 4) + (8 + 8));
    const auto back = deserialize_model(bytes);
    CHECK(back.transform.levels == 3);
    CHECK(back.transform.mode.kind == CoveringKind::relaxed);
    CHECK(back.transform.mode.lambda == 0.75);
    CHECK(back.transform.shrinkage.mode == ShrinkageMode::hard_positive_part);
    CHECK(back.transform.shrinkage.threshold == 0.01);
    CHECK(back.coder.rho == 0.002);
    CHECK(back.training.basis.tau == 42.0);
    CHECK(back.training.basis.U == model.training.basis.U);
    CHECK(back.training.class_codes == model.training.class_codes);
    CHECK(back.class_names == model.class_names);
    CHECK(serialize_model(back) == bytes);

    SUBCASE("bad magic") {
        auto broken = bytes;
        broken[0] = 'X';
        CHECK_THROWS_AS(deserialize_model(broken), FormatError);
    }
    SUBCASE("truncation is reported at every length") {
        for (std::size_t n = 0; n < bytes.size(); n += 7)
            CHECK_THROWS_AS(deserialize_model(std::span(bytes.data(), n)), FormatError);
    }
    SUBCASE("trailing bytes") {
        auto longer = bytes;
        longer.push_back(0);
        CHECK_THROWS_AS(deserialize_model(longer), FormatError);
    }
}
