#include "doctest.h"

#include <numeric>

#include "oracles.hpp"
#include "scct/concept_coder.hpp"
#include "scct/error.hpp"
#include "test_util.hpp"

using namespace scct;
using testutil::random_matrix;

namespace {

FeatureMatrix features(Eigen::MatrixXd cols) {
    FeatureMatrix fm;
    fm.columns = std::move(cols);
    return fm;
}

ConceptBasis basis_of(Eigen::MatrixXd U, double tau = 1.0) {
    ConceptBasis b;
    b.U = std::move(U);
    b.tau = tau;
    return b;
}

// Two Gaussian blobs of 50 points each, centred at ±offset along every axis.
Eigen::MatrixXd two_clusters(std::mt19937_64& rng, int dim, double offset) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd X(dim, 100);
    for (int j = 0; j < 100; ++j)
        for (int i = 0; i < dim; ++i) X(i, j) = n(rng) + (j < 50 ? offset : -offset);
    return X;
}

}  // namespace

TEST_CASE("spectral_embedding separates two clusters") {
    std::mt19937_64 rng(21);
    const auto X = features(two_clusters(rng, 6, 4.0));
    CoderConfig cfg;
    cfg.k = 1;
    const auto emb = spectral_embedding(X, cfg);
    REQUIRE(emb.Y.rows() == 100);
    REQUIRE(emb.Y.cols() == 1);

    const int sign0 = emb.Y(0, 0) > 0 ? 1 : -1;
    for (int j = 0; j < 100; ++j) CHECK((emb.Y(j, 0) > 0 ? 1 : -1) == (j < 50 ? sign0 : -sign0));

    // Independent Laplacian + Jacobi eigensolver.
    const auto [vals, vecs] = oracle::jacobi_eigen(oracle::knn_laplacian(X.columns, 5, 1e-6));
    CHECK(emb.eigenvalues(0) == doctest::Approx(vals(1)).epsilon(1e-9));
    const Eigen::VectorXd expected = vecs.col(1);
    const double align = std::abs(expected.dot(emb.Y.col(0)));
    CHECK(align == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("spectral_embedding columns are orthonormal and sign-fixed") {
    std::mt19937_64 rng(22);
    const auto X = features(random_matrix(10, 60, rng));
    CoderConfig cfg;
    cfg.k = 8;
    const auto emb = spectral_embedding(X, cfg);
    const Eigen::MatrixXd gram = emb.Y.transpose() * emb.Y;
    CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);
    for (int c = 0; c < 8; ++c) {
        Eigen::Index arg;
        emb.Y.col(c).cwiseAbs().maxCoeff(&arg);
        CHECK(emb.Y(arg, c) > 0.0);
    }
    for (int c = 1; c < 8; ++c) CHECK(emb.eigenvalues(c) >= emb.eigenvalues(c - 1));
}

TEST_CASE("spectral_embedding on identical columns") {
    const auto X = features(Eigen::MatrixXd::Constant(5, 20, 0.4));
    CoderConfig cfg;
    cfg.k = 3;
    Embedding emb;
    CHECK_NOTHROW(emb = spectral_embedding(X, cfg));
    CHECK(emb.Y.allFinite());
}

TEST_CASE("spectral_embedding is permutation invariant up to sign") {
    std::mt19937_64 rng(23);
    const Eigen::MatrixXd cols = random_matrix(5, 40, rng);
    CoderConfig cfg;
    cfg.k = 4;
    const auto base = spectral_embedding(features(cols), cfg);

    std::vector<int> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd shuffled(5, 40);
    for (int j = 0; j < 40; ++j) shuffled.col(j) = cols.col(perm[j]);
    const auto moved = spectral_embedding(features(shuffled), cfg);

    for (int c = 0; c < 4; ++c) {
        Eigen::VectorXd aligned(40);
        for (int j = 0; j < 40; ++j) aligned(j) = base.Y(perm[j], c);
        const double err = std::min((aligned - moved.Y.col(c)).cwiseAbs().maxCoeff(),
                                    (aligned + moved.Y.col(c)).cwiseAbs().maxCoeff());
        CHECK(err < 1e-8);
    }
}

TEST_CASE("spectral_embedding argument checks") {
    std::mt19937_64 rng(24);
    CoderConfig cfg;
    cfg.k = 10;
    CHECK_THROWS_AS(spectral_embedding(features(random_matrix(4, 10, rng)), cfg), std::invalid_argument);
    cfg.k = 5;
    cfg.eig_threshold = 1e-12;  // nothing but the trivial eigenvalue survives
    CHECK_THROWS_AS(spectral_embedding(features(random_matrix(4, 30, rng)), cfg), std::invalid_argument);
}

TEST_CASE("learn_basis closed form") {
    SUBCASE("identity features") {
        std::mt19937_64 rng(30);
        const Eigen::MatrixXd Y = random_matrix(6, 3, rng, -1, 1);
        const auto U = learn_basis(features(Eigen::MatrixXd::Identity(6, 6)), Embedding{Y, {}}, 0.5);
        CHECK((U.U - Y / 1.5).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("matches gradient descent and has zero gradient") {
        std::mt19937_64 rng(31);
        const Eigen::MatrixXd X = random_matrix(20, 8, rng, -1, 1);
        const Eigen::MatrixXd Y = random_matrix(8, 3, rng, -1, 1);
        const double tau = 0.1;
        const auto basis = learn_basis(features(X), Embedding{Y, {}}, tau);
        const Eigen::MatrixXd reference = oracle::ridge_gradient_descent(X, Y, tau, 200000);
        CHECK((basis.U - reference).cwiseAbs().maxCoeff() < 1e-6);

        const Eigen::MatrixXd grad = -2.0 * X * (Y - X.transpose() * basis.U) + 2.0 * tau * basis.U;
        CHECK(grad.cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("dimension mismatch") {
        std::mt19937_64 rng(32);
        CHECK_THROWS_AS(learn_basis(features(random_matrix(5, 8, rng)), Embedding{random_matrix(7, 2, rng), {}}, 1.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(learn_basis(features(random_matrix(5, 8, rng)), Embedding{random_matrix(8, 2, rng), {}}, 0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("lasso_encode") {
    std::mt19937_64 rng(40);
    SUBCASE("rho = 0 gives least squares") {
        const auto basis = basis_of(random_matrix(12, 4, rng, -1, 1));
        const Eigen::VectorXd x = random_matrix(12, 1, rng, -1, 1);
        const auto a = lasso_encode(x, basis, 0.0, 1e-12, 100000);
        const Eigen::VectorXd residual = x - basis.U * a;
        CHECK((basis.U.transpose() * residual).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("large rho gives zero") {
        const auto basis = basis_of(random_matrix(12, 4, rng, -1, 1));
        const Eigen::VectorXd x = random_matrix(12, 1, rng, -1, 1);
        const double rho = (basis.U.transpose() * x).cwiseAbs().maxCoeff();
        CHECK(lasso_encode(x, basis, rho).isZero(0.0));
        CHECK(lasso_encode(x, basis, 2 * rho).isZero(0.0));
    }
    SUBCASE("matches the orthant brute force") {
        for (int trial = 0; trial < 50; ++trial) {
            const int k = trial % 2 == 0 ? 3 : 4;
            const auto basis = basis_of(random_matrix(6, k, rng, -1, 1));
            const Eigen::VectorXd x = random_matrix(6, 1, rng, -1, 1);
            const double rho = 0.05 + 0.3 * (trial % 5) / 4.0;
            const auto a = lasso_encode(x, basis, rho, 1e-10, 100000);
            const auto expected = oracle::lasso_orthants(x, basis.U, rho);
            CHECK((a - expected).cwiseAbs().maxCoeff() < 1e-6);
            CHECK(LassoSolver(basis, rho, 1e-10, 1).kkt_violation(x, a) <= 1e-6);
        }
    }
    SUBCASE("non-convergence is reported") {
        const auto basis = basis_of(random_matrix(30, 10, rng, -1, 1));
        const Eigen::VectorXd x = random_matrix(30, 1, rng, -1, 1);
        try {
            lasso_encode(x, basis, 1e-3, 1e-14, 1);
            FAIL("expected ConvergeFailure");
        } catch (const ConvergeFailure& e) {
            CHECK(e.iterations() == 1);
            CHECK(e.kkt_violation() > 1e-14);
        }
    }
}

TEST_CASE("KKT conditions hold on the default tolerance") {
    std::mt19937_64 rng(41);
    const auto basis = basis_of(random_matrix(40, 8, rng, -1, 1));
    const LassoSolver solver(basis, 0.2, 1e-7, 10000);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd x = random_matrix(40, 1, rng, -1, 1);
        const auto a = solver.encode(x);
        const Eigen::VectorXd g = basis.U.transpose() * (x - basis.U * a);
        for (int j = 0; j < 8; ++j) {
            if (a(j) != 0.0)
                CHECK(std::abs(g(j) - 0.2 * (a(j) > 0 ? 1 : -1)) <= 1e-7);
            else
                CHECK(std::abs(g(j)) <= 0.2 + 1e-7);
        }
    }
}

TEST_CASE("encode_matrix") {
    std::mt19937_64 rng(50);
    CoderConfig cfg;
    SUBCASE("columns of U are coded as indicators") {
        const auto basis = basis_of(random_matrix(15, 4, rng, -1, 1));
        double previous = std::numeric_limits<double>::infinity();
        for (double rho : {1e-2, 1e-4, 1e-6}) {
            cfg.rho = rho;
            const auto codes = encode_matrix(features(basis.U), basis, cfg);
            CHECK((codes.A - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 100 * rho);
            CHECK(codes.reconstruction_error <= previous);
            previous = codes.reconstruction_error;
        }
        CHECK(previous < 1e-4);
    }
    SUBCASE("each column equals lasso_encode") {
        const auto basis = basis_of(random_matrix(15, 5, rng, -1, 1));
        const Eigen::MatrixXd X = random_matrix(15, 10, rng, -1, 1);
        cfg.rho = 0.1;
        const auto codes = encode_matrix(features(X), basis, cfg);
        for (int i = 0; i < 10; ++i)
            CHECK(codes.A.col(i) == lasso_encode(X.col(i), basis, cfg.rho, cfg.tol, cfg.max_iter));
        CHECK(codes.reconstruction_error == doctest::Approx((X - basis.U * codes.A).norm()));
    }
    SUBCASE("sparsity grows and fit worsens with rho") {
        const auto basis = basis_of(random_matrix(30, 12, rng, -1, 1));
        const Eigen::MatrixXd X = random_matrix(30, 25, rng, -1, 1);
        double last_sparsity = -1.0;
        double last_error = -1.0;
        for (double rho : {0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0}) {
            cfg.rho = rho;
            const auto codes = encode_matrix(features(X), basis, cfg);
            const double sparsity = static_cast<double>((codes.A.array().abs() < 1e-12).count()) / codes.A.size();
            CHECK(sparsity >= last_sparsity);
            CHECK(codes.reconstruction_error >= last_error - 1e-9);
            last_sparsity = sparsity;
            last_error = codes.reconstruction_error;
        }
    }
    SUBCASE("dimension mismatch") {
        const auto basis = basis_of(random_matrix(15, 5, rng));
        CHECK_THROWS_AS(encode_matrix(features(random_matrix(14, 3, rng)), basis, cfg), std::invalid_argument);
    }
    SUBCASE("failures name the column") {
        const auto basis = basis_of(random_matrix(20, 8, rng, -1, 1));
        cfg.rho = 1e-3;
        cfg.tol = 1e-15;
        cfg.max_iter = 1;
        CHECK_THROWS_WITH_AS(encode_matrix(features(random_matrix(20, 3, rng, -1, 1)), basis, cfg),
                             doctest::Contains("column 0"), ConvergeFailure);
    }
}

TEST_CASE("project_test") {
    std::mt19937_64 rng(60);
    const auto basis = basis_of(random_matrix(10, 3, rng, -1, 1));
    CHECK(project_test(Eigen::VectorXd::Zero(10), basis).isZero(0.0));
    for (int d = 0; d < 10; ++d)
        CHECK(project_test(Eigen::VectorXd::Unit(10, d), basis) == basis.U.row(d).transpose());
    const Eigen::VectorXd x = random_matrix(10, 1, rng), y = random_matrix(10, 1, rng);
    CHECK((project_test(x + y, basis) - project_test(x, basis) - project_test(y, basis)).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK_THROWS_AS(project_test(Eigen::VectorXd::Zero(9), basis), std::invalid_argument);
}
