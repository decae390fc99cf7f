#include "scct/concept_coder.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "scct/error.hpp"

namespace scct {

void FeatureMatrix::validate() const {
    if (columns.cols() < 1 || columns.rows() < 1) throw std::invalid_argument("feature matrix is empty");
    if (!columns.allFinite()) throw std::invalid_argument("feature matrix has non-finite entries");
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != columns.cols())
        throw std::invalid_argument("label count does not match column count");
}

void CoderConfig::validate() const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
    if (!(rho >= 0.0)) throw std::invalid_argument("rho must be >= 0");
    if (graph_p < 1) throw std::invalid_argument("graph_p must be >= 1");
    if (!(eig_threshold > 0.0)) throw std::invalid_argument("eig_threshold must be > 0");
    if (!(affinity_floor >= 0.0)) throw std::invalid_argument("affinity_floor must be >= 0");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
}

Embedding spectral_embedding(const FeatureMatrix& X, const CoderConfig& config) {
    X.validate();
    config.validate();
    const Eigen::Index m = X.count();
    if (m < config.k + 1)
        throw std::invalid_argument("spectral embedding needs more than k=" + std::to_string(config.k) +
                                    " samples, got " + std::to_string(m));

    // Pairwise squared distances through the Gram matrix.
    const Eigen::MatrixXd gram = X.columns.transpose() * X.columns;
    const Eigen::VectorXd sq = gram.diagonal();
    const int p = static_cast<int>(std::min<Eigen::Index>(config.graph_p, m - 1));

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::vector<double> dist(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j)
            dist[j] = j == i ? std::numeric_limits<double>::infinity()
                             : std::max(sq(i) + sq(j) - 2.0 * gram(i, j), 0.0);
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::partial_sort(order.begin(), order.begin() + p, order.end(),
                          [&](Eigen::Index a, Eigen::Index b) {
                              return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
                          });
        for (int n = 0; n < p; ++n) {
            w(i, order[n]) = 1.0;
            w(order[n], i) = 1.0;
        }
    }
    w.array() += config.affinity_floor;
    w.diagonal().setZero();

    const Eigen::VectorXd inv_sqrt_deg = w.rowwise().sum().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd lap = -(inv_sqrt_deg.asDiagonal() * w * inv_sqrt_deg.asDiagonal());
    lap.diagonal().array() += 1.0;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
    if (eig.info() != Eigen::Success) throw std::runtime_error("Laplacian eigendecomposition failed");

    // Skip the trivial eigenvector at index 0.
    const double cutoff = config.eig_threshold * 2.0;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 1; c < m && static_cast<int>(keep.size()) < config.k; ++c)
        if (eig.eigenvalues()(c) <= cutoff) keep.push_back(c);
    if (static_cast<int>(keep.size()) < config.k)
        throw std::invalid_argument("only " + std::to_string(keep.size()) +
                                    " eigenvectors pass the eigenvalue threshold, k=" +
                                    std::to_string(config.k));

    Embedding out;
    out.Y.resize(m, config.k);
    out.eigenvalues.resize(config.k);
    for (int c = 0; c < config.k; ++c) {
        Eigen::VectorXd v = eig.eigenvectors().col(keep[c]);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        out.Y.col(c) = v;
        out.eigenvalues(c) = eig.eigenvalues()(keep[c]);
    }
    return out;
}

ConceptBasis learn_basis(const FeatureMatrix& X, const Embedding& Y, double tau) {
    X.validate();
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
    if (Y.Y.rows() != X.count())
        throw std::invalid_argument("embedding has " + std::to_string(Y.Y.rows()) + " rows, expected " +
                                    std::to_string(X.count()));
    Eigen::MatrixXd lhs = X.columns * X.columns.transpose();
    lhs.diagonal().array() += tau;
    ConceptBasis basis;
    basis.U = lhs.llt().solve(X.columns * Y.Y);
    basis.tau = tau;
    return basis;
}

LassoSolver::LassoSolver(const ConceptBasis& basis, double rho, double tol, int max_iter)
    : basis_(&basis), gram_(basis.U.transpose() * basis.U), rho_(rho), tol_(tol), max_iter_(max_iter) {
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be finite and >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

double LassoSolver::kkt_violation_from_correlation(const Eigen::VectorXd& g,
                                                    const Eigen::VectorXd& a) const {
    // g = Uᵀ(x − U a) is the negative gradient of the fidelity term.
    double worst = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        const double v = a(j) != 0.0 ? std::abs(g(j) - std::copysign(rho_, a(j)))
                                     : std::max(std::abs(g(j)) - rho_, 0.0);
        worst = std::max(worst, v);
    }
    return worst;
}

double LassoSolver::kkt_violation(const Eigen::VectorXd& x, const Eigen::VectorXd& a) const {
    const Eigen::VectorXd g = basis_->U.transpose() * (x - basis_->U * a);
    return kkt_violation_from_correlation(g, a);
}

Eigen::VectorXd LassoSolver::encode(const Eigen::VectorXd& x) const {
    if (x.size() != basis_->dim())
        throw std::invalid_argument("vector has dimension " + std::to_string(x.size()) + ", basis expects " +
                                    std::to_string(basis_->dim()));
    const Eigen::VectorXd corr = basis_->U.transpose() * x;
    const Eigen::Index k = corr.size();
    Eigen::VectorXd a = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd g = corr;

    double violation = kkt_violation_from_correlation(g, a);
    for (int sweep = 0; sweep < max_iter_; ++sweep) {
        if (violation <= tol_) return a;
        for (Eigen::Index j = 0; j < k; ++j) {
            const double gjj = gram_(j, j);
            if (gjj <= 0.0) continue;
            const double z = g(j) + gjj * a(j);
            const double updated = std::copysign(std::max(std::abs(z) - rho_, 0.0), z) / gjj;
            const double delta = updated - a(j);
            if (delta != 0.0) {
                g.noalias() -= gram_.col(j) * delta;
                a(j) = updated;
            }
        }
        g = corr - gram_ * a;  // refresh to shed accumulated round-off
        violation = kkt_violation_from_correlation(g, a);
    }
    if (violation <= tol_) return a;
    throw ConvergeFailure("lasso did not converge", max_iter_, violation);
}

Eigen::VectorXd lasso_encode(const Eigen::VectorXd& x, const ConceptBasis& basis, double rho, double tol,
                             int max_iter) {
    return LassoSolver(basis, rho, tol, max_iter).encode(x);
}

SparseCodes encode_matrix(const FeatureMatrix& X, const ConceptBasis& basis, const CoderConfig& config) {
    X.validate();
    if (X.dim() != basis.dim())
        throw std::invalid_argument("feature dimension " + std::to_string(X.dim()) +
                                    " does not match basis dimension " + std::to_string(basis.dim()));
    const LassoSolver solver(basis, config.rho, config.tol, config.max_iter);
    const Eigen::Index m = X.count();

    SparseCodes codes;
    codes.rho = config.rho;
    codes.A.resize(basis.k(), m);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(m));

#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index i = 0; i < m; ++i) {
        try {
            codes.A.col(i) = solver.encode(X.columns.col(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const ConvergeFailure& e) {
            throw ConvergeFailure("column " + std::to_string(i) + ": lasso did not converge", e.iterations(),
                                  e.kkt_violation());
        }
    }
    codes.reconstruction_error = (X.columns - basis.U * codes.A).norm();
    return codes;
}

Eigen::VectorXd project_test(const Eigen::VectorXd& x, const ConceptBasis& basis) {
    if (x.size() != basis.dim())
        throw std::invalid_argument("vector has dimension " + std::to_string(x.size()) + ", basis expects " +
                                    std::to_string(basis.dim()));
    return basis.U.transpose() * x;
}

}  // namespace scct
