#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace scct {

/// Training vectors stored as columns (D × M), with a class id per column.
struct FeatureMatrix {
    Eigen::MatrixXd columns;
    std::vector<int> labels;

    Eigen::Index dim() const noexcept { return columns.rows(); }
    Eigen::Index count() const noexcept { return columns.cols(); }

    /// Throws std::invalid_argument unless M >= 1, entries are finite and
    /// labels (when present) match the column count.
    void validate() const;
};

struct CoderConfig {
    int k = 64;                // concept dimension
    double tau = 1000.0;       // ridge regularizer
    double rho = 1e-3;         // lasso regularizer
    int graph_p = 5;           // neighbours per sample in the affinity graph
    double eig_threshold = 1.0 - 1e-9;  // keep eigenvalues <= eig_threshold * 2
    double affinity_floor = 1e-6;       // uniform affinity added between all pairs
    int max_iter = 10000;      // lasso coordinate-descent sweeps
    double tol = 1e-7;         // lasso KKT tolerance
    std::uint64_t seed = 0;

    void validate() const;
};

/// Spectral coordinates of the training samples: one row per sample.
struct Embedding {
    Eigen::MatrixXd Y;             // M × k
    Eigen::VectorXd eigenvalues;   // the k retained Laplacian eigenvalues
};

/// Ridge-regressed concept basis U* (D × k).
struct ConceptBasis {
    Eigen::MatrixXd U;
    double tau = 0.0;

    int k() const noexcept { return static_cast<int>(U.cols()); }
    Eigen::Index dim() const noexcept { return U.rows(); }
};

struct SparseCodes {
    Eigen::MatrixXd A;  // k × M
    double rho = 0.0;
    double reconstruction_error = 0.0;  // Frobenius norm of X - U*A
};

/// Eigenvectors of the symmetric-normalized Laplacian of the p-nearest-neighbour
/// graph over the columns of X, at the k smallest non-trivial eigenvalues.
/// Each eigenvector's largest-magnitude entry is made positive.
Embedding spectral_embedding(const FeatureMatrix& X, const CoderConfig& config);

/// U* = (X Xᵀ + τ I)⁻¹ X Y.
ConceptBasis learn_basis(const FeatureMatrix& X, const Embedding& Y, double tau);

/// Cyclic coordinate descent on the Gram matrix of a fixed basis, for
/// minimizing ½‖x − U a‖² + ρ‖a‖₁.
class LassoSolver {
public:
    LassoSolver(const ConceptBasis& basis, double rho, double tol, int max_iter);

    /// Throws ConvergeFailure when the KKT violation is still above tol after
    /// max_iter sweeps.
    Eigen::VectorXd encode(const Eigen::VectorXd& x) const;

    /// max over coordinates of the subgradient optimality violation of `a`.
    double kkt_violation(const Eigen::VectorXd& x, const Eigen::VectorXd& a) const;

    double rho() const noexcept { return rho_; }

private:
    double kkt_violation_from_correlation(const Eigen::VectorXd& g, const Eigen::VectorXd& a) const;

    const ConceptBasis* basis_;
    Eigen::MatrixXd gram_;
    double rho_;
    double tol_;
    int max_iter_;
};

Eigen::VectorXd lasso_encode(const Eigen::VectorXd& x, const ConceptBasis& basis, double rho,
                             double tol = 1e-7, int max_iter = 10000);

/// Lasso codes for every column of X; failures name the column.
SparseCodes encode_matrix(const FeatureMatrix& X, const ConceptBasis& basis, const CoderConfig& config);

/// Linear test projection U*ᵀ x.
Eigen::VectorXd project_test(const Eigen::VectorXd& x, const ConceptBasis& basis);

}  // namespace scct
