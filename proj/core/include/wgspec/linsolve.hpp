#ifndef WGSPEC_LINSOLVE_HPP
#define WGSPEC_LINSOLVE_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>

namespace wgspec {

/// Solves singular symmetric systems A u = f subject to c^T u = 0 through the
/// bordered matrix [A c; c^T 0] (one scalar Lagrange multiplier, no node
/// pinning). A's one-dimensional kernel must not be c-orthogonal.
class ConstrainedSolver {
public:
    ConstrainedSolver(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& c);

    /// Returns u; the multiplier (the Fredholm defect absorbed by the
    /// constraint) is written to *multiplier when given.
    Eigen::VectorXd solve(const Eigen::VectorXd& f, double* multiplier = nullptr) const;

private:
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    Eigen::Index n_ = 0;
};

} // namespace wgspec

#endif
