#ifndef WGSPEC_EIGENSOLVE_HPP
#define WGSPEC_EIGENSOLVE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wgspec {

using SpMat = Eigen::SparseMatrix<double>;

/// Ordered eigenpairs of a symmetric pencil (K, M). Eigenvectors are
/// M-orthonormal in the declared normalization; the ground eigenvector's
/// sign is fixed so that its mean is positive.
struct Spectrum {
    std::vector<double> eigenvalues;               // ascending
    std::vector<Eigen::VectorXd> eigenvectors;     // matching order
    std::vector<double> residuals;                 // ||K v - lambda M v|| / ||K v||
    std::string normalization = "mass_weighted";

    double gap01() const {
        return eigenvalues.size() > 1 ? eigenvalues[1] - eigenvalues[0] : 0.0;
    }
};

/// k smallest eigenpairs of K v = lambda M v by shift-invert Lanczos with
/// full reorthogonalization and a fixed starting-vector seed.
/// `sigma` must lie below the spectrum; the default 0 is correct for
/// positive-definite K. A factorization hitting the spectrum is retried
/// with a perturbed shift before failing.
Spectrum smallest_eigenpairs(const SpMat& K, const SpMat& M, int k, double tol = 1e-10,
                             std::optional<double> sigma = std::nullopt,
                             std::uint64_t seed = 0x77677370u);

/// Result of the preconditioned block solver: like Spectrum plus iteration
/// diagnostics.
struct LobpcgResult {
    Spectrum spectrum;
    int iterations = 0;
    bool converged = false;
};

/// LOBPCG for pencils too large to factor. `apply_A`/`apply_M` are
/// matrix-vector products, `precond` approximates (A - sigma M)^{-1}.
/// Deterministic for a fixed seed.
LobpcgResult lobpcg(const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& apply_A,
                    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& apply_M,
                    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& precond,
                    Eigen::Index n, int k, double tol = 1e-9, int maxit = 300,
                    std::uint64_t seed = 0x77677370u);

/// One-dimensional spectra (Sturm-Liouville, oscillator, half-line).
struct Spectrum1D {
    std::vector<double> eigenvalues;
    std::vector<Eigen::VectorXd> eigenfunctions; // nodal values incl. boundary zeros
    std::vector<double> nodes;                   // node coordinates
    std::vector<double> truncation_sensitivity;  // eta_j(T) - eta_j(1.2T), truncated problems
    double truncation = 0.0;                     // half-width / width actually used
};

/// 1D P2 Dirichlet operator pair on a uniform grid over (x0, x0+L):
/// K = r int phi' psi' + int q phi psi, M = int phi psi, endpoints eliminated.
/// dof i corresponds to node i+1.
struct Operator1D {
    SpMat K, M;
    std::vector<double> nodes; // 2*cells+1 node coordinates
    int n_dofs = 0;
};
Operator1D assemble_operator_1d(double r, const std::function<double(double)>& q, double x0,
                                double L, int cells);

/// k smallest Dirichlet eigenpairs of -r phi'' + q phi = eta phi on (0,l),
/// P2 FEM on a uniform grid. `q` is sampled at quadrature points.
Spectrum1D solve_sturm_liouville(double r, const std::function<double(double)>& q, double l, int k,
                                 int cells = 2048);

/// Same, with q given as uniform samples on [0,l] (linear interpolation).
Spectrum1D solve_sturm_liouville_sampled(double r, const std::vector<double>& q_samples, double l,
                                         int k, int cells = 2048);

/// Harmonic oscillator -r phi'' + c t^2 phi = eta phi on a truncated line
/// (-T, T) with Dirichlet ends; eta_j ~ (2j+1) sqrt(rc). T <= 0 selects the
/// automatic truncation 1.5 sqrt(2 (2k+3) sqrt(r/c)), which scales exactly
/// like (r/c)^{1/4} so scaling laws hold bit-for-bit on the fixed grid.
/// Throws SolverError if c <= 0 (no discrete spectrum).
Spectrum1D solve_oscillator(double r, double c, int k, double T = 0.0, int cells = 2048);

/// Half-line problem -r phi'' + slope t phi = eta phi on (0, T), Dirichlet;
/// eta_j ~ |a_j| (r slope^2)^{1/3} with a_j the Airy zeros.
/// Throws SolverError if slope <= 0.
Spectrum1D solve_halfline_linear(double r, double slope, int k, double T = 0.0, int cells = 2048);

} // namespace wgspec

#endif
