#ifndef WGSPEC_TUBE_ORACLE_HPP
#define WGSPEC_TUBE_ORACLE_HPP

#include "wgspec/cross_section.hpp"
#include "wgspec/eigensolve.hpp"
#include "wgspec/fem.hpp"
#include "wgspec/geometry.hpp"

#include <memory>

namespace wgspec {

/// Scale-independent data for the direct 3D tube solves: the 2D cross-
/// section operators, the 1D operators in s, their dense spectral factors
/// (reused as the fast-diagonalization preconditioner for every delta), and
/// the discrete 2D ground eigenvalue used as the shift.
struct TubeOracleContext {
    const Mesh* xmesh = nullptr;
    double l = 1.0;
    int n_s_cells = 0;

    // 2D (Dirichlet-reduced): Ka = int a grad.grad, Ma = int a psi psi, Mx = int psi psi
    AssembledOperator op_ax; // K = Ka, M = Ma  (assembled with weight a)
    SpMat Mx;
    double mu_C = 0.0; // discrete ground eigenvalue of (Ka, Mx)

    // 1D: Ks = int chi' chi', Ms = int chi chi
    Operator1D op_s;

    // spectral factors: (Ka - mu_C Mx) Phi = Ma Phi diag(dx),  Ks Psi = Ms Psi diag(es)
    Eigen::MatrixXd Phi, Psi;
    Eigen::VectorXd dx, es;

    int n_x() const { return static_cast<int>(Mx.rows()); }
    int n_s() const { return op_s.n_dofs; }
};

/// Eigenpairs of the full rescaled tube operator at one delta. Mode
/// coefficients are stored as (n_x x n_s) matrices over the reduced
/// product dofs.
struct TubeSpectrum {
    double delta = 0.0;
    std::vector<double> lambdas;
    std::vector<Eigen::MatrixXd> modes;
    std::vector<double> residuals;
    int iterations = 0;
    bool converged = false;

    // provenance for the run manifest
    int n_s_cells = 0, n_x_resolution = 0;
    double mu_C_2d = 0.0;
};

/// Builds the context for a cross-section mesh and coefficient.
TubeOracleContext make_tube_context(const Mesh& xmesh, const ScalarField& a,
                                    const WaveguideGeometry& geom, int n_s_cells,
                                    int quad_degree = 4);

/// k smallest Dirichlet eigenpairs of
///   -div((a/beta)(d (x) d) grad v) - delta^{-2} div_x(beta a grad_x v)
///     = lambda beta v     on (0,l) x omega,
/// with d = (1, tau R x), assembled exactly on the P2 (x) P2 product basis
/// and solved by LOBPCG with the Kronecker preconditioner from `ctx`.
/// Throws ResourceError when the assembled matrices would exceed the
/// desk-scale memory budget, SolverError when beta <= 0.
TubeSpectrum solve_tube(const TubeOracleContext& ctx, const WaveguideGeometry& geom,
                        const ScalarField& a, double delta, int k, double tol = 1e-8,
                        int maxit = 400);

/// Second moment int (s-s0)^2 |v|^2 of an L2-normalized mode, mass-lumped
/// in s (a discrete delta column at s0 gives exactly 0).
double concentration_diagnostic(const TubeOracleContext& ctx, const Eigen::MatrixXd& mode,
                                double s0);

} // namespace wgspec

#endif
