#ifndef WGSPEC_CROSS_SECTION_HPP
#define WGSPEC_CROSS_SECTION_HPP

#include "wgspec/eigensolve.hpp"
#include "wgspec/fem.hpp"
#include "wgspec/geometry.hpp"
#include "wgspec/homogenization.hpp"

#include <map>

namespace wgspec {

/// Ground (and optionally higher) eigenpairs of a cross-section problem.
/// The ground state is positive with unit norm in the operator's mass
/// weight (int w^2 = 1 unperturbed, int beta w^2 = 1 perturbed).
struct CrossSectionSolution {
    const Mesh* mesh = nullptr;
    AssembledOperator op;
    Spectrum spec;
    Eigen::VectorXd w_full; // expanded normalized ground state

    double mu() const { return spec.eigenvalues.at(0); }
    double gap() const { return spec.gap01(); }
    FemField ground() const { return FemField(*mesh, w_full); }
};

/// Auxiliary fields of the second-order expansions. All nodal vectors live
/// on the originating solution's mesh.
struct AuxiliaryFields {
    // homogenization branch
    Eigen::VectorXd wbar;
    std::array<Eigen::VectorXd, 2> what;
    HessianField hess_w;       // recovered Hessian of the ground state
    HessianField hess_wbar;    // for the second-order field's right side

    // inhomogeneous branch
    Vec2 b{0.0, 0.0};
    std::array<std::array<double, 2>, 2> B{};
    std::array<std::array<Eigen::VectorXd, 2>, 2> wbar_mat;
    bool has_wbar_mat = false;

    std::map<std::string, double> fredholm_defects;
};

/// Homogenized cross-section problem -div(Q grad w) = mu w on omega.
CrossSectionSolution solve_homogenized_cs(const Mesh& mesh,
                                          const std::array<std::array<double, 2>, 2>& Q, int k = 1,
                                          int quad_degree = 4);

/// Inhomogeneous problem -div(a grad w) = mu w.
CrossSectionSolution solve_inhomogeneous_cs(const Mesh& mesh, const ScalarField& a, int k = 1,
                                            int quad_degree = 4);

/// Perturbed problem -div(a beta grad w) = mu beta w with
/// beta = 1 - scale (xi(s) . x); the brute-force oracle behind all
/// asymptotic claims. When the coefficient oscillates with period
/// `oscillation_period` (= epsilon), the mesh must resolve it with at least
/// 8 elements per period and match the epsilon-lattice.
CrossSectionSolution solve_perturbed_cs(const Mesh& mesh, const ScalarField& a,
                                        const WaveguideGeometry& geom, double scale, double s,
                                        int k = 1, double oscillation_period = 0.0,
                                        int quad_degree = 4);

/// Solves the singular systems (-Q_ij d_ij - mu_H) u = f orthogonally to
/// w_H for the fields wbar (right side P_ijk d^3_ijk w_H, reduced by parts
/// against recovered second derivatives) and what_k (right side
/// -Q_ik d_i w_H). Throws SolverError if a Fredholm defect exceeds
/// `defect_tol` times the load norm.
AuxiliaryFields solve_auxiliaries(const CrossSectionSolution& cs, const HomogenizedTensors& tensors,
                                  double defect_tol = 1e-3, int quad_degree = 4);

/// Second-order field wbar2(s) of the homogenized expansion; requires
/// mu2(s) = q_H + q_xi(s) from the effective model (computed lazily).
Eigen::VectorXd compute_wbar2(const CrossSectionSolution& cs, const HomogenizedTensors& tensors,
                              const AuxiliaryFields& aux, const Vec2& xi_s, double mu2_s,
                              int quad_degree = 4);

/// b = int a grad(w_C) w_C dx.
Vec2 compute_b(const CrossSectionSolution& cs, const ScalarField& a, int quad_degree = 4);

/// Inhomogeneous auxiliaries: what solves (-div(a grad .) - mu_C) what =
/// -a grad w_C + b w_C componentwise with int what_k w_C = 0, and
/// B = int a ((grad what)^T + grad w_C otimes x) w_C. With
/// `with_wbar_matrix` also the 2x2 matrix field of the second order.
AuxiliaryFields solve_auxiliaries_inhomogeneous(const CrossSectionSolution& cs,
                                                const ScalarField& a, const Vec2& b,
                                                bool with_wbar_matrix = false,
                                                double defect_tol = 1e-3, int quad_degree = 4);

/// CSV export of a nodal field: node id, x1, x2, value.
std::string field_csv(const Mesh& mesh, const Eigen::VectorXd& full_coeffs);

} // namespace wgspec

#endif
