#ifndef WGSPEC_FEM_HPP
#define WGSPEC_FEM_HPP

#include "wgspec/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>

namespace wgspec {

using SpMat = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(const Vec2&)>;
using MatrixField = std::function<std::array<double, 4>(const Vec2&)>; // row-major 2x2

/// Reference-element basis values, physical gradients and (for P2 on
/// straight triangles, constant) second derivatives at a barycentric point
/// of one element. Entries 0..nodes_per_elem-1; hess stores (d11, d12, d22).
struct ElemBasis {
    std::array<double, 6> N{};
    std::array<Vec2, 6> grad{};
    std::array<std::array<double, 3>, 6> hess{};
    int n = 3;
};

/// Evaluates basis values and physical gradients of element `e` at
/// barycentric coordinates `bary`.
ElemBasis eval_basis(const Mesh& mesh, int e, const std::array<double, 3>& bary);

/// Maps barycentric coordinates of element `e` to physical coordinates.
Vec2 map_point(const Mesh& mesh, int e, const std::array<double, 3>& bary);

/// A scalar FEM function: full nodal coefficient vector bound to a mesh.
class FemField {
public:
    FemField() = default;
    FemField(const Mesh& mesh, Eigen::VectorXd coeffs);

    double value_at(int e, const std::array<double, 3>& bary) const;
    Vec2 grad_at(int e, const std::array<double, 3>& bary) const;

    /// Fast paths when the basis at the quadrature point is already known.
    double value(int e, const ElemBasis& basis) const;
    Vec2 grad(int e, const ElemBasis& basis) const;

    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    Eigen::VectorXd& coeffs() { return coeffs_; }
    const Mesh& mesh() const { return *mesh_; }

private:
    const Mesh* mesh_ = nullptr;
    Eigen::VectorXd coeffs_;
};

/// Piecewise-linear recovered Hessian (vertex values of d11, d12, d22),
/// built from a P2 field by least-squares patch fits of the elementwise
/// gradients sampled at centroids.
struct HessianField {
    const Mesh* mesh = nullptr;
    Eigen::VectorXd h11, h12, h22; // size n_vertices

    std::array<double, 3> at(int e, const std::array<double, 3>& bary) const;
};

HessianField recover_hessian(const FemField& field);

/// Stiffness/mass pair with constraints applied.
/// dof_map[node] is the reduced index or -1 for eliminated Dirichlet nodes;
/// on periodic meshes slave nodes share the master's reduced index.
struct AssembledOperator {
    SpMat K, M;
    std::vector<int> dof_map;
    int n_dofs = 0;
    Eigen::VectorXd mean_weight; // integral of each reduced basis function

    Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
    Eigen::VectorXd restrict_full(const Eigen::VectorXd& full) const;
};

/// K[i][j] = int a w grad(psi_i).grad(psi_j), M[i][j] = int w psi_i psi_j.
/// Dirichlet rows/columns are eliminated when dirichlet=true; periodic
/// identification is applied automatically for cell meshes.
/// Throws SolverError when a <= 0 or w <= 0 at a quadrature point.
AssembledOperator assemble_operator(const Mesh& mesh, const ScalarField& a,
                                    const ScalarField& weight, bool dirichlet,
                                    int quad_degree = 4);

/// Anisotropic variant: K[i][j] = int grad(psi_i) . A(x) grad(psi_j), unit mass weight.
AssembledOperator assemble_operator_matrix(const Mesh& mesh, const MatrixField& A, bool dirichlet,
                                           int quad_degree = 4);

/// Weak right-hand side assembly: `term` fills out[i] with the integrand
/// tested against basis function i at one quadrature point (element e,
/// physical x, barycentric bary). Result is reduced by op.dof_map.
using LoadTerm = std::function<void(int e, const Vec2& x, const std::array<double, 3>& bary,
                                    const ElemBasis& basis, std::array<double, 6>& out)>;
Eigen::VectorXd assemble_load(const Mesh& mesh, const AssembledOperator& op, const LoadTerm& term,
                              int quad_degree = 4);

/// Boundary contribution to a load vector: `term` fills out[i] with the
/// integrand tested against basis function i at a boundary quadrature point.
using BoundaryLoadTerm =
    std::function<void(int e, const Vec2& x, const Vec2& normal, const std::array<double, 3>& bary,
                       const ElemBasis& basis, std::array<double, 6>& out)>;
Eigen::VectorXd assemble_boundary_load(const Mesh& mesh, const AssembledOperator& op,
                                       const BoundaryLoadTerm& term, int npoints = 4);

/// Gaussian quadrature of a user integrand over the mesh.
double integrate(const Mesh& mesh, int quad_degree,
                 const std::function<double(int e, const Vec2& x,
                                            const std::array<double, 3>& bary)>& fn);

/// Quadrature over the boundary; `fn` receives the physical point, the unit
/// outward normal and the element/barycentric location.
double integrate_boundary(const Mesh& mesh, int npoints,
                          const std::function<double(int e, const Vec2& x, const Vec2& normal,
                                                     const std::array<double, 3>& bary)>& fn);

} // namespace wgspec

#endif
