#ifndef WGSPEC_HOMOGENIZATION_HPP
#define WGSPEC_HOMOGENIZATION_HPP

#include "wgspec/fem.hpp"

#include <map>
#include <string>

namespace wgspec {

/// The five periodic corrector families on the unit cell, all mean-zero.
/// Fields are full nodal vectors on the shared cell mesh (slave nodes carry
/// their master's value, so periodicity holds exactly).
struct CellCorrectors {
    const Mesh* mesh = nullptr;
    AssembledOperator op; // periodic a-weighted stiffness and mass

    std::array<Eigen::VectorXd, 2> phi;                              // phi_i
    std::array<std::array<Eigen::VectorXd, 2>, 2> zeta;              // zeta_ij
    std::array<std::array<Eigen::VectorXd, 2>, 2> kappa;             // kappa_ij
    std::array<std::array<std::array<Eigen::VectorXd, 2>, 2>, 2> lambda3; // Lambda_ijk
    std::array<std::array<std::array<Eigen::VectorXd, 2>, 2>, 2> theta3;  // theta_ijk

    /// Fredholm defect (mean of the assembled right-hand side) per solve.
    std::map<std::string, double> fredholm_defects;
    /// sup of |grad phi| over quadrature points: W^{1,inf} diagnostic.
    double max_grad_phi = 0.0;

    FemField field(const Eigen::VectorXd& coeffs) const { return FemField(*mesh, coeffs); }
};

struct HomogenizedTensors {
    double abar = 0.0;
    std::array<std::array<double, 2>, 2> Q{};
    std::array<std::array<std::array<double, 2>, 2>, 2> P{};
    std::array<std::array<std::array<double, 2>, 2>, 2> S{};
    std::array<std::array<std::array<std::array<double, 2>, 2>, 2>, 2> R{};
    std::array<std::array<std::array<std::array<double, 2>, 2>, 2>, 2> T{};

    /// |Q01 - Q10| before symmetrization.
    double q_asymmetry_defect = 0.0;
    /// Q from the energy form int a (grad phi_i + e_i).(grad phi_j + e_j):
    /// equivalent representation, kept as an independent cross-check.
    std::array<std::array<double, 2>, 2> Q_energy{};

    std::array<double, 2> q_eigenvalues() const;
};

/// Solves, in order, the cell problems for phi, zeta, kappa, Lambda and
/// theta with periodicity and zero mean (scalar Lagrange multiplier).
/// Right-hand sides in divergence form are assembled weakly. Each stage
/// subtracts its Fredholm defect and records it.
/// Throws SolverError on coercivity violation or defect above `defect_tol`.
CellCorrectors solve_cell_problems(const Mesh& cell, const ScalarField& a, int quad_degree = 4,
                                   double defect_tol = 1e-6);

/// Assembles abar, Q, P, S, R, T from the correctors. Q is symmetrized by
/// averaging with its transpose; the asymmetry defect is recorded and
/// `asym_tol` guards it.
HomogenizedTensors compute_tensors(const CellCorrectors& correctors, const ScalarField& a,
                                   int quad_degree = 4, double asym_tol = 1e-8);

/// Row-major flattened JSON (schema documented in the string itself).
std::string tensors_to_json(const HomogenizedTensors& t);
HomogenizedTensors tensors_from_json(const std::string& text);

} // namespace wgspec

#endif
