#include "wgspec/cross_section.hpp"
#include "wgspec/errors.hpp"
#include "wgspec/linsolve.hpp"

#include <cmath>
#include <cstdio>

namespace wgspec {

namespace {

// shared post-processing: expand, positivity and simplicity checks
CrossSectionSolution finish_solution(const Mesh& mesh, AssembledOperator op, Spectrum spec) {
    CrossSectionSolution cs;
    cs.mesh = &mesh;
    cs.op = std::move(op);
    cs.spec = std::move(spec);
    cs.w_full = cs.op.expand(cs.spec.eigenvectors.at(0));

    const double wmax = cs.w_full.cwiseAbs().maxCoeff();
    if (cs.w_full.minCoeff() < -1e-3 * wmax)
        throw SolverError("cross_section",
                          "ground state is not positive after sign normalization");
    if (cs.spec.eigenvalues.size() > 1 && cs.spec.gap01() <= 0)
        throw SolverError("cross_section", "ground eigenvalue is not simple");
    return cs;
}

} // namespace

CrossSectionSolution solve_homogenized_cs(const Mesh& mesh,
                                          const std::array<std::array<double, 2>, 2>& Q, int k,
                                          int quad_degree) {
    if (std::abs(Q[0][1] - Q[1][0]) > 1e-12 * (1.0 + std::abs(Q[0][0])))
        throw ConfigError("cross_section", "Q must be symmetric");
    if (!(Q[0][0] > 0) || !(Q[0][0] * Q[1][1] - Q[0][1] * Q[1][0] > 0))
        throw ConfigError("cross_section", "Q must be positive definite");

    const int keff = std::max(k, 2); // always resolve the first gap
    auto Qfn = [Q](const Vec2&) {
        return std::array<double, 4>{Q[0][0], Q[0][1], Q[1][0], Q[1][1]};
    };
    AssembledOperator op = assemble_operator_matrix(mesh, Qfn, /*dirichlet=*/true, quad_degree);
    Spectrum spec = smallest_eigenpairs(op.K, op.M, keff);
    return finish_solution(mesh, std::move(op), std::move(spec));
}

CrossSectionSolution solve_inhomogeneous_cs(const Mesh& mesh, const ScalarField& a, int k,
                                            int quad_degree) {
    const int keff = std::max(k, 2);
    AssembledOperator op = assemble_operator(
        mesh, a, [](const Vec2&) { return 1.0; }, /*dirichlet=*/true, quad_degree);
    Spectrum spec = smallest_eigenpairs(op.K, op.M, keff);
    return finish_solution(mesh, std::move(op), std::move(spec));
}

CrossSectionSolution solve_perturbed_cs(const Mesh& mesh, const ScalarField& a,
                                        const WaveguideGeometry& geom, double scale, double s,
                                        int k, double oscillation_period, int quad_degree) {
    const double bound = beta_positivity_bound(geom, mesh.sup_abs_x());
    if (scale >= bound)
        throw SolverError("cross_section", "scale " + std::to_string(scale) +
                                               " violates beta positivity (bound " +
                                               std::to_string(bound) + ")");
    if (oscillation_period > 0) {
        double lmax = 0;
        for (size_t e = 0; e < mesh.tris.size(); ++e) {
            const auto& t = mesh.tris[e];
            for (int le = 0; le < 3; ++le) {
                const Vec2& pa = mesh.nodes[(size_t)t[(size_t)le]];
                const Vec2& pb = mesh.nodes[(size_t)t[(size_t)((le + 1) % 3)]];
                lmax = std::max(lmax, std::max(std::abs(pb[0] - pa[0]), std::abs(pb[1] - pa[1])));
            }
        }
        const double n_est = 1.0 / lmax; // structured meshes: grid resolution
        if (n_est * oscillation_period < 8.0 - 1e-9)
            throw SolverError("cross_section",
                              "mesh does not resolve the oscillation: need >= 8 elements "
                              "per period");
        const double cells_per_period = n_est * oscillation_period;
        if (std::abs(cells_per_period - std::round(cells_per_period)) > 1e-6)
            throw SolverError("cross_section",
                              "mesh is not an integer multiple of the epsilon-lattice");
    }

    const Vec2 xs = geom.xi(s);
    auto beta = [scale, xs](const Vec2& x) { return 1.0 - scale * (xs[0] * x[0] + xs[1] * x[1]); };
    const int keff = std::max(k, 2);
    AssembledOperator op = assemble_operator(mesh, a, beta, /*dirichlet=*/true, quad_degree);
    Spectrum spec = smallest_eigenpairs(op.K, op.M, keff);
    CrossSectionSolution cs = finish_solution(mesh, std::move(op), std::move(spec));
    cs.spec.normalization = "beta_weighted";
    return cs;
}

namespace {

// Solves (K - mu M) u = f with c^T u = 0 (c = M w), subtracting and
// recording the Fredholm defect <f, w>.
struct SingularShiftSolver {
    const CrossSectionSolution& cs;
    Eigen::VectorXd w_red;
    Eigen::VectorXd Mw;
    ConstrainedSolver solver;
    double defect_tol;

    SingularShiftSolver(const CrossSectionSolution& sol, double tol)
        : cs(sol), w_red(sol.spec.eigenvectors.at(0)), Mw(sol.op.M * w_red),
          solver(make_A(sol), Mw), defect_tol(tol) {}

    static Eigen::SparseMatrix<double> make_A(const CrossSectionSolution& sol) {
        return sol.op.K - sol.mu() * sol.op.M;
    }

    Eigen::VectorXd solve(Eigen::VectorXd f, const std::string& name,
                          std::map<std::string, double>& defects) const {
        const double defect = f.dot(w_red);
        defects[name] = defect;
        if (std::abs(defect) > defect_tol * std::max(1.0, f.norm()))
            throw SolverError("cross_section", "Fredholm defect for " + name + " is " +
                                                   std::to_string(defect));
        f -= defect * Mw;
        Eigen::VectorXd u = solver.solve(f);
        u -= u.dot(Mw) * w_red; // exact side condition
        return u;
    }
};

} // namespace

AuxiliaryFields solve_auxiliaries(const CrossSectionSolution& cs, const HomogenizedTensors& tensors,
                                  double defect_tol, int quad_degree) {
    AuxiliaryFields aux;
    const Mesh& mesh = *cs.mesh;
    const FemField w = cs.ground();
    aux.hess_w = recover_hessian(w);

    SingularShiftSolver solver(cs, defect_tol);

    // wbar: RHS P_ijk d^3_ijk w_H, tested as -P_ijk int H_jk(w_H) d_i v
    auto rhs_wbar = [&](int e, const Vec2&, const std::array<double, 3>& bary,
                        const ElemBasis& basis, std::array<double, 6>& out) {
        const auto H = aux.hess_w.at(e, bary);
        const double Hm[2][2] = {{H[0], H[1]}, {H[1], H[2]}};
        for (int m = 0; m < basis.n; ++m) {
            double v = 0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int k = 0; k < 2; ++k)
                        v -= tensors.P[(size_t)i][(size_t)j][(size_t)k] * Hm[j][k] *
                             basis.grad[(size_t)m][(size_t)i];
            out[(size_t)m] = v;
        }
    };
    Eigen::VectorXd f = assemble_load(mesh, cs.op, rhs_wbar, quad_degree);
    aux.wbar = cs.op.expand(solver.solve(std::move(f), "wbar", aux.fredholm_defects));

    // what_k: RHS -Q_ik d_i w_H
    for (int k = 0; k < 2; ++k) {
        auto rhs = [&, k](int e, const Vec2&, const std::array<double, 3>&,
                          const ElemBasis& basis, std::array<double, 6>& out) {
            const Vec2 gw = w.grad(e, basis);
            double coef = 0;
            for (int i = 0; i < 2; ++i) coef -= tensors.Q[(size_t)i][(size_t)k] * gw[(size_t)i];
            for (int m = 0; m < basis.n; ++m) out[(size_t)m] = coef * basis.N[(size_t)m];
        };
        Eigen::VectorXd fk = assemble_load(mesh, cs.op, rhs, quad_degree);
        aux.what[(size_t)k] =
            cs.op.expand(solver.solve(std::move(fk), "what_" + std::to_string(k),
                                      aux.fredholm_defects));
    }

    FemField wbar_field(mesh, aux.wbar);
    aux.hess_wbar = recover_hessian(wbar_field);
    return aux;
}

Eigen::VectorXd compute_wbar2(const CrossSectionSolution& cs, const HomogenizedTensors& tensors,
                              const AuxiliaryFields& aux, const Vec2& xi_s, double mu2_s,
                              int quad_degree) {
    const Mesh& mesh = *cs.mesh;
    const FemField w = cs.ground();

    // wbar1 = wbar + xi . what, and its recovered Hessian
    Eigen::VectorXd wbar1 = aux.wbar + xi_s[0] * aux.what[0] + xi_s[1] * aux.what[1];
    const FemField w1(mesh, wbar1);
    const HessianField Hw1 = recover_hessian(w1);

    auto volume_term = [&](int e, const Vec2& x, const std::array<double, 3>& bary,
                           const ElemBasis& basis, std::array<double, 6>& out) {
        const auto Hw = aux.hess_w.at(e, bary);
        const double HwM[2][2] = {{Hw[0], Hw[1]}, {Hw[1], Hw[2]}};
        const auto H1 = Hw1.at(e, bary);
        const double H1M[2][2] = {{H1[0], H1[1]}, {H1[1], H1[2]}};
        const Vec2 gw = w.grad(e, basis);
        const Vec2 g1 = w1.grad(e, basis);
        const double wv = w.value(e, basis);
        const double xix = xi_s[0] * x[0] + xi_s[1] * x[1];

        for (int m = 0; m < basis.n; ++m) {
            double v = 0;
            const double hm[2][2] = {{basis.hess[(size_t)m][0], basis.hess[(size_t)m][1]},
                                     {basis.hess[(size_t)m][1], basis.hess[(size_t)m][2]}};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    // R term, volume part: + R_ijkl H_kl(w_H) d_ij v
                    for (int k = 0; k < 2; ++k)
                        for (int l = 0; l < 2; ++l)
                            v += tensors.R[(size_t)i][(size_t)j][(size_t)k][(size_t)l] *
                                 HwM[k][l] * hm[i][j];
                    // P term: - P_ijk H_jk(wbar1) d_i v  (note index roles)
                    for (int k = 0; k < 2; ++k)
                        v -= tensors.P[(size_t)i][(size_t)j][(size_t)k] * H1M[j][k] *
                             basis.grad[(size_t)m][(size_t)i];
                    // S term: - S_ijk xi_k (d_j w_H)(d_i v)
                    for (int k = 0; k < 2; ++k)
                        v -= tensors.S[(size_t)i][(size_t)j][(size_t)k] * xi_s[(size_t)k] *
                             gw[(size_t)j] * basis.grad[(size_t)m][(size_t)i];
                    // - Q_ij xi_j d_i wbar1 , - Q_ij xi_j (xi.x) d_i w_H
                    v -= tensors.Q[(size_t)i][(size_t)j] * xi_s[(size_t)j] *
                         (g1[(size_t)i] + xix * gw[(size_t)i]) * basis.N[(size_t)m];
                }
            v += mu2_s * wv * basis.N[(size_t)m];
            out[(size_t)m] += v;
        }
    };

    Eigen::VectorXd f = assemble_load(mesh, cs.op, volume_term, quad_degree);

    // R term, boundary flux: - R_ijkl n_j H_kl(w_H) d_i v
    auto bnd_term = [&](int e, const Vec2&, const Vec2& nrm, const std::array<double, 3>& bary,
                        const ElemBasis& basis, std::array<double, 6>& out) {
        const auto Hw = aux.hess_w.at(e, bary);
        const double HwM[2][2] = {{Hw[0], Hw[1]}, {Hw[1], Hw[2]}};
        for (int m = 0; m < basis.n; ++m) {
            double v = 0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int k = 0; k < 2; ++k)
                        for (int l = 0; l < 2; ++l)
                            v -= tensors.R[(size_t)i][(size_t)j][(size_t)k][(size_t)l] *
                                 nrm[(size_t)j] * HwM[k][l] * basis.grad[(size_t)m][(size_t)i];
            out[(size_t)m] = v;
        }
    };
    f += assemble_boundary_load(mesh, cs.op, bnd_term);

    SingularShiftSolver solver(cs, 1e-2);
    std::map<std::string, double> defects;
    Eigen::VectorXd u = solver.solve(std::move(f), "wbar2", defects);
    return cs.op.expand(u);
}

Vec2 compute_b(const CrossSectionSolution& cs, const ScalarField& a, int quad_degree) {
    const FemField w = cs.ground();
    Vec2 b{0, 0};
    for (int k = 0; k < 2; ++k)
        b[(size_t)k] = integrate(*cs.mesh, quad_degree, [&](int e, const Vec2& x, const auto& bc) {
            const ElemBasis basis = eval_basis(*cs.mesh, e, bc);
            return a(x) * w.grad(e, basis)[(size_t)k] * w.value(e, basis);
        });
    return b;
}

AuxiliaryFields solve_auxiliaries_inhomogeneous(const CrossSectionSolution& cs,
                                                const ScalarField& a, const Vec2& b,
                                                bool with_wbar_matrix, double defect_tol,
                                                int quad_degree) {
    AuxiliaryFields aux;
    aux.b = b;
    const Mesh& mesh = *cs.mesh;
    const FemField w = cs.ground();
    aux.hess_w = recover_hessian(w);

    SingularShiftSolver solver(cs, defect_tol);

    // what_k: RHS -a d_k w_C + b_k w_C
    for (int k = 0; k < 2; ++k) {
        auto rhs = [&, k](int e, const Vec2& x, const std::array<double, 3>&,
                          const ElemBasis& basis, std::array<double, 6>& out) {
            const double coef =
                -a(x) * w.grad(e, basis)[(size_t)k] + b[(size_t)k] * w.value(e, basis);
            for (int m = 0; m < basis.n; ++m) out[(size_t)m] = coef * basis.N[(size_t)m];
        };
        Eigen::VectorXd fk = assemble_load(mesh, cs.op, rhs, quad_degree);
        aux.what[(size_t)k] =
            cs.op.expand(solver.solve(std::move(fk), "what_" + std::to_string(k),
                                      aux.fredholm_defects));
    }

    const FemField what[2] = {FemField(mesh, aux.what[0]), FemField(mesh, aux.what[1])};
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
            aux.B[(size_t)k][(size_t)l] =
                integrate(mesh, quad_degree, [&](int e, const Vec2& x, const auto& bc) {
                    const ElemBasis basis = eval_basis(mesh, e, bc);
                    return a(x) *
                           (what[l].grad(e, basis)[(size_t)k] +
                            w.grad(e, basis)[(size_t)k] * x[(size_t)l]) *
                           w.value(e, basis);
                });

    if (with_wbar_matrix) {
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) {
                auto rhs = [&, k, l](int e, const Vec2& x, const std::array<double, 3>&,
                                     const ElemBasis& basis, std::array<double, 6>& out) {
                    const double coef =
                        -a(x) * (what[l].grad(e, basis)[(size_t)k] +
                                 w.grad(e, basis)[(size_t)k] * x[(size_t)l]) +
                        b[(size_t)k] * what[l].value(e, basis) +
                        aux.B[(size_t)k][(size_t)l] * w.value(e, basis);
                    for (int m = 0; m < basis.n; ++m) out[(size_t)m] = coef * basis.N[(size_t)m];
                };
                Eigen::VectorXd fkl = assemble_load(mesh, cs.op, rhs, quad_degree);
                aux.wbar_mat[(size_t)k][(size_t)l] = cs.op.expand(
                    solver.solve(std::move(fkl), "wbar_" + std::to_string(k) + std::to_string(l),
                                 aux.fredholm_defects));
            }
        aux.has_wbar_mat = true;
    }
    return aux;
}

std::string field_csv(const Mesh& mesh, const Eigen::VectorXd& full_coeffs) {
    std::string out = "node,x1,x2,value\n";
    char line[160];
    for (Eigen::Index i = 0; i < full_coeffs.size(); ++i) {
        std::snprintf(line, sizeof line, "%lld,%.17g,%.17g,%.17g\n", (long long)i,
                      mesh.nodes[(size_t)i][0], mesh.nodes[(size_t)i][1], full_coeffs[i]);
        out += line;
    }
    return out;
}

} // namespace wgspec
