#include "wgspec/homogenization.hpp"
#include "wgspec/errors.hpp"
#include "wgspec/linsolve.hpp"
#include "wgspec/quadrature.hpp"

#include "json.hpp"

#include <cmath>

namespace wgspec {

ConstrainedSolver::ConstrainedSolver(const Eigen::SparseMatrix<double>& A,
                                     const Eigen::VectorXd& c) {
    n_ = A.rows();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(A.nonZeros()) + 2 * static_cast<size_t>(n_));
    for (int kcol = 0; kcol < A.outerSize(); ++kcol)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, kcol); it; ++it)
            trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (Eigen::Index i = 0; i < n_; ++i) {
        if (c[i] != 0.0) {
            trips.emplace_back(static_cast<int>(i), static_cast<int>(n_), c[i]);
            trips.emplace_back(static_cast<int>(n_), static_cast<int>(i), c[i]);
        }
    }
    Eigen::SparseMatrix<double> S(n_ + 1, n_ + 1);
    S.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(S);
    if (lu_.info() != Eigen::Success)
        throw SolverError("fem_core", "bordered saddle factorization failed");
}

Eigen::VectorXd ConstrainedSolver::solve(const Eigen::VectorXd& f, double* multiplier) const {
    Eigen::VectorXd rhs(n_ + 1);
    rhs.head(n_) = f;
    rhs[n_] = 0.0;
    const Eigen::VectorXd sol = lu_.solve(rhs);
    if (multiplier) *multiplier = sol[n_];
    return sol.head(n_);
}

namespace {

// mean-zero periodic solve; subtracts the Fredholm defect (mean of the
// assembled RHS over Y) and records it
Eigen::VectorXd cell_solve(const Mesh& mesh, const AssembledOperator& op,
                           const ConstrainedSolver& solver, const LoadTerm& rhs_term, int qdeg,
                           const std::string& name, std::map<std::string, double>& defects,
                           double defect_tol, double scale) {
    Eigen::VectorXd f = assemble_load(mesh, op, rhs_term, qdeg);
    const double defect = f.sum(); // |Y| = 1
    defects[name] = defect;
    if (std::abs(defect) > defect_tol * scale)
        throw SolverError("homogenization", "Fredholm compatibility violated for " + name +
                                                ": mean of RHS = " + std::to_string(defect));
    const double cw = op.mean_weight.sum();
    f -= (defect / cw) * op.mean_weight;
    Eigen::VectorXd u = solver.solve(f);
    return op.expand(u);
}

} // namespace

CellCorrectors solve_cell_problems(const Mesh& cell, const ScalarField& a, int qdeg,
                                   double defect_tol) {
    if (!cell.periodic())
        throw ConfigError("homogenization", "cell problems need a periodic cell mesh");

    CellCorrectors cc;
    cc.mesh = &cell;
    cc.op = assemble_operator(cell, a, [](const Vec2&) { return 1.0; }, /*dirichlet=*/false, qdeg);
    ConstrainedSolver solver(cc.op.K, cc.op.mean_weight);

    const double abar =
        integrate(cell, qdeg, [&](int, const Vec2& x, const auto&) { return a(x); });
    const double ascale = std::max(1.0, abar);

    auto solve_named = [&](const LoadTerm& term, const std::string& name) {
        return cell_solve(cell, cc.op, solver, term, qdeg, name, cc.fredholm_defects, defect_tol,
                          ascale);
    };

    // --- phi_i:  -div(a grad phi_i) = d_i a,   weak RHS  -int a d_i v -----
    for (int i = 0; i < 2; ++i) {
        auto rhs = [&a, i](int, const Vec2& x, const std::array<double, 3>&,
                           const ElemBasis& basis, std::array<double, 6>& out) {
            const double av = a(x);
            for (int j = 0; j < basis.n; ++j)
                out[(size_t)j] = -av * basis.grad[(size_t)j][(size_t)i];
        };
        cc.phi[(size_t)i] = solve_named(rhs, "phi_" + std::to_string(i));
    }

    const FemField phi[2] = {cc.field(cc.phi[0]), cc.field(cc.phi[1])};

    for (size_t e = 0; e < cell.tris.size(); ++e)
        for (const auto& qp : triangle_rule(2)) {
            const ElemBasis basis = eval_basis(cell, (int)e, qp.bary);
            for (int i = 0; i < 2; ++i) {
                const Vec2 g = phi[i].grad((int)e, basis);
                cc.max_grad_phi = std::max(cc.max_grad_phi, std::hypot(g[0], g[1]));
            }
        }

    // Q enters the later right-hand sides; computed from phi first
    double Q[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double corr = integrate(cell, qdeg, [&](int e, const Vec2& x, const auto& b) {
                return a(x) * phi[i].grad_at(e, b)[(size_t)j];
            });
            Q[i][j] = (i == j ? abar : 0.0) + corr;
        }

    // --- zeta_ij: RHS = a d_ij + d_j(a phi_i) + a d_j phi_i - Q_ij --------
    // (the divergence-form middle term is tested as -int a phi_i d_j v)
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            auto rhs = [&, i, j](int e, const Vec2& x, const std::array<double, 3>&,
                                 const ElemBasis& basis, std::array<double, 6>& out) {
                const double av = a(x);
                const double pv = phi[i].value(e, basis);
                const double pg = phi[i].grad(e, basis)[(size_t)j];
                const double vol = (i == j ? av : 0.0) - Q[i][j] + av * pg;
                for (int m = 0; m < basis.n; ++m)
                    out[(size_t)m] =
                        vol * basis.N[(size_t)m] - av * pv * basis.grad[(size_t)m][(size_t)j];
            };
            cc.zeta[(size_t)i][(size_t)j] =
                solve_named(rhs, "zeta_" + std::to_string(i) + std::to_string(j));
        }

    // --- kappa_ij: RHS = -a d_ij - a d_j phi_i + Q_ij ----------------------
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            auto rhs = [&, i, j](int e, const Vec2& x, const std::array<double, 3>&,
                                 const ElemBasis& basis, std::array<double, 6>& out) {
                const double av = a(x);
                const double pg = phi[i].grad(e, basis)[(size_t)j];
                const double vol = -(i == j ? av : 0.0) + Q[i][j] - av * pg;
                for (int m = 0; m < basis.n; ++m) out[(size_t)m] = vol * basis.N[(size_t)m];
            };
            cc.kappa[(size_t)i][(size_t)j] =
                solve_named(rhs, "kappa_" + std::to_string(i) + std::to_string(j));
        }

    // P_ijk = int a d_ij phi_k + a d_k zeta_ij feeds the Lambda right side
    const FemField zeta[2][2] = {{cc.field(cc.zeta[0][0]), cc.field(cc.zeta[0][1])},
                                 {cc.field(cc.zeta[1][0]), cc.field(cc.zeta[1][1])}};
    double P[2][2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int kk = 0; kk < 2; ++kk)
                P[i][j][kk] = integrate(cell, qdeg, [&](int e, const Vec2& x, const auto& b) {
                    const ElemBasis basis = eval_basis(cell, e, b);
                    const double av = a(x);
                    return (i == j ? av * phi[kk].value(e, basis) : 0.0) +
                           av * zeta[i][j].grad(e, basis)[(size_t)kk];
                });

    // --- Lambda_ijk: RHS = a d_ij phi_k + d_k(a zeta_ij) + a d_k zeta_ij
    //                        - Q_ij phi_k - P_ijk -------------------------
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int kk = 0; kk < 2; ++kk) {
                auto rhs = [&, i, j, kk](int e, const Vec2& x, const std::array<double, 3>&,
                                         const ElemBasis& basis, std::array<double, 6>& out) {
                    const double av = a(x);
                    const double pk = phi[kk].value(e, basis);
                    const double zv = zeta[i][j].value(e, basis);
                    const double zg = zeta[i][j].grad(e, basis)[(size_t)kk];
                    const double vol =
                        (i == j ? av * pk : 0.0) - Q[i][j] * pk - P[i][j][kk] + av * zg;
                    for (int m = 0; m < basis.n; ++m)
                        out[(size_t)m] =
                            vol * basis.N[(size_t)m] - av * zv * basis.grad[(size_t)m][(size_t)kk];
                };
                cc.lambda3[(size_t)i][(size_t)j][(size_t)kk] = solve_named(
                    rhs, "Lambda_" + std::to_string(i) + std::to_string(j) + std::to_string(kk));
            }

    // --- theta_ijk: RHS = d_k(a d_j phi_i) + d_ij d_k a --------------------
    // both terms in divergence form: -int a d_j phi_i d_k v - d_ij int a d_k v
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int kk = 0; kk < 2; ++kk) {
                auto rhs = [&, i, j, kk](int e, const Vec2& x, const std::array<double, 3>&,
                                         const ElemBasis& basis, std::array<double, 6>& out) {
                    const double av = a(x);
                    const double pg = phi[i].grad(e, basis)[(size_t)j];
                    const double coef = -av * (pg + (i == j ? 1.0 : 0.0));
                    for (int m = 0; m < basis.n; ++m)
                        out[(size_t)m] = coef * basis.grad[(size_t)m][(size_t)kk];
                };
                cc.theta3[(size_t)i][(size_t)j][(size_t)kk] = solve_named(
                    rhs, "theta_" + std::to_string(i) + std::to_string(j) + std::to_string(kk));
            }

    return cc;
}

std::array<double, 2> HomogenizedTensors::q_eigenvalues() const {
    const double tr = Q[0][0] + Q[1][1];
    const double det = Q[0][0] * Q[1][1] - Q[0][1] * Q[1][0];
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    return {tr / 2 - disc, tr / 2 + disc};
}

HomogenizedTensors compute_tensors(const CellCorrectors& cc, const ScalarField& a, int qdeg,
                                   double asym_tol) {
    const Mesh& cell = *cc.mesh;
    HomogenizedTensors t;

    t.abar = integrate(cell, qdeg, [&](int, const Vec2& x, const auto&) { return a(x); });

    const FemField phi[2] = {cc.field(cc.phi[0]), cc.field(cc.phi[1])};
    const FemField zeta[2][2] = {{cc.field(cc.zeta[0][0]), cc.field(cc.zeta[0][1])},
                                 {cc.field(cc.zeta[1][0]), cc.field(cc.zeta[1][1])}};
    const FemField kappa[2][2] = {{cc.field(cc.kappa[0][0]), cc.field(cc.kappa[0][1])},
                                  {cc.field(cc.kappa[1][0]), cc.field(cc.kappa[1][1])}};

    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            t.Q[(size_t)i][(size_t)j] =
                (i == j ? t.abar : 0.0) +
                integrate(cell, qdeg, [&](int e, const Vec2& x, const auto& b) {
                    return a(x) * phi[i].grad_at(e, b)[(size_t)j];
                });
            t.Q_energy[(size_t)i][(size_t)j] =
                integrate(cell, qdeg, [&](int e, const Vec2& x, const auto& b) {
                    const ElemBasis basis = eval_basis(cell, e, b);
                    Vec2 gi = phi[i].grad(e, basis), gj = phi[j].grad(e, basis);
                    gi[(size_t)i] += 1.0;
                    gj[(size_t)j] += 1.0;
                    return a(x) * (gi[0] * gj[0] + gi[1] * gj[1]);
                });
        }

    t.q_asymmetry_defect = std::abs(t.Q[0][1] - t.Q[1][0]);
    if (t.q_asymmetry_defect > asym_tol * std::max(1.0, t.abar))
        throw SolverError("homogenization", "Q asymmetry defect " +
                                                std::to_string(t.q_asymmetry_defect) +
                                                " above tolerance");
    const double qsym = 0.5 * (t.Q[0][1] + t.Q[1][0]);
    t.Q[0][1] = t.Q[1][0] = qsym;

    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                t.P[(size_t)i][(size_t)j][(size_t)k] =
                    integrate(cell, qdeg, [&](int e, const Vec2& x, const auto& b) {
                        const ElemBasis basis = eval_basis(cell, e, b);
                        const double av = a(x);
                        return (i == j ? av * phi[k].value(e, basis) : 0.0) +
                               av * zeta[i][j].grad(e, basis)[(size_t)k];
                    });
                t.S[(size_t)i][(size_t)j][(size_t)k] =
                    integrate(cell, qdeg, [&](int e, const Vec2& x, const auto& b) {
                        const ElemBasis basis = eval_basis(cell, e, b);
                        const double av = a(x);
                        return av * kappa[i][k].grad(e, basis)[(size_t)j] -
                               av * zeta[i][j].grad(e, basis)[(size_t)k] -
                               (j == k ? av * phi[i].value(e, basis) : 0.0);
                    });
            }

    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    const FemField lam = cc.field(cc.lambda3[(size_t)i][(size_t)j][(size_t)k]);
                    const FemField th = cc.field(cc.theta3[(size_t)i][(size_t)j][(size_t)k]);
                    t.R[(size_t)i][(size_t)j][(size_t)k][(size_t)l] =
                        integrate(cell, qdeg, [&](int e, const Vec2& x, const auto& b) {
                            const ElemBasis basis = eval_basis(cell, e, b);
                            const double av = a(x);
                            return (i == j ? av * zeta[k][l].value(e, basis) : 0.0) +
                                   av * lam.grad(e, basis)[(size_t)l];
                        });
                    t.T[(size_t)i][(size_t)j][(size_t)k][(size_t)l] =
                        (k == l ? t.Q[(size_t)i][(size_t)j] : 0.0) +
                        integrate(cell, qdeg, [&](int e, const Vec2& x, const auto& b) {
                            return a(x) * th.grad_at(e, b)[(size_t)l];
                        });
                }
    return t;
}

std::string tensors_to_json(const HomogenizedTensors& t) {
    nlohmann::json j;
    j["_layout"] = "P,S flattened as i*4+j*2+k; R,T flattened as i*8+j*4+k*2+l (row-major)";
    j["abar"] = t.abar;
    j["Q"] = {{t.Q[0][0], t.Q[0][1]}, {t.Q[1][0], t.Q[1][1]}};
    std::vector<double> p, s, r, tt;
    for (int i = 0; i < 2; ++i)
        for (int jj = 0; jj < 2; ++jj)
            for (int k = 0; k < 2; ++k) {
                p.push_back(t.P[(size_t)i][(size_t)jj][(size_t)k]);
                s.push_back(t.S[(size_t)i][(size_t)jj][(size_t)k]);
            }
    for (int i = 0; i < 2; ++i)
        for (int jj = 0; jj < 2; ++jj)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    r.push_back(t.R[(size_t)i][(size_t)jj][(size_t)k][(size_t)l]);
                    tt.push_back(t.T[(size_t)i][(size_t)jj][(size_t)k][(size_t)l]);
                }
    j["P"] = p;
    j["S"] = s;
    j["R"] = r;
    j["T"] = tt;
    j["q_asymmetry_defect"] = t.q_asymmetry_defect;
    return j.dump(2);
}

HomogenizedTensors tensors_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    HomogenizedTensors t;
    t.abar = j.at("abar").get<double>();
    for (int i = 0; i < 2; ++i)
        for (int jj = 0; jj < 2; ++jj)
            t.Q[(size_t)i][(size_t)jj] = j.at("Q")[(size_t)i][(size_t)jj].get<double>();
    const auto p = j.at("P").get<std::vector<double>>();
    const auto s = j.at("S").get<std::vector<double>>();
    const auto r = j.at("R").get<std::vector<double>>();
    const auto tt = j.at("T").get<std::vector<double>>();
    int idx3 = 0, idx4 = 0;
    for (int i = 0; i < 2; ++i)
        for (int jj = 0; jj < 2; ++jj)
            for (int k = 0; k < 2; ++k) {
                t.P[(size_t)i][(size_t)jj][(size_t)k] = p.at((size_t)idx3);
                t.S[(size_t)i][(size_t)jj][(size_t)k] = s.at((size_t)idx3);
                ++idx3;
            }
    for (int i = 0; i < 2; ++i)
        for (int jj = 0; jj < 2; ++jj)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    t.R[(size_t)i][(size_t)jj][(size_t)k][(size_t)l] = r.at((size_t)idx4);
                    t.T[(size_t)i][(size_t)jj][(size_t)k][(size_t)l] = tt.at((size_t)idx4);
                    ++idx4;
                }
    return t;
}

} // namespace wgspec
