#include "wgspec/tube_oracle.hpp"
#include "wgspec/errors.hpp"
#include "wgspec/quadrature.hpp"

#include <cmath>

namespace wgspec {

TubeOracleContext make_tube_context(const Mesh& xmesh, const ScalarField& a,
                                    const WaveguideGeometry& geom, int n_s_cells,
                                    int quad_degree) {
    TubeOracleContext ctx;
    ctx.xmesh = &xmesh;
    ctx.l = geom.l;
    ctx.n_s_cells = n_s_cells;

    // the preconditioner keeps dense spectral factors of both directions
    if (n_s_cells < 2 || n_s_cells > 2500)
        throw ResourceError("verification",
                            "tube oracle s-resolution outside the desk-scale budget");
    if (xmesh.nodes.size() > 8000)
        throw ResourceError("verification",
                            "tube oracle cross-section resolution outside the budget");

    // K = int a grad.grad, M = int a psi psi  (coefficient 1, weight a)
    ctx.op_ax = assemble_operator(
        xmesh, [](const Vec2&) { return 1.0; }, a, /*dirichlet=*/true, quad_degree);
    // plain mass with the same dof map
    AssembledOperator plain = assemble_operator(
        xmesh, a, [](const Vec2&) { return 1.0; }, /*dirichlet=*/true, quad_degree);
    ctx.Mx = plain.M;

    ctx.mu_C = smallest_eigenpairs(ctx.op_ax.K, ctx.Mx, 1).eigenvalues[0];

    ctx.op_s = assemble_operator_1d(1.0, [](double) { return 0.0; }, 0.0, geom.l, n_s_cells);

    // dense spectral factors for the Kronecker preconditioner
    {
        Eigen::MatrixXd A = Eigen::MatrixXd(ctx.op_ax.K) - ctx.mu_C * Eigen::MatrixXd(ctx.Mx);
        Eigen::MatrixXd B = Eigen::MatrixXd(ctx.op_ax.M); // a-weighted mass
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
        if (es.info() != Eigen::Success)
            throw SolverError("verification", "2D spectral factorization failed");
        ctx.Phi = es.eigenvectors(); // B-orthonormal
        ctx.dx = es.eigenvalues();
    }
    {
        Eigen::MatrixXd A = Eigen::MatrixXd(ctx.op_s.K);
        Eigen::MatrixXd B = Eigen::MatrixXd(ctx.op_s.M);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
        if (es.info() != Eigen::Success)
            throw SolverError("verification", "1D spectral factorization failed");
        ctx.Psi = es.eigenvectors();
        ctx.es = es.eigenvalues();
    }
    return ctx;
}

namespace {

// reference P2 shapes on [0,1] for the s direction
inline double shape1d(double xi, int i) {
    switch (i) {
    case 0: return 2.0 * (xi - 0.5) * (xi - 1.0);
    case 1: return 4.0 * xi * (1.0 - xi);
    default: return 2.0 * xi * (xi - 0.5);
    }
}
inline double dshape1d(double xi, int i) {
    switch (i) {
    case 0: return 4.0 * xi - 3.0;
    case 1: return 4.0 - 8.0 * xi;
    default: return 4.0 * xi - 1.0;
    }
}

} // namespace

TubeSpectrum solve_tube(const TubeOracleContext& ctx, const WaveguideGeometry& geom,
                        const ScalarField& a, double delta, int k, double tol, int maxit) {
    const Mesh& xmesh = *ctx.xmesh;
    const int nx = ctx.n_x();
    const int ns = ctx.n_s();
    const Eigen::Index n = static_cast<Eigen::Index>(nx) * ns;

    const double bound = beta_positivity_bound(geom, xmesh.sup_abs_x());
    if (delta >= bound)
        throw SolverError("verification",
                          "delta violates beta positivity (bound " + std::to_string(bound) + ")");

    // memory guard: triplets + two CSR matrices
    const size_t prisms = static_cast<size_t>(ctx.n_s_cells) * xmesh.tris.size();
    const size_t est_bytes = prisms * 324 * 16 * 2 + prisms * 324 * 12 * 2;
    if (est_bytes > size_t(3) * 1024 * 1024 * 1024)
        throw ResourceError("verification",
                            "tube oracle resolution exceeds the desk-scale memory budget");

    const double hs = ctx.l / ctx.n_s_cells;
    const auto& srule = line_rule(3);
    const auto& xrule = triangle_rule(4);

    // s-node -> reduced s-dof (Dirichlet ends eliminated)
    const int snodes = 2 * ctx.n_s_cells + 1;
    auto sdof = [snodes](int node) { return (node == 0 || node == snodes - 1) ? -1 : node - 1; };

    std::vector<Eigen::Triplet<double>> at, mt;
    at.reserve(prisms * 324);
    mt.reserve(prisms * 324);

    const int npe = xmesh.nodes_per_elem();
    for (int e1 = 0; e1 < ctx.n_s_cells; ++e1) {
        const double sl = e1 * hs;
        for (size_t e2 = 0; e2 < xmesh.tris.size(); ++e2) {
            double Aloc[18][18] = {};
            double Mloc[18][18] = {};
            const double area = 0.5 * xmesh.double_area(static_cast<int>(e2));
            for (const auto& sq : srule) {
                const double s = sl + sq.x * hs;
                const Vec2 xi = geom.xi(s);
                const double tau = geom.tau(s);
                double chi[3], dchi[3];
                for (int p = 0; p < 3; ++p) {
                    chi[p] = shape1d(sq.x, p);
                    dchi[p] = dshape1d(sq.x, p) / hs;
                }
                for (const auto& xq : xrule) {
                    const ElemBasis basis = eval_basis(xmesh, static_cast<int>(e2), xq.bary);
                    const Vec2 x = map_point(xmesh, static_cast<int>(e2), xq.bary);
                    const double beta = 1.0 - delta * (xi[0] * x[0] + xi[1] * x[1]);
                    if (!(beta > 0))
                        throw SolverError("verification", "beta <= 0 at a quadrature point");
                    const double av = a(x);
                    const double wq = sq.weight * hs * xq.weight * area;
                    const double c_dd = wq * av / beta;
                    const double c_xx = wq * av * beta / (delta * delta);
                    const double c_m = wq * beta;

                    // D(p,K) = dchi_p psi_K + tau chi_p (Rx . grad psi_K)
                    double rxg[6], psi[6];
                    for (int K = 0; K < npe; ++K) {
                        psi[K] = basis.N[(size_t)K];
                        rxg[K] = x[1] * basis.grad[(size_t)K][0] - x[0] * basis.grad[(size_t)K][1];
                    }
                    for (int p = 0; p < 3; ++p) {
                        for (int K = 0; K < npe; ++K) {
                            const int I = p * npe + K;
                            const double DI = dchi[p] * psi[K] + tau * chi[p] * rxg[K];
                            for (int qI = 0; qI < 3; ++qI) {
                                for (int L = 0; L < npe; ++L) {
                                    const int J = qI * npe + L;
                                    const double DJ =
                                        dchi[qI] * psi[L] + tau * chi[qI] * rxg[L];
                                    const double gxgx =
                                        basis.grad[(size_t)K][0] * basis.grad[(size_t)L][0] +
                                        basis.grad[(size_t)K][1] * basis.grad[(size_t)L][1];
                                    Aloc[I][J] +=
                                        c_dd * DI * DJ + c_xx * chi[p] * chi[qI] * gxgx;
                                    Mloc[I][J] += c_m * chi[p] * chi[qI] * psi[K] * psi[L];
                                }
                            }
                        }
                    }
                }
            }
            // scatter
            const auto& t = xmesh.tris[e2];
            for (int p = 0; p < 3; ++p) {
                const int gs = sdof(2 * e1 + p);
                if (gs < 0) continue;
                for (int K = 0; K < npe; ++K) {
                    const int gx = ctx.op_ax.dof_map[(size_t)t[(size_t)K]];
                    if (gx < 0) continue;
                    const int gI = gs * nx + gx;
                    for (int qI = 0; qI < 3; ++qI) {
                        const int hs_dof = sdof(2 * e1 + qI);
                        if (hs_dof < 0) continue;
                        for (int L = 0; L < npe; ++L) {
                            const int gx2 = ctx.op_ax.dof_map[(size_t)t[(size_t)L]];
                            if (gx2 < 0) continue;
                            const int gJ = hs_dof * nx + gx2;
                            at.emplace_back(gI, gJ, Aloc[p * npe + K][qI * npe + L]);
                            mt.emplace_back(gI, gJ, Mloc[p * npe + K][qI * npe + L]);
                        }
                    }
                }
            }
        }
    }

    SpMat A(n, n), M(n, n);
    A.setFromTriplets(at.begin(), at.end());
    at.clear();
    at.shrink_to_fit();
    M.setFromTriplets(mt.begin(), mt.end());
    mt.clear();
    mt.shrink_to_fit();

    // Kronecker fast-diagonalization preconditioner:
    // P = Ks (x) Ma + Ms (x) (Ka - sigma Mx), sigma = mu_C / delta^2,
    // applied through the cached spectral factors.
    const double d2 = delta * delta;
    Eigen::VectorXd denom_x = ctx.dx / d2;
    auto precond = [&](const Eigen::MatrixXd& R) {
        Eigen::MatrixXd W(n, R.cols());
        for (Eigen::Index c = 0; c < R.cols(); ++c) {
            Eigen::Map<const Eigen::MatrixXd> V(R.col(c).data(), nx, ns);
            Eigen::MatrixXd Vt = ctx.Phi.transpose() * V * ctx.Psi;
            for (int js = 0; js < ns; ++js)
                for (int jx = 0; jx < nx; ++jx) {
                    const double den = std::max(ctx.es[js] + denom_x[jx], 1e-3 * ctx.es[0]);
                    Vt(jx, js) /= den;
                }
            Eigen::MatrixXd U = ctx.Phi * Vt * ctx.Psi.transpose();
            W.col(c) = Eigen::Map<Eigen::VectorXd>(U.data(), n);
        }
        return W;
    };
    auto applyA = [&](const Eigen::MatrixXd& X) { return Eigen::MatrixXd(A * X); };
    auto applyM = [&](const Eigen::MatrixXd& X) { return Eigen::MatrixXd(M * X); };

    LobpcgResult res = lobpcg(applyA, applyM, precond, n, k + 1, tol, maxit);
    if (!res.converged)
        throw SolverError("verification", "tube oracle LOBPCG did not converge (" +
                                              std::to_string(res.iterations) + " iterations)");

    TubeSpectrum out;
    out.delta = delta;
    out.iterations = res.iterations;
    out.converged = res.converged;
    out.n_s_cells = ctx.n_s_cells;
    out.n_x_resolution = nx;
    out.mu_C_2d = ctx.mu_C;
    for (int j = 0; j < k; ++j) {
        out.lambdas.push_back(res.spectrum.eigenvalues[(size_t)j]);
        out.residuals.push_back(res.spectrum.residuals[(size_t)j]);
        out.modes.emplace_back(
            Eigen::Map<const Eigen::MatrixXd>(res.spectrum.eigenvectors[(size_t)j].data(), nx, ns));
    }
    return out;
}

double concentration_diagnostic(const TubeOracleContext& ctx, const Eigen::MatrixXd& mode,
                                double s0) {
    // lumped 1D mass: row sums over the full node set
    const int snodes = static_cast<int>(ctx.op_s.nodes.size());
    Eigen::VectorXd lump = Eigen::VectorXd::Zero(snodes);
    {
        // interior rows from the reduced M, boundary rows carry zero modes anyway
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(ctx.op_s.n_dofs);
        Eigen::VectorXd rs = ctx.op_s.M * ones;
        lump.segment(1, ctx.op_s.n_dofs) = rs;
    }
    double num = 0, den = 0;
    for (int is = 0; is < ctx.n_s(); ++is) {
        const double s = ctx.op_s.nodes[(size_t)is + 1];
        const double mass_x = mode.col(is).dot(ctx.Mx * mode.col(is));
        const double w = lump[is + 1] * mass_x;
        num += w * (s - s0) * (s - s0);
        den += w;
    }
    if (den <= 0) return 0;
    return num / den;
}

} // namespace wgspec
