#include "wgspec/eigensolve.hpp"
#include "wgspec/errors.hpp"
#include "wgspec/quadrature.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace wgspec {

namespace {

Eigen::VectorXd seeded_random_vector(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

void fix_sign(Eigen::VectorXd& v) {
    if (v.sum() < 0) v = -v;
}

} // namespace

Spectrum smallest_eigenpairs(const SpMat& K, const SpMat& M, int k, double tol,
                             std::optional<double> sigma_opt, std::uint64_t seed) {
    const Eigen::Index n = K.rows();
    if (K.rows() != K.cols() || M.rows() != M.cols() || K.rows() != M.rows())
        throw ConfigError("eigensolve", "K and M must be square of equal size");
    if (k < 1) throw ConfigError("eigensolve", "k must be at least 1");
    if (k > n) throw ConfigError("eigensolve", "k exceeds matrix dimension");

    double sigma = sigma_opt.value_or(0.0);
    const double kscale = K.coeffs().cwiseAbs().maxCoeff();

    Eigen::SimplicialLDLT<SpMat> ldlt;
    double shift_step = 0.01 * std::abs(sigma) + 1e-8 * kscale + 1e-12;
    bool ok = false;
    for (int attempt = 0; attempt < 6; ++attempt) {
        SpMat A = K - sigma * M;
        ldlt.compute(A);
        if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all()) {
            ok = true;
            break;
        }
        // shift landed on or above part of the spectrum: back it off
        sigma -= shift_step;
        shift_step *= 4.0;
    }
    if (!ok) throw SolverError("eigensolve", "shift-invert factorization failed");

    const int m = static_cast<int>(std::min<Eigen::Index>(n, std::max(2 * k + 20, 40)));
    const SpMat Kabs = K.cwiseAbs();
    const SpMat Mabs = M.cwiseAbs();
    Eigen::MatrixXd V(n, m);
    Eigen::MatrixXd MV(n, m); // cache M * v_j
    Eigen::VectorXd alpha(m), beta(m);

    Eigen::VectorXd v = seeded_random_vector(n, seed);
    {
        Eigen::VectorXd Mv = M * v;
        v /= std::sqrt(v.dot(Mv));
    }
    V.col(0) = v;
    MV.col(0) = M * v;

    int built = 0;
    std::vector<double> theta;
    Eigen::MatrixXd Y;
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd w = ldlt.solve(MV.col(j));
        alpha[j] = w.dot(MV.col(j));
        w -= alpha[j] * V.col(j);
        if (j > 0) w -= beta[j - 1] * V.col(j - 1);
        // full reorthogonalization, twice
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::VectorXd proj = MV.leftCols(j + 1).transpose() * w;
            w -= V.leftCols(j + 1) * proj;
        }
        Eigen::VectorXd Mw = M * w;
        const double b = std::sqrt(std::max(0.0, w.dot(Mw)));
        beta[j] = b;
        built = j + 1;

        const bool last = (j + 1 == m) || b < 1e-14;
        if (j + 1 >= std::max(k + 2, 8) || last) {
            // Ritz values of the tridiagonal section
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(built, built);
            for (int i = 0; i < built; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < built) T(i, i + 1) = T(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            // largest theta correspond to eigenvalues nearest above sigma
            bool conv = built >= k;
            theta.clear();
            for (int i = 0; i < k && conv; ++i) {
                const int idx = built - 1 - i;
                const double th = es.eigenvalues()[idx];
                if (th <= 0) {
                    conv = false;
                    break;
                }
                const double resid = std::abs(b * es.eigenvectors()(built - 1, idx));
                if (resid > 0.1 * tol * std::abs(th)) conv = false;
            }
            if (conv) {
                // the cheap theta-space estimate signalled convergence:
                // accept only if the explicit residuals meet the contract,
                // or sit at the backward-stable floor eps (|K||x| + |l||M||x|)
                const double eps = std::numeric_limits<double>::epsilon();
                for (int i = 0; i < k && conv; ++i) {
                    const int idx = built - 1 - i;
                    const Eigen::VectorXd x = V.leftCols(built) * es.eigenvectors().col(idx);
                    const double lambda = sigma + 1.0 / es.eigenvalues()[idx];
                    const Eigen::VectorXd Kx = K * x;
                    const Eigen::VectorXd ax = x.cwiseAbs();
                    const double floor_n =
                        eps * ((Kabs * ax).norm() + std::abs(lambda) * (Mabs * ax).norm());
                    const double rn = (Kx - lambda * (M * x)).norm();
                    if (rn > std::max(tol * Kx.norm(), 20.0 * floor_n)) conv = false;
                }
            }
            if (conv || last) {
                Y.resize(built, k);
                theta.resize(static_cast<size_t>(k));
                for (int i = 0; i < k; ++i) {
                    const int idx = built - 1 - i;
                    theta[static_cast<size_t>(i)] = es.eigenvalues()[idx];
                    Y.col(i) = es.eigenvectors().col(idx);
                }
                if (conv) break;
                if (last && !conv)
                    throw SolverError("eigensolve",
                                      "Lanczos did not converge within the Krylov budget");
            }
        }
        if (b < 1e-14) break; // invariant subspace
        if (j + 1 < m) {
            V.col(j + 1) = w / b;
            MV.col(j + 1) = Mw / b;
        }
    }

    Spectrum out;
    out.eigenvalues.resize(static_cast<size_t>(k));
    out.eigenvectors.resize(static_cast<size_t>(k));
    out.residuals.resize(static_cast<size_t>(k));
    std::vector<int> order(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int bb) {
        return sigma + 1.0 / theta[(size_t)a] < sigma + 1.0 / theta[(size_t)bb];
    });
    for (int i = 0; i < k; ++i) {
        const int src = order[static_cast<size_t>(i)];
        const double lambda = sigma + 1.0 / theta[(size_t)src];
        Eigen::VectorXd x = V.leftCols(built) * Y.col(src);
        x /= std::sqrt(x.dot(M * x));
        fix_sign(x);
        const Eigen::VectorXd r = K * x - lambda * (M * x);
        const double rel = r.norm() / std::max(1e-300, (K * x).norm());
        out.eigenvalues[static_cast<size_t>(i)] = lambda;
        out.eigenvectors[static_cast<size_t>(i)] = std::move(x);
        out.residuals[static_cast<size_t>(i)] = rel;
    }
    return out;
}

// --- LOBPCG ----------------------------------------------------------------

namespace {

// M-orthonormalizes the columns of S in place (Cholesky of the Gram matrix,
// with column dropping if the basis is numerically degenerate).
// Returns the retained column count; MS is kept consistent.
int m_orthonormalize(Eigen::MatrixXd& S, Eigen::MatrixXd& MS) {
    Eigen::MatrixXd G = S.transpose() * MS;
    G = 0.5 * (G + G.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() == Eigen::Success) {
        Eigen::MatrixXd Linv =
            llt.matrixL().solve(Eigen::MatrixXd::Identity(G.rows(), G.cols()));
        S = S * Linv.transpose();
        MS = MS * Linv.transpose();
        return static_cast<int>(S.cols());
    }
    // SVQB-style fallback: drop directions below threshold
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const double thresh = es.eigenvalues().maxCoeff() * 1e-12;
    std::vector<int> keep;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] > thresh) keep.push_back(i);
    Eigen::MatrixXd B(G.rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t i = 0; i < keep.size(); ++i)
        B.col(static_cast<Eigen::Index>(i)) =
            es.eigenvectors().col(keep[i]) / std::sqrt(es.eigenvalues()[keep[i]]);
    S = S * B;
    MS = MS * B;
    return static_cast<int>(keep.size());
}

} // namespace

LobpcgResult lobpcg(const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& apply_A,
                    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& apply_M,
                    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& precond,
                    Eigen::Index n, int k, double tol, int maxit, std::uint64_t seed) {
    const int m = k;
    Eigen::MatrixXd X(n, m);
    for (int i = 0; i < m; ++i) X.col(i) = seeded_random_vector(n, seed + (std::uint64_t)i);
    Eigen::MatrixXd MX = apply_M(X);
    m_orthonormalize(X, MX);
    Eigen::MatrixXd AX = apply_A(X);

    Eigen::MatrixXd P, AP, MP;
    Eigen::VectorXd lambda(m);
    LobpcgResult result;

    for (int it = 0; it < maxit; ++it) {
        // Rayleigh quotients and residuals
        for (int i = 0; i < m; ++i) lambda[i] = X.col(i).dot(AX.col(i));
        Eigen::MatrixXd R = AX - MX * lambda.asDiagonal();

        double worst = 0;
        for (int i = 0; i < m; ++i)
            worst = std::max(worst, R.col(i).norm() /
                                        std::max(1.0, std::abs(lambda[i]) * MX.col(i).norm()));
        if (worst < tol) {
            result.converged = true;
            result.iterations = it;
            break;
        }

        Eigen::MatrixXd W = precond(R);

        // assemble the trial basis [X W P] and M-orthonormalize W, P against X
        const int np = P.cols() > 0 ? m : 0;
        Eigen::MatrixXd S(n, m + m + np), MS(n, m + m + np), AS(n, m + m + np);
        S.leftCols(m) = X;
        MS.leftCols(m) = MX;
        AS.leftCols(m) = AX;

        Eigen::MatrixXd MW = apply_M(W);
        // project out X, then orthonormalize the W block
        Eigen::MatrixXd proj = X.transpose() * MW;
        W -= X * proj;
        MW -= MX * proj;
        Eigen::MatrixXd Wb = W, MWb = MW;
        const int nw = m_orthonormalize(Wb, MWb);
        S.middleCols(m, nw) = Wb.leftCols(nw);
        MS.middleCols(m, nw) = MWb.leftCols(nw);
        AS.middleCols(m, nw) = apply_A(Wb.leftCols(nw));

        int used = m + nw;
        if (np > 0) {
            Eigen::MatrixXd projp = X.transpose() * MP;
            Eigen::MatrixXd Pb = P - X * projp;
            Eigen::MatrixXd MPb = MP - MX * projp;
            Eigen::MatrixXd projw = Wb.leftCols(nw).transpose() * MPb;
            Pb -= Wb.leftCols(nw) * projw;
            MPb -= MWb.leftCols(nw) * projw;
            const int npp = m_orthonormalize(Pb, MPb);
            S.middleCols(used, npp) = Pb.leftCols(npp);
            MS.middleCols(used, npp) = MPb.leftCols(npp);
            AS.middleCols(used, npp) = apply_A(Pb.leftCols(npp));
            used += npp;
        }

        // Rayleigh-Ritz on the trial space
        Eigen::MatrixXd At = S.leftCols(used).transpose() * AS.leftCols(used);
        At = 0.5 * (At + At.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(At);
        Eigen::MatrixXd Y = es.eigenvectors().leftCols(m);

        Eigen::MatrixXd Xn = S.leftCols(used) * Y;
        Eigen::MatrixXd AXn = AS.leftCols(used) * Y;
        Eigen::MatrixXd MXn = MS.leftCols(used) * Y;

        // implicit P: the component of the update orthogonal to the old X
        Eigen::MatrixXd Yp = Y;
        Yp.topRows(m).setZero();
        P = S.leftCols(used) * Yp;
        AP = AS.leftCols(used) * Yp;
        MP = MS.leftCols(used) * Yp;

        X = std::move(Xn);
        AX = std::move(AXn);
        MX = std::move(MXn);
        result.iterations = it + 1;
    }

    for (int i = 0; i < m; ++i) lambda[i] = X.col(i).dot(AX.col(i));
    std::vector<int> order(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) order[(size_t)i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return lambda[a] < lambda[b]; });

    Spectrum spec;
    for (int i = 0; i < k; ++i) {
        const int src = order[(size_t)i];
        Eigen::VectorXd x = X.col(src);
        fix_sign(x);
        spec.eigenvalues.push_back(lambda[src]);
        const Eigen::VectorXd r = AX.col(src) - lambda[src] * MX.col(src);
        spec.residuals.push_back(r.norm() / std::max(1e-300, std::abs(lambda[src])));
        spec.eigenvectors.push_back(std::move(x));
    }
    result.spectrum = std::move(spec);
    return result;
}

// --- 1D FEM ------------------------------------------------------------------

Operator1D assemble_operator_1d(double r, const std::function<double(double)>& q, double x0,
                                double L, int cells) {
    if (!(r > 0)) throw ConfigError("eigensolve", "kinetic coefficient r must be positive");
    if (cells < 4) throw ConfigError("eigensolve", "need at least 4 cells");
    const int nn = 2 * cells + 1;
    const double h = L / cells;

    std::vector<Eigen::Triplet<double>> kt, mt;
    const auto& rule = line_rule(4);
    // reference P2 shapes on [0,1]
    auto shape = [](double xi, int i) {
        switch (i) {
        case 0: return 2.0 * (xi - 0.5) * (xi - 1.0);
        case 1: return 4.0 * xi * (1.0 - xi);
        default: return 2.0 * xi * (xi - 0.5);
        }
    };
    auto dshape = [](double xi, int i) {
        switch (i) {
        case 0: return 4.0 * xi - 3.0;
        case 1: return 4.0 - 8.0 * xi;
        default: return 4.0 * xi - 1.0;
        }
    };

    auto dof_of = [nn](int node) { return (node == 0 || node == nn - 1) ? -1 : node - 1; };
    const int ndof = nn - 2;

    for (int e = 0; e < cells; ++e) {
        const double xl = x0 + e * h;
        double K[3][3] = {}, Mloc[3][3] = {};
        for (const auto& qp : rule) {
            const double x = xl + qp.x * h;
            const double qv = q(x);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    K[i][j] += qp.weight * h *
                               (r * dshape(qp.x, i) * dshape(qp.x, j) / (h * h) +
                                qv * shape(qp.x, i) * shape(qp.x, j));
                    Mloc[i][j] += qp.weight * h * shape(qp.x, i) * shape(qp.x, j);
                }
        }
        for (int i = 0; i < 3; ++i) {
            const int gi = dof_of(2 * e + i);
            if (gi < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int gj = dof_of(2 * e + j);
                if (gj < 0) continue;
                kt.emplace_back(gi, gj, K[i][j]);
                mt.emplace_back(gi, gj, Mloc[i][j]);
            }
        }
    }
    Operator1D op;
    op.K.resize(ndof, ndof);
    op.M.resize(ndof, ndof);
    op.K.setFromTriplets(kt.begin(), kt.end());
    op.M.setFromTriplets(mt.begin(), mt.end());
    op.n_dofs = ndof;
    op.nodes.resize(static_cast<size_t>(nn));
    for (int i = 0; i < nn; ++i) op.nodes[(size_t)i] = x0 + 0.5 * h * i;
    return op;
}

namespace {

// P2 elements on a uniform grid over (x0, x0 + L); Dirichlet at both ends.
Spectrum1D sturm_liouville_1d(double r, const std::function<double(double)>& q, double x0,
                              double L, int k, int cells) {
    Operator1D op = assemble_operator_1d(r, q, x0, L, cells);

    // a certified point below the spectrum: eta >= min q
    double qmin = 0;
    for (int i = 0; i <= 4 * cells; ++i) qmin = std::min(qmin, q(x0 + L * i / (4.0 * cells)));
    const double sigma = qmin - 1.0;

    // 1e-10 relative to ||K x||: tighter demands sink below the attainable
    // floor eps ||K|| ||x||, which dominates ||K x|| for the low modes here
    Spectrum spec = smallest_eigenpairs(op.K, op.M, k, 1e-10, sigma);

    Spectrum1D out;
    out.eigenvalues = spec.eigenvalues;
    out.nodes = op.nodes;
    for (const auto& v : spec.eigenvectors) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero((Eigen::Index)op.nodes.size());
        full.segment(1, op.n_dofs) = v;
        out.eigenfunctions.push_back(std::move(full));
    }
    out.truncation = L;
    return out;
}

} // namespace

Spectrum1D solve_sturm_liouville(double r, const std::function<double(double)>& q, double l, int k,
                                 int cells) {
    if (!(l > 0)) throw ConfigError("eigensolve", "interval length must be positive");
    return sturm_liouville_1d(r, q, 0.0, l, k, cells);
}

Spectrum1D solve_sturm_liouville_sampled(double r, const std::vector<double>& q_samples, double l,
                                         int k, int cells) {
    if (q_samples.size() < 2) throw ConfigError("eigensolve", "need at least 2 potential samples");
    auto q = [&q_samples, l](double s) {
        const double u = std::clamp(s / l, 0.0, 1.0) * double(q_samples.size() - 1);
        const size_t i = std::min(static_cast<size_t>(u), q_samples.size() - 2);
        const double w = u - double(i);
        return (1.0 - w) * q_samples[i] + w * q_samples[i + 1];
    };
    return sturm_liouville_1d(r, q, 0.0, l, k, cells);
}

Spectrum1D solve_oscillator(double r, double c, int k, double T, int cells) {
    if (!(c > 0))
        throw SolverError("eigensolve",
                          "oscillator coefficient must be positive (no discrete spectrum)");
    if (!(r > 0)) throw ConfigError("eigensolve", "r must be positive");
    if (T <= 0) T = 1.5 * std::sqrt(2.0 * (2.0 * k + 3.0) * std::sqrt(r / c));
    auto pot = [c](double t) { return c * t * t; };
    Spectrum1D out = sturm_liouville_1d(r, pot, -T, 2 * T, k, cells);
    out.truncation = T;
    Spectrum1D wide = sturm_liouville_1d(r, pot, -1.2 * T, 2.4 * T, k, cells);
    out.truncation_sensitivity.resize(static_cast<size_t>(k));
    for (int j = 0; j < k; ++j)
        out.truncation_sensitivity[(size_t)j] =
            out.eigenvalues[(size_t)j] - wide.eigenvalues[(size_t)j];
    return out;
}

Spectrum1D solve_halfline_linear(double r, double slope, int k, double T, int cells) {
    if (!(slope > 0))
        throw SolverError("eigensolve", "slope must be positive (minimum must sit at 0)");
    if (!(r > 0)) throw ConfigError("eigensolve", "r must be positive");
    if (T <= 0) {
        const double a_est = std::pow(3.0 * M_PI * (4.0 * k + 3.0) / 8.0, 2.0 / 3.0);
        T = 2.0 * a_est * std::cbrt(r / slope);
    }
    auto pot = [slope](double t) { return slope * t; };
    Spectrum1D out = sturm_liouville_1d(r, pot, 0.0, T, k, cells);
    out.truncation = T;
    Spectrum1D wide = sturm_liouville_1d(r, pot, 0.0, 1.2 * T, k, cells);
    out.truncation_sensitivity.resize(static_cast<size_t>(k));
    for (int j = 0; j < k; ++j)
        out.truncation_sensitivity[(size_t)j] =
            out.eigenvalues[(size_t)j] - wide.eigenvalues[(size_t)j];
    return out;
}

} // namespace wgspec
