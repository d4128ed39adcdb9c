#include "wgspec/effective_model.hpp"
#include "wgspec/errors.hpp"

#include "json.hpp"

#include <cmath>

namespace wgspec {

std::vector<double> EffectiveModel::q_total() const {
    std::vector<double> q(s.size(), 0.0);
    for (size_t i = 0; i < s.size(); ++i) {
        if (regime == Regime::Homogenized) {
            q[i] = q_H + (i < q_xi.size() ? q_xi[i] : 0.0) + (i < q_tau.size() ? q_tau[i] : 0.0);
        } else {
            q[i] = (i < q_tau.size() ? q_tau[i] : 0.0) + (i < q_c.size() ? q_c[i] : 0.0);
        }
    }
    return q;
}

namespace {

std::vector<double> uniform_grid(double l, int n) {
    std::vector<double> s(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) s[(size_t)i] = l * double(i) / double(n - 1);
    return s;
}

} // namespace

EffectiveModel compute_potential_homogenized(const WaveguideGeometry& geom,
                                             const HomogenizedTensors& tensors,
                                             const CrossSectionSolution& cs,
                                             const AuxiliaryFields& aux, int n_s,
                                             bool with_unsimplified, int quad_degree) {
    const Mesh& mesh = *cs.mesh;
    const FemField w = cs.ground();
    const FemField wbar(mesh, aux.wbar);
    const FemField what0(mesh, aux.what[0]);
    const FemField what1(mesh, aux.what[1]);
    const FemField* what[2] = {&what0, &what1};

    EffectiveModel model;
    model.regime = EffectiveModel::Regime::Homogenized;
    model.l = geom.l;
    model.r = tensors.abar;
    model.mu_leading = cs.mu();
    model.s = uniform_grid(geom.l, n_s);

    // ---- s-independent mesh integrals --------------------------------------
    // I1[i] = int (d_i w_H) wbar
    double I1[2];
    // I2[i][m] = int (d_i w_H) what_m
    double I2[2][2];
    // I3[i][j] = int (d2_ij w_H) w_H = -int (d_j w_H)(d_i w_H)   (exact IBP)
    double I3[2][2];
    // X[i][m] = int x_m (d_i w_H) w_H   (so that int (xi.x)(d_i w)w = X[i][m] xi_m)
    double X[2][2];
    for (int i = 0; i < 2; ++i) {
        I1[i] = integrate(mesh, quad_degree, [&](int e, const Vec2&, const auto& bc) {
            const ElemBasis basis = eval_basis(mesh, e, bc);
            return w.grad(e, basis)[(size_t)i] * wbar.value(e, basis);
        });
        for (int m = 0; m < 2; ++m) {
            I2[i][m] = integrate(mesh, quad_degree, [&](int e, const Vec2&, const auto& bc) {
                const ElemBasis basis = eval_basis(mesh, e, bc);
                return w.grad(e, basis)[(size_t)i] * what[m]->value(e, basis);
            });
            X[i][m] = integrate(mesh, quad_degree, [&](int e, const Vec2& x, const auto& bc) {
                const ElemBasis basis = eval_basis(mesh, e, bc);
                return x[(size_t)m] * w.grad(e, basis)[(size_t)i] * w.value(e, basis);
            });
        }
        for (int j = 0; j < 2; ++j)
            I3[i][j] = -integrate(mesh, quad_degree, [&](int e, const Vec2&, const auto& bc) {
                const ElemBasis basis = eval_basis(mesh, e, bc);
                const Vec2 g = w.grad(e, basis);
                return g[(size_t)i] * g[(size_t)j];
            });
    }

    // q_H: R-contraction of int (d4_ijkl w_H) w_H
    //      = int H_ij H_kl - bflux_k( H_ij d_l w_H )  after two IBP steps,
    // plus the P term  P_ijk int (d3_ijk w_H) wbar = -P_ijk int H_jk d_i wbar.
    double HH[2][2][2][2];
    double FLUX[2][2][2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    HH[i][j][k][l] =
                        integrate(mesh, quad_degree, [&](int e, const Vec2&, const auto& bc) {
                            const auto H = aux.hess_w.at(e, bc);
                            const double Hm[2][2] = {{H[0], H[1]}, {H[1], H[2]}};
                            return Hm[i][j] * Hm[k][l];
                        });
                    FLUX[i][j][k][l] = integrate_boundary(
                        mesh, 4, [&](int e, const Vec2&, const Vec2& nrm, const auto& bc) {
                            const auto H = aux.hess_w.at(e, bc);
                            const double Hm[2][2] = {{H[0], H[1]}, {H[1], H[2]}};
                            return nrm[(size_t)k] * Hm[i][j] * w.grad_at(e, bc)[(size_t)l];
                        });
                }
    double GWbar[2][2][2]; // int H_jk d_i wbar
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                GWbar[i][j][k] =
                    integrate(mesh, quad_degree, [&](int e, const Vec2&, const auto& bc) {
                        const auto H = aux.hess_w.at(e, bc);
                        const double Hm[2][2] = {{H[0], H[1]}, {H[1], H[2]}};
                        return Hm[j][k] * wbar.grad_at(e, bc)[(size_t)i];
                    });

    double qH = 0, flux_mag = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                for (int l = 0; l < 2; ++l) {
                    const double d4 = HH[i][j][k][l] - FLUX[i][j][k][l];
                    qH -= tensors.R[(size_t)i][(size_t)j][(size_t)k][(size_t)l] * d4;
                    flux_mag += std::abs(tensors.R[(size_t)i][(size_t)j][(size_t)k][(size_t)l] *
                                         FLUX[i][j][k][l]);
                }
                qH -= tensors.P[(size_t)i][(size_t)j][(size_t)k] * GWbar[i][j][k];
            }
        }
    model.q_H = qH;
    model.q_H_boundary_flux = flux_mag;

    // q_tau geometry integral: T4[i][j][k][l] = int (Rx)_i (d_j w)(Rx)_k (d_l w),
    // with R the rotation by -pi/2: Rx = (x2, -x1).
    double T4[2][2][2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    T4[i][j][k][l] =
                        integrate(mesh, quad_degree, [&](int e, const Vec2& x, const auto& bc) {
                            const Vec2 rx{x[1], -x[0]};
                            const Vec2 g = w.grad_at(e, bc);
                            return rx[(size_t)i] * g[(size_t)j] * rx[(size_t)k] * g[(size_t)l];
                        });

    // GW[i][j][k][m] = int H_jk d_i what_m  (unsimplified q_xi's P term)
    double GW[2][2][2][2];
    if (with_unsimplified) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    for (int m = 0; m < 2; ++m)
                        GW[i][j][k][m] =
                            integrate(mesh, quad_degree, [&](int e, const Vec2&, const auto& bc) {
                                const auto H = aux.hess_w.at(e, bc);
                                const double Hm[2][2] = {{H[0], H[1]}, {H[1], H[2]}};
                                return Hm[j][k] * what[m]->grad_at(e, bc)[(size_t)i];
                            });
    }

    // ---- per-s assembly ----------------------------------------------------
    const size_t ns = model.s.size();
    model.q_xi.resize(ns);
    model.q_tau.resize(ns);
    if (with_unsimplified) model.q_xi_unsimplified.resize(ns);
    double tau_sup = 0;
    for (size_t is = 0; is < ns; ++is) {
        const double sv = model.s[is];
        const Vec2 xi = geom.xi(sv);
        const double tau = geom.tau(sv);
        tau_sup = std::max(tau_sup, std::abs(tau));

        double qxiq = 0, qxi1 = 0, qxiS = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                qxiq += tensors.Q[(size_t)i][(size_t)j] * xi[(size_t)i] * xi[(size_t)j];
                qxi1 += tensors.Q[(size_t)i][(size_t)j] * xi[(size_t)j] * I1[i];
                for (int k = 0; k < 2; ++k)
                    qxiS += tensors.S[(size_t)i][(size_t)j][(size_t)k] * xi[(size_t)k] * I3[i][j];
            }
        model.q_xi[is] = -0.25 * qxiq - 2.0 * qxi1 - qxiS;

        if (with_unsimplified) {
            // first form of the q_xi expression
            double t1 = 0, t2 = 0, t3 = 0, t4 = 0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    for (int k = 0; k < 2; ++k)
                        for (int m = 0; m < 2; ++m)
                            t1 -= tensors.P[(size_t)i][(size_t)j][(size_t)k] * GW[i][j][k][m] *
                                  xi[(size_t)m]; // int d3 w (what.xi) = -int H d(what.xi)
                    t2 += tensors.Q[(size_t)i][(size_t)j] * xi[(size_t)j] * X[i][0] * xi[0] +
                          tensors.Q[(size_t)i][(size_t)j] * xi[(size_t)j] * X[i][1] * xi[1];
                    t3 -= tensors.Q[(size_t)i][(size_t)j] * xi[(size_t)j] * I1[i];
                    for (int m = 0; m < 2; ++m)
                        t4 -= tensors.Q[(size_t)i][(size_t)j] * xi[(size_t)j] * I2[i][m] *
                              xi[(size_t)m];
                }
            model.q_xi_unsimplified[is] = t1 + t2 + t3 + t4 - qxiS;
        }

        double qt = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l)
                        qt += tensors.T[(size_t)i][(size_t)j][(size_t)k][(size_t)l] *
                              T4[i][j][k][l];
        model.q_tau[is] = tau * tau * qt;
    }
    model.conjectural = tau_sup > 0;
    return model;
}

EffectiveModel compute_potential_inhomogeneous(const WaveguideGeometry& geom,
                                               const CrossSectionSolution& cs,
                                               const AuxiliaryFields& aux, const ScalarField& a,
                                               int n_s, int quad_degree) {
    const Mesh& mesh = *cs.mesh;
    const FemField w = cs.ground();

    EffectiveModel model;
    model.regime = EffectiveModel::Regime::Inhomogeneous;
    model.l = geom.l;
    model.mu_leading = cs.mu();
    model.s = uniform_grid(geom.l, n_s);

    model.r = integrate(mesh, quad_degree, [&](int e, const Vec2& x, const auto& bc) {
        const double wv = w.value_at(e, bc);
        return a(x) * wv * wv;
    });

    // int a |grad w . Rx|^2 and int a (grad w . Rx) w
    const double J2 = integrate(mesh, quad_degree, [&](int e, const Vec2& x, const auto& bc) {
        const Vec2 g = w.grad_at(e, bc);
        const double grx = g[0] * x[1] - g[1] * x[0];
        return a(x) * grx * grx;
    });
    const double J1 = integrate(mesh, quad_degree, [&](int e, const Vec2& x, const auto& bc) {
        const ElemBasis basis = eval_basis(mesh, e, bc);
        const Vec2 g = w.grad(e, basis);
        const double grx = g[0] * x[1] - g[1] * x[0];
        return a(x) * grx * w.value(e, basis);
    });

    const size_t ns = model.s.size();
    model.q_tau.resize(ns);
    model.q_c.resize(ns);
    model.drift.resize(ns);
    for (size_t is = 0; is < ns; ++is) {
        const double sv = model.s[is];
        const Vec2 xi = geom.xi(sv);
        const double tau = geom.tau(sv);
        const double taup = geom.tau_deriv(sv);
        model.q_tau[is] = tau * tau * J2 - taup * J1;
        double qc = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                qc += aux.B[(size_t)i][(size_t)j] * xi[(size_t)i] * xi[(size_t)j];
        model.q_c[is] = qc;
        model.drift[is] = aux.b[0] * xi[0] + aux.b[1] * xi[1];
    }
    return model;
}

PropagationCheck check_propagation(const EffectiveModel& model, double tol) {
    if (model.regime != EffectiveModel::Regime::Inhomogeneous)
        throw ConfigError("effective_model", "propagation check applies to the inhomogeneous regime");
    PropagationCheck pc;
    pc.h_profile = model.drift;
    double lo = model.drift.front(), hi = lo, amax = 0;
    for (double v : model.drift) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        amax = std::max(amax, std::abs(v));
    }
    pc.variation = hi - lo;
    pc.propagates = pc.variation <= tol * (1.0 + amax);
    return pc;
}

SpectralDecomposition effective_spectrum(const EffectiveModel& model, int k,
                                         const std::vector<double>& scales, int cells) {
    SpectralDecomposition sd;
    sd.mu_leading = model.mu_leading;
    sd.conjectural = model.conjectural;

    if (model.regime == EffectiveModel::Regime::Inhomogeneous) {
        const PropagationCheck pc = check_propagation(model, 1e-8);
        if (!pc.propagates)
            throw SolverError("effective_model",
                              "propagation criterion violated (drift varies by " +
                                  std::to_string(pc.variation) + "): use the localization model");
        double mean = 0;
        for (double v : model.drift) mean += v;
        sd.drift_const = mean / double(model.drift.size());
    }

    const std::vector<double> q = model.q_total();
    Spectrum1D sl = solve_sturm_liouville_sampled(model.r, q, model.l, k, cells);
    sd.eta = sl.eigenvalues;
    sd.mode_nodes = sl.nodes;
    sd.mode_profiles = sl.eigenfunctions;

    for (double scale : scales) {
        std::vector<double> lams;
        for (int j = 0; j < k; ++j)
            lams.push_back(sd.mu_leading / (scale * scale) + sd.drift_const / scale +
                           sd.eta[(size_t)j]);
        sd.lambda[scale] = std::move(lams);
    }
    return sd;
}

std::string effective_model_to_json(const EffectiveModel& model, const SpectralDecomposition& sd) {
    nlohmann::json j;
    j["regime"] =
        model.regime == EffectiveModel::Regime::Homogenized ? "homogenized" : "inhomogeneous";
    j["r"] = model.r;
    j["mu"] = model.mu_leading;
    j["s"] = model.s;
    j["q_H"] = model.q_H;
    j["q_xi"] = model.q_xi;
    j["q_tau"] = model.q_tau;
    j["q_c"] = model.q_c;
    j["drift"] = model.drift;
    j["eta"] = sd.eta;
    nlohmann::json lam = nlohmann::json::object();
    for (const auto& [scale, vals] : sd.lambda)
        lam[nlohmann::json(scale).dump()] = vals; // shortest round-trip key
    j["lambda"] = lam;
    j["conjectural"] = model.conjectural;
    return j.dump(2);
}

} // namespace wgspec
