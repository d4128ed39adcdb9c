#include "wgspec/verification.hpp"
#include "wgspec/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace wgspec {

namespace {

void fit_slope(ConvergenceReport& r) {
    // least-squares slope of log(error) vs log(scale), skipping floor points
    const double eps_floor =
        10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(r.reference_mu));
    const double floor = std::max(eps_floor, 0.5 * r.floor_estimate);
    std::vector<double> lx, ly;
    for (size_t i = 0; i < r.errors.size(); ++i) {
        if (r.errors[i] > floor) {
            lx.push_back(std::log(r.scales[i]));
            ly.push_back(std::log(r.errors[i]));
        }
    }
    if (lx.size() < 2) {
        r.slope_valid = false;
        r.note = "errors at the discretization/machine floor: rate reported as exact";
        return;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double n = double(lx.size());
    r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    r.slope_valid = true;
    for (size_t i = 1; i < r.errors.size(); ++i)
        if (r.errors[i] > r.errors[i - 1] && r.errors[i] > floor) r.monotone = false;
    if (!r.monotone) r.note = "non-monotone error sequence (mesh error floor reached?)";
}

} // namespace

std::string ConvergenceReport::csv() const {
    std::string out = "scale,error\n";
    char line[80];
    for (size_t i = 0; i < scales.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g\n", scales[i], errors[i]);
        out += line;
    }
    return out;
}

ConvergenceReport convergence_study_beta(const WaveguideGeometry& geom, const ScalarField& a,
                                         const Mesh& xmesh, double s,
                                         const std::vector<double>& deltas, int quad_degree) {
    for (size_t i = 1; i < deltas.size(); ++i)
        if (deltas[i] >= deltas[i - 1])
            throw ConfigError("verification", "scales must decrease strictly");

    // all reference quantities on the same mesh: discretization errors cancel
    CrossSectionSolution cs = solve_inhomogeneous_cs(xmesh, a, 2, quad_degree);
    const Vec2 b = compute_b(cs, a, quad_degree);
    AuxiliaryFields aux =
        solve_auxiliaries_inhomogeneous(cs, a, b, /*with_wbar_matrix=*/false, 1e-3, quad_degree);
    const Vec2 xi = geom.xi(s);
    double qc = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            qc += aux.B[(size_t)i][(size_t)j] * xi[(size_t)i] * xi[(size_t)j];
    const double h = b[0] * xi[0] + b[1] * xi[1];

    ConvergenceReport r;
    r.reference_mu = cs.mu();
    for (double d : deltas) {
        CrossSectionSolution pert = solve_perturbed_cs(xmesh, a, geom, d, s, 1, 0.0, quad_degree);
        const double pred = cs.mu() + d * h + d * d * qc;
        r.scales.push_back(d);
        r.raw_mu.push_back(pert.mu());
        r.predicted.push_back(pred);
        r.errors.push_back(std::abs(pert.mu() - pred));
    }

    // floor estimate: repeat the smallest delta on a finer mesh and compare
    // the same-mesh differences
    {
        const int n_est = static_cast<int>(std::lround(std::sqrt(xmesh.tris.size() / 2.0)));
        Mesh fine = unit_square_mesh(n_est + n_est / 2, xmesh.order);
        if (xmesh.domain_tag == "unit_square") {
            CrossSectionSolution cs2 = solve_inhomogeneous_cs(fine, a, 1, quad_degree);
            CrossSectionSolution p2 =
                solve_perturbed_cs(fine, a, geom, deltas.back(), s, 1, 0.0, quad_degree);
            const double diff_coarse = r.raw_mu.back() - cs.mu();
            const double diff_fine = p2.mu() - cs2.mu();
            r.floor_estimate = std::abs(diff_coarse - diff_fine);
        }
    }
    fit_slope(r);
    return r;
}

ConvergenceReport convergence_study_homogenize(const WaveguideGeometry& geom,
                                               const ScalarField& a_cell, double s,
                                               const std::vector<double>& epsilons, bool combined,
                                               int elems_per_period, int cell_resolution,
                                               int cs_resolution, int quad_degree) {
    for (size_t i = 1; i < epsilons.size(); ++i)
        if (epsilons[i] >= epsilons[i - 1])
            throw ConfigError("verification", "scales must decrease strictly");
    if (!combined && geom.xi_sup > 0)
        throw ConfigError("verification",
                          "homogenize_only requires a straight geometry (use combined)");

    // reference pipeline: cell -> tensors -> homogenized cross-section -> q
    Mesh cell = cell_mesh(cell_resolution, ElementOrder::P2);
    CellCorrectors cc = solve_cell_problems(cell, a_cell, quad_degree);
    HomogenizedTensors tensors = compute_tensors(cc, a_cell, quad_degree);
    Mesh xref = unit_square_mesh(cs_resolution, ElementOrder::P2);
    CrossSectionSolution cs = solve_homogenized_cs(xref, tensors.Q, 2, quad_degree);
    AuxiliaryFields aux = solve_auxiliaries(cs, tensors, 1e-3, quad_degree);
    EffectiveModel model =
        compute_potential_homogenized(geom, tensors, cs, aux, 65, false, quad_degree);

    double q_xi_s = 0;
    if (combined) {
        // sample q_xi at s by interpolation on the model grid
        const double u = std::clamp(s / geom.l, 0.0, 1.0) * double(model.s.size() - 1);
        const size_t i0 = std::min((size_t)u, model.s.size() - 2);
        const double w = u - double(i0);
        q_xi_s = (1 - w) * model.q_xi[i0] + w * model.q_xi[i0 + 1];
    }

    // periodic extension of the cell coefficient
    auto a_eps_fn = [&a_cell](double eps) {
        return [&a_cell, eps](const Vec2& x) {
            auto wrap = [](double v) { return v - std::floor(v); };
            return a_cell({wrap(x[0] / eps), wrap(x[1] / eps)});
        };
    };

    ConvergenceReport r;
    r.reference_mu = cs.mu();
    for (double eps : epsilons) {
        const double cells_f = elems_per_period / eps;
        const int n = static_cast<int>(std::lround(cells_f));
        if (std::abs(cells_f - n) > 1e-9)
            throw ConfigError("verification", "epsilon must be 1/m for integer m");
        Mesh xm = unit_square_mesh(n, ElementOrder::P2);
        CrossSectionSolution pert =
            solve_perturbed_cs(xm, a_eps_fn(eps), geom, eps, s, 1, eps, quad_degree);
        const double pred = cs.mu() + eps * eps * (model.q_H + q_xi_s);
        r.scales.push_back(eps);
        r.raw_mu.push_back(pert.mu());
        r.predicted.push_back(pred);
        r.errors.push_back(std::abs(pert.mu() - pred));
    }

    // floor: redo the largest epsilon with doubled per-period resolution
    {
        const double eps = epsilons.front();
        const int n = static_cast<int>(std::lround(2.0 * elems_per_period / eps));
        Mesh xm = unit_square_mesh(n, ElementOrder::P2);
        CrossSectionSolution pert =
            solve_perturbed_cs(xm, a_eps_fn(eps), geom, eps, s, 1, eps, quad_degree);
        r.floor_estimate = std::abs(pert.mu() - r.raw_mu.front());
    }
    fit_slope(r);
    return r;
}

std::vector<IdentityResidual> identity_checks(const CrossSectionSolution& cs,
                                              const AuxiliaryFields& aux,
                                              const HomogenizedTensors& tensors, const Vec2& xi,
                                              int quad_degree) {
    const Mesh& mesh = *cs.mesh;
    const FemField w = cs.ground();
    const FemField wbar(mesh, aux.wbar);
    const FemField what0(mesh, aux.what[0]);
    const FemField what1(mesh, aux.what[1]);
    const FemField* what[2] = {&what0, &what1};

    std::vector<IdentityResidual> out;

    // int (xi.x)(d_i w) w = -xi_i / 2
    for (int i = 0; i < 2; ++i) {
        const double val = integrate(mesh, quad_degree, [&](int e, const Vec2& x, const auto& bc) {
            const ElemBasis basis = eval_basis(mesh, e, bc);
            return (xi[0] * x[0] + xi[1] * x[1]) * w.grad(e, basis)[(size_t)i] *
                   w.value(e, basis);
        });
        out.push_back({"moment_identity_" + std::to_string(i), val + xi[(size_t)i] / 2.0});
    }

    // Q_ij xi_j int (d_i w)(what.xi) = -1/4 Q xi.xi
    {
        double lhs = 0, qxx = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                qxx += tensors.Q[(size_t)i][(size_t)j] * xi[(size_t)i] * xi[(size_t)j];
                for (int m = 0; m < 2; ++m) {
                    const double I =
                        integrate(mesh, quad_degree, [&](int e, const Vec2&, const auto& bc) {
                            const ElemBasis basis = eval_basis(mesh, e, bc);
                            return w.grad(e, basis)[(size_t)i] * what[m]->value(e, basis);
                        });
                    lhs += tensors.Q[(size_t)i][(size_t)j] * xi[(size_t)j] * I * xi[(size_t)m];
                }
            }
        out.push_back({"what_contraction", lhs + 0.25 * qxx});
    }

    // P_ijk int (d3_ijk w)(what.xi) = -Q_ij xi_j int (d_i w) wbar
    {
        double lhs = 0, rhs = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                for (int k = 0; k < 2; ++k)
                    for (int m = 0; m < 2; ++m) {
                        const double I =
                            integrate(mesh, quad_degree, [&](int e, const Vec2&, const auto& bc) {
                                const auto H = aux.hess_w.at(e, bc);
                                const double Hm[2][2] = {{H[0], H[1]}, {H[1], H[2]}};
                                return Hm[j][k] * what[m]->grad_at(e, bc)[(size_t)i];
                            });
                        lhs -= tensors.P[(size_t)i][(size_t)j][(size_t)k] * I * xi[(size_t)m];
                    }
                const double I1 =
                    integrate(mesh, quad_degree, [&](int e, const Vec2&, const auto& bc) {
                        const ElemBasis basis = eval_basis(mesh, e, bc);
                        return w.grad(e, basis)[(size_t)i] * wbar.value(e, basis);
                    });
                rhs -= tensors.Q[(size_t)i][(size_t)j] * xi[(size_t)j] * I1;
            }
        out.push_back({"PQ_relation", lhs - rhs});
    }

    // normalization and side conditions
    {
        const double nrm = integrate(mesh, quad_degree, [&](int e, const Vec2&, const auto& bc) {
            const double v = w.value_at(e, bc);
            return v * v;
        });
        out.push_back({"normalization", nrm - 1.0});
        const double ow = integrate(mesh, quad_degree, [&](int e, const Vec2&, const auto& bc) {
            return wbar.value_at(e, bc) * w.value_at(e, bc);
        });
        out.push_back({"wbar_orthogonality", ow});
        for (int k = 0; k < 2; ++k) {
            const double o =
                integrate(mesh, quad_degree, [&](int e, const Vec2&, const auto& bc) {
                    return what[k]->value_at(e, bc) * w.value_at(e, bc);
                });
            out.push_back({"what_orthogonality_" + std::to_string(k), o});
        }
    }
    return out;
}

std::string tube_spectrum_to_json(const TubeSpectrum& ts) {
    nlohmann::json j;
    j["delta"] = ts.delta;
    j["lambda"] = ts.lambdas;
    j["residuals"] = ts.residuals;
    j["iterations"] = ts.iterations;
    j["converged"] = ts.converged;
    j["provenance"] = {{"n_s_cells", ts.n_s_cells},
                       {"n_x_dofs", ts.n_x_resolution},
                       {"mu_C_2d", ts.mu_C_2d},
                       {"basis", "P2(s) x P2(x) product"},
                       {"solver", "lobpcg+kronecker_fd"}};
    return j.dump(2);
}

std::string convergence_report_to_json(const ConvergenceReport& r) {
    nlohmann::json j;
    j["scales"] = r.scales;
    j["errors"] = r.errors;
    j["raw_mu"] = r.raw_mu;
    j["predicted"] = r.predicted;
    j["reference_mu"] = r.reference_mu;
    j["slope"] = r.slope;
    j["slope_valid"] = r.slope_valid;
    j["floor_estimate"] = r.floor_estimate;
    j["monotone"] = r.monotone;
    j["note"] = r.note;
    return j.dump(2);
}

} // namespace wgspec
