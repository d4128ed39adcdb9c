#include "wgspec/run.hpp"
#include "wgspec/errors.hpp"
#include "wgspec/localization.hpp"
#include "wgspec/verification.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wgspec {

namespace {

std::vector<double> read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cli", "cannot open sample file '" + path + "'");
    std::vector<double> vals;
    double v;
    while (in >> v) vals.push_back(v);
    if (vals.size() < 2) throw ConfigError("cli", "sample file '" + path + "' needs >= 2 values");
    return vals;
}

Profile profile_from(const std::string& expr, const std::string& file, double l) {
    if (!file.empty()) return Profile(read_samples(file), l);
    return Profile(parse_expression(expr));
}

/// Bilinear interpolation of a tabulated coefficient on (0,1)^2.
struct GridCoefficient {
    int nx = 0, ny = 0;
    std::vector<double> vals;
    bool periodic = false;

    double operator()(const Vec2& p) const {
        auto sample = [&](int i, int j) {
            if (periodic) {
                i = ((i % nx) + nx) % nx;
                j = ((j % ny) + ny) % ny;
            } else {
                i = std::clamp(i, 0, nx - 1);
                j = std::clamp(j, 0, ny - 1);
            }
            return vals[static_cast<size_t>(j) * nx + i];
        };
        const double sx = periodic ? nx : nx - 1;
        const double sy = periodic ? ny : ny - 1;
        double u = p[0] * sx, v = p[1] * sy;
        if (periodic) {
            u -= std::floor(u / nx) * nx;
            v -= std::floor(v / ny) * ny;
        }
        const int i = static_cast<int>(std::floor(u));
        const int j = static_cast<int>(std::floor(v));
        const double fu = u - i, fv = v - j;
        return (1 - fu) * (1 - fv) * sample(i, j) + fu * (1 - fv) * sample(i + 1, j) +
               (1 - fu) * fv * sample(i, j + 1) + fu * fv * sample(i + 1, j + 1);
    }
};

GridCoefficient load_grid(const std::string& path, bool periodic) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cli", "cannot open grid file '" + path + "'");
    GridCoefficient g;
    g.periodic = periodic;
    if (!(in >> g.nx >> g.ny) || g.nx < 2 || g.ny < 2)
        throw ConfigError("cli", "grid file '" + path + "': bad header");
    g.vals.resize(static_cast<size_t>(g.nx) * g.ny);
    for (auto& v : g.vals)
        if (!(in >> v)) throw ConfigError("cli", "grid file '" + path + "': missing values");
    return g;
}

struct Writer {
    std::filesystem::path dir;
    std::string hash;
    RunResult* result;

    void json(const std::string& name, nlohmann::json j) const {
        j["manifest_hash"] = hash;
        std::ofstream out(dir / name);
        out << j.dump(2) << "\n";
        result->files_written.push_back((dir / name).string());
    }
    void json_text(const std::string& name, const std::string& text) const {
        nlohmann::json j = nlohmann::json::parse(text);
        json(name, std::move(j));
    }
    void csv(const std::string& name, const std::string& body) const {
        std::ofstream out(dir / name);
        out << "# manifest_hash=" << hash << "\n" << body;
        result->files_written.push_back((dir / name).string());
    }
};

} // namespace

WaveguideGeometry geometry_from_config(const RunConfig& c) {
    return build_geometry(c.l, profile_from(c.k, c.k_file, c.l),
                          profile_from(c.alpha, c.alpha_file, c.l),
                          profile_from(c.theta, c.theta_file, c.l), c.n_samples);
}

Mesh mesh_from_config(const RunConfig& c) {
    const ElementOrder order = c.order == "P1" ? ElementOrder::P1 : ElementOrder::P2;
    if (c.domain == "unit_square") return unit_square_mesh(c.resolution, order);
    if (c.domain == "disk") return disk_mesh(c.resolution, c.radius, order);
    return polygon_mesh(c.vertices, c.resolution, order);
}

ScalarField coefficient_from_config(const RunConfig& c) {
    const bool cell = c.kind == "periodic_cell";
    if (!c.grid_file.empty()) {
        GridCoefficient g = load_grid(c.grid_file, cell);
        return [g](const Vec2& p) { return g(p); };
    }
    Expression e = parse_expression(c.expr);
    if (cell) {
        return [e](const Vec2& p) {
            VarBindings v;
            v.y1 = p[0];
            v.y2 = p[1];
            return e.eval(v);
        };
    }
    return [e](const Vec2& p) {
        VarBindings v;
        v.x1 = p[0];
        v.x2 = p[1];
        return e.eval(v);
    };
}

namespace {

void run_homogenize(const RunConfig& c, const Writer& w) {
    const ScalarField a = coefficient_from_config(c);
    Mesh cell = cell_mesh(c.cell_resolution, ElementOrder::P2);
    CellCorrectors cc = solve_cell_problems(cell, a);
    HomogenizedTensors t = compute_tensors(cc, a);

    // refinement diagnostic for Q
    double q_refinement_delta = 0.0;
    if (c.cell_resolution >= 16) {
        Mesh coarse = cell_mesh(c.cell_resolution / 2, ElementOrder::P2);
        CellCorrectors cc2 = solve_cell_problems(coarse, a);
        HomogenizedTensors t2 = compute_tensors(cc2, a);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                q_refinement_delta =
                    std::max(q_refinement_delta,
                             std::abs(t.Q[(size_t)i][(size_t)j] - t2.Q[(size_t)i][(size_t)j]));
    }

    nlohmann::json j = nlohmann::json::parse(tensors_to_json(t));
    j["max_grad_phi"] = cc.max_grad_phi;
    j["q_refinement_delta"] = q_refinement_delta;
    nlohmann::json defects = nlohmann::json::object();
    for (const auto& [name, val] : cc.fredholm_defects) defects[name] = val;
    j["fredholm_defects"] = defects;
    w.json("tensors.json", std::move(j));
}

void run_effective(const RunConfig& c, const Writer& w, RunResult& result) {
    const WaveguideGeometry geom = geometry_from_config(c);
    const ScalarField coeff = coefficient_from_config(c);
    const Mesh xmesh = mesh_from_config(c);
    const std::vector<double> scales =
        c.scales.empty() ? std::vector<double>{0.1, 0.05} : c.scales;

    EffectiveModel model;
    std::vector<IdentityResidual> identities;
    Vec2 b{0.0, 0.0};
    if (c.kind == "periodic_cell") {
        Mesh cell = cell_mesh(c.cell_resolution, ElementOrder::P2);
        CellCorrectors cc = solve_cell_problems(cell, coeff);
        HomogenizedTensors t = compute_tensors(cc, coeff);
        CrossSectionSolution cs = solve_homogenized_cs(xmesh, t.Q, c.eigenpairs);
        AuxiliaryFields aux = solve_auxiliaries(cs, t);
        model = compute_potential_homogenized(geom, t, cs, aux);
        identities = identity_checks(cs, aux, t, geom.xi(c.s));
    } else {
        CrossSectionSolution cs = solve_inhomogeneous_cs(xmesh, coeff, c.eigenpairs);
        b = compute_b(cs, coeff);
        AuxiliaryFields aux = solve_auxiliaries_inhomogeneous(cs, coeff, b);
        model = compute_potential_inhomogeneous(geom, cs, aux, coeff);
        const PropagationCheck pc = check_propagation(model);
        if (!pc.propagates)
            throw SolverError("effective_model",
                              "propagation criterion violated (drift varies by " +
                                  std::to_string(pc.variation) +
                                  "): run mode localize instead");
    }

    SpectralDecomposition sd = effective_spectrum(model, c.eigenpairs, scales);
    nlohmann::json j = nlohmann::json::parse(effective_model_to_json(model, sd));
    if (!identities.empty()) {
        nlohmann::json ji = nlohmann::json::object();
        for (const auto& idr : identities) ji[idr.name] = idr.value;
        j["identity_residuals"] = ji;
    }
    w.json("effective_model.json", std::move(j));

    for (const auto& fmt : c.formats) {
        if (fmt == "csv") {
            // h = b.xi column is zero for homogenized runs (no drift there)
            w.csv("geometry.csv", geometry_csv(geom, b));
            std::string pot = "s,q_H,q_xi,q_tau,q_c,drift,q_total\n";
            const auto q = model.q_total();
            char line[256];
            for (size_t i = 0; i < model.s.size(); ++i) {
                auto at = [&](const std::vector<double>& v) {
                    return i < v.size() ? v[i] : 0.0;
                };
                std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                              model.s[i], model.q_H, at(model.q_xi), at(model.q_tau),
                              at(model.q_c), at(model.drift), q[i]);
                pot += line;
            }
            w.csv("potential.csv", pot);
        }
    }
    result.summary = "effective spectrum with " + std::to_string(sd.eta.size()) + " modes";
    if (model.conjectural) result.summary += " (conjectural: torsion in the homogenized regime)";
}

void run_localize(const RunConfig& c, const Writer& w, RunResult& result) {
    const WaveguideGeometry geom = geometry_from_config(c);
    const ScalarField a = coefficient_from_config(c);
    const Mesh xmesh = mesh_from_config(c);

    CrossSectionSolution cs = solve_inhomogeneous_cs(xmesh, a, 2);
    const Vec2 b = compute_b(cs, a);
    const FemField wf = cs.ground();
    const double r = integrate(xmesh, 4, [&](int e, const Vec2& x, const auto& bc) {
        const double v = wf.value_at(e, bc);
        return a(x) * v * v;
    });

    LocalizationModel model = localize(geom, b, cs.mu(), r, c.eigenpairs);
    const std::vector<double> deltas =
        c.scales.empty() ? std::vector<double>{0.1, 0.05, 0.025} : c.scales;
    w.json_text("localization.json", localization_to_json(model, deltas));
    result.summary = "localization model with " + std::to_string(model.wells.size()) + " well(s)";
}

void run_verify(const RunConfig& c, const Writer& w, RunResult& result) {
    const WaveguideGeometry geom = geometry_from_config(c);
    const ScalarField coeff = coefficient_from_config(c);
    ConvergenceReport report;
    if (c.verify_case == "beta_only") {
        const Mesh xmesh = mesh_from_config(c);
        report = convergence_study_beta(geom, coeff, xmesh, c.s, c.scales);
    } else {
        report = convergence_study_homogenize(geom, coeff, c.s, c.scales,
                                              c.verify_case == "combined");
    }
    w.json_text("verify.json", convergence_report_to_json(report));
    w.csv("report.csv", report.csv());
    std::ostringstream os;
    os << "slope " << report.slope << (report.slope_valid ? "" : " (floor)");
    result.summary = os.str();
}

void run_oracle(const RunConfig& c, const Writer& w, RunResult& result) {
    const WaveguideGeometry geom = geometry_from_config(c);
    const ScalarField a = coefficient_from_config(c);
    if (c.kind != "cross_section")
        throw ConfigError("cli", "the 3D oracle runs with a cross_section coefficient");
    const Mesh xmesh = mesh_from_config(c);
    TubeOracleContext ctx = make_tube_context(xmesh, a, geom, c.oracle_ns);

    nlohmann::json runs = nlohmann::json::array();
    for (double d : c.scales) {
        TubeSpectrum ts = solve_tube(ctx, geom, a, d, c.eigenpairs);
        nlohmann::json j = nlohmann::json::parse(tube_spectrum_to_json(ts));
        if (c.concentration_s0 >= 0) {
            std::vector<double> moments;
            for (const auto& mode : ts.modes)
                moments.push_back(concentration_diagnostic(ctx, mode, c.concentration_s0));
            j["concentration_moment"] = moments;
            j["concentration_s0"] = c.concentration_s0;
        }
        runs.push_back(std::move(j));
    }
    nlohmann::json j;
    j["runs"] = runs;
    j["mu_C_2d"] = ctx.mu_C;
    w.json("oracle.json", std::move(j));
    result.summary = "oracle runs: " + std::to_string(c.scales.size());
}

} // namespace

RunResult run(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult result;

    std::filesystem::create_directories(config.directory);
    Writer w{config.directory, config_hash(config), &result};

    if (config.mode == "homogenize")
        run_homogenize(config, w);
    else if (config.mode == "effective")
        run_effective(config, w, result);
    else if (config.mode == "localize")
        run_localize(config, w, result);
    else if (config.mode == "verify")
        run_verify(config, w, result);
    else if (config.mode == "oracle")
        run_oracle(config, w, result);
    else
        throw ConfigError("cli", "unknown mode '" + config.mode + "'");

    const auto t1 = std::chrono::steady_clock::now();
    nlohmann::json manifest;
    manifest["config"] = serialize_config(config);
    manifest["hash"] = w.hash;
    manifest["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();
    manifest["seeds"] = {{"eigensolver", "0x77677370"}};
    manifest["tolerances"] = {{"lanczos_rel_residual", 1e-10},
                              {"fredholm_defect", 1e-3},
                              {"q_asymmetry", 1e-8}};
    const char* threads = std::getenv("WGSPEC_THREADS");
    manifest["threads"] = threads ? threads : "1";
    w.json("manifest.json", std::move(manifest));

    if (result.summary.empty()) result.summary = "ok";
    return result;
}

} // namespace wgspec
