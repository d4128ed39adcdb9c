#include "doctest.h"

#include "wgspec/effective_model.hpp"
#include "wgspec/errors.hpp"

#include <cmath>

using namespace wgspec;

namespace {
const ScalarField one = [](const Vec2&) { return 1.0; };

struct HomPipeline {
    Mesh cell, xmesh;
    CellCorrectors cc;
    HomogenizedTensors t;
    CrossSectionSolution cs;
    AuxiliaryFields aux;

    HomPipeline(const ScalarField& a, int cell_n, int cs_n, const Mesh& domain)
        : cell(cell_mesh(cell_n, ElementOrder::P2)), xmesh(domain) {
        cc = solve_cell_problems(cell, a);
        t = compute_tensors(cc, a);
        cs = solve_homogenized_cs(xmesh, t.Q, 2);
        cs.mesh = &xmesh;
        aux = solve_auxiliaries(cs, t);
    }
};
} // namespace

TEST_SUITE_BEGIN("effective_model");

TEST_CASE("homogeneous cell: q_H = 0 and q_xi = -|xi|^2 / 4") {
    WaveguideGeometry geom =
        build_geometry(1.0, Profile(parse_expression("1 - 0.5*sin(2*pi*s)")), Profile(0.0),
                       Profile(0.0));
    HomPipeline p(one, 8, 48, unit_square_mesh(48, ElementOrder::P2));
    EffectiveModel model = compute_potential_homogenized(geom, p.t, p.cs, p.aux, 33);

    CHECK(std::abs(model.q_H) < 1e-8);
    CHECK(model.r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(model.conjectural);
    for (size_t i = 0; i < model.s.size(); ++i) {
        const Vec2 xi = geom.xi(model.s[i]);
        const double n2 = xi[0] * xi[0] + xi[1] * xi[1];
        CHECK(model.q_xi[i] == doctest::Approx(-0.25 * n2).epsilon(1e-6));
        CHECK(std::abs(model.q_tau[i]) < 1e-12);
    }
}

TEST_CASE("straight untwisted tube: potential is the constant q_H") {
    WaveguideGeometry geom = build_geometry(1.0, Profile(0.0), Profile(0.0), Profile(0.0));
    const ScalarField layered = [](const Vec2& y) { return y[0] < 0.5 ? 1.0 : 4.0; };
    HomPipeline p(layered, 32, 32, unit_square_mesh(32, ElementOrder::P2));
    EffectiveModel model = compute_potential_homogenized(geom, p.t, p.cs, p.aux, 17);
    const auto q = model.q_total();
    for (double qi : q) CHECK(qi == doctest::Approx(model.q_H).epsilon(1e-12));
}

TEST_CASE("torsion on a disk with a == 1 is inert (radial ground state)") {
    WaveguideGeometry geom =
        build_geometry(1.0, Profile(0.0), Profile(0.0), Profile(parse_expression("2*s")));
    HomPipeline p(one, 8, 32, disk_mesh(32, 1.0, ElementOrder::P2));
    EffectiveModel model = compute_potential_homogenized(geom, p.t, p.cs, p.aux, 17);
    CHECK(model.conjectural); // tau != 0 in the homogenized regime
    for (double qt : model.q_tau) CHECK(std::abs(qt) < 1e-3);
}

TEST_CASE("torsion on a square is active and marks the model conjectural") {
    WaveguideGeometry geom =
        build_geometry(1.0, Profile(0.0), Profile(0.0), Profile(parse_expression("s")));
    HomPipeline p(one, 8, 32, unit_square_mesh(32, ElementOrder::P2));
    EffectiveModel model = compute_potential_homogenized(geom, p.t, p.cs, p.aux, 17);
    CHECK(model.conjectural);
    // q_tau = tau^2 int |grad w . Rx|^2 > 0 somewhere on the square
    CHECK(model.q_tau[8] > 0.0);
}

TEST_CASE("inhomogeneous potential: tau terms and the drift") {
    auto a = [](const Vec2& x) { return 1.0 + x[0]; };
    Mesh xmesh = unit_square_mesh(32, ElementOrder::P2);
    CrossSectionSolution cs = solve_inhomogeneous_cs(xmesh, a, 2);
    const Vec2 b = compute_b(cs, a);
    AuxiliaryFields aux = solve_auxiliaries_inhomogeneous(cs, a, b);

    // constant twist: the tau' term vanishes identically
    WaveguideGeometry geom =
        build_geometry(1.0, Profile(0.4), Profile(0.0), Profile(parse_expression("3*s")));
    EffectiveModel m = compute_potential_inhomogeneous(geom, cs, aux, a, 33);
    CHECK(m.r > 0);
    for (size_t i = 1; i < m.s.size(); ++i)
        CHECK(m.q_tau[i] == doctest::Approx(m.q_tau[0]).epsilon(1e-10));
    // drift = b . xi with xi = (0.4 cos(3s), -0.4 sin(3s))
    for (size_t i = 0; i < m.s.size(); ++i) {
        const Vec2 xi = geom.xi(m.s[i]);
        CHECK(m.drift[i] == doctest::Approx(b[0] * xi[0] + b[1] * xi[1]).epsilon(1e-12));
    }

    // tau == 0: q_tau vanishes
    WaveguideGeometry g0 = build_geometry(1.0, Profile(0.4), Profile(0.0), Profile(0.0));
    EffectiveModel m0 = compute_potential_inhomogeneous(g0, cs, aux, a, 17);
    for (double qt : m0.q_tau) CHECK(std::abs(qt) < 1e-14);
}

TEST_CASE("r is the a-weighted norm; equals 1 for a == 1") {
    Mesh xmesh = unit_square_mesh(32, ElementOrder::P2);
    CrossSectionSolution cs = solve_inhomogeneous_cs(xmesh, one, 1);
    AuxiliaryFields aux = solve_auxiliaries_inhomogeneous(cs, one, compute_b(cs, one));
    WaveguideGeometry geom = build_geometry(1.0, Profile(0.0), Profile(0.0), Profile(0.0));
    EffectiveModel m = compute_potential_inhomogeneous(geom, cs, aux, one, 17);
    CHECK(m.r == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("propagation check and the spectral decomposition") {
    auto a = [](const Vec2& x) { return 1.0 + x[0]; };
    Mesh xmesh = unit_square_mesh(24, ElementOrder::P2);
    CrossSectionSolution cs = solve_inhomogeneous_cs(xmesh, a, 2);
    const Vec2 b = compute_b(cs, a);
    AuxiliaryFields aux = solve_auxiliaries_inhomogeneous(cs, a, b);

    // constant curvature: drift constant, propagation holds
    WaveguideGeometry gc = build_geometry(1.0, Profile(0.5), Profile(0.0), Profile(0.0));
    EffectiveModel mc = compute_potential_inhomogeneous(gc, cs, aux, a, 33);
    CHECK(check_propagation(mc).propagates);
    SpectralDecomposition sd = effective_spectrum(mc, 3, {0.1, 0.05}, 512);
    // decomposition identity holds exactly by construction
    for (double scale : {0.1, 0.05})
        for (int j = 0; j < 3; ++j)
            CHECK(sd.lambda[scale][(size_t)j] ==
                  sd.mu_leading / (scale * scale) + sd.drift_const / scale + sd.eta[(size_t)j]);
    CHECK(sd.drift_const == doctest::Approx(0.5 * b[0]).epsilon(1e-10));

    // varying curvature: propagation fails, the solver redirects
    WaveguideGeometry gv = build_geometry(
        1.0, Profile(parse_expression("1 - 0.5*sin(2*pi*s)")), Profile(0.0), Profile(0.0));
    EffectiveModel mv = compute_potential_inhomogeneous(gv, cs, aux, a, 33);
    CHECK_FALSE(check_propagation(mv).propagates);
    CHECK_THROWS_AS(effective_spectrum(mv, 2, {0.1}, 256), SolverError);

    // b = 0 (a == 1): propagates for every geometry
    CrossSectionSolution c1 = solve_inhomogeneous_cs(xmesh, one, 1);
    AuxiliaryFields aux1 = solve_auxiliaries_inhomogeneous(c1, one, compute_b(c1, one));
    EffectiveModel m1 = compute_potential_inhomogeneous(gv, c1, aux1, one, 33);
    CHECK(check_propagation(m1).propagates);
}

TEST_CASE("adding a constant to the potential shifts every eta exactly") {
    auto a = [](const Vec2& x) { return 1.0 + x[0]; };
    Mesh xmesh = unit_square_mesh(16, ElementOrder::P2);
    CrossSectionSolution cs = solve_inhomogeneous_cs(xmesh, a, 1);
    AuxiliaryFields aux = solve_auxiliaries_inhomogeneous(cs, a, compute_b(cs, a));
    WaveguideGeometry gc = build_geometry(1.0, Profile(0.5), Profile(0.0), Profile(0.0));
    EffectiveModel m = compute_potential_inhomogeneous(gc, cs, aux, a, 33);
    EffectiveModel shifted = m;
    for (double& v : shifted.q_c) v += 2.5;
    SpectralDecomposition s0 = effective_spectrum(m, 3, {}, 512);
    SpectralDecomposition s1 = effective_spectrum(shifted, 3, {}, 512);
    for (int j = 0; j < 3; ++j)
        CHECK(s1.eta[(size_t)j] - s0.eta[(size_t)j] == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("homogenized decomposition reproduces the analytic baseline") {
    WaveguideGeometry geom = build_geometry(1.0, Profile(0.0), Profile(0.0), Profile(0.0));
    HomPipeline p(one, 8, 32, unit_square_mesh(32, ElementOrder::P2));
    EffectiveModel model = compute_potential_homogenized(geom, p.t, p.cs, p.aux, 17);
    SpectralDecomposition sd = effective_spectrum(model, 2, {0.1}, 512);
    CHECK(sd.lambda[0.1][0] ==
          doctest::Approx(2 * M_PI * M_PI * 100 + M_PI * M_PI).epsilon(1e-5));
    CHECK(sd.lambda[0.1][1] ==
          doctest::Approx(2 * M_PI * M_PI * 100 + 4 * M_PI * M_PI).epsilon(1e-5));
}

TEST_SUITE_END();
