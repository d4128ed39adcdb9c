#include "doctest.h"

#include "wgspec/errors.hpp"
#include "wgspec/geometry.hpp"

#include <cmath>

using namespace wgspec;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("xi for canonical profiles") {
    // straight untwisted: xi == 0, tau == 0
    WaveguideGeometry g0 = build_geometry(1.0, Profile(0.0), Profile(0.0), Profile(0.0));
    for (double s : g0.sample_grid) {
        CHECK(g0.xi(s)[0] == doctest::Approx(0.0));
        CHECK(g0.xi(s)[1] == doctest::Approx(0.0));
        CHECK(g0.tau(s) == doctest::Approx(0.0));
    }

    // k == 1: xi = (1, 0) for all s
    WaveguideGeometry g1 = build_geometry(1.0, Profile(1.0), Profile(0.0), Profile(0.0));
    CHECK(g1.xi(0.3)[0] == doctest::Approx(1.0));
    CHECK(g1.xi(0.3)[1] == doctest::Approx(0.0));

    // theta == pi/2 constant: xi = (0, -1), tau == 0
    WaveguideGeometry g2 = build_geometry(1.0, Profile(1.0), Profile(0.0), Profile(M_PI / 2));
    CHECK(g2.xi(0.7)[0] == doctest::Approx(0.0));
    CHECK(g2.xi(0.7)[1] == doctest::Approx(-1.0));
    CHECK(g2.tau(0.7) == doctest::Approx(0.0));
}

TEST_CASE("|xi| equals |k| on the sample grid") {
    WaveguideGeometry g =
        build_geometry(2.0, Profile(parse_expression("sin(3*s) - 0.4")),
                       Profile(parse_expression("0.2*s")), Profile(parse_expression("s^2")));
    for (double s : g.sample_grid) {
        const Vec2 xs = g.xi(s);
        CHECK(std::hypot(xs[0], xs[1]) ==
              doctest::Approx(std::abs(g.k(s))).epsilon(1e-14));
    }
    CHECK(std::isfinite(g.xi_lipschitz_estimate));
}

TEST_CASE("tau from analytic derivative of theta") {
    WaveguideGeometry g = build_geometry(1.0, Profile(1.0), Profile(0.0),
                                         Profile(parse_expression("0.5*sin(2*pi*s)")));
    CHECK(g.tau(0.25) == doctest::Approx(M_PI * std::cos(M_PI / 2)).epsilon(1e-10));
    CHECK(g.tau(0.0) == doctest::Approx(M_PI).epsilon(1e-12));
    CHECK(g.tau_deriv(0.25) == doctest::Approx(-2 * M_PI * M_PI * std::sin(M_PI / 2)).epsilon(1e-9));
}

TEST_CASE("beta evaluation and positivity bound") {
    WaveguideGeometry g = build_geometry(1.0, Profile(1.0), Profile(0.0), Profile(0.0));
    CHECK(g.beta(0.1, 0.5, {0.3, 0.4}) == doctest::Approx(0.97));
    CHECK(g.beta(0.0, 0.2, {5.0, -3.0}) == doctest::Approx(1.0));

    WaveguideGeometry straight = build_geometry(1.0, Profile(0.0), Profile(0.0), Profile(0.0));
    CHECK(straight.beta(0.5, 0.2, {2.0, 2.0}) == doctest::Approx(1.0));
    CHECK(std::isinf(beta_positivity_bound(straight, 1.0)));

    CHECK(beta_positivity_bound(g, 2.0) == doctest::Approx(0.5));
    // all beta positive below the bound, over grid x corners
    const double bound = beta_positivity_bound(g, std::sqrt(2.0));
    for (double s : g.sample_grid)
        for (double cx : {0.0, 1.0})
            for (double cy : {0.0, 1.0})
                CHECK(g.beta(0.99 * bound, s, {cx, cy}) > 0.0);

    CHECK_THROWS_AS(g.beta(0.1, 2.0, {0.0, 0.0}), ConfigError);
}

TEST_CASE("constructor errors") {
    CHECK_THROWS_AS(build_geometry(0.0, Profile(1.0), Profile(0.0), Profile(0.0)), ConfigError);
    CHECK_THROWS_AS(build_geometry(1.0, Profile(1.0), Profile(0.0), Profile(0.0), 1), ConfigError);
    // non-finite profile value (pole at s = 0.5 lies on the sample grid)
    CHECK_THROWS_AS(
        build_geometry(1.0, Profile(parse_expression("1/(s-0.5)")), Profile(0.0), Profile(0.0)),
        ConfigError);
}

TEST_CASE("classify_h: propagation, interior, endpoint") {
    // b = 0: propagation for any geometry
    WaveguideGeometry g =
        build_geometry(1.0, Profile(parse_expression("sin(2*pi*s)")), Profile(0.0), Profile(0.0));
    CHECK(classify_h(g, {0.0, 0.0}).kind == HClassification::Kind::Propagation);

    // h(s) = cos(2 pi s / l): interior minimum at l/2 with h'' = 4 pi^2 / l^2
    const double l = 2.0;
    WaveguideGeometry gc = build_geometry(l, Profile(parse_expression("cos(2*pi*s/2)")),
                                          Profile(0.0), Profile(0.0), 1001);
    HClassification cls = classify_h(gc, {1.0, 0.0});
    REQUIRE(cls.kind == HClassification::Kind::InteriorSingle);
    CHECK(cls.wells[0].s0 == doctest::Approx(l / 2).epsilon(1e-6));
    CHECK(cls.wells[0].hpp == doctest::Approx(4 * M_PI * M_PI / (l * l)).epsilon(1e-3));

    // h(s) = s: endpoint minimum on the left with slope 1
    WaveguideGeometry gl =
        build_geometry(1.0, Profile(parse_expression("s")), Profile(0.0), Profile(0.0), 1001);
    HClassification cle = classify_h(gl, {1.0, 0.0});
    REQUIRE(cle.kind == HClassification::Kind::Endpoint);
    REQUIRE(cle.endpoints.size() == 1);
    CHECK(cle.endpoints[0].left);
    CHECK(cle.endpoints[0].slope == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("classify_h is invariant under constant offset") {
    auto mk = [](double offset) {
        return build_geometry(1.0,
                              Profile(parse_expression("cos(2*pi*s) + " + std::to_string(offset))),
                              Profile(0.0), Profile(0.0), 801);
    };
    HClassification c0 = classify_h(mk(0.0), {1.0, 0.0});
    HClassification c5 = classify_h(mk(5.0), {1.0, 0.0});
    REQUIRE(c0.kind == c5.kind);
    REQUIRE(c0.wells.size() == c5.wells.size());
    CHECK(c0.wells[0].s0 == doctest::Approx(c5.wells[0].s0).epsilon(1e-8));
    CHECK(c0.wells[0].hpp == doctest::Approx(c5.wells[0].hpp).epsilon(1e-6));
}

TEST_CASE("classify_h: degenerate minimum rejected") {
    WaveguideGeometry g = build_geometry(1.0, Profile(parse_expression("(s-0.5)^4 + 1")),
                                         Profile(0.0), Profile(0.0), 801);
    CHECK_THROWS_AS(classify_h(g, {1.0, 0.0}), SolverError);
}

TEST_CASE("classify_h: two symmetric wells") {
    // h = ((s-1/4)(s-3/4))^2 has equal minima at 1/4 and 3/4
    WaveguideGeometry g = build_geometry(
        1.0, Profile(parse_expression("((s-0.25)*(s-0.75))^2")), Profile(0.0), Profile(0.0), 1601);
    HClassification cls = classify_h(g, {1.0, 0.0});
    REQUIRE(cls.kind == HClassification::Kind::InteriorMulti);
    REQUIRE(cls.wells.size() == 2);
    CHECK(cls.wells[0].s0 == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(cls.wells[1].s0 == doctest::Approx(0.75).epsilon(1e-4));
    CHECK(cls.wells[0].hpp == doctest::Approx(cls.wells[1].hpp).epsilon(1e-3));
}

TEST_CASE("sampled profiles with finite differences") {
    std::vector<double> samples;
    const int n = 2001;
    for (int i = 0; i < n; ++i) {
        const double s = double(i) / (n - 1);
        samples.push_back(std::sin(2 * M_PI * s));
    }
    Profile p(samples, 1.0);
    CHECK(p(0.25) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(p.deriv(0.5) == doctest::Approx(-2 * M_PI).epsilon(1e-4));
    WaveguideGeometry g = build_geometry(1.0, Profile(1.0), Profile(0.0), Profile(samples, 1.0));
    CHECK(g.tau(0.5) == doctest::Approx(-2 * M_PI).epsilon(1e-4));
}

TEST_CASE("geometry csv emits the sampled columns") {
    WaveguideGeometry g = build_geometry(1.0, Profile(1.0), Profile(0.0), Profile(0.0), 3);
    const std::string csv = geometry_csv(g, {2.0, 0.0});
    CHECK(csv.find("s,xi1,xi2,tau,h") == 0);
    CHECK(csv.find("\n0,1,0,0,2\n") != std::string::npos);
}

TEST_SUITE_END();
