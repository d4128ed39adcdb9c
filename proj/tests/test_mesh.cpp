#include "doctest.h"

#include "wgspec/errors.hpp"
#include "wgspec/mesh.hpp"

#include <cmath>
#include <set>

using namespace wgspec;

TEST_SUITE_BEGIN("mesh");

TEST_CASE("structured unit square counts") {
    Mesh m = unit_square_mesh(4, ElementOrder::P1);
    CHECK(m.nodes.size() == 25);
    CHECK(m.tris.size() == 32);
    CHECK(m.boundary_nodes.size() == 16);
    CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-15));
    validate_mesh(m);

    Mesh m2 = unit_square_mesh(4, ElementOrder::P2);
    // 25 vertices + one midpoint per edge; E = (3*32 + 16)/2 = 56
    CHECK(m2.nodes.size() == 25 + 56);
    CHECK(m2.n_vertices == 25);
    validate_mesh(m2);
}

TEST_CASE("even-n squares are reflection and point symmetric") {
    // node sets map onto themselves under (x,y) -> (1-x, y) and (1-x, 1-y),
    // and so does the triangulation (alternating-diagonal pattern)
    Mesh m = unit_square_mesh(6, ElementOrder::P1);
    std::set<std::pair<long, long>> keys;
    auto key = [](const Vec2& p) {
        return std::make_pair(std::lround(p[0] * 1e9), std::lround(p[1] * 1e9));
    };
    std::set<std::set<std::pair<long, long>>> tri_sets;
    for (const auto& t : m.tris)
        tri_sets.insert({key(m.nodes[(size_t)t[0]]), key(m.nodes[(size_t)t[1]]),
                         key(m.nodes[(size_t)t[2]])});
    auto image_exists = [&](auto map) {
        for (const auto& t : m.tris) {
            std::set<std::pair<long, long>> img;
            for (int i = 0; i < 3; ++i) img.insert(key(map(m.nodes[(size_t)t[(size_t)i]])));
            if (!tri_sets.count(img)) return false;
        }
        return true;
    };
    CHECK(image_exists([](Vec2 p) { return Vec2{1 - p[0], p[1]}; }));
    CHECK(image_exists([](Vec2 p) { return Vec2{p[0], 1 - p[1]}; }));
    CHECK(image_exists([](Vec2 p) { return Vec2{1 - p[0], 1 - p[1]}; }));
}

TEST_CASE("disk areas increase toward pi from below") {
    double prev = 0.0;
    for (int n : {8, 16, 32}) {
        Mesh m = disk_mesh(n, 1.0, ElementOrder::P1);
        validate_mesh(m);
        const double area = m.total_area();
        CHECK(area < M_PI);
        CHECK(area > prev);
        prev = area;
    }
    CHECK(prev > M_PI - 5e-3);
    // boundary vertices sit on the circle
    Mesh m = disk_mesh(16, 2.5, ElementOrder::P2);
    for (int b : m.boundary_nodes) {
        if (b < m.n_vertices)
            CHECK(std::hypot(m.nodes[(size_t)b][0], m.nodes[(size_t)b][1]) ==
                  doctest::Approx(2.5).epsilon(1e-13));
    }
}

TEST_CASE("polygon meshing") {
    // L-shaped domain, area 3/4
    const std::vector<Vec2> lshape{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}};
    Mesh m = polygon_mesh(lshape, 8, ElementOrder::P2);
    validate_mesh(m);
    CHECK(m.total_area() == doctest::Approx(0.75).epsilon(1e-13));

    const std::vector<Vec2> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    CHECK_THROWS_AS(polygon_mesh(bowtie, 4, ElementOrder::P1), ConfigError);
}

TEST_CASE("periodic cell identification") {
    Mesh m = cell_mesh(4, ElementOrder::P1);
    REQUIRE(m.periodic());
    int masters = 0;
    for (size_t i = 0; i < m.nodes.size(); ++i)
        if (m.periodic_master[i] == static_cast<int>(i)) ++masters;
    CHECK(masters == 16); // n^2 free vertices on the torus

    Mesh m2 = cell_mesh(4, ElementOrder::P2);
    masters = 0;
    for (size_t i = 0; i < m2.nodes.size(); ++i)
        if (m2.periodic_master[i] == static_cast<int>(i)) ++masters;
    CHECK(masters == 4 * 16); // n^2 vertices + 3 n^2 midpoints

    // identified nodes match by wrapped coordinates
    for (size_t i = 0; i < m2.nodes.size(); ++i) {
        const int rep = m2.periodic_master[i];
        auto wrap = [](double v) {
            const double w = v - std::floor(v + 1e-12);
            return std::abs(w - 1.0) < 1e-12 ? 0.0 : w;
        };
        CHECK(wrap(m2.nodes[i][0]) ==
              doctest::Approx(wrap(m2.nodes[(size_t)rep][0])).epsilon(1e-12));
        CHECK(wrap(m2.nodes[i][1]) ==
              doctest::Approx(wrap(m2.nodes[(size_t)rep][1])).epsilon(1e-12));
    }
}

TEST_CASE("plain-text export/import round trip") {
    Mesh m = unit_square_mesh(4, ElementOrder::P2);
    const std::string text = mesh_to_text(m);
    Mesh back = mesh_from_text(text, ElementOrder::P2);
    CHECK(back.nodes.size() == m.nodes.size());
    CHECK(back.tris.size() == m.tris.size());
    CHECK(back.total_area() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(back.boundary_nodes.size() == m.boundary_nodes.size());

    CHECK_THROWS_AS(mesh_from_text("2\n0 0\n1 1\n", ElementOrder::P1), ConfigError);
}

TEST_CASE("resolution guard") {
    CHECK_THROWS_AS(unit_square_mesh(1, ElementOrder::P1), ConfigError);
    CHECK_THROWS_AS(disk_mesh(8, -1.0, ElementOrder::P1), ConfigError);
}

TEST_SUITE_END();
