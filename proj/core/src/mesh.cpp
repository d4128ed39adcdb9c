#include "wgspec/mesh.hpp"
#include "wgspec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace wgspec {

double Mesh::double_area(int e) const {
    const auto& t = tris[static_cast<size_t>(e)];
    const Vec2& a = nodes[static_cast<size_t>(t[0])];
    const Vec2& b = nodes[static_cast<size_t>(t[1])];
    const Vec2& c = nodes[static_cast<size_t>(t[2])];
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

double Mesh::total_area() const {
    double s = 0;
    for (size_t e = 0; e < tris.size(); ++e) s += 0.5 * double_area(static_cast<int>(e));
    return s;
}

double Mesh::sup_abs_x() const {
    double m = 0;
    for (const auto& p : nodes) m = std::max(m, std::hypot(p[0], p[1]));
    return m;
}

namespace {

// Adds P2 midpoint nodes and fills tri entries 3..5; detects boundary.
void finalize_mesh(Mesh& mesh, ElementOrder order) {
    mesh.n_vertices = static_cast<int>(mesh.nodes.size());
    mesh.order = order;

    std::map<std::pair<int, int>, int> edge_count; // (min,max) -> #adjacent elems
    auto edge_key = [](int a, int b) {
        return std::make_pair(std::min(a, b), std::max(a, b));
    };
    for (const auto& t : mesh.tris)
        for (int le = 0; le < 3; ++le) edge_count[edge_key(t[le], t[(le + 1) % 3])]++;

    std::map<std::pair<int, int>, int> midpoint;
    if (order == ElementOrder::P2) {
        for (auto& t : mesh.tris) {
            for (int le = 0; le < 3; ++le) {
                const int a = t[le], b = t[(le + 1) % 3];
                auto key = edge_key(a, b);
                auto it = midpoint.find(key);
                int mid;
                if (it == midpoint.end()) {
                    const Vec2& pa = mesh.nodes[static_cast<size_t>(a)];
                    const Vec2& pb = mesh.nodes[static_cast<size_t>(b)];
                    mid = static_cast<int>(mesh.nodes.size());
                    mesh.nodes.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])});
                    midpoint.emplace(key, mid);
                } else {
                    mid = it->second;
                }
                t[3 + le] = mid;
            }
        }
    }

    std::set<int> bnodes;
    for (size_t e = 0; e < mesh.tris.size(); ++e) {
        const auto& t = mesh.tris[e];
        for (int le = 0; le < 3; ++le) {
            const int a = t[le], b = t[(le + 1) % 3];
            if (edge_count[edge_key(a, b)] == 1) {
                mesh.boundary_edges.push_back({static_cast<int>(e), le});
                bnodes.insert(a);
                bnodes.insert(b);
                if (order == ElementOrder::P2) bnodes.insert(t[3 + le]);
            }
        }
    }
    mesh.boundary_nodes.assign(bnodes.begin(), bnodes.end());
}

Mesh structured_square(int n, ElementOrder order) {
    if (n < 2) throw ConfigError("fem_core", "mesh resolution must be at least 2");
    Mesh mesh;
    mesh.nodes.reserve(static_cast<size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            mesh.nodes.push_back({double(i) / n, double(j) / n});

    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1),
                      v11 = vid(i + 1, j + 1);
            std::array<int, 6> t1{}, t2{};
            if ((i + j) % 2 == 0) {
                // diagonal v00-v11
                t1 = {v00, v10, v11, -1, -1, -1};
                t2 = {v00, v11, v01, -1, -1, -1};
            } else {
                // diagonal v10-v01
                t1 = {v00, v10, v01, -1, -1, -1};
                t2 = {v10, v11, v01, -1, -1, -1};
            }
            mesh.tris.push_back(t1);
            mesh.tris.push_back(t2);
        }
    }
    finalize_mesh(mesh, order);
    return mesh;
}

} // namespace

Mesh unit_square_mesh(int n, ElementOrder order) {
    Mesh mesh = structured_square(n, order);
    mesh.domain_tag = "unit_square";
    return mesh;
}

Mesh cell_mesh(int n, ElementOrder order) {
    Mesh mesh = structured_square(n, order);
    mesh.domain_tag = "cell";

    // Identify nodes across opposite edges by exact grid coordinates.
    // All node coordinates are integer multiples of 1/(2n).
    const double scale = 2.0 * n;
    auto key_of = [scale](const Vec2& p) {
        return std::make_pair(static_cast<long>(std::llround(p[0] * scale)),
                              static_cast<long>(std::llround(p[1] * scale)));
    };
    const long top = static_cast<long>(std::llround(scale));
    std::map<std::pair<long, long>, int> first_at;
    mesh.periodic_master.assign(mesh.nodes.size(), 0);
    for (size_t i = 0; i < mesh.nodes.size(); ++i) {
        auto k = key_of(mesh.nodes[i]);
        // wrap the far edges onto the near ones; corners collapse 4-to-1
        if (k.first == top) k.first = 0;
        if (k.second == top) k.second = 0;
        auto it = first_at.find(k);
        if (it == first_at.end()) {
            first_at.emplace(k, static_cast<int>(i));
            mesh.periodic_master[i] = static_cast<int>(i);
        } else {
            mesh.periodic_master[i] = it->second;
        }
    }
    return mesh;
}

Mesh disk_mesh(int n, double radius, ElementOrder order) {
    if (!(radius > 0)) throw ConfigError("fem_core", "disk radius must be positive");
    if (n % 2 != 0) ++n; // center node must exist
    Mesh mesh = structured_square(n, ElementOrder::P1);
    // remap [0,1]^2 -> [-1,1]^2 -> disk (radial max-norm map), then build P2
    for (auto& p : mesh.nodes) {
        const double u = 2.0 * p[0] - 1.0, v = 2.0 * p[1] - 1.0;
        const double rinf = std::max(std::abs(u), std::abs(v));
        const double r2 = std::hypot(u, v);
        if (r2 > 0) {
            const double f = radius * rinf / r2;
            p = {u * f, v * f};
        } else {
            p = {0.0, 0.0};
        }
    }
    Mesh out;
    out.nodes = mesh.nodes;
    out.tris = mesh.tris;
    finalize_mesh(out, order);
    out.domain_tag = "disk";
    return out;
}

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto sgn = [](double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); };
    const int d1 = sgn(cross2(c, d, a)), d2 = sgn(cross2(c, d, b));
    const int d3 = sgn(cross2(a, b, c)), d4 = sgn(cross2(a, b, d));
    return d1 * d2 < 0 && d3 * d4 < 0;
}

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    const double w0 = cross2(a, b, p), w1 = cross2(b, c, p), w2 = cross2(c, a, p);
    return w0 >= 0 && w1 >= 0 && w2 >= 0;
}

} // namespace

Mesh polygon_mesh(const std::vector<Vec2>& vertices, int resolution, ElementOrder order) {
    const size_t k = vertices.size();
    if (k < 3) throw ConfigError("fem_core", "polygon needs at least 3 vertices");

    // reject self-intersection (non-adjacent edge pairs)
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = i + 1; j < k; ++j) {
            if (j == i || (j + 1) % k == i || (i + 1) % k == j) continue;
            if (segments_intersect(vertices[i], vertices[(i + 1) % k], vertices[j],
                                   vertices[(j + 1) % k]))
                throw ConfigError("fem_core", "self-intersecting polygon");
        }
    }

    // ensure CCW
    std::vector<Vec2> poly = vertices;
    double signed2 = 0;
    for (size_t i = 0; i < k; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % k];
        signed2 += a[0] * b[1] - b[0] * a[1];
    }
    if (signed2 < 0) std::reverse(poly.begin(), poly.end());

    // ear clipping
    Mesh mesh;
    mesh.nodes = poly;
    std::vector<int> ring(poly.size());
    for (size_t i = 0; i < ring.size(); ++i) ring[i] = static_cast<int>(i);
    while (ring.size() > 3) {
        bool clipped = false;
        for (size_t i = 0; i < ring.size(); ++i) {
            const int ia = ring[(i + ring.size() - 1) % ring.size()];
            const int ib = ring[i];
            const int ic = ring[(i + 1) % ring.size()];
            const Vec2 &a = mesh.nodes[(size_t)ia], &b = mesh.nodes[(size_t)ib],
                       &c = mesh.nodes[(size_t)ic];
            if (cross2(a, b, c) <= 1e-14) continue; // reflex or degenerate
            bool empty = true;
            for (int other : ring) {
                if (other == ia || other == ib || other == ic) continue;
                if (point_in_triangle(mesh.nodes[(size_t)other], a, b, c)) {
                    empty = false;
                    break;
                }
            }
            if (!empty) continue;
            mesh.tris.push_back({ia, ib, ic, -1, -1, -1});
            ring.erase(ring.begin() + static_cast<long>(i));
            clipped = true;
            break;
        }
        if (!clipped) throw ConfigError("fem_core", "ear clipping failed (degenerate polygon?)");
    }
    mesh.tris.push_back({ring[0], ring[1], ring[2], -1, -1, -1});

    // uniform 4-splits until edges are halved ~log2(resolution) times
    int rounds = 0;
    while ((1 << rounds) < std::max(resolution, 1)) ++rounds;
    for (int r = 0; r < rounds; ++r) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid_of = [&](int a, int b) {
            auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int m = static_cast<int>(mesh.nodes.size());
            const Vec2 &pa = mesh.nodes[(size_t)a], &pb = mesh.nodes[(size_t)b];
            mesh.nodes.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])});
            midpoint.emplace(key, m);
            return m;
        };
        std::vector<std::array<int, 6>> fine;
        fine.reserve(4 * mesh.tris.size());
        for (const auto& t : mesh.tris) {
            const int m01 = mid_of(t[0], t[1]), m12 = mid_of(t[1], t[2]), m20 = mid_of(t[2], t[0]);
            fine.push_back({t[0], m01, m20, -1, -1, -1});
            fine.push_back({m01, t[1], m12, -1, -1, -1});
            fine.push_back({m20, m12, t[2], -1, -1, -1});
            fine.push_back({m01, m12, m20, -1, -1, -1});
        }
        mesh.tris = std::move(fine);
    }

    finalize_mesh(mesh, order);
    mesh.domain_tag = "polygon";
    return mesh;
}

void validate_mesh(const Mesh& mesh) {
    std::map<std::pair<int, int>, int> edge_count;
    for (size_t e = 0; e < mesh.tris.size(); ++e) {
        if (mesh.double_area(static_cast<int>(e)) <= 0)
            throw SolverError("fem_core", "non-positive element area at element " +
                                              std::to_string(e));
        const auto& t = mesh.tris[e];
        for (int le = 0; le < 3; ++le) {
            const int a = t[le], b = t[(le + 1) % 3];
            edge_count[std::make_pair(std::min(a, b), std::max(a, b))]++;
        }
    }
    for (const auto& [edge, cnt] : edge_count)
        if (cnt > 2)
            throw SolverError("fem_core", "non-conforming edge (" + std::to_string(edge.first) +
                                              "," + std::to_string(edge.second) + ")");
}

std::string mesh_to_text(const Mesh& mesh) {
    std::string out;
    char buf[128];
    out += std::to_string(mesh.n_vertices) + "\n";
    for (int i = 0; i < mesh.n_vertices; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", mesh.nodes[(size_t)i][0],
                      mesh.nodes[(size_t)i][1]);
        out += buf;
    }
    out += std::to_string(mesh.tris.size()) + "\n";
    for (const auto& t : mesh.tris)
        out += std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) +
               "\n";
    for (int b : mesh.boundary_nodes)
        if (b < mesh.n_vertices) out += std::to_string(b) + " ";
    out += "\n";
    return out;
}

Mesh mesh_from_text(const std::string& text, ElementOrder order) {
    std::istringstream in(text);
    int nn = 0;
    if (!(in >> nn) || nn < 3) throw ConfigError("fem_core", "mesh file: bad node count");
    Mesh mesh;
    mesh.nodes.resize(static_cast<size_t>(nn));
    for (auto& p : mesh.nodes)
        if (!(in >> p[0] >> p[1])) throw ConfigError("fem_core", "mesh file: bad node line");
    int ne = 0;
    if (!(in >> ne) || ne < 1) throw ConfigError("fem_core", "mesh file: bad element count");
    mesh.tris.resize(static_cast<size_t>(ne));
    for (auto& t : mesh.tris) {
        if (!(in >> t[0] >> t[1] >> t[2])) throw ConfigError("fem_core", "mesh file: bad element");
        t[3] = t[4] = t[5] = -1;
        for (int j = 0; j < 3; ++j)
            if (t[j] < 0 || t[j] >= nn) throw ConfigError("fem_core", "mesh file: node id range");
    }
    finalize_mesh(mesh, order);
    mesh.domain_tag = "imported";
    validate_mesh(mesh);
    return mesh;
}

} // namespace wgspec
