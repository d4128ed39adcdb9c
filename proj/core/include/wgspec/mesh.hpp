#ifndef WGSPEC_MESH_HPP
#define WGSPEC_MESH_HPP

#include "wgspec/geometry.hpp" // Vec2

#include <array>
#include <string>
#include <vector>

namespace wgspec {

enum class ElementOrder { P1, P2 };

/// Conforming triangulation of a planar domain. For P2 the node list holds
/// the vertices first, then the edge midpoints; each triangle stores
/// 3 vertex ids followed by the midpoints of edges (0,1), (1,2), (2,0).
/// For periodic cell meshes, `periodic_master` identifies nodes on opposite
/// edges of the unit cell (corner nodes 4-to-1); it is empty otherwise.
struct Mesh {
    ElementOrder order = ElementOrder::P1;
    std::vector<Vec2> nodes;                  // all dof coordinates
    int n_vertices = 0;                       // nodes[0..n_vertices) are vertices
    std::vector<std::array<int, 6>> tris;     // P1 uses entries 0..2, P2 all 6
    std::vector<int> boundary_nodes;          // sorted node ids on the boundary

    struct BoundaryEdge {
        int elem;
        int local_edge; // 0:(v0,v1) 1:(v1,v2) 2:(v2,v0)
    };
    std::vector<BoundaryEdge> boundary_edges;

    std::vector<int> periodic_master;         // node -> representative (cell meshes)
    std::string domain_tag;

    int nodes_per_elem() const { return order == ElementOrder::P2 ? 6 : 3; }
    bool periodic() const { return !periodic_master.empty(); }

    /// Signed double area of element e (positive for valid meshes).
    double double_area(int e) const;
    double total_area() const;
    /// max over nodes of |x| (used by the beta positivity bound).
    double sup_abs_x() const;
};

/// Structured mesh of the unit square (0,1)^2 with n x n cells split into
/// 2 n^2 triangles. The diagonal direction alternates in a checkerboard
/// pattern; for even n the mesh is invariant under both axis reflections
/// and under point reflection about the center.
Mesh unit_square_mesh(int n, ElementOrder order);

/// Periodic unit cell Y = (0,1)^2: same triangulation plus the node
/// identification map between opposite edges.
Mesh cell_mesh(int n, ElementOrder order);

/// Disk of given radius, meshed by radially mapping the structured square
/// grid; boundary vertices are projected onto the circle, so the discrete
/// domain is the inscribed polygon.
Mesh disk_mesh(int n, double radius, ElementOrder order);

/// Simple polygon (CCW or CW vertex list), ear-clipped and uniformly
/// refined until boundary edges are split about `resolution` times per
/// original edge. Throws on self-intersecting input.
Mesh polygon_mesh(const std::vector<Vec2>& vertices, int resolution, ElementOrder order);

/// Consistency checks: positive areas, conforming edges, boundary detection.
/// Throws SolverError on violation.
void validate_mesh(const Mesh& mesh);

/// Plain-text export/import (P1 skeleton: vertices, triangles, boundary ids).
std::string mesh_to_text(const Mesh& mesh);
Mesh mesh_from_text(const std::string& text, ElementOrder order);

} // namespace wgspec

#endif
