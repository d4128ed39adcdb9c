#include "wgspec/fem.hpp"
#include "wgspec/errors.hpp"
#include "wgspec/quadrature.hpp"

#include <cmath>

namespace wgspec {

namespace {

struct ElemGeom {
    Vec2 a, b, c;
    double det;              // 2 * area
    std::array<Vec2, 3> gl;  // gradients of barycentric coordinates
};

ElemGeom elem_geom(const Mesh& mesh, int e) {
    const auto& t = mesh.tris[static_cast<size_t>(e)];
    ElemGeom g;
    g.a = mesh.nodes[static_cast<size_t>(t[0])];
    g.b = mesh.nodes[static_cast<size_t>(t[1])];
    g.c = mesh.nodes[static_cast<size_t>(t[2])];
    const double x1 = g.b[0] - g.a[0], y1 = g.b[1] - g.a[1];
    const double x2 = g.c[0] - g.a[0], y2 = g.c[1] - g.a[1];
    g.det = x1 * y2 - x2 * y1;
    // grad l1 = (y2, -x2)/det, grad l2 = (-y1, x1)/det, grad l0 = -(g1+g2)
    g.gl[1] = {y2 / g.det, -x2 / g.det};
    g.gl[2] = {-y1 / g.det, x1 / g.det};
    g.gl[0] = {-g.gl[1][0] - g.gl[2][0], -g.gl[1][1] - g.gl[2][1]};
    return g;
}

} // namespace

Vec2 map_point(const Mesh& mesh, int e, const std::array<double, 3>& bary) {
    const auto& t = mesh.tris[static_cast<size_t>(e)];
    const Vec2& a = mesh.nodes[static_cast<size_t>(t[0])];
    const Vec2& b = mesh.nodes[static_cast<size_t>(t[1])];
    const Vec2& c = mesh.nodes[static_cast<size_t>(t[2])];
    return {bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1]};
}

ElemBasis eval_basis(const Mesh& mesh, int e, const std::array<double, 3>& bary) {
    const ElemGeom g = elem_geom(mesh, e);
    const double l0 = bary[0], l1 = bary[1], l2 = bary[2];
    ElemBasis basis;
    if (mesh.order == ElementOrder::P1) {
        basis.n = 3;
        basis.N = {l0, l1, l2, 0, 0, 0};
        basis.grad = {g.gl[0], g.gl[1], g.gl[2], Vec2{0, 0}, Vec2{0, 0}, Vec2{0, 0}};
    } else {
        basis.n = 6;
        basis.N = {l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
                   4 * l0 * l1,       4 * l1 * l2,       4 * l2 * l0};
        auto lin = [&](int i, double w) {
            return Vec2{w * g.gl[static_cast<size_t>(i)][0], w * g.gl[static_cast<size_t>(i)][1]};
        };
        auto add = [](const Vec2& u, const Vec2& v) { return Vec2{u[0] + v[0], u[1] + v[1]}; };
        basis.grad[0] = lin(0, 4 * l0 - 1);
        basis.grad[1] = lin(1, 4 * l1 - 1);
        basis.grad[2] = lin(2, 4 * l2 - 1);
        basis.grad[3] = add(lin(0, 4 * l1), lin(1, 4 * l0));
        basis.grad[4] = add(lin(1, 4 * l2), lin(2, 4 * l1));
        basis.grad[5] = add(lin(2, 4 * l0), lin(0, 4 * l2));
        // element-constant second derivatives (straight triangles)
        auto outer = [&](int i, int j) {
            const Vec2 &gi = g.gl[(size_t)i], &gj = g.gl[(size_t)j];
            return std::array<double, 3>{4 * gi[0] * gj[0],
                                         2 * (gi[0] * gj[1] + gi[1] * gj[0]),
                                         4 * gi[1] * gj[1]};
        };
        auto pair_sum = [&](int i, int j) {
            const auto a = outer(i, j);
            const auto b = outer(j, i);
            return std::array<double, 3>{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
        };
        basis.hess[0] = outer(0, 0);
        basis.hess[1] = outer(1, 1);
        basis.hess[2] = outer(2, 2);
        basis.hess[3] = pair_sum(0, 1);
        basis.hess[4] = pair_sum(1, 2);
        basis.hess[5] = pair_sum(2, 0);
    }
    return basis;
}

FemField::FemField(const Mesh& mesh, Eigen::VectorXd coeffs)
    : mesh_(&mesh), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != static_cast<Eigen::Index>(mesh.nodes.size()))
        throw SolverError("fem_core", "field size does not match mesh node count");
}

double FemField::value(int e, const ElemBasis& basis) const {
    const auto& t = mesh_->tris[static_cast<size_t>(e)];
    double v = 0;
    for (int i = 0; i < basis.n; ++i) v += basis.N[(size_t)i] * coeffs_[t[(size_t)i]];
    return v;
}

Vec2 FemField::grad(int e, const ElemBasis& basis) const {
    const auto& t = mesh_->tris[static_cast<size_t>(e)];
    Vec2 gsum{0, 0};
    for (int i = 0; i < basis.n; ++i) {
        gsum[0] += basis.grad[(size_t)i][0] * coeffs_[t[(size_t)i]];
        gsum[1] += basis.grad[(size_t)i][1] * coeffs_[t[(size_t)i]];
    }
    return gsum;
}

double FemField::value_at(int e, const std::array<double, 3>& bary) const {
    return value(e, eval_basis(*mesh_, e, bary));
}

Vec2 FemField::grad_at(int e, const std::array<double, 3>& bary) const {
    return grad(e, eval_basis(*mesh_, e, bary));
}

std::array<double, 3> HessianField::at(int e, const std::array<double, 3>& bary) const {
    const auto& t = mesh->tris[static_cast<size_t>(e)];
    std::array<double, 3> out{0, 0, 0};
    for (int i = 0; i < 3; ++i) {
        out[0] += bary[(size_t)i] * h11[t[(size_t)i]];
        out[1] += bary[(size_t)i] * h12[t[(size_t)i]];
        out[2] += bary[(size_t)i] * h22[t[(size_t)i]];
    }
    return out;
}

HessianField recover_hessian(const FemField& field) {
    const Mesh& mesh = field.mesh();
    if (mesh.order != ElementOrder::P2)
        throw SolverError("fem_core", "Hessian recovery requires P2 elements");

    const int nv = mesh.n_vertices;
    std::vector<std::vector<int>> v2e(static_cast<size_t>(nv));
    for (size_t e = 0; e < mesh.tris.size(); ++e)
        for (int i = 0; i < 3; ++i)
            v2e[static_cast<size_t>(mesh.tris[e][(size_t)i])].push_back(static_cast<int>(e));

    // centroid gradients (P2 gradients are linear; centroid values are the
    // superconvergent samples for the patch fits)
    std::vector<Vec2> gc(mesh.tris.size());
    std::vector<Vec2> cc(mesh.tris.size());
    const std::array<double, 3> ctr{1.0 / 3, 1.0 / 3, 1.0 / 3};
    for (size_t e = 0; e < mesh.tris.size(); ++e) {
        gc[e] = field.grad_at(static_cast<int>(e), ctr);
        cc[e] = map_point(mesh, static_cast<int>(e), ctr);
    }

    HessianField hf;
    hf.mesh = &mesh;
    hf.h11.setZero(nv);
    hf.h12.setZero(nv);
    hf.h22.setZero(nv);

    std::vector<int> patch;
    std::vector<char> seen(mesh.tris.size(), 0);
    for (int v = 0; v < nv; ++v) {
        patch.clear();
        for (int e : v2e[(size_t)v]) patch.push_back(e);
        // grow to the 2-ring until the linear fit is well-posed
        for (int grow = 0; grow < 2 && patch.size() < 6; ++grow) {
            for (int e : patch) seen[(size_t)e] = 1;
            std::vector<int> next = patch;
            for (int e : patch)
                for (int i = 0; i < 3; ++i)
                    for (int e2 : v2e[static_cast<size_t>(mesh.tris[(size_t)e][(size_t)i])])
                        if (!seen[(size_t)e2]) {
                            seen[(size_t)e2] = 1;
                            next.push_back(e2);
                        }
            for (int e : next) seen[(size_t)e] = 0;
            patch = std::move(next);
        }

        // weighted linear fit of each gradient component around the vertex
        Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
        Eigen::Vector3d r1 = Eigen::Vector3d::Zero(), r2 = Eigen::Vector3d::Zero();
        const Vec2& pv = mesh.nodes[(size_t)v];
        for (int e : patch) {
            const double dx = cc[(size_t)e][0] - pv[0], dy = cc[(size_t)e][1] - pv[1];
            const Eigen::Vector3d row(1.0, dx, dy);
            A += row * row.transpose();
            r1 += row * gc[(size_t)e][0];
            r2 += row * gc[(size_t)e][1];
        }
        const Eigen::Vector3d c1 = A.ldlt().solve(r1);
        const Eigen::Vector3d c2 = A.ldlt().solve(r2);
        hf.h11[v] = c1[1];
        hf.h22[v] = c2[2];
        hf.h12[v] = 0.5 * (c1[2] + c2[1]);
    }
    return hf;
}

Eigen::VectorXd AssembledOperator::expand(const Eigen::VectorXd& reduced) const {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dof_map.size()));
    for (size_t i = 0; i < dof_map.size(); ++i)
        if (dof_map[i] >= 0) full[(Eigen::Index)i] = reduced[dof_map[i]];
    return full;
}

Eigen::VectorXd AssembledOperator::restrict_full(const Eigen::VectorXd& full) const {
    Eigen::VectorXd red = Eigen::VectorXd::Zero(n_dofs);
    for (size_t i = 0; i < dof_map.size(); ++i)
        if (dof_map[i] >= 0) red[dof_map[i]] = full[(Eigen::Index)i];
    return red;
}

namespace {

std::vector<int> build_dof_map(const Mesh& mesh, bool dirichlet, int& n_dofs) {
    const size_t nn = mesh.nodes.size();
    std::vector<int> map(nn, -2);
    std::vector<char> elim(nn, 0);
    if (dirichlet)
        for (int b : mesh.boundary_nodes) elim[(size_t)b] = 1;

    int next = 0;
    for (size_t i = 0; i < nn; ++i) {
        const size_t rep = mesh.periodic() ? (size_t)mesh.periodic_master[i] : i;
        if (elim[rep]) {
            map[i] = -1;
            continue;
        }
        if (rep == i) {
            map[i] = next++;
        }
    }
    // second pass: slaves copy the master's index
    for (size_t i = 0; i < nn; ++i) {
        if (map[i] == -2) {
            const size_t rep = (size_t)mesh.periodic_master[i];
            map[i] = map[rep];
        }
    }
    n_dofs = next;
    return map;
}

using LocalKernel =
    std::function<void(int e, const Vec2& x, const ElemBasis& basis, double scale,
                       Eigen::Matrix<double, 6, 6>& Kloc, Eigen::Matrix<double, 6, 6>& Mloc)>;

AssembledOperator assemble_generic(const Mesh& mesh, bool dirichlet, int quad_degree,
                                   const LocalKernel& kernel) {
    AssembledOperator op;
    op.dof_map = build_dof_map(mesh, dirichlet, op.n_dofs);

    const auto& rule = triangle_rule(quad_degree);
    const int npe = mesh.nodes_per_elem();

    std::vector<Eigen::Triplet<double>> kt, mt;
    kt.reserve(mesh.tris.size() * (size_t)(npe * npe));
    mt.reserve(mesh.tris.size() * (size_t)(npe * npe));
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(op.n_dofs);

    Eigen::Matrix<double, 6, 6> Kloc, Mloc;
    for (size_t e = 0; e < mesh.tris.size(); ++e) {
        Kloc.setZero();
        Mloc.setZero();
        const double area2 = mesh.double_area(static_cast<int>(e));
        std::array<double, 6> ints{}; // integral of each basis fn over the element
        for (const auto& qp : rule) {
            const ElemBasis basis = eval_basis(mesh, static_cast<int>(e), qp.bary);
            const Vec2 x = map_point(mesh, static_cast<int>(e), qp.bary);
            const double scale = qp.weight * 0.5 * area2;
            kernel(static_cast<int>(e), x, basis, scale, Kloc, Mloc);
            for (int i = 0; i < npe; ++i) ints[(size_t)i] += scale * basis.N[(size_t)i];
        }
        const auto& t = mesh.tris[e];
        for (int i = 0; i < npe; ++i) {
            const int gi = op.dof_map[(size_t)t[(size_t)i]];
            if (gi < 0) continue;
            mean[gi] += ints[(size_t)i];
            for (int j = 0; j < npe; ++j) {
                const int gj = op.dof_map[(size_t)t[(size_t)j]];
                if (gj < 0) continue;
                kt.emplace_back(gi, gj, Kloc(i, j));
                mt.emplace_back(gi, gj, Mloc(i, j));
            }
        }
    }
    op.K.resize(op.n_dofs, op.n_dofs);
    op.M.resize(op.n_dofs, op.n_dofs);
    op.K.setFromTriplets(kt.begin(), kt.end());
    op.M.setFromTriplets(mt.begin(), mt.end());
    // duplicate-summation order differs between (i,j) and (j,i); symmetrize
    // so the operators equal their transposes bitwise
    op.K = 0.5 * (SpMat(op.K.transpose()) + op.K);
    op.M = 0.5 * (SpMat(op.M.transpose()) + op.M);
    op.mean_weight = mean;
    return op;
}

} // namespace

AssembledOperator assemble_operator(const Mesh& mesh, const ScalarField& a,
                                    const ScalarField& weight, bool dirichlet, int quad_degree) {
    auto kernel = [&](int /*e*/, const Vec2& x, const ElemBasis& basis, double scale,
                      Eigen::Matrix<double, 6, 6>& Kloc, Eigen::Matrix<double, 6, 6>& Mloc) {
        const double av = a(x);
        const double wv = weight(x);
        if (!(av > 0))
            throw SolverError("fem_core", "coefficient not uniformly positive at a quadrature point");
        if (!(wv > 0))
            throw SolverError("fem_core", "weight not positive at a quadrature point");
        const double kw = av * wv * scale, mw = wv * scale;
        for (int i = 0; i < basis.n; ++i) {
            for (int j = 0; j < basis.n; ++j) {
                Kloc(i, j) += kw * (basis.grad[(size_t)i][0] * basis.grad[(size_t)j][0] +
                                    basis.grad[(size_t)i][1] * basis.grad[(size_t)j][1]);
                Mloc(i, j) += mw * basis.N[(size_t)i] * basis.N[(size_t)j];
            }
        }
    };
    return assemble_generic(mesh, dirichlet, quad_degree, kernel);
}

AssembledOperator assemble_operator_matrix(const Mesh& mesh, const MatrixField& A, bool dirichlet,
                                           int quad_degree) {
    auto kernel = [&](int /*e*/, const Vec2& x, const ElemBasis& basis, double scale,
                      Eigen::Matrix<double, 6, 6>& Kloc, Eigen::Matrix<double, 6, 6>& Mloc) {
        const auto Av = A(x);
        for (int i = 0; i < basis.n; ++i) {
            const Vec2& gi = basis.grad[(size_t)i];
            const Vec2 Agi{Av[0] * gi[0] + Av[1] * gi[1], Av[2] * gi[0] + Av[3] * gi[1]};
            for (int j = 0; j < basis.n; ++j) {
                const Vec2& gj = basis.grad[(size_t)j];
                Kloc(i, j) += scale * (Agi[0] * gj[0] + Agi[1] * gj[1]);
                Mloc(i, j) += scale * basis.N[(size_t)i] * basis.N[(size_t)j];
            }
        }
    };
    return assemble_generic(mesh, dirichlet, quad_degree, kernel);
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const AssembledOperator& op, const LoadTerm& term,
                              int quad_degree) {
    const auto& rule = triangle_rule(quad_degree);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(op.n_dofs);
    const int npe = mesh.nodes_per_elem();
    for (size_t e = 0; e < mesh.tris.size(); ++e) {
        const double area2 = mesh.double_area(static_cast<int>(e));
        std::array<double, 6> local{};
        for (const auto& qp : rule) {
            const ElemBasis basis = eval_basis(mesh, static_cast<int>(e), qp.bary);
            const Vec2 x = map_point(mesh, static_cast<int>(e), qp.bary);
            std::array<double, 6> val{};
            term(static_cast<int>(e), x, qp.bary, basis, val);
            const double scale = qp.weight * 0.5 * area2;
            for (int i = 0; i < npe; ++i) local[(size_t)i] += scale * val[(size_t)i];
        }
        const auto& t = mesh.tris[e];
        for (int i = 0; i < npe; ++i) {
            const int gi = op.dof_map[(size_t)t[(size_t)i]];
            if (gi >= 0) rhs[gi] += local[(size_t)i];
        }
    }
    return rhs;
}

Eigen::VectorXd assemble_boundary_load(const Mesh& mesh, const AssembledOperator& op,
                                       const BoundaryLoadTerm& term, int npoints) {
    const auto& rule = line_rule(npoints);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(op.n_dofs);
    const int npe = mesh.nodes_per_elem();
    for (const auto& be : mesh.boundary_edges) {
        const auto& t = mesh.tris[(size_t)be.elem];
        const int va = t[(size_t)be.local_edge];
        const int vb = t[(size_t)((be.local_edge + 1) % 3)];
        const Vec2& a = mesh.nodes[(size_t)va];
        const Vec2& b = mesh.nodes[(size_t)vb];
        const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        const Vec2 nrm{(b[1] - a[1]) / len, -(b[0] - a[0]) / len};
        std::array<double, 6> local{};
        for (const auto& qp : rule) {
            std::array<double, 3> bary{0, 0, 0};
            bary[(size_t)be.local_edge] = 1.0 - qp.x;
            bary[(size_t)((be.local_edge + 1) % 3)] = qp.x;
            const ElemBasis basis = eval_basis(mesh, be.elem, bary);
            const Vec2 x{a[0] + qp.x * (b[0] - a[0]), a[1] + qp.x * (b[1] - a[1])};
            std::array<double, 6> val{};
            term(be.elem, x, nrm, bary, basis, val);
            for (int i = 0; i < npe; ++i) local[(size_t)i] += qp.weight * len * val[(size_t)i];
        }
        for (int i = 0; i < npe; ++i) {
            const int gi = op.dof_map[(size_t)t[(size_t)i]];
            if (gi >= 0) rhs[gi] += local[(size_t)i];
        }
    }
    return rhs;
}

double integrate(const Mesh& mesh, int quad_degree,
                 const std::function<double(int e, const Vec2& x,
                                            const std::array<double, 3>& bary)>& fn) {
    const auto& rule = triangle_rule(quad_degree);
    double total = 0;
    for (size_t e = 0; e < mesh.tris.size(); ++e) {
        const double area = 0.5 * mesh.double_area(static_cast<int>(e));
        for (const auto& qp : rule)
            total += qp.weight * area * fn(static_cast<int>(e), map_point(mesh, (int)e, qp.bary),
                                           qp.bary);
    }
    return total;
}

double integrate_boundary(const Mesh& mesh, int npoints,
                          const std::function<double(int e, const Vec2& x, const Vec2& normal,
                                                     const std::array<double, 3>& bary)>& fn) {
    const auto& rule = line_rule(npoints);
    double total = 0;
    for (const auto& be : mesh.boundary_edges) {
        const auto& t = mesh.tris[(size_t)be.elem];
        const int va = t[(size_t)be.local_edge];
        const int vb = t[(size_t)((be.local_edge + 1) % 3)];
        const Vec2& a = mesh.nodes[(size_t)va];
        const Vec2& b = mesh.nodes[(size_t)vb];
        const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        // CCW elements: outward normal is the edge direction rotated by -90 deg
        const Vec2 nrm{(b[1] - a[1]) / len, -(b[0] - a[0]) / len};
        for (const auto& qp : rule) {
            std::array<double, 3> bary{0, 0, 0};
            bary[(size_t)be.local_edge] = 1.0 - qp.x;
            bary[(size_t)((be.local_edge + 1) % 3)] = qp.x;
            const Vec2 x{a[0] + qp.x * (b[0] - a[0]), a[1] + qp.x * (b[1] - a[1])};
            total += qp.weight * len * fn(be.elem, x, nrm, bary);
        }
    }
    return total;
}

} // namespace wgspec
