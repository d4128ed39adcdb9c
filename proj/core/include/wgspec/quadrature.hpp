#ifndef WGSPEC_QUADRATURE_HPP
#define WGSPEC_QUADRATURE_HPP

#include <array>
#include <vector>

namespace wgspec {

/// Quadrature point on the reference triangle in barycentric coordinates
/// (l0, l1, l2), weight normalized so that the weights sum to 1 (multiply by
/// the physical element area when integrating).
struct TriQuadPoint {
    std::array<double, 3> bary;
    double weight;
};

/// Symmetric Gauss rules on the triangle, exact for polynomials up to
/// `degree` in {1, 2, 4, 5, 8}. Requests are rounded up to the next
/// available rule.
const std::vector<TriQuadPoint>& triangle_rule(int degree);

/// Gauss-Legendre rule on [0,1] with n in {1..5} points (degree 2n-1).
struct LineQuadPoint {
    double x;
    double weight;
};
const std::vector<LineQuadPoint>& line_rule(int npoints);

} // namespace wgspec

#endif
