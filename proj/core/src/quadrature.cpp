#include "wgspec/quadrature.hpp"
#include "wgspec/errors.hpp"

#include <cmath>

namespace wgspec {

namespace {

std::vector<TriQuadPoint> perm3(double a, double b, double w) {
    // orbit of (a, b, b) under permutations
    return {{{a, b, b}, w}, {{b, a, b}, w}, {{b, b, a}, w}};
}

std::vector<TriQuadPoint> perm6(double a, double b, double c, double w) {
    return {{{a, b, c}, w}, {{a, c, b}, w}, {{b, a, c}, w},
            {{b, c, a}, w}, {{c, a, b}, w}, {{c, b, a}, w}};
}

void append(std::vector<TriQuadPoint>& dst, const std::vector<TriQuadPoint>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

std::vector<TriQuadPoint> build_rule(int degree) {
    std::vector<TriQuadPoint> r;
    switch (degree) {
    case 1:
        r.push_back({{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0});
        break;
    case 2:
        append(r, perm3(2.0 / 3, 1.0 / 6, 1.0 / 3));
        break;
    case 4:
        append(r, perm3(0.108103018168070, 0.445948490915965, 0.223381589678011));
        append(r, perm3(0.816847572980459, 0.091576213509771, 0.109951743655322));
        break;
    case 5:
        r.push_back({{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.225});
        append(r, perm3(0.059715871789770, 0.470142064105115, 0.132394152788506));
        append(r, perm3(0.797426985353087, 0.101286507323456, 0.125939180544827));
        break;
    case 8:
        r.push_back({{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.144315607677787});
        append(r, perm3(0.081414823414554, 0.459292588292723, 0.095091634413245));
        append(r, perm3(0.658861384496480, 0.170569307751760, 0.103217370534718));
        append(r, perm3(0.898905543365938, 0.050547228317031, 0.032458497623198));
        append(r, perm6(0.008394777409958, 0.263112829634638, 0.728492392955404,
                        0.027230314174435));
        break;
    default:
        throw ConfigError("fem_core", "no triangle rule of degree " + std::to_string(degree));
    }
    return r;
}

} // namespace

const std::vector<TriQuadPoint>& triangle_rule(int degree) {
    static const std::vector<TriQuadPoint> r1 = build_rule(1);
    static const std::vector<TriQuadPoint> r2 = build_rule(2);
    static const std::vector<TriQuadPoint> r4 = build_rule(4);
    static const std::vector<TriQuadPoint> r5 = build_rule(5);
    static const std::vector<TriQuadPoint> r8 = build_rule(8);
    if (degree <= 1) return r1;
    if (degree <= 2) return r2;
    if (degree <= 4) return r4;
    if (degree <= 5) return r5;
    if (degree <= 8) return r8;
    throw ConfigError("fem_core", "no triangle rule of degree " + std::to_string(degree));
}

const std::vector<LineQuadPoint>& line_rule(int npoints) {
    // Gauss-Legendre abscissas on [-1,1] mapped to [0,1].
    static const auto make = [](std::vector<double> x, std::vector<double> w) {
        std::vector<LineQuadPoint> r;
        for (size_t i = 0; i < x.size(); ++i) r.push_back({0.5 * (x[i] + 1.0), 0.5 * w[i]});
        return r;
    };
    static const std::vector<LineQuadPoint> g1 = make({0.0}, {2.0});
    static const std::vector<LineQuadPoint> g2 =
        make({-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)}, {1.0, 1.0});
    static const std::vector<LineQuadPoint> g3 =
        make({-std::sqrt(0.6), 0.0, std::sqrt(0.6)}, {5.0 / 9, 8.0 / 9, 5.0 / 9});
    static const std::vector<LineQuadPoint> g4 = make(
        {-0.861136311594053, -0.339981043584856, 0.339981043584856, 0.861136311594053},
        {0.347854845137454, 0.652145154862546, 0.652145154862546, 0.347854845137454});
    static const std::vector<LineQuadPoint> g5 =
        make({-0.906179845938664, -0.538469310105683, 0.0, 0.538469310105683, 0.906179845938664},
             {0.236926885056189, 0.478628670499366, 0.568888888888889, 0.478628670499366,
              0.236926885056189});
    switch (npoints) {
    case 1: return g1;
    case 2: return g2;
    case 3: return g3;
    case 4: return g4;
    default: return g5;
    }
}

} // namespace wgspec
