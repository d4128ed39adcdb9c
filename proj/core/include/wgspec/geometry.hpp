#ifndef WGSPEC_GEOMETRY_HPP
#define WGSPEC_GEOMETRY_HPP

#include "wgspec/expression.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wgspec {

using Vec2 = std::array<double, 2>;

/// A scalar profile of the arc length s on [0,l]. Either a closed-form
/// expression (with symbolic derivatives), a sampled array with linear
/// interpolation (centered differences for derivatives, one-sided at the
/// ends), or a plain callable (numeric derivatives).
class Profile {
public:
    Profile() : Profile(0.0) {}
    explicit Profile(double constant);
    explicit Profile(Expression expr);
    Profile(std::vector<double> samples, double length); // uniform samples on [0,length]
    explicit Profile(std::function<double(double)> fn);

    double operator()(double s) const;
    double deriv(double s) const;
    double deriv2(double s) const;

    bool is_constant() const { return kind_ == Kind::Constant; }

private:
    enum class Kind { Constant, Expr, Samples, Callable } kind_ = Kind::Constant;
    double const_value_ = 0.0;
    Expression expr_, dexpr_, ddexpr_;
    bool have_dexpr_ = false;
    std::vector<double> samples_;
    double length_ = 1.0;
    std::function<double(double)> fn_;

    double fd_deriv(double s) const;
    double fd_deriv2(double s) const;
};

/// Centerline data of the tube: length l, curvature k(s), Frenet rotation
/// angle alpha(s) and twist angle theta(s). Exposes the curvature vector
/// xi(s) = k(s) (cos(theta-alpha), -sin(theta-alpha)), the torsion
/// tau = theta', and the cross-section weight beta = 1 - delta (xi . x).
/// Immutable after construction.
struct WaveguideGeometry {
    double l = 1.0;
    Profile k, alpha, theta;
    std::vector<double> sample_grid;

    /// max_i |xi(s_{i+1}) - xi(s_i)| / (s_{i+1} - s_i) over the sample grid;
    /// finite-difference stand-in for the Lipschitz bound on xi.
    double xi_lipschitz_estimate = 0.0;
    /// sup_s |xi(s)| over the sample grid.
    double xi_sup = 0.0;

    Vec2 xi(double s) const;
    double tau(double s) const;
    double tau_deriv(double s) const;

    double beta(double delta, double s, const Vec2& x) const;
};

/// Builds a geometry and its diagnostics.
/// Throws ConfigError on l <= 0 or n_samples < 2, and on non-finite profile
/// values anywhere on the sample grid.
WaveguideGeometry build_geometry(double l, Profile k, Profile alpha, Profile theta,
                                 int n_samples = 257);

/// Largest delta guaranteeing beta_delta > 0 on [0,l] x omega:
/// 1 / (sup_s |xi| * sup_{x in omega} |x|). Infinite for straight tubes.
double beta_positivity_bound(const WaveguideGeometry& geom, double sup_abs_x);

/// Classification of the propagation function h(s) = b . xi(s).
struct HClassification {
    enum class Kind { Propagation, InteriorSingle, InteriorMulti, Endpoint };

    struct InteriorWell {
        double s0;   // minimizer
        double h0;   // h(s0)
        double hpp;  // h''(s0) > 0
    };
    struct EndpointWell {
        bool left;    // minimum at s=0 (else s=l)
        double slope; // |one-sided h'| > 0
        double h0;
    };

    Kind kind = Kind::Propagation;
    std::vector<InteriorWell> wells;       // interior classes
    std::vector<EndpointWell> endpoints;   // endpoint class (two entries if both ends)
    double h_min = 0.0, h_max = 0.0;
    std::vector<double> h_profile;         // h on the geometry sample grid
};

/// Classifies h = b . xi over the sample grid. `tol` controls both the
/// propagation test (max h - min h <= tol) and the detection thresholds for
/// h' and h''. Defaults to 1e-10 * (1 + |h|_max) when tol <= 0.
/// Throws SolverError for a degenerate interior minimum (h'' <= tol).
HClassification classify_h(const WaveguideGeometry& geom, const Vec2& b, double tol = -1.0);

/// CSV sampler: columns s, xi1, xi2, tau, h for the geometry sample grid.
std::string geometry_csv(const WaveguideGeometry& geom, const Vec2& b);

} // namespace wgspec

#endif
