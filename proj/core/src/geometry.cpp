#include "wgspec/geometry.hpp"
#include "wgspec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace wgspec {

Profile::Profile(double constant) : kind_(Kind::Constant), const_value_(constant) {}

Profile::Profile(Expression expr) : kind_(Kind::Expr), expr_(std::move(expr)) {
    try {
        dexpr_ = expr_.derivative("s");
        ddexpr_ = dexpr_.derivative("s");
        have_dexpr_ = true;
    } catch (const ConfigError&) {
        have_dexpr_ = false; // fall back to finite differences
    }
}

Profile::Profile(std::vector<double> samples, double length)
    : kind_(Kind::Samples), samples_(std::move(samples)), length_(length) {
    if (samples_.size() < 2) throw ConfigError("geometry", "profile needs at least 2 samples");
    if (!(length_ > 0)) throw ConfigError("geometry", "profile length must be positive");
}

Profile::Profile(std::function<double(double)> fn) : kind_(Kind::Callable), fn_(std::move(fn)) {}

double Profile::operator()(double s) const {
    switch (kind_) {
    case Kind::Constant: return const_value_;
    case Kind::Expr: {
        VarBindings v;
        v.s = s;
        return expr_.eval(v);
    }
    case Kind::Samples: {
        const double u = std::clamp(s / length_, 0.0, 1.0) * double(samples_.size() - 1);
        const size_t i = std::min(static_cast<size_t>(u), samples_.size() - 2);
        const double w = u - double(i);
        return (1.0 - w) * samples_[i] + w * samples_[i + 1];
    }
    case Kind::Callable: return fn_(s);
    }
    return 0.0;
}

double Profile::fd_deriv(double s) const {
    const double h = 1e-6 * std::max(1.0, std::abs(s));
    return ((*this)(s + h) - (*this)(s - h)) / (2 * h);
}

double Profile::fd_deriv2(double s) const {
    const double h = 1e-4 * std::max(1.0, std::abs(s));
    return ((*this)(s + h) - 2 * (*this)(s) + (*this)(s - h)) / (h * h);
}

double Profile::deriv(double s) const {
    switch (kind_) {
    case Kind::Constant: return 0.0;
    case Kind::Expr:
        if (have_dexpr_) {
            VarBindings v;
            v.s = s;
            return dexpr_.eval(v);
        }
        return fd_deriv(s);
    case Kind::Samples: {
        // centered differences on the sample grid, one-sided at the ends
        const double h = length_ / double(samples_.size() - 1);
        const double u = std::clamp(s / length_, 0.0, 1.0) * double(samples_.size() - 1);
        const size_t i = std::min(static_cast<size_t>(u + 0.5), samples_.size() - 1);
        if (i == 0) return (samples_[1] - samples_[0]) / h;
        if (i == samples_.size() - 1) return (samples_[i] - samples_[i - 1]) / h;
        return (samples_[i + 1] - samples_[i - 1]) / (2 * h);
    }
    case Kind::Callable: return fd_deriv(s);
    }
    return 0.0;
}

double Profile::deriv2(double s) const {
    switch (kind_) {
    case Kind::Constant: return 0.0;
    case Kind::Expr:
        if (have_dexpr_) {
            VarBindings v;
            v.s = s;
            return ddexpr_.eval(v);
        }
        return fd_deriv2(s);
    default: return fd_deriv2(s);
    }
}

Vec2 WaveguideGeometry::xi(double s) const {
    const double kk = k(s);
    const double ang = theta(s) - alpha(s);
    return {kk * std::cos(ang), -kk * std::sin(ang)};
}

double WaveguideGeometry::tau(double s) const { return theta.deriv(s); }

double WaveguideGeometry::tau_deriv(double s) const { return theta.deriv2(s); }

double WaveguideGeometry::beta(double delta, double s, const Vec2& x) const {
    if (s < -1e-12 || s > l + 1e-12)
        throw ConfigError("geometry", "arc length outside [0,l]");
    const Vec2 xs = xi(s);
    return 1.0 - delta * (xs[0] * x[0] + xs[1] * x[1]);
}

WaveguideGeometry build_geometry(double l, Profile k, Profile alpha, Profile theta, int n_samples) {
    if (!(l > 0)) throw ConfigError("geometry", "tube length must be positive");
    if (n_samples < 2) throw ConfigError("geometry", "n_samples must be at least 2");

    WaveguideGeometry g;
    g.l = l;
    g.k = std::move(k);
    g.alpha = std::move(alpha);
    g.theta = std::move(theta);
    g.sample_grid.resize(static_cast<size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i)
        g.sample_grid[static_cast<size_t>(i)] = l * double(i) / double(n_samples - 1);

    Vec2 prev{0, 0};
    for (size_t i = 0; i < g.sample_grid.size(); ++i) {
        const double s = g.sample_grid[i];
        for (double v : {g.k(s), g.alpha(s), g.theta(s)})
            if (!std::isfinite(v))
                throw ConfigError("geometry", "non-finite profile value at s=" + std::to_string(s));
        const Vec2 xs = g.xi(s);
        g.xi_sup = std::max(g.xi_sup, std::hypot(xs[0], xs[1]));
        if (i > 0) {
            const double ds = g.sample_grid[i] - g.sample_grid[i - 1];
            const double dxi = std::hypot(xs[0] - prev[0], xs[1] - prev[1]);
            g.xi_lipschitz_estimate = std::max(g.xi_lipschitz_estimate, dxi / ds);
        }
        prev = xs;
    }
    return g;
}

double beta_positivity_bound(const WaveguideGeometry& geom, double sup_abs_x) {
    const double denom = geom.xi_sup * sup_abs_x;
    if (denom <= 0) return std::numeric_limits<double>::infinity();
    return 1.0 / denom;
}

namespace {

double h_of(const WaveguideGeometry& g, const Vec2& b, double s) {
    const Vec2 xs = g.xi(s);
    return b[0] * xs[0] + b[1] * xs[1];
}

// Golden-section refinement of a local minimum bracketed by [lo, hi].
double refine_min(const WaveguideGeometry& g, const Vec2& b, double lo, double hi) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, c = hi;
    double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
    double f1 = h_of(g, b, x1), f2 = h_of(g, b, x2);
    for (int it = 0; it < 200 && (c - a) > 1e-13 * std::max(1.0, g.l); ++it) {
        if (f1 < f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - gr * (c - a);
            f1 = h_of(g, b, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (c - a);
            f2 = h_of(g, b, x2);
        }
    }
    return 0.5 * (a + c);
}

} // namespace

HClassification classify_h(const WaveguideGeometry& geom, const Vec2& b, double tol) {
    HClassification cls;
    const auto& grid = geom.sample_grid;
    cls.h_profile.resize(grid.size());
    double hmin = std::numeric_limits<double>::infinity(),
           hmax = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < grid.size(); ++i) {
        cls.h_profile[i] = h_of(geom, b, grid[i]);
        hmin = std::min(hmin, cls.h_profile[i]);
        hmax = std::max(hmax, cls.h_profile[i]);
    }
    cls.h_min = hmin;
    cls.h_max = hmax;

    const double habs = std::max(std::abs(hmin), std::abs(hmax));
    if (tol <= 0) tol = 1e-10 * (1.0 + habs);

    if (hmax - hmin <= tol) {
        cls.kind = HClassification::Kind::Propagation;
        return cls;
    }

    // Locate all grid-local minimizers attaining the global minimum.
    const double level = hmin + std::max(tol, 1e-9 * (1.0 + habs));
    const double fd_h = geom.l / double(grid.size() - 1);
    std::vector<double> mins;
    for (size_t i = 0; i < grid.size(); ++i) {
        if (cls.h_profile[i] > level) continue;
        const bool left_ok = (i == 0) || cls.h_profile[i] <= cls.h_profile[i - 1];
        const bool right_ok = (i + 1 == grid.size()) || cls.h_profile[i] <= cls.h_profile[i + 1];
        if (!(left_ok && right_ok)) continue;
        if (i == 0 || i + 1 == grid.size()) {
            mins.push_back(grid[i]);
        } else {
            mins.push_back(refine_min(geom, b, grid[i - 1], grid[i + 1]));
        }
        // skip the plateau of this minimum
        while (i + 1 < grid.size() && cls.h_profile[i + 1] <= level) ++i;
    }
    if (mins.empty()) mins.push_back(grid[0]); // cannot happen, defensive only

    // nondegeneracy thresholds scaled to the range of h (offset-invariant):
    // a genuine quadratic well has h'' ~ (h_max - h_min)/l^2 up to geometry
    const double range = hmax - hmin;
    const double hpp_floor = std::max(tol, 1e-3 * range / (geom.l * geom.l));
    const double slope_floor = std::max(tol, 1e-3 * range / geom.l);

    const double edge = 4.0 * fd_h;
    for (double s0 : mins) {
        const bool at_left = s0 <= edge;
        const bool at_right = s0 >= geom.l - edge;
        if (at_left || at_right) {
            const double se = at_left ? 0.0 : geom.l;
            const double dir = at_left ? 1.0 : -1.0;
            const double hstep = fd_h;
            const double slope =
                dir * (h_of(geom, b, se + dir * hstep) - h_of(geom, b, se)) / hstep;
            if (std::abs(slope) <= slope_floor)
                throw SolverError("geometry",
                                  "degenerate endpoint minimum: one-sided h' vanishes at s=" +
                                      std::to_string(se));
            cls.endpoints.push_back({at_left, std::abs(slope), h_of(geom, b, se)});
        } else {
            const double hstep = std::max(fd_h, 1e-5 * geom.l);
            const double hm = h_of(geom, b, s0 - hstep), h0 = h_of(geom, b, s0),
                         hp = h_of(geom, b, s0 + hstep);
            const double d1 = (hp - hm) / (2 * hstep);
            const double d2 = (hp - 2 * h0 + hm) / (hstep * hstep);
            if (std::abs(d1) > std::sqrt(tol) * (1.0 + habs) + 1e-6 * std::abs(d2) * hstep)
                continue; // grid artifact, not a true stationary point
            if (d2 <= hpp_floor)
                throw SolverError("geometry", "degenerate interior minimum at s=" +
                                                  std::to_string(s0) +
                                                  ": h'' below the nondegeneracy floor");
            cls.wells.push_back({s0, h0, d2});
        }
    }

    if (!cls.endpoints.empty() && cls.wells.empty()) {
        cls.kind = HClassification::Kind::Endpoint;
    } else if (cls.wells.size() == 1 && cls.endpoints.empty()) {
        cls.kind = HClassification::Kind::InteriorSingle;
    } else if (!cls.wells.empty()) {
        cls.kind = HClassification::Kind::InteriorMulti;
    } else {
        throw SolverError("geometry", "h is non-constant but no admissible minimizer was found");
    }
    return cls;
}

std::string geometry_csv(const WaveguideGeometry& geom, const Vec2& b) {
    std::string out = "s,xi1,xi2,tau,h\n";
    char line[256];
    auto clean = [](double v) { return v == 0.0 ? 0.0 : v; }; // drop negative zeros
    for (double s : geom.sample_grid) {
        const Vec2 xs = geom.xi(s);
        const double h = b[0] * xs[0] + b[1] * xs[1];
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", clean(s), clean(xs[0]),
                      clean(xs[1]), clean(geom.tau(s)), clean(h));
        out += line;
    }
    return out;
}

} // namespace wgspec
