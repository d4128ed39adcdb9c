#ifndef WGSPEC_LOCALIZATION_HPP
#define WGSPEC_LOCALIZATION_HPP

#include "wgspec/eigensolve.hpp"
#include "wgspec/geometry.hpp"

#include <string>
#include <vector>

namespace wgspec {

/// Blow-up model at the global minimizers of h = b . xi when propagation
/// fails: harmonic oscillators at interior wells (delta^{-1/2} correction
/// scale), Airy-type half-line problems at endpoint minima (delta^{-2/3}).
struct LocalizationModel {
    HClassification cls;
    double r = 1.0;
    double mu_C = 0.0;
    double h0 = 0.0; // global minimum value of h

    struct Well {
        bool endpoint = false;
        double s0 = 0.0;      // location (0 or l for endpoints)
        double strength = 0;  // h''(s0) interior, |h'(end)| endpoint
        Spectrum1D spectrum;  // blow-up spectrum of this well
    };
    std::vector<Well> wells;

    struct Level {
        double eta;
        int well; // index into wells
        int j;    // level within the well
    };
    std::vector<Level> levels; // ascending merge across wells

    /// lambda_delta^{(j)} prediction: mu_C/d^2 + h0/d + eta_j/d^{1/2}
    /// (interior) or /d^{2/3} (endpoint).
    std::vector<double> lambda_pred(double delta) const;

    /// blow-up exponents for reporting: (coordinate, amplitude)
    double coord_exponent() const { return endpoint_case() ? 1.0 / 3.0 : 1.0 / 4.0; }
    double amplitude_exponent() const { return endpoint_case() ? 1.0 / 6.0 : 1.0 / 8.0; }
    bool endpoint_case() const {
        return cls.kind == HClassification::Kind::Endpoint;
    }
};

/// Builds the localization model for a non-propagating classification.
/// Interior well at s_i: oscillator -r phi'' + (h''(s_i)/2) t^2 phi,
/// eta_j = (2j+1) sqrt(r h''(s_i)/2) up to truncation error.
/// Endpoint: half-line problem -r phi'' + |h'| t phi.
/// Throws SolverError when the classification is Propagation.
LocalizationModel localize(const WaveguideGeometry& geom, const Vec2& b, double mu_C, double r,
                           int k);

std::string localization_to_json(const LocalizationModel& model,
                                 const std::vector<double>& deltas);

} // namespace wgspec

#endif
