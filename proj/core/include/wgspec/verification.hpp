#ifndef WGSPEC_VERIFICATION_HPP
#define WGSPEC_VERIFICATION_HPP

#include "wgspec/effective_model.hpp"
#include "wgspec/tube_oracle.hpp"

#include <string>
#include <vector>

namespace wgspec {

/// Scale sweep against an asymptotic prediction.
struct ConvergenceReport {
    std::vector<double> scales;
    std::vector<double> errors;     // |mu_scale - prediction|
    std::vector<double> raw_mu;     // measured eigenvalues per scale
    std::vector<double> predicted;  // mu* per scale
    double reference_mu = 0.0;      // mu_C or mu_H

    double slope = 0.0;             // least-squares slope of log err vs log scale
    bool slope_valid = false;       // false when errors sit on the floor
    double floor_estimate = 0.0;    // discretization error estimate (one refinement)
    bool monotone = true;           // error sequence decreased monotonically
    std::string note;

    std::string csv() const; // scale,error rows
};

/// Inhomogeneous-regime sweep: errors(delta) =
/// |mu_delta(s) - mu_C - delta b.xi(s) - delta^2 q_c(s)| with every term
/// computed on the same mesh so discretization errors cancel.
ConvergenceReport convergence_study_beta(const WaveguideGeometry& geom, const ScalarField& a,
                                         const Mesh& xmesh, double s,
                                         const std::vector<double>& deltas, int quad_degree = 4);

/// Oscillating-coefficient sweep: errors(eps) =
/// |mu_eps(s) - mu_H - eps^2 (q_H [+ q_xi(s)])|. The cross-section mesh is
/// rebuilt per epsilon as elems_per_period/eps cells on the unit square.
/// `combined=false` requires a straight geometry (beta = 1).
ConvergenceReport convergence_study_homogenize(const WaveguideGeometry& geom,
                                               const ScalarField& a_cell, double s,
                                               const std::vector<double>& epsilons,
                                               bool combined = false, int elems_per_period = 8,
                                               int cell_resolution = 64, int cs_resolution = 128,
                                               int quad_degree = 4);

/// Residuals of the integration-by-parts identities and side conditions.
struct IdentityResidual {
    std::string name;
    double value;
};
std::vector<IdentityResidual> identity_checks(const CrossSectionSolution& cs,
                                              const AuxiliaryFields& aux,
                                              const HomogenizedTensors& tensors, const Vec2& xi,
                                              int quad_degree = 4);

/// JSON for a tube-oracle run (eigenvalues plus full provenance).
std::string tube_spectrum_to_json(const TubeSpectrum& ts);

/// JSON for a convergence report.
std::string convergence_report_to_json(const ConvergenceReport& r);

} // namespace wgspec

#endif
