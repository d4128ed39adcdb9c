#ifndef WGSPEC_EFFECTIVE_MODEL_HPP
#define WGSPEC_EFFECTIVE_MODEL_HPP

#include "wgspec/cross_section.hpp"

#include <map>

namespace wgspec {

/// Effective 1D model: kinetic coefficient r and the potential split into
/// its provenance components on a uniform s grid.
struct EffectiveModel {
    enum class Regime { Homogenized, Inhomogeneous };
    Regime regime = Regime::Homogenized;

    double l = 1.0;
    double r = 1.0;          // abar (homogenized) or int a w_C^2 (inhomogeneous)
    double mu_leading = 0.0; // mu_H or mu_C

    std::vector<double> s;       // uniform sample grid
    double q_H = 0.0;            // constant, homogenized regime
    std::vector<double> q_xi;    // homogenized regime
    std::vector<double> q_tau;   // both regimes
    std::vector<double> q_c;     // inhomogeneous regime
    std::vector<double> drift;   // b . xi(s), inhomogeneous regime

    /// Homogenized-regime torsion marks the model conjectural (the limit
    /// model is formal there).
    bool conjectural = false;

    /// unsimplified q_xi (verification runs only; empty otherwise)
    std::vector<double> q_xi_unsimplified;

    /// homogenized: q_H + q_xi + q_tau; inhomogeneous: q_tau + q_c.
    std::vector<double> q_total() const;

    /// boundary-flux magnitude of the q_H fourth-derivative reduction,
    /// reported so tests can bound the recovery error contribution
    double q_H_boundary_flux = 0.0;
};

/// lambda^{(j)}(scale) = mu/scale^2 [+ drift/scale] + eta^{(j)} together
/// with the 1D mode profiles.
struct SpectralDecomposition {
    double mu_leading = 0.0;
    double drift_const = 0.0; // 0 in the homogenized regime
    std::vector<double> eta;
    std::map<double, std::vector<double>> lambda; // scale -> [lambda^{(j)}]
    std::vector<double> mode_nodes;
    std::vector<Eigen::VectorXd> mode_profiles;
    bool conjectural = false;
};

/// Assembles the homogenized-regime potential:
///   q_H  = -R_ijkl int (d4_ijkl w_H) w_H + P_ijk int (d3_ijk w_H) wbar
///   q_xi = -1/4 Q xi.xi - 2 Q_ij xi_j int (d_i w_H) wbar
///          - S_ijk xi_k int (d2_ij w_H) w_H
///   q_tau = tau^2 T_ijkl int (Rx)_i (d_j w_H) (Rx)_k (d_l w_H)
/// High-order integrals are reduced by parts to recovered second
/// derivatives plus the boundary flux. With `with_unsimplified` the first
/// form of q_xi is evaluated as well (identity check).
EffectiveModel compute_potential_homogenized(const WaveguideGeometry& geom,
                                             const HomogenizedTensors& tensors,
                                             const CrossSectionSolution& cs,
                                             const AuxiliaryFields& aux, int n_s = 257,
                                             bool with_unsimplified = false, int quad_degree = 4);

/// Inhomogeneous-regime potential: r = int a w_C^2, q_c = B xi.xi,
/// q_tau = tau^2 int a |grad w_C . Rx|^2 - tau' int a (grad w_C . Rx) w_C,
/// drift = b . xi.
EffectiveModel compute_potential_inhomogeneous(const WaveguideGeometry& geom,
                                               const CrossSectionSolution& cs,
                                               const AuxiliaryFields& aux, const ScalarField& a,
                                               int n_s = 257, int quad_degree = 4);

struct PropagationCheck {
    bool propagates = false;
    std::vector<double> h_profile;
    double variation = 0.0;
};

/// Propagation criterion: drift constant along the tube (within tol).
PropagationCheck check_propagation(const EffectiveModel& model, double tol = 1e-10);

/// Solves -r phi'' + q phi = eta phi on (0,l) and assembles the lambda
/// table for the requested scales. In the inhomogeneous regime the
/// propagation criterion must hold; otherwise a SolverError directs the
/// caller to the localization module.
SpectralDecomposition effective_spectrum(const EffectiveModel& model, int k,
                                         const std::vector<double>& scales, int cells = 2048);

/// JSON per the documented schema.
std::string effective_model_to_json(const EffectiveModel& model, const SpectralDecomposition& sd);

} // namespace wgspec

#endif
