#ifndef WGSPEC_TEST_ORACLES_HPP
#define WGSPEC_TEST_ORACLES_HPP

#include <functional>
#include <vector>

// Test-side reference computations, independent of the library's solver
// paths: power-series special functions with bisection root finding, exact
// one-dimensional cell solutions by quadrature, and a dense finite-
// difference eigenvalue oracle. Nothing here touches the FEM or the
// Lanczos/LOBPCG code.
namespace oracles {

/// Bessel J0 by its Maclaurin series (accurate for |x| <= 12).
double bessel_j0(double x);

/// First positive zero of J0 by bisection; the smallest Dirichlet
/// eigenvalue of the unit disk is its square.
double bessel_j0_first_zero();

/// Airy Ai by the standard Maclaurin pair f, g (usable for |x| <= 8).
double airy_ai(double x);

/// |a_j| for the first n zeros of Ai on the negative axis (scan+bisection).
std::vector<double> airy_zeros(int n);

/// Analytic harmonic oscillator levels (2j+1) sqrt(r c), j = 0..n-1.
std::vector<double> hermite_levels(double r, double c, int n);

/// Sturm-sequence bisection for the k smallest eigenvalues of a symmetric
/// tridiagonal matrix.
std::vector<double> tridiag_smallest(const std::vector<double>& diag,
                                     const std::vector<double>& off, int k);

/// Dense finite-difference oracle for -r u'' + q u = eta u on (0,l),
/// Dirichlet, n interior points.
std::vector<double> fd_sturm_liouville(double r, const std::function<double(double)>& q, double l,
                                       int k, int n = 10000);

/// Cell quantities for a coefficient a(y1) on the periodic unit cell: the
/// correctors reduce to ODEs in y1 solved by midpoint-rule quadrature.
struct Cell1D {
    double abar = 0; // arithmetic mean = Q_22
    double hm = 0;   // harmonic mean  = Q_11
    double P111 = 0, P221 = 0; // vanish identically (duality); kept as checks
    double S221 = 0, S122 = 0;
    double R1111 = 0, R2222 = 0, R1122 = 0, R2211 = 0;
    double T1111 = 0, T2211 = 0; // both equal the harmonic mean
};
Cell1D cell1d(const std::function<double(double)>& a, int n = 200000);

} // namespace oracles

#endif
