#include "doctest.h"

#include "support/oracles.hpp"
#include "wgspec/errors.hpp"
#include "wgspec/eigensolve.hpp"
#include "wgspec/fem.hpp"

#include <cmath>

using namespace wgspec;

namespace {
const ScalarField one = [](const Vec2&) { return 1.0; };

AssembledOperator laplace_square(int n) {
    Mesh mesh = unit_square_mesh(n, ElementOrder::P2);
    static std::vector<Mesh> keep; // fields reference the mesh; keep it alive
    keep.push_back(std::move(mesh));
    return assemble_operator(keep.back(), one, one, true);
}
} // namespace

TEST_SUITE_BEGIN("eigensolve");

TEST_CASE("unit square Dirichlet Laplacian") {
    AssembledOperator op = laplace_square(64);
    Spectrum spec = smallest_eigenpairs(op.K, op.M, 3);
    CHECK(spec.eigenvalues[0] ==
          doctest::Approx(2 * M_PI * M_PI).epsilon(1e-3)); // mesh-level accuracy contract
    CHECK(spec.eigenvalues[1] == doctest::Approx(5 * M_PI * M_PI).epsilon(1e-3));
    // residual contract per returned pair
    for (double r : spec.residuals) CHECK(r < 1e-10);
    // Rayleigh consistency for the ground pair
    const Eigen::VectorXd& v = spec.eigenvectors[0];
    const double rq = v.dot(op.K * v) / v.dot(op.M * v);
    CHECK(rq == doctest::Approx(spec.eigenvalues[0]).epsilon(1e-12));
    // M-orthogonality
    CHECK(std::abs(spec.eigenvectors[0].dot(op.M * spec.eigenvectors[1])) < 1e-9);
    CHECK(spec.eigenvectors[0].dot(op.M * spec.eigenvectors[0]) == doctest::Approx(1.0));
    // ground state positive after sign fix
    CHECK(op.expand(spec.eigenvectors[0]).minCoeff() > -1e-8);
}

TEST_CASE("conforming refinement decreases the eigenvalue toward 2 pi^2") {
    double prev = 1e300;
    for (int n : {8, 16, 32}) {
        Mesh mesh = unit_square_mesh(n, ElementOrder::P1);
        AssembledOperator op = assemble_operator(mesh, one, one, true);
        const double lam = smallest_eigenpairs(op.K, op.M, 1).eigenvalues[0];
        CHECK(lam > 2 * M_PI * M_PI); // conforming upper bound
        CHECK(lam < prev);
        prev = lam;
    }
}

TEST_CASE("unit disk ground eigenvalue vs the Bessel oracle") {
    Mesh mesh = disk_mesh(48, 1.0, ElementOrder::P2);
    AssembledOperator op = assemble_operator(mesh, one, one, true);
    Spectrum spec = smallest_eigenpairs(op.K, op.M, 1);
    const double z = oracles::bessel_j0_first_zero();
    CHECK(z == doctest::Approx(2.404825557695773).epsilon(1e-12));
    CHECK(spec.eigenvalues[0] == doctest::Approx(z * z).epsilon(1e-3));
}

TEST_CASE("argument validation") {
    AssembledOperator op = laplace_square(4);
    CHECK_THROWS_AS(smallest_eigenpairs(op.K, op.M, 0), ConfigError);
    CHECK_THROWS_AS(smallest_eigenpairs(op.K, op.M, op.n_dofs + 1), ConfigError);
}

TEST_CASE("determinism of repeated solves") {
    AssembledOperator op = laplace_square(16);
    Spectrum a = smallest_eigenpairs(op.K, op.M, 2);
    Spectrum b = smallest_eigenpairs(op.K, op.M, 2);
    CHECK(a.eigenvalues[0] == b.eigenvalues[0]); // bitwise
    CHECK((a.eigenvectors[0] - b.eigenvectors[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Sturm-Liouville analytic cases") {
    Spectrum1D free = solve_sturm_liouville(1.0, [](double) { return 0.0; }, 1.0, 4, 512);
    for (int j = 0; j < 4; ++j)
        CHECK(free.eigenvalues[(size_t)j] ==
              doctest::Approx((j + 1.0) * (j + 1.0) * M_PI * M_PI).epsilon(1e-8));

    // constant shift is exact on the same grid
    Spectrum1D shifted = solve_sturm_liouville(1.0, [](double) { return 7.5; }, 1.0, 4, 512);
    for (int j = 0; j < 4; ++j)
        CHECK(shifted.eigenvalues[(size_t)j] - free.eigenvalues[(size_t)j] ==
              doctest::Approx(7.5).epsilon(1e-9));

    // q(s) = s: variational bounds and the dense finite-difference oracle
    Spectrum1D lin = solve_sturm_liouville(1.0, [](double s) { return s; }, 1.0, 3, 1024);
    CHECK(lin.eigenvalues[0] > M_PI * M_PI);
    CHECK(lin.eigenvalues[0] < M_PI * M_PI + 1.0);
    const auto fd = oracles::fd_sturm_liouville(1.0, [](double s) { return s; }, 1.0, 3);
    for (int j = 0; j < 3; ++j)
        CHECK(lin.eigenvalues[(size_t)j] == doctest::Approx(fd[(size_t)j]).epsilon(1e-6));

    // negative potentials are handled (certified shift below the spectrum)
    Spectrum1D neg = solve_sturm_liouville(1.0, [](double) { return -30.0; }, 1.0, 2, 256);
    CHECK(neg.eigenvalues[0] == doctest::Approx(M_PI * M_PI - 30.0).epsilon(1e-8));
}

TEST_CASE("harmonic oscillator spectrum and scaling") {
    Spectrum1D osc = solve_oscillator(1.0, 1.0, 6);
    const auto exact = oracles::hermite_levels(1.0, 1.0, 6);
    for (int j = 0; j < 6; ++j)
        CHECK(osc.eigenvalues[(size_t)j] == doctest::Approx(exact[(size_t)j]).epsilon(1e-4));
    // truncation sensitivity is reported and small
    REQUIRE(osc.truncation_sensitivity.size() == 6);
    for (double sj : osc.truncation_sensitivity) CHECK(std::abs(sj) < 1e-8);

    // (r=4, c=1): every level is exactly twice the (1,1) level on the
    // correspondingly scaled grid
    Spectrum1D osc4 = solve_oscillator(4.0, 1.0, 6);
    for (int j = 0; j < 6; ++j)
        CHECK(osc4.eigenvalues[(size_t)j] ==
              doctest::Approx(2.0 * osc.eigenvalues[(size_t)j]).epsilon(1e-10));

    // enlarging T never increases an eigenvalue (Dirichlet bracketing)
    Spectrum1D narrow = solve_oscillator(1.0, 1.0, 3, 5.0);
    Spectrum1D wide = solve_oscillator(1.0, 1.0, 3, 6.5);
    for (int j = 0; j < 3; ++j)
        CHECK(wide.eigenvalues[(size_t)j] <= narrow.eigenvalues[(size_t)j] + 1e-12);

    CHECK_THROWS_AS(solve_oscillator(1.0, 0.0, 2), SolverError);
    CHECK_THROWS_AS(solve_oscillator(1.0, -1.0, 2), SolverError);
}

TEST_CASE("half-line linear potential vs the Airy oracle") {
    const auto zeros = oracles::airy_zeros(4);
    CHECK(zeros[0] == doctest::Approx(2.33810741045977).epsilon(1e-10));
    CHECK(zeros[1] == doctest::Approx(4.08794944413097).epsilon(1e-10));

    Spectrum1D airy = solve_halfline_linear(1.0, 1.0, 4);
    for (int j = 0; j < 4; ++j)
        CHECK(airy.eigenvalues[(size_t)j] == doctest::Approx(zeros[(size_t)j]).epsilon(1e-4));

    // slope scaling law is exact on the scaled grid: eta ~ (r slope^2)^{1/3}
    Spectrum1D s8 = solve_halfline_linear(1.0, 8.0, 3);
    Spectrum1D s1 = solve_halfline_linear(1.0, 1.0, 3);
    for (int j = 0; j < 3; ++j)
        CHECK(s8.eigenvalues[(size_t)j] ==
              doctest::Approx(4.0 * s1.eigenvalues[(size_t)j]).epsilon(1e-10));

    CHECK_THROWS_AS(solve_halfline_linear(1.0, -1.0, 2), SolverError);
}

TEST_CASE("lobpcg agrees with shift-invert Lanczos") {
    AssembledOperator op = laplace_square(20);
    Spectrum ref = smallest_eigenpairs(op.K, op.M, 2);

    // diagonal-ish preconditioner: exact inverse of K (small problem)
    Eigen::SimplicialLDLT<SpMat> ldlt(op.K);
    auto applyA = [&](const Eigen::MatrixXd& X) { return Eigen::MatrixXd(op.K * X); };
    auto applyM = [&](const Eigen::MatrixXd& X) { return Eigen::MatrixXd(op.M * X); };
    auto prec = [&](const Eigen::MatrixXd& R) { return Eigen::MatrixXd(ldlt.solve(R)); };
    LobpcgResult res = lobpcg(applyA, applyM, prec, op.K.rows(), 2, 1e-10, 200);
    REQUIRE(res.converged);
    CHECK(res.spectrum.eigenvalues[0] == doctest::Approx(ref.eigenvalues[0]).epsilon(1e-9));
    CHECK(res.spectrum.eigenvalues[1] == doctest::Approx(ref.eigenvalues[1]).epsilon(1e-8));
}

TEST_SUITE_END();
