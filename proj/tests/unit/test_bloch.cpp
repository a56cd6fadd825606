#include <cmath>
#include <vector>

#include "blochbeam/bloch.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace blochbeam;
using namespace testutil;

TEST_CASE("empty potential reproduces the free band exactly") {
    const bloch_solver& s = free_solver();
    const Vec3 k(0.1, 0.2, 0.05);
    CHECK(s.energy(k) == doctest::Approx(k.squaredNorm()).epsilon(1e-13));
    const band_rates r = s.rates(k);
    for (int j = 0; j < 3; ++j)
        CHECK(r.grad[j] == doctest::Approx(2.0 * k[j]).epsilon(1e-13));
    CHECK((r.hess - 2.0 * Mat3::Identity()).norm() < 1e-12);
    CHECK(std::abs(r.wr) < 1e-15);
}

TEST_CASE("cosine chain reference energy and basis convergence") {
    // 0.4 cos x1: coefficient 0.2 on +-e1.
    std::vector<fourier_coeff> list = {
        {Eigen::Vector3i(1, 0, 0), cplx(0.2, 0.0)},
        {Eigen::Vector3i(-1, 0, 0), cplx(0.2, 0.0)},
    };
    const potential pot = potential::from_list(list);
    const Vec3 k(0.1, 0.0, 0.0);
    const bloch_solver s3(lattice::cubic(), pot, 3.0, 1);
    const bloch_solver s4(lattice::cubic(), pot, 4.0, 1);
    CHECK(s3.energy(k) == doctest::Approx(-0.067675064587).epsilon(1e-9));
    CHECK(s4.energy(k) == doctest::Approx(-0.067675064847).epsilon(1e-9));
    // Enlarging the basis must only move the energy at the truncation scale.
    CHECK(std::abs(s3.energy(k) - s4.energy(k)) < 5e-10);
}

TEST_CASE("separable square potential reference energies") {
    const bloch_solver& s = weak_solver3();
    CHECK(s.energy(Vec3(0.0, 0.0, 0.0)) ==
          doctest::Approx(-0.009956648177).epsilon(1e-9));
    CHECK(s.energy(Vec3(0.1, 0.0, 0.0)) ==
          doctest::Approx(-0.000161236442).epsilon(1e-7));
}

TEST_CASE("gauge fix pins the dominant coefficient real positive") {
    for (const bloch_solver* s : {&weak_solver3(), &twisted_solver15()}) {
        const band_state st = s->solve(Vec3(0.13, 0.21, 0.07));
        int imax = 0;
        st.c.cwiseAbs().maxCoeff(&imax);
        CHECK(st.c[imax].real() > 0.0);
        CHECK(std::abs(st.c[imax].imag()) < 1e-12 * std::abs(st.c[imax]));
        CHECK(st.c.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(st.eig_residual < 1e-10);
        CHECK(st.gap > 0.0);
    }
}

TEST_CASE("gradient matches central differences of the energy") {
    const bloch_solver& s = weak_solver3();
    const Vec3 k(0.17, 0.23, 0.11);
    const band_rates r = s.rates(k);
    const double h = 1e-5;
    for (int j = 0; j < 3; ++j) {
        Vec3 kp = k, km = k;
        kp[j] += h;
        km[j] -= h;
        const double fd = (s.energy(kp) - s.energy(km)) / (2.0 * h);
        CHECK(std::abs(r.grad[j] - fd) < 1e-6);
    }
}

TEST_CASE("hessian matches central differences of the gradient") {
    const bloch_solver& s = weak_solver3();
    const Vec3 k(0.17, 0.23, 0.11);
    const band_rates r = s.rates(k);
    CHECK((r.hess - r.hess.transpose()).norm() < 1e-10);
    const double h = 1e-4;
    for (int j = 0; j < 3; ++j) {
        Vec3 kp = k, km = k;
        kp[j] += h;
        km[j] -= h;
        const Vec3 fd = (s.rates(kp).grad - s.rates(km).grad) / (2.0 * h);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(r.hess(i, j) - fd[i]) < 1e-4);
    }
}

TEST_CASE("interband rate vanishes for real potentials") {
    const bloch_solver& s = weak_solver3();
    for (const Vec3& k : {Vec3(0.17, 0.23, 0.11), Vec3(-0.05, 0.31, 0.0)})
        CHECK(std::abs(s.rates(k).wr) < 1e-12);
}

TEST_CASE("interband rate reference values on the twisted potential") {
    const bloch_solver s(lattice::cubic(), twisted_potential(), 3.0, 1);
    {
        const band_rates r = s.rates(Vec3(0.07, 0.11, 0.05));
        CHECK(r.state.E ==
              doctest::Approx(-0.0140293898405698).epsilon(1e-10));
        CHECK(std::abs(r.wr - (-0.000174424376677684)) < 1e-12);
    }
    {
        const band_rates r = s.rates(Vec3(0.21, -0.13, 0.17));
        CHECK(r.state.E == doctest::Approx(0.0544338766680972).epsilon(1e-10));
        CHECK(std::abs(r.wr - 0.00293048143134454) < 1e-11);
    }
}

TEST_CASE("interband rate matches the finite-difference construction") {
    // Independent route: theta_rw rate = Im <(H - E) d1 Phi, d2 Phi> with
    // the eigenvector derivatives taken as gauge-fixed central differences.
    // The (H - E) factor annihilates the gauge-dependent parallel component,
    // so the pivot gauge is enough to make this well defined.
    const bloch_solver s(lattice::cubic(), twisted_potential(), 3.0, 1);
    const Vec3 k(0.21, -0.13, 0.17);
    const double h = 1e-4;
    auto state = [&](double d1, double d2) {
        return s.solve(Vec3(k[0] + d1, k[1] + d2, k[2])).c;
    };
    const Eigen::VectorXcd d1c = (state(h, 0) - state(-h, 0)) / (2.0 * h);
    const Eigen::VectorXcd d2c = (state(0, h) - state(0, -h)) / (2.0 * h);
    const band_state st = s.solve(k);
    // Assemble H(k) from scratch: kinetic diagonal plus potential
    // off-diagonals on the same basis.
    const int nG = s.basis_size();
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(nG, nG);
    for (int i = 0; i < nG; ++i)
        H(i, i) = (s.basis().gcart.col(i) + k).squaredNorm();
    for (const auto& fc : twisted_potential().coeffs())
        for (int i = 0; i < nG; ++i) {
            const int j = s.basis().find(s.basis().g[i] + fc.g);
            if (j >= 0) H(j, i) += fc.v;
        }
    const Eigen::VectorXcd lhs = H * d1c - st.E * d1c;
    const cplx ip = lhs.dot(d2c);  // Eigen dot conjugates the first factor
    const double wr_fd = ip.imag();
    const double wr = s.rates(k).wr;
    CHECK(std::abs(wr - wr_fd) < 1e-4);
    CHECK(std::abs(wr_fd) > 1e-4);  // the comparison is not vacuous
}

TEST_CASE("complex momentum continuation") {
    // Free band: E((k1 + i d)^2 + ...) is exactly the analytic square.
    {
        const bloch_solver& s = free_solver();
        const Vec2c K(cplx(0.2, 0.01), cplx(0.1, -0.02));
        const cplx expect = K[0] * K[0] + K[1] * K[1] + cplx(0.05 * 0.05);
        const cplx got = s.complex_band_energy(K, 0.05, 0.05);
        CHECK(std::abs(got - expect) < 1e-12);
    }
    // Real slice agrees with the Hermitian eigenvalue.
    {
        const bloch_solver& s = weak_solver3();
        const Vec3 k(0.23, 0.12, 0.0);
        const Vec2c K(cplx(k[0], 0.0), cplx(k[1], 0.0));
        const double E = s.energy(k);
        CHECK(std::abs(s.complex_band_energy(K, 0.0, E) - E) < 1e-11);
    }
    // Small imaginary offsets follow the second-order Taylor expansion, and
    // threading a start vector does not change the answer.
    {
        const bloch_solver& s = weak_solver3();
        const Vec3 k(0.23, 0.12, 0.0);
        const band_rates r = s.rates(k);
        const double d = 1e-3;
        const Vec2c K(cplx(k[0], d), cplx(k[1], 0.0));
        const cplx taylor = cplx(r.state.E, 0.0) + cplx(0.0, d) * r.grad[0] -
                            0.5 * d * d * r.hess(0, 0);
        const cplx plain = s.complex_band_energy(K, 0.0, r.state.E);
        const cplx seeded =
            s.complex_band_energy(K, 0.0, r.state.E, &r.state.c);
        CHECK(std::abs(plain - taylor) < 5e-9);
        CHECK(std::abs(plain - seeded) < 1e-12);
    }
}

TEST_CASE("band simplicity guard") {
    // Band 2 of the square potential is degenerate at the zone center.
    const bloch_solver s(lattice::cubic(), square_cosine(0.05), 1.5, 2);
    CHECK_THROWS_AS(s.solve(Vec3(0.0, 0.0, 0.0)), assumption_error);
    // The guard-free spectrum dump still works there and stays sorted.
    const Eigen::VectorXd w = s.energies(Vec3(0.0, 0.0, 0.0), 1, 4);
    REQUIRE(w.size() == 4);
    for (int i = 1; i < 4; ++i) CHECK(w[i] >= w[i - 1]);
    CHECK(w[0] == doctest::Approx(s.energy(Vec3(0.0, 0.0, 0.0), 1))
                      .epsilon(1e-12));
    CHECK_THROWS_AS(s.energies(Vec3(0, 0, 0), 0, 2), input_error);
    CHECK_THROWS_AS(s.energies(Vec3(0, 0, 0), 1, 1000), input_error);
    CHECK_THROWS_AS(s.solve(Vec3(0, 0, 0), 0), input_error);
}
