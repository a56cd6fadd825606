#include <vector>

#include "blochbeam/lattice.hpp"
#include "doctest.h"

using namespace blochbeam;

TEST_CASE("cubic lattice reciprocal basis") {
    const lattice lat = lattice::cubic();
    CHECK((lat.A - two_pi * Mat3::Identity()).norm() < 1e-15);
    CHECK((lat.B - Mat3::Identity()).norm() < 1e-15);
}

TEST_CASE("reciprocal basis satisfies the duality relation") {
    Mat3 A;
    A << 6.0, 1.0, 0.0,
         0.0, 5.0, 0.5,
         0.2, 0.0, 7.0;
    const lattice lat = lattice::from_basis(A);
    CHECK((lat.B.transpose() * lat.A - two_pi * Mat3::Identity()).norm() <
          1e-12);
}

TEST_CASE("plane-wave basis sizes at reference cutoffs") {
    const lattice lat = lattice::cubic();
    CHECK(pw_basis::build(lat, 0.0).size() == 1);
    CHECK(pw_basis::build(lat, 1.5).size() == 19);
    CHECK(pw_basis::build(lat, 3.0).size() == 123);
    CHECK(pw_basis::build(lat, 4.0).size() == 257);
    CHECK(pw_basis::build(lat, 6.0).size() == 925);
}

TEST_CASE("basis is closed under negation and indexable") {
    const pw_basis basis = pw_basis::build(lattice::cubic(), 3.0);
    for (int i = 0; i < basis.size(); ++i) {
        const int j = basis.find(-basis.g[i]);
        REQUIRE(j >= 0);
        CHECK((basis.g[j] + basis.g[i]).norm() == 0);
        CHECK(basis.find(basis.g[i]) == i);
        // Cartesian images are B*g (identity B for the cubic lattice).
        CHECK((basis.gcart.col(i) - basis.g[i].cast<double>()).norm() < 1e-15);
        CHECK(basis.gcart.col(i).norm() <= 3.0 + 1e-12);
    }
    CHECK(basis.find(Eigen::Vector3i(9, 9, 9)) == -1);
}

TEST_CASE("potential validation enforces reality") {
    std::vector<fourier_coeff> good = {
        {Eigen::Vector3i(1, 0, 0), cplx(0.1, -0.2)},
        {Eigen::Vector3i(-1, 0, 0), cplx(0.1, 0.2)},
    };
    const potential p = potential::from_list(good);
    CHECK_FALSE(p.all_real());
    CHECK(p.coeffs().size() == 2);

    std::vector<fourier_coeff> real_only = {
        {Eigen::Vector3i(1, 0, 0), cplx(0.05, 0.0)},
        {Eigen::Vector3i(-1, 0, 0), cplx(0.05, 0.0)},
    };
    CHECK(potential::from_list(real_only).all_real());
    CHECK(potential().empty());

    std::vector<fourier_coeff> unpaired = {
        {Eigen::Vector3i(1, 0, 0), cplx(0.1, -0.2)},
    };
    CHECK_THROWS_AS(potential::from_list(unpaired), input_error);

    std::vector<fourier_coeff> mismatched = {
        {Eigen::Vector3i(1, 0, 0), cplx(0.1, -0.2)},
        {Eigen::Vector3i(-1, 0, 0), cplx(0.1, 0.3)},
    };
    CHECK_THROWS_AS(potential::from_list(mismatched), input_error);

    std::vector<fourier_coeff> duplicated = {
        {Eigen::Vector3i(1, 0, 0), cplx(0.1, 0.0)},
        {Eigen::Vector3i(1, 0, 0), cplx(0.1, 0.0)},
        {Eigen::Vector3i(-1, 0, 0), cplx(0.1, 0.0)},
    };
    CHECK_THROWS_AS(potential::from_list(duplicated), input_error);

    std::vector<fourier_coeff> constant_shift = {
        {Eigen::Vector3i(0, 0, 0), cplx(0.3, 0.0)},
    };
    CHECK_THROWS_AS(potential::from_list(constant_shift), input_error);
}

TEST_CASE("degenerate lattice basis is rejected") {
    Mat3 A = Mat3::Zero();
    A(0, 0) = 1.0;
    A(1, 1) = 1.0;  // third column zero
    CHECK_THROWS_AS(lattice::from_basis(A), input_error);
}
