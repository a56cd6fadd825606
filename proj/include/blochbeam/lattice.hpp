#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <vector>

#include "blochbeam/numeric.hpp"

namespace blochbeam {

// Direct lattice with basis vectors in the columns of A; the reciprocal
// basis B satisfies B^T A = 2*pi*I.
struct lattice {
    Mat3 A;
    Mat3 B;

    static lattice from_basis(const Mat3& A);
    // a_i = 2*pi*e_i, hence b_i = e_i.
    static lattice cubic();
};

struct fourier_coeff {
    Eigen::Vector3i g;
    cplx v;
};

// Real periodic potential given by its Fourier coefficients on the
// reciprocal lattice. Validation enforces the reality condition
// vhat(-g) = conj(vhat(g)) and rejects duplicates.
class potential {
public:
    potential() = default;
    static potential from_list(const std::vector<fourier_coeff>& coeffs);

    const std::vector<fourier_coeff>& coeffs() const { return coeffs_; }
    bool empty() const { return coeffs_.empty(); }
    // True when every coefficient is real, which makes the Bloch
    // Hamiltonian a real symmetric matrix for any k.
    bool all_real() const { return all_real_; }

private:
    std::vector<fourier_coeff> coeffs_;
    bool all_real_ = true;
};

// Plane-wave basis: all reciprocal vectors m1*b1 + m2*b2 + m3*b3 with
// Euclidean length <= cutoff, ordered lexicographically by (m1, m2, m3).
// The set is closed under negation by construction.
struct pw_basis {
    double cutoff = 0.0;
    std::vector<Eigen::Vector3i> g;
    Eigen::Matrix3Xd gcart;  // column i = B * g[i]
    std::map<std::array<int, 3>, int> index;

    int size() const { return static_cast<int>(g.size()); }
    int find(const Eigen::Vector3i& m) const {
        auto it = index.find({m[0], m[1], m[2]});
        return it == index.end() ? -1 : it->second;
    }

    static pw_basis build(const lattice& lat, double cutoff);
};

}  // namespace blochbeam
