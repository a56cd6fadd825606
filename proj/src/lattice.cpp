#include "blochbeam/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace blochbeam {

lattice lattice::from_basis(const Mat3& A) {
    if (std::abs(A.determinant()) < 1e-12)
        throw input_error("lattice basis is singular");
    lattice lat;
    lat.A = A;
    lat.B = two_pi * A.inverse().transpose();
    return lat;
}

lattice lattice::cubic() {
    return from_basis(two_pi * Mat3::Identity());
}

potential potential::from_list(const std::vector<fourier_coeff>& coeffs) {
    potential out;
    std::map<std::array<int, 3>, cplx> seen;
    for (const auto& fc : coeffs) {
        const std::array<int, 3> key{fc.g[0], fc.g[1], fc.g[2]};
        if (key == std::array<int, 3>{0, 0, 0})
            throw input_error(
                "potential: the zero reciprocal vector is a constant shift;"
                " set the energy origin instead");
        if (seen.count(key)) {
            std::ostringstream os;
            os << "potential: duplicate coefficient at (" << fc.g[0] << ","
               << fc.g[1] << "," << fc.g[2] << ")";
            throw input_error(os.str());
        }
        seen[key] = fc.v;
    }
    for (const auto& [key, v] : seen) {
        const std::array<int, 3> nkey{-key[0], -key[1], -key[2]};
        auto it = seen.find(nkey);
        if (it == seen.end() || std::abs(it->second - std::conj(v)) > 1e-12) {
            std::ostringstream os;
            os << "potential: coefficient at (" << key[0] << "," << key[1]
               << "," << key[2]
               << ") lacks a conjugate partner at the negated vector;"
                  " a real potential requires vhat(-g) = conj(vhat(g))";
            throw input_error(os.str());
        }
    }
    for (const auto& [key, v] : seen) {
        out.coeffs_.push_back({Eigen::Vector3i(key[0], key[1], key[2]), v});
        if (std::abs(v.imag()) > 0.0) out.all_real_ = false;
    }
    return out;
}

pw_basis pw_basis::build(const lattice& lat, double cutoff) {
    if (cutoff < 0.0) throw input_error("plane-wave cutoff must be >= 0");
    pw_basis basis;
    basis.cutoff = cutoff;
    // Conservative integer search box from the singular values of B.
    Eigen::JacobiSVD<Mat3> svd(lat.B);
    const double smin = svd.singularValues()(2);
    const int box = static_cast<int>(std::floor(cutoff / smin)) + 1;
    const double cut2 = cutoff * cutoff + 1e-12;
    for (int m1 = -box; m1 <= box; ++m1)
        for (int m2 = -box; m2 <= box; ++m2)
            for (int m3 = -box; m3 <= box; ++m3) {
                const Vec3 gc = lat.B * Vec3(m1, m2, m3);
                if (gc.squaredNorm() <= cut2)
                    basis.g.emplace_back(m1, m2, m3);
            }
    std::sort(basis.g.begin(), basis.g.end(),
              [](const Eigen::Vector3i& a, const Eigen::Vector3i& b) {
                  if (a[0] != b[0]) return a[0] < b[0];
                  if (a[1] != b[1]) return a[1] < b[1];
                  return a[2] < b[2];
              });
    basis.gcart.resize(3, basis.g.size());
    for (std::size_t i = 0; i < basis.g.size(); ++i) {
        basis.index[{basis.g[i][0], basis.g[i][1], basis.g[i][2]}] =
            static_cast<int>(i);
        basis.gcart.col(i) = lat.B * basis.g[i].cast<double>();
    }
    return basis;
}

}  // namespace blochbeam
