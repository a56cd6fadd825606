#pragma once

#include <Eigen/Dense>
#include <optional>

#include "blochbeam/lattice.hpp"
#include "blochbeam/numeric.hpp"

namespace blochbeam {

struct band_state {
    Vec3 k;
    int n = 1;  // 1-based band index, ascending energies
    double E = 0.0;
    Eigen::VectorXcd c;  // plane-wave coefficients, gauge-fixed
    double gap = 0.0;    // distance to the nearest neighbouring eigenvalue
    double eig_residual = 0.0;
};

// Band energy derivatives at a point, all obtained from a single
// diagonalization: gradient via the Hellmann-Feynman identity, Hessian via
// the second-order band sum, plus the two geometric rates used along orbits.
struct band_rates {
    band_state state;
    Vec3 grad;
    Mat3 hess;
    // Band-geometric integrand Im <(H0 - E) d1 phi, d2 phi> expressed as a
    // band sum; vanishes identically for real (inversion-symmetric in the
    // matrix sense) potentials.
    double wr = 0.0;
    // Rate of the geometric phase of the gauge-fixed eigenvector along the
    // direction kdot supplied to rates().
    double berry_rate = 0.0;
};

class bloch_solver {
public:
    bloch_solver(const lattice& lat, const potential& pot, double cutoff,
                 int band_index = 1, double delta_gap = 1e-8,
                 double tol_eig = 1e-8);

    const pw_basis& basis() const { return basis_; }
    const lattice& lat() const { return lat_; }
    int band_index() const { return band_index_; }
    int basis_size() const { return basis_.size(); }

    band_state solve(const Vec3& k) const { return solve(k, band_index_); }
    band_state solve(const Vec3& k, int n) const;
    double energy(const Vec3& k) const { return solve(k).E; }
    double energy(const Vec3& k, int n) const { return solve(k, n).E; }

    // Eigenvalues n_lo..n_hi (1-based, inclusive) without the simplicity
    // guard: spectrum dumps may cross degeneracies that orbit work must
    // avoid.
    Eigen::VectorXd energies(const Vec3& k, int n_lo, int n_hi) const;

    // Derivatives and geometric rates for the configured band. When
    // mu_for_rate is nonzero, berry_rate is evaluated along the transverse
    // flow direction mu * (-dE/dk2, dE/dk1) of the same diagonalization.
    band_rates rates(const Vec3& k, double mu_for_rate = 0.0) const;

    // Analytic continuation of the configured band to complex transverse
    // momentum: eigenvalue of the (non-Hermitian) Hamiltonian closest to
    // E_ref.
    // Band continuation to complex transverse momentum: the eigenvalue of
    // H(K12, k3) nearest E_ref. An optional start vector (e.g. the band
    // state at a nearby real momentum) accelerates the iterative path.
    cplx complex_band_energy(const Vec2c& K12, double k3, double E_ref,
                             const Eigen::VectorXcd* guess = nullptr) const;

private:
    lattice lat_;
    potential pot_;
    pw_basis basis_;
    int band_index_;
    double delta_gap_;
    double tol_eig_;
    bool real_path_;
    Eigen::MatrixXd Vr_;   // used when every coefficient is real
    Eigen::MatrixXcd Vc_;  // always valid

    void fill_kinetic(const Vec3& k, Eigen::VectorXd& kin) const;
    void check_band(const Eigen::VectorXd& w, int n, const Vec3& k,
                    band_state& st) const;
};

// Aligns the phase of `c` to a reference vector (positive real overlap);
// used by finite-difference constructions of k-derivatives of eigenvectors.
Eigen::VectorXcd align_gauge(const Eigen::VectorXcd& ref,
                             const Eigen::VectorXcd& c);

}  // namespace blochbeam
