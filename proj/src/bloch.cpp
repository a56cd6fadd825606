#include "blochbeam/bloch.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace blochbeam {

namespace {

// Gauge fix: rotate so the largest-magnitude coefficient is real positive.
void fix_gauge(Eigen::VectorXcd& c) {
    Eigen::Index jmax = 0;
    double amax = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double a = std::abs(c[i]);
        if (a > amax) {
            amax = a;
            jmax = i;
        }
    }
    const cplx pivot = c[jmax];
    if (std::abs(pivot) > 0.0) c *= std::conj(pivot) / std::abs(pivot);
}

}  // namespace

Eigen::VectorXcd align_gauge(const Eigen::VectorXcd& ref,
                             const Eigen::VectorXcd& c) {
    const cplx ov = ref.dot(c);  // conjugate-first inner product
    const double a = std::abs(ov);
    if (a == 0.0) return c;
    return c * (std::conj(ov) / a);
}

bloch_solver::bloch_solver(const lattice& lat, const potential& pot,
                           double cutoff, int band_index, double delta_gap,
                           double tol_eig)
    : lat_(lat),
      pot_(pot),
      basis_(pw_basis::build(lat, cutoff)),
      band_index_(band_index),
      delta_gap_(delta_gap),
      tol_eig_(tol_eig),
      real_path_(pot.all_real()) {
    if (band_index_ < 1 || band_index_ > basis_.size())
        throw input_error("band index out of range for this basis");
    const int nG = basis_.size();
    Vc_ = Eigen::MatrixXcd::Zero(nG, nG);
    for (const auto& fc : pot_.coeffs()) {
        // <G + g | V | G> accumulates vhat(g) for every basis pair related
        // by the coefficient's reciprocal vector.
        for (int i = 0; i < nG; ++i) {
            const int j = basis_.find(basis_.g[i] + fc.g);
            if (j >= 0) Vc_(j, i) += fc.v;
        }
    }
    if (real_path_) Vr_ = Vc_.real();
}

void bloch_solver::fill_kinetic(const Vec3& k, Eigen::VectorXd& kin) const {
    const int nG = basis_.size();
    kin.resize(nG);
    for (int i = 0; i < nG; ++i)
        kin[i] = (basis_.gcart.col(i) + k).squaredNorm();
}

void bloch_solver::check_band(const Eigen::VectorXd& w, int n, const Vec3& k,
                              band_state& st) const {
    const int nn = n - 1;
    double gap = std::numeric_limits<double>::infinity();
    if (nn > 0) gap = std::min(gap, w[nn] - w[nn - 1]);
    if (nn + 1 < w.size()) gap = std::min(gap, w[nn + 1] - w[nn]);
    st.gap = gap;
    if (gap < delta_gap_) {
        std::ostringstream os;
        os << "band " << n << " is not simple at k = (" << k[0] << ", "
           << k[1] << ", " << k[2] << "): neighbouring eigenvalue within "
           << gap;
        throw assumption_error(os.str());
    }
}

band_state bloch_solver::solve(const Vec3& k, int n) const {
    if (n < 1 || n > basis_.size())
        throw input_error("band index out of range for this basis");
    const int nG = basis_.size();
    band_state st;
    st.k = k;
    st.n = n;
    Eigen::VectorXd kin;
    fill_kinetic(k, kin);
    if (real_path_) {
        Eigen::MatrixXd H = Vr_;
        H.diagonal() += kin;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        if (es.info() != Eigen::Success)
            throw accuracy_error("eigensolver failed");
        st.E = es.eigenvalues()[n - 1];
        st.c = es.eigenvectors().col(n - 1).cast<cplx>();
        fix_gauge(st.c);
        check_band(es.eigenvalues(), n, k, st);
        st.eig_residual =
            (H * st.c.real() - st.E * st.c.real()).norm();
    } else {
        Eigen::MatrixXcd H = Vc_;
        H.diagonal() += kin.cast<cplx>();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
        if (es.info() != Eigen::Success)
            throw accuracy_error("eigensolver failed");
        st.E = es.eigenvalues()[n - 1];
        st.c = es.eigenvectors().col(n - 1);
        fix_gauge(st.c);
        check_band(es.eigenvalues(), n, k, st);
        st.eig_residual = (H * st.c - st.E * st.c).norm();
    }
    if (st.eig_residual > tol_eig_) {
        std::ostringstream os;
        os << "eigenpair residual " << st.eig_residual << " exceeds "
           << tol_eig_;
        throw accuracy_error(os.str());
    }
    return st;
}

Eigen::VectorXd bloch_solver::energies(const Vec3& k, int n_lo,
                                       int n_hi) const {
    if (n_lo < 1 || n_hi < n_lo || n_hi > basis_.size())
        throw input_error("band range out of range for this basis");
    Eigen::VectorXd kin;
    fill_kinetic(k, kin);
    Eigen::VectorXd w;
    if (real_path_) {
        Eigen::MatrixXd H = Vr_;
        H.diagonal() += kin;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H,
                                                          Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw accuracy_error("eigensolver failed");
        w = es.eigenvalues();
    } else {
        Eigen::MatrixXcd H = Vc_;
        H.diagonal() += kin.cast<cplx>();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H,
                                                           Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw accuracy_error("eigensolver failed");
        w = es.eigenvalues();
    }
    return w.segment(n_lo - 1, n_hi - n_lo + 1);
}

band_rates bloch_solver::rates(const Vec3& k, double mu_for_rate) const {
    const int nG = basis_.size();
    const int nn = band_index_ - 1;
    band_rates out;
    out.state.k = k;
    out.state.n = band_index_;
    Eigen::VectorXd kin;
    fill_kinetic(k, kin);

    Eigen::VectorXd w;
    Eigen::MatrixXcd U;  // eigenvectors (complex view even on the real path)
    Eigen::MatrixXd Ur;
    bool real_vectors = false;
    if (real_path_) {
        Eigen::MatrixXd H = Vr_;
        H.diagonal() += kin;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        if (es.info() != Eigen::Success)
            throw accuracy_error("eigensolver failed");
        w = es.eigenvalues();
        Ur = es.eigenvectors();
        real_vectors = true;
    } else {
        Eigen::MatrixXcd H = Vc_;
        H.diagonal() += kin.cast<cplx>();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
        if (es.info() != Eigen::Success)
            throw accuracy_error("eigensolver failed");
        w = es.eigenvalues();
        U = es.eigenvectors();
    }

    out.state.E = w[nn];
    check_band(w, band_index_, k, out.state);

    // Momentum operator matrix elements <m|v_j|n> for the chosen band,
    // with v_j diagonal in the plane-wave basis: 2 (G_j + k_j).
    Eigen::Matrix3Xd diagv(3, nG);
    for (int i = 0; i < nG; ++i)
        diagv.col(i) = 2.0 * (basis_.gcart.col(i) + k);

    if (real_vectors) {
        Eigen::VectorXd c = Ur.col(nn);
        // Pivot sign so the largest component is positive.
        Eigen::Index jmax = 0;
        c.cwiseAbs().maxCoeff(&jmax);
        if (c[jmax] < 0.0) c = -c;
        out.state.c = c.cast<cplx>();
        Eigen::Matrix<double, Eigen::Dynamic, 3> vec(nG, 3);
        for (int j = 0; j < 3; ++j)
            vec.col(j) = Ur.transpose() *
                         diagv.row(j).transpose().cwiseProduct(c);
        // Diagonal element directly from |c|^2: immune to the arbitrary
        // sign of the eigensolver column behind vec's row nn.
        const Eigen::VectorXd c2 = c.cwiseAbs2();
        for (int j = 0; j < 3; ++j) out.grad[j] = diagv.row(j) * c2;
        out.hess = 2.0 * Mat3::Identity();
        for (int m = 0; m < nG; ++m) {
            if (m == nn) continue;
            const double den = w[nn] - w[m];
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    const double add = 2.0 * vec(m, i) * vec(m, j) / den;
                    out.hess(i, j) += add;
                    if (i != j) out.hess(j, i) += add;
                }
        }
        // Real eigenvectors: both geometric rates vanish identically.
        out.wr = 0.0;
        out.berry_rate = 0.0;
    } else {
        Eigen::VectorXcd c = U.col(nn);
        fix_gauge(c);
        out.state.c = c;
        Eigen::MatrixXcd vec(nG, 3);
        for (int j = 0; j < 3; ++j)
            vec.col(j) = U.adjoint() *
                         diagv.row(j).transpose().cwiseProduct(c);
        const Eigen::VectorXd c2 = c.cwiseAbs2();
        for (int j = 0; j < 3; ++j) out.grad[j] = diagv.row(j) * c2;
        out.hess = 2.0 * Mat3::Identity();
        out.wr = 0.0;
        for (int m = 0; m < nG; ++m) {
            if (m == nn) continue;
            const double den = w[nn] - w[m];
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    const double add =
                        2.0 *
                        (std::conj(vec(m, i)) * vec(m, j)).real() / den;
                    out.hess(i, j) += add;
                    if (i != j) out.hess(j, i) += add;
                }
            out.wr += (std::conj(vec(m, 0)) * vec(m, 1)).imag() / (-den);
        }
        if (mu_for_rate != 0.0) {
            // Projection of the gauge-fixed eigenvector velocity onto the
            // pivot row determines the phase rate that keeps the pivot
            // real along the orbit.
            const Vec2 kdot(-mu_for_rate * out.grad[1],
                            mu_for_rate * out.grad[0]);
            Eigen::Index jmax = 0;
            c.cwiseAbs().maxCoeff(&jmax);
            cplx dpivot = 0.0;
            for (int m = 0; m < nG; ++m) {
                if (m == nn) continue;
                const cplx q = (kdot[0] * vec(m, 0) + kdot[1] * vec(m, 1)) /
                               (w[nn] - w[m]);
                dpivot += U(jmax, m) * q;
            }
            out.berry_rate = dpivot.imag() / c[jmax].real();
        }
    }
    return out;
}

cplx bloch_solver::complex_band_energy(const Vec2c& K12, double k3,
                                       double E_ref,
                                       const Eigen::VectorXcd* guess) const {
    const int nG = basis_.size();
    Eigen::MatrixXcd H = Vc_;
    for (int i = 0; i < nG; ++i) {
        const Vec3 g = basis_.gcart.col(i);
        const cplx t1 = g[0] + K12[0];
        const cplx t2 = g[1] + K12[1];
        const double t3 = g[2] + k3;
        H(i, i) += t1 * t1 + t2 * t2 + t3 * t3;
    }

    // Shifted inverse iteration homes in on the eigenvalue nearest E_ref;
    // it converges in a few solves here because the target is separated
    // from the rest of the spectrum by the band gap while the non-Hermitian
    // perturbation is only of the order of the tube radius.
    Eigen::MatrixXcd A = H;
    A.diagonal().array() -= E_ref;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    Eigen::VectorXcd x;
    if (guess && guess->size() == nG) {
        x = *guess;
    } else {
        Eigen::Index j0 = 0;
        A.diagonal().cwiseAbs().minCoeff(&j0);
        x = Eigen::VectorXcd::Zero(nG);
        x[j0] = 1.0;
    }
    x.normalize();
    const double hscale = H.diagonal().cwiseAbs().maxCoeff() + 1.0;
    for (int it = 0; it < 12; ++it) {
        Eigen::VectorXcd y = lu.solve(x);
        const double yn = y.norm();
        if (!std::isfinite(yn) || yn == 0.0) break;  // shift hit an eigenvalue
        x = y / yn;
        const cplx theta = x.dot(A * x);  // first slot conjugated
        const double resid = (A * x - theta * x).norm();
        if (resid <= 1e-13 * hscale) return E_ref + theta;
    }

    // Fallback: the dense solver settles ill-conditioned or degenerate cases.
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H, false);
    if (es.info() != Eigen::Success)
        throw accuracy_error("complex eigensolver failed");
    const auto& ev = es.eigenvalues();
    Eigen::Index best = 0;
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double d = std::abs(ev[i] - E_ref);
        if (d < dmin) {
            dmin = d;
            best = i;
        }
    }
    return ev[best];
}

}  // namespace blochbeam
