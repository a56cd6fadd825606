#include "blochbeam/frame.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace blochbeam {

namespace {

// State layout: [k1, k2, Y (8 reals, row-major re/im pairs),
//                N (8 reals), theta_b, theta_rw].
constexpr int state_dim = 20;

Mat2c unpack2c(const Eigen::VectorXd& y, int base) {
    Mat2c m;
    m(0, 0) = cplx(y[base + 0], y[base + 1]);
    m(0, 1) = cplx(y[base + 2], y[base + 3]);
    m(1, 0) = cplx(y[base + 4], y[base + 5]);
    m(1, 1) = cplx(y[base + 6], y[base + 7]);
    return m;
}

void pack2c(const Mat2c& m, Eigen::VectorXd& y, int base) {
    y[base + 0] = m(0, 0).real();
    y[base + 1] = m(0, 0).imag();
    y[base + 2] = m(0, 1).real();
    y[base + 3] = m(0, 1).imag();
    y[base + 4] = m(1, 0).real();
    y[base + 5] = m(1, 0).imag();
    y[base + 6] = m(1, 1).real();
    y[base + 7] = m(1, 1).imag();
}

}  // namespace

Mat2c frame_propagator::state_Y(const Eigen::VectorXd& y) {
    return unpack2c(y, 2);
}

Mat2c frame_propagator::state_N(const Eigen::VectorXd& y) {
    return unpack2c(y, 10);
}

Mat2c frame_propagator::initial_hessian(const Vec2& ydot, const Vec2& pdot) {
    const double v2 = ydot.squaredNorm();
    if (v2 < 1e-20)
        throw assumption_error("degenerate orbit velocity at the seed");
    const Mat2 Mr = (pdot * ydot.transpose() + ydot * pdot.transpose()) / v2 -
                    (ydot.dot(pdot)) * (ydot * ydot.transpose()) / (v2 * v2);
    const Vec2 nhat = Vec2(-ydot[1], ydot[0]) / std::sqrt(v2);
    return Mr.cast<cplx>() + cplx(0.0, 1.0) * (nhat * nhat.transpose());
}

void frame_propagator::rhs(double, const Eigen::VectorXd& y,
                           Eigen::VectorXd& dy) const {
    const Vec2 k2d(y[0], y[1]);
    const double mu = orbit_.mu;
    // One diagonalization provides the flow, the curvature blocks and both
    // geometric phase rates.
    const band_rates r = solver_.rates(Vec3(k2d[0], k2d[1], orbit_.k3), mu);
    const Vec2 kd(-mu * r.grad[1], mu * r.grad[0]);

    const Mat2 C = r.hess.topLeftCorner<2, 2>();
    Mat2 A = Mat2::Zero();
    A(0, 0) = mu * mu * C(1, 1);
    Mat2 B = Mat2::Zero();
    B(0, 0) = mu * C(0, 1);
    B(1, 0) = mu * C(1, 1);

    const Mat2c Y = unpack2c(y, 2);
    const Mat2c N = unpack2c(y, 10);
    const Mat2c dY = B.cast<cplx>() * Y + C.cast<cplx>() * N;
    const Mat2c dN = -A.cast<cplx>() * Y - B.transpose().cast<cplx>() * N;

    dy.resize(state_dim);
    dy[0] = kd[0];
    dy[1] = kd[1];
    pack2c(dY, dy, 2);
    pack2c(dN, dy, 10);
    dy[18] = r.berry_rate;
    dy[19] = mu * r.wr;
}

frame_sample frame_propagator::decode(double t,
                                      const Eigen::VectorXd& y) const {
    frame_sample fs;
    fs.s = t;
    fs.k = Vec2(y[0], y[1]);
    fs.Y = unpack2c(y, 2);
    fs.N = unpack2c(y, 10);
    fs.detY = fs.Y.determinant();
    fs.M = fs.N * fs.Y.inverse();
    fs.theta_b = y[18];
    fs.theta_rw = y[19];
    const band_rates r = solver_.rates(Vec3(fs.k[0], fs.k[1], orbit_.k3));
    fs.ydot = Vec2(r.grad[0], r.grad[1]);
    fs.pdot = Vec2(-orbit_.mu * fs.ydot[1], 0.0);
    return fs;
}

double beam_frame::arg_detY_at(double t, const cplx& detY) const {
    if (step_t.empty())
        throw accuracy_error("frame has no recorded steps");
    // Last accepted step time <= t.
    std::size_t lo = 0, hi = step_t.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (step_t[mid] <= t) lo = mid; else hi = mid - 1;
    }
    const double base = step_arg[lo];
    return base + wrap_to_pi(std::arg(detY) - base);
}

beam_frame frame_propagator::propagate(const beam_opts& opt) const {
    beam_frame frame;
    frame.T = orbit_.T;

    const band_rates r0 =
        solver_.rates(Vec3(orbit_.seed[0], orbit_.seed[1], orbit_.k3));
    const Vec2 ydot0(r0.grad[0], r0.grad[1]);
    const Vec2 pdot0(-orbit_.mu * ydot0[1], 0.0);
    frame.M0 = initial_hessian(ydot0, pdot0);

    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(state_dim);
    y0[0] = orbit_.seed[0];
    y0[1] = orbit_.seed[1];
    pack2c(Mat2c::Identity(), y0, 2);
    pack2c(frame.M0, y0, 10);

    frame.step_t.push_back(0.0);
    frame.step_arg.push_back(0.0);  // det Y(0) = 1

    auto observer = [&](const dense_segment&, double t1,
                        const Eigen::VectorXd& y1) {
        const Mat2c Y = unpack2c(y1, 2);
        const cplx d = Y.determinant();
        const double prev = frame.step_arg.back();
        const double jump = wrap_to_pi(std::arg(d) - prev);
        if (std::abs(jump) >= 0.5 * M_PI) {
            std::ostringstream os;
            os << "det Y phase resolution lost at s = " << t1
               << " (jump " << jump << "); tighten the frame tolerances";
            throw accuracy_error(os.str());
        }
        frame.step_t.push_back(t1);
        frame.step_arg.push_back(prev + jump);
        return true;
    };

    ode_options oopt;
    oopt.rtol = opt.rtol;
    oopt.atol = opt.atol;
    oopt.h_max = 0.25;
    dopri5 stepper([this](double t, const Eigen::VectorXd& y,
                          Eigen::VectorXd& dy) { rhs(t, y, dy); });
    frame.sol = stepper.integrate(0.0, y0, orbit_.T, oopt, observer);

    // Samples on the orbit grid plus the terminal point.
    frame.samples.reserve(orbit_.J);
    for (int j = 0; j < orbit_.J; ++j)
        frame.samples.push_back(sample_at(frame, orbit_.s[j]));
    frame.terminal = sample_at(frame, orbit_.T);
    frame.theta_b_total = frame.terminal.theta_b;
    frame.theta_rw_total = frame.terminal.theta_rw;

    const double winding =
        (frame.terminal.arg_detY - frame.step_arg.front()) / two_pi;
    frame.maslov = static_cast<int>(std::lround(winding));
    if (std::abs(winding - frame.maslov) > 0.01)
        throw accuracy_error(
            "winding of det Y over the period is not an integer");

    // Invariant audit across samples (criterion thresholds are enforced by
    // callers; numerical floors are enforced here).
    auto bilin12 = [](const frame_sample& fs) {
        // Bilinear (no conjugation) pairing of the two frame columns.
        return fs.Y(0, 0) * fs.N(0, 1) + fs.Y(1, 0) * fs.N(1, 1) -
               (fs.Y(0, 1) * fs.N(0, 0) + fs.Y(1, 1) * fs.N(1, 0));
    };
    auto bilin2bar = [](const frame_sample& fs) {
        // Sesquilinear pairing of the transverse column with its conjugate.
        // Its initial value is -2i (y'_1/|y'|)^2 at the seed, not -2i: only
        // potentials with a reflection symmetry give a seed velocity exactly
        // along e1.
        return fs.Y(0, 1) * std::conj(fs.N(0, 1)) +
               fs.Y(1, 1) * std::conj(fs.N(1, 1)) -
               (std::conj(fs.Y(0, 1)) * fs.N(0, 1) +
                std::conj(fs.Y(1, 1)) * fs.N(1, 1));
    };
    const cplx sig12_0 = bilin12(frame.samples.front());
    const cplx sig2b_0 = bilin2bar(frame.samples.front());
    frame_invariants& inv = frame.inv;
    inv.min_abs_detY = std::numeric_limits<double>::infinity();
    inv.min_transverse_imM = std::numeric_limits<double>::infinity();
    auto audit = [&](const frame_sample& fs) {
        const cplx sig12 = bilin12(fs);
        const cplx sig2b = bilin2bar(fs);
        inv.sig12_drift =
            std::max(inv.sig12_drift, std::abs(sig12 - sig12_0));
        inv.sig2bar_drift =
            std::max(inv.sig2bar_drift, std::abs(sig2b - sig2b_0));
        inv.msym_max = std::max(
            inv.msym_max, (fs.M - fs.M.transpose()).norm());
        const Vec2c mv = fs.M * fs.ydot.cast<cplx>();
        inv.mydot_gap = std::max(
            inv.mydot_gap,
            std::sqrt(std::norm(mv[0] - fs.pdot[0]) +
                      std::norm(mv[1] - fs.pdot[1])));
        const Vec2 nh = Vec2(-fs.ydot[1], fs.ydot[0]).normalized();
        const double tr_imM =
            nh[0] * fs.M(0, 0).imag() * nh[0] +
            2.0 * nh[0] * fs.M(0, 1).imag() * nh[1] +
            nh[1] * fs.M(1, 1).imag() * nh[1];
        inv.min_transverse_imM = std::min(inv.min_transverse_imM, tr_imM);
        inv.min_abs_detY = std::min(inv.min_abs_detY, std::abs(fs.detY));
    };
    for (const auto& fs : frame.samples) audit(fs);
    audit(frame.terminal);
    inv.m_period_gap = (frame.terminal.M - frame.samples.front().M).norm();

    if (inv.min_abs_detY < opt.d_min)
        throw accuracy_error("det Y fell below the caustic floor d_min");
    if (inv.min_transverse_imM < opt.p_min)
        throw accuracy_error(
            "transverse Im M fell below the positivity floor p_min");
    if (inv.sig12_drift > opt.tol_frame ||
        inv.sig2bar_drift > opt.tol_frame)
        throw accuracy_error("symplectic pairing drift exceeds tol_frame");
    return frame;
}

frame_sample frame_propagator::sample_at(const beam_frame& frame,
                                         double t) const {
    const Eigen::VectorXd y = frame.sol.eval(t);
    frame_sample fs = decode(t, y);
    fs.arg_detY = frame.arg_detY_at(t, fs.detY);
    return fs;
}

}  // namespace blochbeam
