#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "blochbeam/errors.hpp"

namespace blochbeam {

// Explicit Dormand-Prince 5(4) pair with the classic quartic dense-output
// interpolant, proportional step control, and one-directional event location
// on the dense output.

struct ode_options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 1e-4;
    double h_max = 1.0;
    std::size_t max_steps = 2000000;
};

using rhs_fn =
    std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;
using event_fn = std::function<double(double, const Eigen::VectorXd&)>;

struct dense_segment {
    double t0 = 0.0;
    double h = 0.0;
    Eigen::VectorXd y0;
    Eigen::MatrixXd Q;  // n x 4 interpolation coefficients

    Eigen::VectorXd eval(double t) const {
        const double x = (t - t0) / h;
        Eigen::Vector4d p;
        p[0] = x;
        p[1] = x * p[0];
        p[2] = x * p[1];
        p[3] = x * p[2];
        return y0 + h * (Q * p);
    }
};

// Callback invoked after each accepted step; returning false aborts the
// integration with an accuracy error.
using step_observer =
    std::function<bool(const dense_segment&, double t1,
                       const Eigen::VectorXd& y1)>;

struct ode_solution {
    std::vector<dense_segment> segments;
    double t_begin = 0.0;
    double t_end = 0.0;
    Eigen::VectorXd y_end;

    Eigen::VectorXd eval(double t) const {
        if (segments.empty())
            throw accuracy_error("ode_solution: empty dense output");
        if (t <= segments.front().t0) return segments.front().eval(t);
        // Binary search for the segment containing t.
        std::size_t lo = 0, hi = segments.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi + 1) / 2;
            if (segments[mid].t0 <= t) lo = mid; else hi = mid - 1;
        }
        return segments[lo].eval(t);
    }
};

namespace detail {

struct dopri_tableau {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

// Dense-output matrix: columns multiply x, x^2, x^3, x^4 contributions of
// the seven stages (Shampine interpolant for the 5(4) pair).
inline const Eigen::Matrix<double, 7, 4>& dense_P() {
    static const Eigen::Matrix<double, 7, 4> P = [] {
        Eigen::Matrix<double, 7, 4> m;
        m << 1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
            -12715105075.0 / 11282082432.0,
            0.0, 0.0, 0.0, 0.0,
            0.0, 131558114200.0 / 32700410799.0,
            -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0,
            0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
            -10690763975.0 / 1880347072.0,
            0.0, 127303824393.0 / 49829197408.0,
            -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0,
            0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
            -1453857185.0 / 822651844.0,
            0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
            69997945.0 / 29380423.0;
        return m;
    }();
    return P;
}

}  // namespace detail

class dopri5 {
public:
    explicit dopri5(rhs_fn f) : f_(std::move(f)) {}

    // Integrate from (t0, y0) to t1 > t0, recording dense segments.
    ode_solution integrate(double t0, const Eigen::VectorXd& y0, double t1,
                           const ode_options& opt,
                           const step_observer& observer = nullptr) const {
        ode_solution out;
        out.t_begin = t0;
        run(t0, y0, t1, opt, observer, nullptr, &out);
        return out;
    }

    struct event_result {
        bool found = false;
        double t_event = 0.0;
        Eigen::VectorXd y_event;
        ode_solution sol;  // dense output over [t0, t_event or t_max]
    };

    // Integrate and stop at the first upward zero crossing of `g` occurring
    // at t > t_watch_from (crossings before that are ignored).
    event_result integrate_until_event(double t0, const Eigen::VectorXd& y0,
                                       double t_watch_from, double t_max,
                                       const event_fn& g,
                                       const ode_options& opt,
                                       const step_observer& observer =
                                           nullptr) const {
        event_result res;
        res.sol.t_begin = t0;
        event_state ev;
        ev.g = &g;
        ev.watch_from = t_watch_from;
        run(t0, y0, t_max, opt, observer, &ev, &res.sol);
        res.found = ev.found;
        if (ev.found) {
            res.t_event = ev.t_hit;
            res.y_event = res.sol.segments.back().eval(ev.t_hit);
            res.sol.t_end = ev.t_hit;
            res.sol.y_end = res.y_event;
        }
        return res;
    }

private:
    struct event_state {
        const event_fn* g = nullptr;
        double watch_from = 0.0;
        double g_prev = 0.0;
        bool have_prev = false;
        bool found = false;
        double t_hit = 0.0;
    };

    void run(double t0, const Eigen::VectorXd& y0, double t1,
             const ode_options& opt, const step_observer& observer,
             event_state* ev, ode_solution* out) const {
        using T = detail::dopri_tableau;
        const auto n = y0.size();
        Eigen::VectorXd y = y0;
        double t = t0;
        Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
        Eigen::VectorXd ytmp(n), y_new(n), err(n), scale(n);
        f_(t, y, k1);
        double h = std::min(opt.h_init, t1 - t0);
        if (!(h > 0)) throw input_error("dopri5: empty integration interval");

        for (std::size_t step = 0; step < opt.max_steps; ++step) {
            if (t >= t1) break;
            h = std::min(h, t1 - t);
            bool accepted = false;
            while (!accepted) {
                ytmp = y + h * T::a21 * k1;
                f_(t + T::c2 * h, ytmp, k2);
                ytmp = y + h * (T::a31 * k1 + T::a32 * k2);
                f_(t + T::c3 * h, ytmp, k3);
                ytmp = y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
                f_(t + T::c4 * h, ytmp, k4);
                ytmp = y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 +
                                T::a54 * k4);
                f_(t + T::c5 * h, ytmp, k5);
                ytmp = y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 +
                                T::a64 * k4 + T::a65 * k5);
                f_(t + h, ytmp, k6);
                y_new = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 +
                                 T::b5 * k5 + T::b6 * k6);
                f_(t + h, y_new, k7);
                err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 +
                           T::e6 * k6 + T::e7 * k7);
                double err_norm = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double sc =
                        opt.atol + opt.rtol *
                                       std::max(std::abs(y[i]),
                                                std::abs(y_new[i]));
                    const double q = err[i] / sc;
                    err_norm += q * q;
                }
                err_norm = std::sqrt(err_norm / static_cast<double>(n));
                if (err_norm <= 1.0) {
                    accepted = true;
                    dense_segment seg;
                    seg.t0 = t;
                    seg.h = h;
                    seg.y0 = y;
                    Eigen::Matrix<double, Eigen::Dynamic, 7> K(n, 7);
                    K.col(0) = k1; K.col(1) = k2; K.col(2) = k3;
                    K.col(3) = k4; K.col(4) = k5; K.col(5) = k6;
                    K.col(6) = k7;
                    seg.Q = K * detail::dense_P();
                    const double t_new = t + h;
                    if (out) out->segments.push_back(seg);
                    if (observer && !observer(seg, t_new, y_new))
                        throw accuracy_error(
                            "dopri5: step observer rejected the solution");
                    if (ev && locate_event(*ev, seg, t, t_new)) {
                        if (out) {
                            out->t_end = ev->t_hit;
                            out->y_end = seg.eval(ev->t_hit);
                        }
                        return;
                    }
                    t = t_new;
                    y.swap(y_new);
                    k1.swap(k7);  // first-same-as-last
                    const double grow =
                        (err_norm == 0.0)
                            ? 10.0
                            : 0.9 * std::pow(err_norm, -0.2);
                    h = std::min(opt.h_max,
                                 h * std::clamp(grow, 0.2, 10.0));
                } else {
                    h *= std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.9);
                    if (h < 1e-15)
                        throw accuracy_error("dopri5: step size underflow");
                }
            }
        }
        if (t < t1 && !(ev && ev->found))
            throw accuracy_error("dopri5: max step count exceeded");
        if (out) {
            out->t_end = t;
            out->y_end = y;
        }
    }

    bool locate_event(event_state& ev, const dense_segment& seg, double ta,
                      double tb) const {
        const auto& g = *ev.g;
        if (tb <= ev.watch_from) return false;
        const double lo = std::max(ta, ev.watch_from);
        double g_lo = ev.have_prev && lo == ta ? ev.g_prev
                                               : g(lo, seg.eval(lo));
        const double g_hi = g(tb, seg.eval(tb));
        ev.g_prev = g_hi;
        ev.have_prev = true;
        if (g_lo < 0.0 && g_hi >= 0.0) {
            // Bisection on the dense interpolant (smooth, cheap).
            double a = lo, b = tb;
            for (int it = 0; it < 100 && (b - a) > 1e-14 * std::max(1.0, b);
                 ++it) {
                const double mid = 0.5 * (a + b);
                if (g(mid, seg.eval(mid)) < 0.0) a = mid; else b = mid;
            }
            ev.found = true;
            ev.t_hit = 0.5 * (a + b);
            return true;
        }
        return false;
    }

    rhs_fn f_;
};

}  // namespace blochbeam
