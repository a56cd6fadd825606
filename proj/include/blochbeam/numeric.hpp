#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "blochbeam/errors.hpp"

namespace blochbeam {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat2c = Eigen::Matrix2cd;
using Vec2c = Eigen::Vector2cd;

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Locale-independent shortest-faithful decimal rendering (17 significant
// digits covers every double).
inline std::string format_g17(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double wrap_to_pi(double a) {
    a = std::fmod(a + M_PI, two_pi);
    if (a < 0) a += two_pi;
    return a - M_PI;
}

// Quadrature of a periodic function sampled uniformly over one full period
// (spectrally accurate for analytic integrands).
inline double periodic_trapezoid(const std::vector<double>& f, double period) {
    if (f.empty()) throw input_error("periodic_trapezoid: empty sample set");
    double s = 0.0;
    for (double v : f) s += v;
    return s * period / static_cast<double>(f.size());
}

// Continuity lift of a raw angle sequence: each step is moved into
// (-pi, pi] relative to its predecessor.
inline std::vector<double> unwrap_angles(const std::vector<double>& raw) {
    std::vector<double> out;
    out.reserve(raw.size());
    if (raw.empty()) return out;
    out.push_back(raw[0]);
    for (std::size_t i = 1; i < raw.size(); ++i) {
        out.push_back(out.back() + wrap_to_pi(raw[i] - out.back()));
    }
    return out;
}

// Least-squares slope of log(y) against log(x).
inline double fit_loglog_slope(const std::vector<double>& x,
                               const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw input_error("fit_loglog_slope: need at least two matched points");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw input_error("fit_loglog_slope: nonpositive sample");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300)
        throw input_error("fit_loglog_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

// Brent root bracketing solve on [a, b] with f(a) f(b) <= 0.
template <class F>
double brent_root(F&& f, double a, double b, double xtol = 1e-14,
                  int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0)
        throw input_error("brent_root: endpoints do not bracket a root");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() *
                               std::abs(b) + 0.5 * xtol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) return b;
        if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
            d = m; e = m;
        } else {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q),
                                   std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = m; e = m;
            }
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0 ? tol : -tol);
        fb = f(b);
        if ((fb > 0) == (fc > 0)) { c = a; fc = fa; e = d = b - a; }
    }
    throw accuracy_error("brent_root: no convergence");
}

}  // namespace blochbeam
