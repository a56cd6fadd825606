#include "blochbeam/orbit.hpp"

#include <cmath>
#include <sstream>

namespace blochbeam {

namespace {

int orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double v = (b[0] - a[0]) * (c[1] - a[1]) -
                     (b[1] - a[1]) * (c[0] - a[0]);
    if (v > 1e-15) return 1;
    if (v < -1e-15) return -1;
    return 0;
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c,
                    const Vec2& d) {
    const int o1 = orient(a, b, c), o2 = orient(a, b, d);
    const int o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

}  // namespace

Vec2 orbit_tracer::find_seed(const orbit_params& par) const {
    const Vec2 dir = par.seed_dir.normalized();
    auto g = [&](double t) {
        const Vec2 k2d = t * dir;
        return solver_.energy(Vec3(k2d[0], k2d[1], par.k3)) - par.E0;
    };
    const int nscan = 128;
    double t_prev = par.seed_max / nscan;
    double g_prev = g(t_prev);
    for (int i = 2; i <= nscan; ++i) {
        const double t = par.seed_max * i / nscan;
        const double gi = g(t);
        if (g_prev == 0.0) return t_prev * dir;
        if (g_prev * gi < 0.0) {
            const double root = brent_root(g, t_prev, t, 1e-14);
            return root * dir;
        }
        t_prev = t;
        g_prev = gi;
    }
    std::ostringstream os;
    os << "no closed orbit seed: the ray (" << dir[0] << ", " << dir[1]
       << ") never meets the energy level " << par.E0 << " within radius "
       << par.seed_max;
    throw assumption_error(os.str());
}

orbit_data orbit_tracer::trace(const orbit_params& par) const {
    orbit_data orb;
    orb.E0 = par.E0;
    orb.k3 = par.k3;
    orb.mu = par.mu;
    orb.seed = find_seed(par);

    auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const band_rates r =
            solver_.rates(Vec3(y[0], y[1], par.k3));
        dy.resize(2);
        dy[0] = -par.mu * r.grad[1];
        dy[1] = par.mu * r.grad[0];
    };
    dopri5 stepper(rhs);

    Eigen::VectorXd y0(2);
    y0 << orb.seed[0], orb.seed[1];
    Eigen::VectorXd v0(2);
    rhs(0.0, y0, v0);
    if (v0.norm() < 1e-14)
        throw assumption_error(
            "orbit seed is a critical point of the band; no transverse flow");
    const Vec2 nhat = Vec2(v0[0], v0[1]).normalized();

    auto section = [&](double, const Eigen::VectorXd& y) {
        return nhat[0] * (y[0] - orb.seed[0]) + nhat[1] * (y[1] - orb.seed[1]);
    };

    ode_options opt;
    opt.rtol = par.rtol;
    opt.atol = par.atol;
    opt.h_max = 0.5;
    auto ev = stepper.integrate_until_event(0.0, y0, par.t_guard, par.t_max,
                                            section, opt);
    if (!ev.found) {
        std::ostringstream os;
        os << "orbit did not close within time " << par.t_max
           << "; the level set at E0 = " << par.E0
           << " may not be a closed curve";
        throw assumption_error(os.str());
    }
    orb.T = ev.t_event;
    orb.closure_error = (Vec2(ev.y_event[0], ev.y_event[1]) - orb.seed).norm();
    if (orb.closure_error > par.tol_closure) {
        std::ostringstream os;
        os << "orbit closure error " << orb.closure_error << " exceeds "
           << par.tol_closure
           << "; raise t_guard if the section was crossed early";
        throw accuracy_error(os.str());
    }
    orb.flow = std::move(ev.sol);

    orb.J = par.samples;
    orb.s.resize(orb.J);
    orb.k.resize(orb.J);
    orb.kdot.resize(orb.J);
    for (int j = 0; j < orb.J; ++j) {
        orb.s[j] = orb.T * j / orb.J;
        orb.k[j] = orb.k_at(orb.s[j]);
        const band_rates r =
            solver_.rates(Vec3(orb.k[j][0], orb.k[j][1], par.k3));
        orb.kdot[j] = Vec2(-par.mu * r.grad[1], par.mu * r.grad[0]);
    }
    check_simple(orb.k);

    const double raw = signed_area(orb);
    orb.orientation = (raw >= 0.0) ? 1.0 : -1.0;
    orb.area = std::abs(raw);
    return orb;
}

double orbit_tracer::signed_area(const orbit_data& orb) {
    // Closed integral k1 dk2 via the periodic trapezoid rule with analytic
    // velocities: spectrally accurate, unlike a polygon shoelace.
    std::vector<double> f(orb.k.size());
    for (std::size_t j = 0; j < orb.k.size(); ++j)
        f[j] = orb.k[j][0] * orb.kdot[j][1];
    return periodic_trapezoid(f, orb.T);
}

double orbit_tracer::lifted_action(const orbit_data& orb, double p2_const,
                                   double /*c*/) {
    // Lift of the orbit to position-momentum variables: p1 = k1, p2 held at
    // p2_const, with ydot = (E_1, E_2) recovered from the flow velocity.
    // The constant translation c of y2 never enters a closed line integral,
    // and the p2_const term integrates to the closure error.
    std::vector<double> f(orb.k.size());
    for (std::size_t j = 0; j < orb.k.size(); ++j) {
        const double yd1 = orb.kdot[j][1] / orb.mu;
        const double yd2 = -orb.kdot[j][0] / orb.mu;
        f[j] = orb.k[j][0] * yd1 + p2_const * yd2;
    }
    return periodic_trapezoid(f, orb.T);
}

void orbit_tracer::check_simple(const std::vector<Vec2>& pts) const {
    const std::size_t J = pts.size();
    for (std::size_t i = 0; i < J; ++i) {
        const Vec2& a = pts[i];
        const Vec2& b = pts[(i + 1) % J];
        for (std::size_t j = i + 2; j < J; ++j) {
            if (i == 0 && j == J - 1) continue;  // adjacent through the seam
            const Vec2& c = pts[j];
            const Vec2& d = pts[(j + 1) % J];
            if (segments_cross(a, b, c, d))
                throw assumption_error(
                    "orbit self-intersects; the level curve is not simple");
        }
    }
}

}  // namespace blochbeam
