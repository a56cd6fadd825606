#include <cmath>

#include "blochbeam/numeric.hpp"
#include "blochbeam/ode.hpp"
#include "doctest.h"

using namespace blochbeam;

namespace {

void oscillator(double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = -y[0];
}

}  // namespace

TEST_CASE("dopri5 integrates the harmonic oscillator over a full turn") {
    dopri5 stepper(oscillator);
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.0;
    ode_options opt;
    opt.rtol = 1e-11;
    opt.atol = 1e-13;
    const ode_solution sol = stepper.integrate(0.0, y0, two_pi, opt);
    const Eigen::VectorXd yT = sol.eval(two_pi);
    CHECK(yT[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(yT[1]) < 1e-10);

    // Dense output against the closed form at off-grid times.
    for (double t : {0.3, 1.7, 2.9, 4.4, 6.1}) {
        const Eigen::VectorXd y = sol.eval(t);
        CHECK(y[0] == doctest::Approx(std::cos(t)).epsilon(1e-9));
        CHECK(y[1] == doctest::Approx(-std::sin(t)).epsilon(1e-9));
    }
}

TEST_CASE("dopri5 meets a tighter tolerance with a smaller error") {
    dopri5 stepper(oscillator);
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.0;
    auto err_at = [&](double rtol) {
        ode_options opt;
        opt.rtol = rtol;
        opt.atol = 1e-14;
        const Eigen::VectorXd yT =
            stepper.integrate(0.0, y0, two_pi, opt).eval(two_pi);
        return std::hypot(yT[0] - 1.0, yT[1]);
    };
    const double loose = err_at(1e-6);
    const double tight = err_at(1e-11);
    CHECK(tight < loose);
    CHECK(tight < 1e-9);
}

TEST_CASE("event location finds the section crossing") {
    dopri5 stepper(oscillator);
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.0;
    ode_options opt;
    opt.rtol = 1e-11;
    opt.atol = 1e-13;
    // y[1] = -sin t vanishes at t = 0 and t = pi; the watch-from guard must
    // skip the start and report the first crossing after it.
    auto section = [](double, const Eigen::VectorXd& y) { return y[1]; };
    const auto ev =
        stepper.integrate_until_event(0.0, y0, 1.0, 10.0, section, opt);
    REQUIRE(ev.found);
    CHECK(ev.t_event == doctest::Approx(M_PI).epsilon(1e-10));
    CHECK(ev.y_event[0] == doctest::Approx(-1.0).epsilon(1e-9));
    // Dense output covers the whole integration.
    CHECK(ev.sol.eval(0.5)[0] == doctest::Approx(std::cos(0.5)).epsilon(1e-9));
}

TEST_CASE("event search reports absence within the horizon") {
    dopri5 stepper(oscillator);
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.0;
    ode_options opt;
    auto section = [](double, const Eigen::VectorXd& y) {
        return y[0] - 2.0;  // never reached: |y| = 1
    };
    const auto ev =
        stepper.integrate_until_event(0.0, y0, 0.1, 5.0, section, opt);
    CHECK_FALSE(ev.found);
}

TEST_CASE("dense output matches the endpoints exactly") {
    dopri5 stepper(oscillator);
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.0;
    ode_options opt;
    opt.rtol = 1e-11;
    opt.atol = 1e-13;
    const ode_solution sol = stepper.integrate(0.0, y0, 1.0, opt);
    CHECK((sol.eval(0.0) - y0).norm() < 1e-13);
    CHECK((sol.eval(1.0) - sol.y_end).norm() < 1e-12);
    CHECK(sol.t_begin == 0.0);
    CHECK(sol.t_end == 1.0);
    ode_solution empty;
    CHECK_THROWS_AS(empty.eval(0.5), accuracy_error);
}
