#include "blochbeam/quasimode.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "blochbeam/errors.hpp"
#include "blochbeam/parallel.hpp"

namespace blochbeam {

namespace {

// Plain bilinear dot (no conjugation) of a complex and a real 2-vector.
cplx bdot(const Vec2c& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

}  // namespace

quasimode_builder::quasimode_builder(const bloch_solver& solver,
                                     const orbit_data& orbit,
                                     const beam_frame& frame)
    : solver_(solver), orbit_(orbit), frame_(frame), prop_(solver, orbit) {}

foot_jet quasimode_builder::jet_at(double s) const {
  const Eigen::VectorXd y = frame_.sol.eval(s);
  foot_jet fj;
  fj.s = s;
  fj.khat = Vec2(y[0], y[1]);
  const Mat2c Y = frame_propagator::state_Y(y);
  const Mat2c N = frame_propagator::state_N(y);
  fj.M = N * Y.inverse();

  const double mu = orbit_.mu;
  const band_rates r =
      solver_.rates(Vec3(fj.khat[0], fj.khat[1], orbit_.k3), mu);
  fj.C = r.hess.topLeftCorner<2, 2>();
  fj.c = r.state.c;
  fj.ydot = Vec2(r.grad[0], r.grad[1]);
  const Vec2 kd(-mu * r.grad[1], mu * r.grad[0]);
  fj.ydd = fj.C * kd;

  Mat2 A = Mat2::Zero();
  A(0, 0) = mu * mu * fj.C(1, 1);
  Mat2 B = Mat2::Zero();
  B(0, 0) = mu * fj.C(0, 1);
  B(1, 0) = mu * fj.C(1, 1);
  fj.Mdot = -(A.cast<cplx>() + B.transpose().cast<cplx>() * fj.M +
              fj.M * B.cast<cplx>() + fj.M * fj.C.cast<cplx>() * fj.M);
  fj.rho = (fj.C.cast<cplx>() * fj.M).trace() + B.trace();
  fj.amp_fac = 0.5 * fj.rho + cplx(0.0, r.berry_rate + mu * r.wr);

  // Closed-form transported amplitude relative to the seed.
  const cplx detY = Y.determinant();
  const cplx det0 = frame_.samples.front().detY;
  const double arg = frame_.arg_detY_at(s, detY);
  const double arg0 = frame_.samples.front().arg_detY;
  const double theta_b = y[18];
  const double theta_rw = y[19];
  fj.amp = std::sqrt(std::abs(det0) / std::abs(detY)) *
           std::exp(cplx(0.0, -(0.5 * (arg - arg0) + theta_b + theta_rw)));

  const double a = fj.M(0, 0).imag();
  const double b = 0.5 * (fj.M(0, 1).imag() + fj.M(1, 0).imag());
  const double d = fj.M(1, 1).imag();
  fj.lambda_min =
      0.5 * ((a + d) - std::sqrt((a - d) * (a - d) + 4.0 * b * b));
  return fj;
}

double quasimode_builder::band_mismatch(const foot_jet& fj, double d) const {
  const Vec2 nh = Vec2(-fj.ydot[1], fj.ydot[0]).normalized();
  const Vec2 Delta = d * nh;
  const double v2 = fj.ydot.squaredNorm();
  Vec2c Khat = fj.khat.cast<cplx>() + fj.M * Delta.cast<cplx>();
  Khat[1] += orbit_.mu * Delta[0];
  const Vec2c md = fj.Mdot * Delta.cast<cplx>();
  const cplx quad = Delta[0] * md[0] + Delta[1] * md[1];
  Khat += 0.5 * quad / v2 * fj.ydot.cast<cplx>();
  return std::abs(
      solver_.complex_band_energy(Khat, orbit_.k3, orbit_.E0, &fj.c) -
      orbit_.E0);
}

double quasimode_builder::eikonal_order(
    double s, const std::vector<double>& deltas) const {
  const foot_jet fj = jet_at(s);
  std::vector<double> g(deltas.size());
  double gmax = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    g[i] = std::max(band_mismatch(fj, deltas[i]),
                    band_mismatch(fj, -deltas[i]));
    gmax = std::max(gmax, g[i]);
  }
  // All mismatches at rounding level: the expansion is exact here and no
  // finite order can be fitted.
  if (gmax <= 1e-13) return std::numeric_limits<double>::infinity();
  return fit_loglog_slope(deltas, g);
}

double quasimode_builder::min_curvature_radius() const {
  if (r_curv_ >= 0.0) return r_curv_;
  const int J = 128;
  std::vector<double> radii(J, std::numeric_limits<double>::infinity());
  parallel_for(J, [&](std::size_t j) {
    const double t = orbit_.T * static_cast<double>(j) / J;
    const Vec2 k2d = orbit_.k_at(t);
    const band_rates r =
        solver_.rates(Vec3(k2d[0], k2d[1], orbit_.k3));
    const Vec2 yd(r.grad[0], r.grad[1]);
    const Vec2 kd(-orbit_.mu * r.grad[1], orbit_.mu * r.grad[0]);
    const Vec2 ydd = r.hess.topLeftCorner<2, 2>() * kd;
    const double cross = std::abs(yd[0] * ydd[1] - yd[1] * ydd[0]);
    if (cross > 1e-14)
      radii[j] = std::pow(yd.norm(), 3) / cross;
  });
  r_curv_ = *std::min_element(radii.begin(), radii.end());
  if (!(r_curv_ > 0.0) || !std::isfinite(r_curv_))
    throw assumption_error("orbit curvature radius is degenerate");
  return r_curv_;
}

residual_report quasimode_builder::residual_scaling(
    const std::vector<double>& eps_list, const quasimode_opts& opt) const {
  if (eps_list.empty()) throw input_error("residual sweep needs field strengths");
  if (opt.feet < 4 || opt.offsets < 3)
    throw input_error("residual sweep needs at least 4 feet and 3 offsets");
  residual_report rep;
  rep.tube_cap = 0.5 * min_curvature_radius();
  rep.min_transverse_curv = std::numeric_limits<double>::infinity();

  // The jets do not depend on the field strength; build them once.
  std::vector<foot_jet> jets(static_cast<std::size_t>(opt.feet));
  parallel_for(jets.size(), [&](std::size_t j) {
    jets[j] = jet_at(orbit_.T * static_cast<double>(j) / opt.feet);
  }, static_cast<unsigned>(opt.threads));

  for (const double eps : eps_list) {
    if (!(eps > 0.0)) throw input_error("field strengths must be positive");
    const double rad = std::min(opt.tube_factor * std::sqrt(eps), rep.tube_cap);
    std::vector<double> foot_sup(jets.size(), 0.0);
    std::vector<double> foot_curv(jets.size(),
                                  std::numeric_limits<double>::infinity());
    parallel_for(jets.size(), [&](std::size_t j) {
      const foot_jet& fj = jets[j];
      const Vec2 nh = Vec2(-fj.ydot[1], fj.ydot[0]).normalized();
      const double v2 = fj.ydot.squaredNorm();
      const cplx f0 = fj.amp;
      const cplx f0p = -fj.amp_fac * f0;
      for (int q = 0; q < opt.offsets; ++q) {
        const double d = -rad + 2.0 * rad * q / (opt.offsets - 1);
        if (std::abs(d) < 1e-12) continue;
        const Vec2 Delta = d * nh;
        Vec2c Khat = fj.khat.cast<cplx>() + fj.M * Delta.cast<cplx>();
        Khat[1] += orbit_.mu * Delta[0];
        const Vec2c md = fj.Mdot * Delta.cast<cplx>();
        const cplx quad = Delta[0] * md[0] + Delta[1] * md[1];
        Khat += 0.5 * quad / v2 * fj.ydot.cast<cplx>();

        const cplx G =
            solver_.complex_band_energy(Khat, orbit_.k3, orbit_.E0, &fj.c) -
            orbit_.E0;
        const double denom = v2 - Delta.dot(fj.ydd);
        if (denom < 0.3 * v2) continue;  // foot chart invalid this far out
        const Vec2c gradE =
            fj.ydot.cast<cplx>() +
            fj.C.cast<cplx>() * (Khat - fj.khat.cast<cplx>());
        const cplx L = bdot(gradE, fj.ydot) / denom * f0p + fj.amp_fac * f0;
        const Vec2c mdl = fj.M * Delta.cast<cplx>();
        const double imphi =
            0.5 * (Delta[0] * mdl[0] + Delta[1] * mdl[1]).imag();
        foot_curv[j] = std::min(foot_curv[j], 2.0 * imphi / (d * d));
        const double r = (std::abs(f0 * G) + eps * std::abs(L)) *
                         std::exp(-imphi / eps);
        foot_sup[j] = std::max(foot_sup[j], r);
      }
    }, static_cast<unsigned>(opt.threads));
    residual_point pt;
    pt.eps = eps;
    pt.sup_residual = *std::max_element(foot_sup.begin(), foot_sup.end());
    rep.points.push_back(pt);
    rep.min_transverse_curv =
        std::min(rep.min_transverse_curv,
                 *std::min_element(foot_curv.begin(), foot_curv.end()));
  }

  std::vector<double> xs, ys;
  for (const auto& pt : rep.points) {
    xs.push_back(pt.eps);
    ys.push_back(pt.sup_residual);
  }
  rep.slope = fit_loglog_slope(xs, ys);
  return rep;
}

transport_report quasimode_builder::transport_consistency(int substeps) const {
  if (substeps < 1) throw input_error("transport check needs substeps >= 1");
  const int J = orbit_.J;
  const int nstep = J * substeps;
  const double h = orbit_.T / nstep;

  // Decay factors A(t) on the half-step grid, computed in parallel.
  const int ngrid = 2 * nstep + 1;
  std::vector<cplx> Agrid(static_cast<std::size_t>(ngrid));
  parallel_for(Agrid.size(), [&](std::size_t q) {
    const double t = std::min(0.5 * h * static_cast<double>(q), orbit_.T);
    const Eigen::VectorXd y = frame_.sol.eval(t);
    const Mat2c Y = frame_propagator::state_Y(y);
    const Mat2c N = frame_propagator::state_N(y);
    const Mat2c M = N * Y.inverse();
    const double mu = orbit_.mu;
    const band_rates r = solver_.rates(Vec3(y[0], y[1], orbit_.k3), mu);
    const Mat2 C = r.hess.topLeftCorner<2, 2>();
    Mat2 B = Mat2::Zero();
    B(0, 0) = mu * C(0, 1);
    B(1, 0) = mu * C(1, 1);
    const cplx rho = (C.cast<cplx>() * M).trace() + B.trace();
    Agrid[q] = 0.5 * rho + cplx(0.0, r.berry_rate + mu * r.wr);
  });

  auto closed_form = [&](const frame_sample& fs) {
    const cplx det0 = frame_.samples.front().detY;
    const double arg0 = frame_.samples.front().arg_detY;
    return std::sqrt(std::abs(det0) / std::abs(fs.detY)) *
           std::exp(cplx(0.0, -(0.5 * (fs.arg_detY - arg0) + fs.theta_b +
                                fs.theta_rw)));
  };

  transport_report rep;
  cplx f = closed_form(frame_.samples.front());
  for (int i = 0; i < nstep; ++i) {
    const cplx A0 = Agrid[static_cast<std::size_t>(2 * i)];
    const cplx Am = Agrid[static_cast<std::size_t>(2 * i + 1)];
    const cplx A1 = Agrid[static_cast<std::size_t>(2 * i + 2)];
    const cplx k1 = -A0 * f;
    const cplx k2 = -Am * (f + 0.5 * h * k1);
    const cplx k3 = -Am * (f + 0.5 * h * k2);
    const cplx k4 = -A1 * (f + h * k3);
    f += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((i + 1) % substeps == 0) {
      const int j = (i + 1) / substeps;
      const frame_sample& fs =
          (j == J) ? frame_.terminal : frame_.samples[static_cast<std::size_t>(j)];
      rep.max_route_gap =
          std::max(rep.max_route_gap, std::abs(f - closed_form(fs)));
    }
  }

  const frame_sample& fT = frame_.terminal;
  const cplx fT_closed = closed_form(fT);
  const cplx expected = std::exp(
      cplx(0.0, -(M_PI * frame_.maslov + frame_.theta_b_total +
                  frame_.theta_rw_total)));
  rep.monodromy_gap = std::abs(fT_closed - expected);
  rep.det_ratio_gap = std::abs(
      std::abs(fT.detY) / std::abs(frame_.samples.front().detY) - 1.0);
  rep.arg_winding_gap = std::abs(
      (fT.arg_detY - frame_.samples.front().arg_detY) - two_pi * frame_.maslov);
  return rep;
}

}  // namespace blochbeam
