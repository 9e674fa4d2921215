#include "ringbif/dynamics.hpp"

#include <cmath>

#include "ringbif/errors.hpp"
#include "ringbif/model.hpp"

namespace ringbif {

namespace {

using Vec = Eigen::VectorXd;
using Field = std::function<Vec(const Vec&)>;

struct StepResult {
  Vec y;
  double err;  // scaled error estimate (DP54)
};

Vec rk4_step(const Field& f, const Vec& y, double h) {
  const Vec k1 = f(y);
  const Vec k2 = f(y + 0.5 * h * k1);
  const Vec k3 = f(y + 0.5 * h * k2);
  const Vec k4 = f(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dormand-Prince 5(4) pair; returns the 5th-order solution and the scaled
// error of the embedded 4th-order one.
StepResult dp54_step(const Field& f, const Vec& y, double h, double tol) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                      b6 = 11.0 / 84;
  static const double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                      e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

  const Vec k1 = f(y);
  const Vec k2 = f(y + h * (a21 * k1));
  const Vec k3 = f(y + h * (a31 * k1 + a32 * k2));
  const Vec k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Vec k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Vec k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  const Vec y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Vec k7 = f(y5);
  const Vec y4 = y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

  double err2 = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sc = tol + tol * std::max(std::abs(y(i)), std::abs(y5(i)));
    const double e = (y5(i) - y4(i)) / sc;
    err2 += e * e;
  }
  return {y5, std::sqrt(err2 / y.size())};
}

}  // namespace

Trajectory integrate_ode(const Field& field, const Vec& y0, const IntegratorConfig& icfg,
                         int config_dim) {
  if (!(icfg.t_end > 0.0)) throw std::invalid_argument("IntegratorConfig: t_end must be > 0");
  if (icfg.method == Method::RK4Fixed && !(icfg.dt > 0.0))
    throw std::invalid_argument("IntegratorConfig: dt must be > 0");
  if (icfg.method == Method::DP54Adaptive && !(icfg.tol > 1e-14 && icfg.tol < 1e-3))
    throw std::invalid_argument("IntegratorConfig: tol must lie in (1e-14, 1e-3)");

  Trajectory tr;
  tr.t.push_back(0.0);
  tr.states.push_back(y0);

  Vec y = y0;
  double t = 0.0;
  double h = icfg.method == Method::RK4Fixed ? icfg.dt : std::min(icfg.dt, icfg.t_end * 0.01);
  long accepted = 0;

  auto check_collision = [&](double tc) {
    const PairDistance pd = min_pair_distance(y.head(config_dim));
    if (pd.dist < icfg.collision_eps) {
      tr.collided = true;
      tr.t_collision = tc;
      tr.collision_i = pd.i;
      tr.collision_j = pd.j;
      return true;
    }
    return false;
  };

  for (long step = 0; step < icfg.max_steps && t < icfg.t_end; ++step) {
    const double hmax = icfg.t_end - t;
    if (icfg.method == Method::RK4Fixed) {
      const double hs = std::min(h, hmax);
      y = rk4_step(field, y, hs);
      t += hs;
    } else {
      double hs = std::min(h, hmax);
      StepResult r = dp54_step(field, y, hs, icfg.tol);
      while (r.err > 1.0 && hs > 1e-14) {
        hs *= std::max(0.2, 0.9 * std::pow(r.err, -0.2));
        r = dp54_step(field, y, hs, icfg.tol);
      }
      y = r.y;
      t += hs;
      const double fac = r.err > 0.0 ? 0.9 * std::pow(r.err, -0.2) : 5.0;
      h = hs * std::min(5.0, std::max(0.2, fac));
    }
    if (!y.allFinite()) {
      tr.collided = true;
      tr.t_collision = t;
      break;
    }
    ++accepted;
    // stored samples stay collision-free; the offending state is only flagged
    if (check_collision(t)) break;
    if (accepted % icfg.store_stride == 0 || t >= icfg.t_end) {
      tr.t.push_back(t);
      tr.states.push_back(y);
    }
  }
  return tr;
}

Trajectory integrate_vortex(const Vec& u0, const ProblemParams& p, const IntegratorConfig& icfg) {
  p.validate();
  if (p.mu == 0.0)
    throw UnsupportedParameterError("integrate_vortex: mu = 0 degenerates the central equation");
  require_collision_free(u0, icfg.collision_eps);

  Trajectory tr = integrate_ode([&p](const Vec& u) { return vortex_field(u, p); }, u0, icfg, p.dim());
  tr.n = p.n;
  tr.has_velocity = false;

  const Eigen::VectorXd kw = kappa_weights(p);
  const double V0 = potential(tr.states.front(), p);
  const double I0 = tr.states.front().dot(kw.asDiagonal() * tr.states.front());
  for (const Vec& u : tr.states) {
    tr.drift.potential = std::max(tr.drift.potential, std::abs(potential(u, p) - V0));
    tr.drift.kappa_norm = std::max(tr.drift.kappa_norm, std::abs(u.dot(kw.asDiagonal() * u) - I0));
  }
  return tr;
}

Trajectory integrate_filament_tw(const Vec& u0, const Vec& v0, const ProblemParams& p,
                                 const IntegratorConfig& icfg) {
  p.validate();
  if (p.mu == 0.0)
    throw UnsupportedParameterError("integrate_filament_tw: mu = 0 degenerates the central equation");
  require_collision_free(u0, icfg.collision_eps);
  const int d = p.dim();
  Vec y0(2 * d);
  y0 << u0, v0;

  Trajectory tr =
      integrate_ode([&p](const Vec& y) { return filament_tw_field(y, p); }, y0, icfg, d);
  tr.n = p.n;
  tr.has_velocity = true;

  const Eigen::VectorXd kw2 = kappa_weights(p).cwiseProduct(kappa_weights(p));
  auto energy = [&](const Vec& y) {
    const Vec v = y.tail(d);
    return 0.5 * v.dot(kw2.asDiagonal() * v) - potential(y.head(d), p);
  };
  const double V0 = potential(tr.states.front().head(d), p);
  const double E0 = energy(tr.states.front());
  for (const Vec& y : tr.states) {
    tr.drift.potential = std::max(tr.drift.potential, std::abs(potential(y.head(d), p) - V0));
    tr.drift.tw_energy = std::max(tr.drift.tw_energy, std::abs(energy(y) - E0));
  }
  return tr;
}

}  // namespace ringbif
