#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "ringbif/errors.hpp"
#include "ringbif/params.hpp"

// Physical model of the ring: potential, gradient, Hessian, vector fields and
// the Z~_n x S^1 group action. Positions are stored as flat real vectors
// (x0, y0, ..., xn, yn); complexification happens only in the symmetry layer.
// Evaluators are free function templates over the position scalar so they
// compose with Eigen expressions.

namespace ringbif {

using Config = Eigen::VectorXd;  // flat planar positions, element 0 central

inline constexpr double kCollisionTol = 1e-9;

// Counterclockwise symplectic generator.
inline Eigen::Matrix2d J2() {
  Eigen::Matrix2d J;
  J << 0.0, -1.0, 1.0, 0.0;
  return J;
}

inline Eigen::Matrix2d rot2(double theta) {
  Eigen::Matrix2d R;
  R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return R;
}

// Circulations kappa = (mu, 1, ..., 1) together with the per-element
// symplectic generator; the diagonal data of K and J.
struct CirculationStructure {
  Eigen::VectorXd kappa;

  static CirculationStructure from(const ProblemParams& p) {
    CirculationStructure c;
    c.kappa = Eigen::VectorXd::Ones(p.n + 1);
    c.kappa(0) = p.mu;
    return c;
  }
};

inline Eigen::VectorXd circulation_vector(const ProblemParams& p) {
  return CirculationStructure::from(p).kappa;
}

// Diagonal of the matrix K, one weight per real coordinate.
inline Eigen::VectorXd kappa_weights(const ProblemParams& p) {
  Eigen::VectorXd w(p.dim());
  for (int j = 0; j <= p.n; ++j) w.segment<2>(2 * j).setConstant(p.kappa(j));
  return w;
}

inline Config ring_equilibrium(const ProblemParams& p) {
  p.validate();
  Config u = Config::Zero(p.dim());
  for (int j = 1; j <= p.n; ++j) {
    const double a = j * p.zeta();
    u(2 * j) = std::cos(a);
    u(2 * j + 1) = std::sin(a);
  }
  return u;
}

// mathcal{J} applied per element; works for real and complexified coordinates.
template <typename Derived>
auto apply_J_all(const Eigen::MatrixBase<Derived>& u) {
  typename Derived::PlainObject out(u.rows());
  for (Eigen::Index j = 0; 2 * j < u.rows(); ++j) {
    out(2 * j) = -u(2 * j + 1);
    out(2 * j + 1) = u(2 * j);
  }
  return out;
}

struct PairDistance {
  double dist;
  int i, j;
};

template <typename Derived>
PairDistance min_pair_distance(const Eigen::MatrixBase<Derived>& u) {
  const int ne = static_cast<int>(u.rows() / 2);
  PairDistance best{std::numeric_limits<double>::infinity(), -1, -1};
  for (int i = 0; i < ne; ++i)
    for (int j = i + 1; j < ne; ++j) {
      const double dx = static_cast<double>(u(2 * j) - u(2 * i));
      const double dy = static_cast<double>(u(2 * j + 1) - u(2 * i + 1));
      const double d = std::hypot(dx, dy);
      if (d < best.dist) best = {d, i, j};
    }
  return best;
}

template <typename Derived>
void require_collision_free(const Eigen::MatrixBase<Derived>& u, double tol = kCollisionTol) {
  const PairDistance pd = min_pair_distance(u);
  if (pd.dist < tol) throw CollisionError(pd.i, pd.j, pd.dist);
}

// V(u) = (omega/2) u^T K u - sum_{i<j} kappa_i kappa_j ln|u_j - u_i|
template <typename Derived>
typename Derived::Scalar potential(const Eigen::MatrixBase<Derived>& u,
                                   const ProblemParams& p) {
  using Scalar = typename Derived::Scalar;
  using std::log;
  p.validate();
  require_collision_free(u);
  const double w = p.omega();
  Scalar v = Scalar(0);
  for (int j = 0; j <= p.n; ++j)
    v += Scalar(0.5 * w * p.kappa(j)) * (u(2 * j) * u(2 * j) + u(2 * j + 1) * u(2 * j + 1));
  for (int i = 0; i <= p.n; ++i)
    for (int j = i + 1; j <= p.n; ++j) {
      const Scalar dx = u(2 * j) - u(2 * i);
      const Scalar dy = u(2 * j + 1) - u(2 * i + 1);
      v -= Scalar(0.5 * p.kappa(i) * p.kappa(j)) * log(dx * dx + dy * dy);
    }
  return v;
}

template <typename Derived>
auto grad_potential(const Eigen::MatrixBase<Derived>& u, const ProblemParams& p) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  p.validate();
  require_collision_free(u);
  const double w = p.omega();
  Vec g = Vec::Zero(u.rows());
  for (int j = 0; j <= p.n; ++j) {
    g(2 * j) = Scalar(w * p.kappa(j)) * u(2 * j);
    g(2 * j + 1) = Scalar(w * p.kappa(j)) * u(2 * j + 1);
  }
  for (int i = 0; i <= p.n; ++i)
    for (int j = i + 1; j <= p.n; ++j) {
      const Scalar dx = u(2 * j) - u(2 * i);
      const Scalar dy = u(2 * j + 1) - u(2 * i + 1);
      const Scalar r2 = dx * dx + dy * dy;
      const Scalar c = Scalar(p.kappa(i) * p.kappa(j)) / r2;
      g(2 * j) -= c * dx;
      g(2 * j + 1) -= c * dy;
      g(2 * i) += c * dx;
      g(2 * i + 1) += c * dy;
    }
  return g;
}

template <typename Derived>
auto hess_potential(const Eigen::MatrixBase<Derived>& u, const ProblemParams& p) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
  p.validate();
  require_collision_free(u);
  const double w = p.omega();
  Mat H = Mat::Zero(u.rows(), u.rows());
  for (int j = 0; j <= p.n; ++j) {
    H(2 * j, 2 * j) = Scalar(w * p.kappa(j));
    H(2 * j + 1, 2 * j + 1) = Scalar(w * p.kappa(j));
  }
  for (int i = 0; i <= p.n; ++i)
    for (int j = i + 1; j <= p.n; ++j) {
      const Scalar dx = u(2 * j) - u(2 * i);
      const Scalar dy = u(2 * j + 1) - u(2 * i + 1);
      const Scalar r2 = dx * dx + dy * dy;
      // d^2/dr^2 of -kappa_i kappa_j ln|r| = kk (2 rhat rhat^T - I) / r^2
      Mat2 G;
      G(0, 0) = (Scalar(2) * dx * dx - r2) / (r2 * r2);
      G(1, 1) = (Scalar(2) * dy * dy - r2) / (r2 * r2);
      G(0, 1) = Scalar(2) * dx * dy / (r2 * r2);
      G(1, 0) = G(0, 1);
      G *= Scalar(p.kappa(i) * p.kappa(j));
      H.template block<2, 2>(2 * j, 2 * j) += G;
      H.template block<2, 2>(2 * i, 2 * i) += G;
      H.template block<2, 2>(2 * i, 2 * j) -= G;
      H.template block<2, 2>(2 * j, 2 * i) -= G;
    }
  return H;
}

// Rotating-frame vortex flow: K J u' = grad V(u), i.e. u' = -J K^{-1} grad V.
inline Config vortex_field(const Config& u, const ProblemParams& p) {
  if (p.mu == 0.0)
    throw UnsupportedParameterError("vortex_field: mu = 0 degenerates the central equation");
  const Eigen::VectorXd g = grad_potential(u, p);
  Config f(u.size());
  for (int j = 0; j <= p.n; ++j) {
    const double k = p.kappa(j);
    f(2 * j) = g(2 * j + 1) / k;   // -J (g/k): -J(a,b) = (b,-a)
    f(2 * j + 1) = -g(2 * j) / k;
  }
  return f;
}

// Traveling-wave filament equation K^2 u'' + 2 gamma K J u' = grad V(u) as a
// first-order field on (u, u'). The factor 2 on gamma follows the convention
// in which all closed-form frequency formulas are stated.
inline Eigen::VectorXd filament_tw_field(const Eigen::VectorXd& state, const ProblemParams& p) {
  if (p.mu == 0.0)
    throw UnsupportedParameterError("filament_tw_field: mu = 0 degenerates the central equation");
  const int d = p.dim();
  const Config u = state.head(d);
  const Eigen::VectorXd v = state.tail(d);
  const Eigen::VectorXd g = grad_potential(u, p);
  Eigen::VectorXd out(2 * d);
  out.head(d) = v;
  for (int j = 0; j <= p.n; ++j) {
    const double k = p.kappa(j);
    // u'' = K^{-2} (grad V - 2 gamma K J u')
    const double jv_x = -v(2 * j + 1);
    const double jv_y = v(2 * j);
    out(d + 2 * j) = (g(2 * j) - 2.0 * p.gamma * k * jv_x) / (k * k);
    out(d + 2 * j + 1) = (g(2 * j + 1) - 2.0 * p.gamma * k * jv_y) / (k * k);
  }
  return out;
}

// Element of <cyclic shift, planar rotation, time phase>. The action on a
// configuration is y_j = R(rotation) x_{sigma(j)} with sigma the index shift
// on 1..n; time_phase only matters for loops. The paper's distinguished
// generator (zeta, zeta) corresponds to shift 1 with rotation -zeta: it fixes
// the ring equilibrium and acts on W_k as the scalar e^{i k zeta}.
struct GroupElement {
  int shift = 0;
  double rotation = 0.0;
  double time_phase = 0.0;

  static GroupElement zeta_zeta(const ProblemParams& p) { return {1, -p.zeta(), 0.0}; }
};

template <typename Derived>
auto act_group(const Eigen::MatrixBase<Derived>& u, const GroupElement& g, int n) {
  typename Derived::PlainObject out(u.rows());
  const Eigen::Matrix2d R = rot2(g.rotation);
  auto rotate = [&R](auto x, auto y) {
    return std::pair{R(0, 0) * x + R(0, 1) * y, R(1, 0) * x + R(1, 1) * y};
  };
  auto [cx, cy] = rotate(u(0), u(1));
  out(0) = cx;
  out(1) = cy;
  for (int j = 1; j <= n; ++j) {
    const int src = ((j - 1 + g.shift) % n + n) % n + 1;
    auto [x, y] = rotate(u(2 * src), u(2 * src + 1));
    out(2 * j) = x;
    out(2 * j + 1) = y;
  }
  return out;
}

}  // namespace ringbif
