#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ringbif/model.hpp"
#include "ringbif/spectral.hpp"
#include "test_helpers.hpp"

using namespace ringbif;
using testing::fd_gradient;
using testing::fd_hessian;
using testing::random_config;
using testing::rel_error;

namespace {

ProblemParams make(int n, double mu, Kind kind = Kind::Vortex, double gamma = 0.0) {
  ProblemParams p;
  p.n = n;
  p.mu = mu;
  p.kind = kind;
  p.gamma = gamma;
  return p;
}

}  // namespace

TEST_CASE("ring equilibrium places the n-th roots of unity around the origin") {
  const auto u3 = ring_equilibrium(make(3, 0.0));
  CHECK(u3.head(2).norm() == doctest::Approx(0.0));
  CHECK(u3(2) == doctest::Approx(std::cos(2.0 * std::numbers::pi / 3)));
  CHECK(u3(3) == doctest::Approx(std::sin(2.0 * std::numbers::pi / 3)));
  CHECK(u3(6) == doctest::Approx(1.0));
  CHECK(u3(7) == doctest::Approx(0.0).epsilon(1e-12));

  const auto u2 = ring_equilibrium(make(2, 1.0));
  CHECK(u2(2) == doctest::Approx(-1.0));
  CHECK(u2(3) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(u2(4) == doctest::Approx(1.0));

  const auto u4 = ring_equilibrium(make(4, 0.0));
  CHECK(u4(2) == doctest::Approx(0.0).epsilon(1e-12));  // i
  CHECK(u4(3) == doctest::Approx(1.0));
  CHECK(u4(4) == doctest::Approx(-1.0));                // -1
  CHECK(u4(6) == doctest::Approx(0.0).epsilon(1e-12));  // -i
  CHECK(u4(7) == doctest::Approx(-1.0));
  CHECK(u4(8) == doctest::Approx(1.0));                 // 1
}

TEST_CASE("potential value and invariances") {
  const auto p = make(2, 0.0);
  const auto a = ring_equilibrium(p);
  // omega = 1/2; only the peripheral pair contributes a log term, distance 2.
  CHECK(potential(a, p) == doctest::Approx(0.5 - std::log(2.0)).epsilon(1e-14));

  std::mt19937 rng(7);
  const auto q = make(4, 0.7);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd u = random_config(q, rng);
    const double v0 = potential(u, q);
    // common rotation
    GroupElement rot{0, 0.83, 0.0};
    CHECK(potential(act_group(u, rot, q.n), q) == doctest::Approx(v0).epsilon(1e-12));
    // permutation of the peripheral labels
    GroupElement shift{2, 0.0, 0.0};
    CHECK(potential(act_group(u, shift, q.n), q) == doctest::Approx(v0).epsilon(1e-12));
  }
}

TEST_CASE("collision raises a domain error naming the pair") {
  const auto p = make(3, 1.0);
  Eigen::VectorXd u = ring_equilibrium(p);
  u.segment<2>(4) = u.segment<2>(2);  // element 2 onto element 1
  CHECK_THROWS_AS(potential(u, p), CollisionError);
  try {
    potential(u, p);
  } catch (const CollisionError& e) {
    CHECK(e.i == 1);
    CHECK(e.j == 2);
  }
}

TEST_CASE("gradient vanishes at the equilibrium for every (n, mu)") {
  for (int n = 2; n <= 8; ++n)
    for (double mu : {-2.0, -0.5, 0.0, 1.0, 3.5}) {
      const auto p = make(n, mu);
      const auto a = ring_equilibrium(p);
      CHECK(grad_potential(a, p).norm() < 1e-12);
    }
}

TEST_CASE("gradient is orthogonal to the rotation generator") {
  std::mt19937 rng(11);
  const auto p = make(5, -1.3);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd u = random_config(p, rng);
    const Eigen::VectorXd g = grad_potential(u, p);
    CHECK(std::abs(g.dot(apply_J_all(u))) < 1e-10 * std::max(1.0, g.norm() * u.norm()));
  }
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937 rng(23);
  for (int n : {3, 4, 5, 6}) {
    const auto p = make(n, 0.8);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd u = random_config(p, rng);
      CHECK(rel_error(grad_potential(u, p), fd_gradient(u, p)) < 1e-6);
    }
  }
}

TEST_CASE("analytic Hessian: symmetry, kernel, finite differences") {
  for (int n = 3; n <= 8; ++n)
    for (double mu : {-1.0, 0.0, 1.0}) {
      const auto p = make(n, mu);
      const auto a = ring_equilibrium(p);
      const Eigen::MatrixXd H = hess_potential(a, p);
      CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK((H * apply_J_all(a)).norm() < 1e-10);
    }
  std::mt19937 rng(31);
  const auto p = make(4, -0.6);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd u = random_config(p, rng);
    CHECK(rel_error(hess_potential(u, p), fd_hessian(u, p)) < 1e-5);
  }
}

TEST_CASE("gradient scales linearly in the frame-rate detuning") {
  const int n = 5;
  for (double delta : {1e-3, 1e-2, 1e-1}) {
    auto p = make(n, 0.7);
    p.omega_override = p.s1() + p.mu + delta;
    const auto a = ring_equilibrium(p);
    const Eigen::VectorXd kw = kappa_weights(p);
    const double expected = delta * (kw.asDiagonal() * a).norm();
    CHECK(grad_potential(a, p).norm() == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("vortex field: equilibrium fixed point and mu = 0 rejection") {
  const auto p = make(6, 2.0);
  CHECK(vortex_field(ring_equilibrium(p), p).norm() < 1e-12);
  const auto pz = make(6, 0.0);
  CHECK_THROWS_AS(vortex_field(ring_equilibrium(pz), pz), UnsupportedParameterError);
}

TEST_CASE("filament field: fixed point and gamma = 0 reduction") {
  const auto p = make(4, 1.0, Kind::Filament, 2.0);
  const int d = p.dim();
  Eigen::VectorXd state(2 * d);
  state << ring_equilibrium(p), Eigen::VectorXd::Zero(d);
  CHECK(filament_tw_field(state, p).norm() < 1e-12);

  auto p0 = p;
  p0.gamma = 0.0;
  std::mt19937 rng(45);
  const Eigen::VectorXd u = random_config(p0, rng);
  Eigen::VectorXd s(2 * d);
  s << u, Eigen::VectorXd::Random(d);
  const Eigen::VectorXd f = filament_tw_field(s, p0);
  const Eigen::VectorXd g = grad_potential(u, p0);
  for (int j = 0; j <= p0.n; ++j) {
    const double k2 = p0.kappa(j) * p0.kappa(j);
    CHECK(f(d + 2 * j) == doctest::Approx(g(2 * j) / k2).epsilon(1e-12));
    CHECK(f(d + 2 * j + 1) == doctest::Approx(g(2 * j + 1) / k2).epsilon(1e-12));
  }
}

TEST_CASE("filament linearization at (a, 0) carries the block frequencies") {
  // Eigenvalues of the assembled first-order linearization on the imaginary
  // axis correspond to the real roots of det m_k(nu), block by block.
  const auto p = make(4, -1.0, Kind::Filament, 1.0);
  const int d = p.dim();
  const auto a = ring_equilibrium(p);
  const Eigen::MatrixXd H = hess_potential(a, p);
  const Eigen::VectorXd kw = kappa_weights(p);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  A.topRightCorner(d, d).setIdentity();
  A.bottomLeftCorner(d, d) = kw.cwiseProduct(kw).cwiseInverse().asDiagonal() * H;
  for (int j = 0; j <= p.n; ++j) {
    // -2 gamma K^{-1} J acting on the velocity block
    const double c = 2.0 * p.gamma / p.kappa(j);
    A(d + 2 * j, d + 2 * j + 1) += c;
    A(d + 2 * j + 1, d + 2 * j) += -c;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);

  int matched = 0;
  for (int k = 1; k <= p.n; ++k) {
    const auto sr = ringbif::scan_bif_points(k, p, 1e-4, ringbif::scan_nu_bound(k, p), 800);
    for (const auto& bp : sr.points) {
      double best = 1e30;
      for (int i = 0; i < es.eigenvalues().size(); ++i)
        best = std::min(best, std::abs(es.eigenvalues()(i) - std::complex<double>(0.0, bp.nu)));
      INFO("k=", k, " nu=", bp.nu);
      CHECK(best < 1e-7);
      ++matched;
    }
  }
  CHECK(matched >= 4);
}

TEST_CASE("group action: (zeta, zeta) fixes the equilibrium, Z_n order, equivariance") {
  for (int n : {2, 3, 5, 8}) {
    const auto p = make(n, 0.4);
    const auto a = ring_equilibrium(p);
    const auto zz = GroupElement::zeta_zeta(p);
    CHECK((act_group(a, zz, n) - a).norm() < 1e-12);

    std::mt19937 rng(n);
    Eigen::VectorXd u = random_config(p, rng);
    // identity
    CHECK((act_group(u, GroupElement{}, n) - u).norm() == 0.0);
    // shift^n = identity
    Eigen::VectorXd w = u;
    for (int i = 0; i < n; ++i) w = act_group(w, GroupElement{1, 0.0, 0.0}, n);
    CHECK((w - u).norm() < 1e-12);
    // equivariance of the gradient
    const GroupElement g{1, 0.37, 0.0};
    const Eigen::VectorXd lhs = grad_potential(act_group(u, g, n), p);
    const Eigen::VectorXd rhs = act_group(grad_potential(u, p), g, n);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("Hessian commutes with the (zeta, zeta) action") {
  for (int n : {3, 4, 6}) {
    const auto p = make(n, -0.7);
    const auto a = ring_equilibrium(p);
    const Eigen::MatrixXd H = hess_potential(a, p);
    const auto zz = GroupElement::zeta_zeta(p);
    Eigen::MatrixXd A(p.dim(), p.dim());
    for (int c = 0; c < p.dim(); ++c)
      A.col(c) = act_group(Eigen::VectorXd(Eigen::VectorXd::Unit(p.dim(), c)), zz, n);
    CHECK((A * H - H * A).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("evaluators are generic over the position scalar") {
  const auto p = make(3, 0.5);
  Eigen::Matrix<long double, Eigen::Dynamic, 1> u(p.dim());
  const auto a = ring_equilibrium(p);
  for (int i = 0; i < p.dim(); ++i) u(i) = static_cast<long double>(a(i)) + 0.01L * i;
  const long double v = potential(u, p);
  CHECK(std::isfinite(static_cast<double>(v)));
  CHECK(grad_potential(u, p).size() == p.dim());
}
