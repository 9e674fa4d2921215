#pragma once

#include <Eigen/Dense>
#include <random>

#include "ringbif/model.hpp"
#include "ringbif/params.hpp"

namespace ringbif::testing {

// Random collision-free configuration in an annulus, fixed-seed reproducible.
inline Eigen::VectorXd random_config(const ProblemParams& p, std::mt19937& rng,
                                     double min_sep = 0.25) {
  std::uniform_real_distribution<double> radius(0.4, 1.8);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (;;) {
    Eigen::VectorXd u(p.dim());
    for (int j = 0; j <= p.n; ++j) {
      const double r = j == 0 ? radius(rng) * 0.3 : radius(rng);
      const double a = angle(rng);
      u(2 * j) = r * std::cos(a);
      u(2 * j + 1) = r * std::sin(a);
    }
    if (min_pair_distance(u).dist > min_sep) return u;
  }
}

// Central-difference gradient of the potential, h = 1e-6.
inline Eigen::VectorXd fd_gradient(const Eigen::VectorXd& u, const ProblemParams& p,
                                   double h = 1e-6) {
  Eigen::VectorXd g(u.size());
  Eigen::VectorXd up = u, um = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    up(i) = u(i) + h;
    um(i) = u(i) - h;
    g(i) = (potential(up, p) - potential(um, p)) / (2.0 * h);
    up(i) = u(i);
    um(i) = u(i);
  }
  return g;
}

// Central-difference Hessian built on the analytic gradient, h = 1e-5.
inline Eigen::MatrixXd fd_hessian(const Eigen::VectorXd& u, const ProblemParams& p,
                                  double h = 1e-5) {
  Eigen::MatrixXd H(u.size(), u.size());
  Eigen::VectorXd up = u, um = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    up(i) = u(i) + h;
    um(i) = u(i) - h;
    H.col(i) = (grad_potential(up, p) - grad_potential(um, p)) / (2.0 * h);
    up(i) = u(i);
    um(i) = u(i);
  }
  return 0.5 * (H + H.transpose());
}

// Norm-relative max error with an absolute floor of 1e-12.
inline double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-12);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace ringbif::testing
