#pragma once

#include <stdexcept>
#include <string>

namespace ringbif {

// Two elements closer than the collision threshold. Carries the pair.
struct CollisionError : std::domain_error {
  CollisionError(int i_, int j_, double dist_, int node_ = -1)
      : std::domain_error("collision between elements " + std::to_string(i_) +
                          " and " + std::to_string(j_) + " (distance " +
                          std::to_string(dist_) +
                          (node_ >= 0 ? ", quadrature node " + std::to_string(node_) : "") + ")"),
        i(i_), j(j_), dist(dist_), node(node_) {}
  int i, j;
  double dist;
  int node;  // quadrature node index, -1 outside loop evaluation
};

// Parameter sits on a degeneracy curve (mu = mu_k, omega = 0, coincident
// roots). Hard error by design, never a silent skip.
struct DegenerateParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Query point lies on a region boundary curve.
struct BoundaryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Kernel of m_k at the bifurcation point is not one-dimensional.
struct DegenerateBifurcationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NewtonFailure : std::runtime_error {
  NewtonFailure(const std::string& what, int iterations_, double residual_)
      : std::runtime_error(what), iterations(iterations_), residual(residual_) {}
  int iterations;
  double residual;
};

}  // namespace ringbif
