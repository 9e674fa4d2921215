#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ringbif/params.hpp"

// Time integration of the rotating-frame vortex flow and the filament
// traveling-wave system, with conserved-quantity monitoring and collision
// detection.

namespace ringbif {

enum class Method { RK4Fixed, DP54Adaptive };

struct IntegratorConfig {
  Method method = Method::DP54Adaptive;
  double dt = 1e-3;       // RK4Fixed step
  double tol = 1e-10;     // DP54 absolute/relative tolerance
  double t_end = 100.0;
  double collision_eps = 1e-6;
  int store_stride = 1;   // keep every k-th accepted step
  long max_steps = 20'000'000;
};

struct DriftStats {
  double potential = 0.0;    // max |V(u(t)) - V(u(0))|
  double kappa_norm = 0.0;   // max |u^T K u - const| (vortex invariant)
  double tw_energy = 0.0;    // max |1/2 u'^T K^2 u' - V(u) - const| (filament)
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> states;  // config, or (config, velocity)
  int n = 0;
  bool has_velocity = false;
  bool collided = false;
  double t_collision = 0.0;
  int collision_i = -1, collision_j = -1;
  DriftStats drift;
};

Trajectory integrate_vortex(const Eigen::VectorXd& u0, const ProblemParams& p,
                            const IntegratorConfig& icfg);

Trajectory integrate_filament_tw(const Eigen::VectorXd& u0, const Eigen::VectorXd& v0,
                                 const ProblemParams& p, const IntegratorConfig& icfg);

// Generic driver used by both systems; exposed for reversibility tests.
Trajectory integrate_ode(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field,
                         const Eigen::VectorXd& y0, const IntegratorConfig& icfg,
                         int config_dim);

}  // namespace ringbif
