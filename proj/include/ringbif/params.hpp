#pragma once

#include <numbers>
#include <optional>
#include <stdexcept>

namespace ringbif {

enum class Kind { Vortex, Filament };

// Parameters of the (n+1)-element ring: n peripheral elements of unit
// circulation plus one central element of circulation mu. gamma is the
// traveling-wave velocity and only enters the filament problem.
struct ProblemParams {
  int n = 3;
  double mu = 0.0;
  double gamma = 0.0;
  Kind kind = Kind::Vortex;

  // Detunes the rotating-frame rate away from the relative-equilibrium value
  // s1 + mu. Leave unset for the equilibrium problem.
  std::optional<double> omega_override{};

  void validate() const {
    if (n < 2) throw std::invalid_argument("ProblemParams: n must be >= 2");
  }

  double s1() const { return 0.5 * (n - 1); }
  double omega() const { return omega_override ? *omega_override : s1() + mu; }
  double zeta() const { return 2.0 * std::numbers::pi / n; }
  double s_k(int k) const { return 0.5 * k * (n - k); }
  double omega_k(int k) const { return 0.5 * s_k(k); }
  double kappa(int j) const { return j == 0 ? mu : 1.0; }
  int dim() const { return 2 * (n + 1); }
};

}  // namespace ringbif
