#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ringbif/model.hpp"
#include "ringbif/params.hpp"
#include "ringbif/spectral.hpp"

// Fourier-Galerkin discretization of the periodic-orbit problem, predictor
// from the kernel of m_k(nu_k), Newton correction with the group degeneracies
// pinned, symmetry verification and pseudo-arclength branch continuation.

namespace ringbif {

// Truncated Fourier loop x(t) = x_0 + sum_{l=1..p} 2 Re(x_l e^{ilt}),
// 2pi-periodic in the rescaled time, physical frequency nu.
struct FourierLoop {
  int n = 0;
  int p = 16;
  double nu = 0.0;
  Eigen::MatrixXcd modes;  // dim x (p+1), column l = mode x_l; column 0 real

  int dim() const { return 2 * (n + 1); }
  Eigen::VectorXd eval(double t) const;
  Eigen::VectorXd velocity(double t) const;  // d/dt of the loop (loop time)
  double amplitude() const { return 2.0 * modes.col(1).norm(); }

  static FourierLoop constant(const Eigen::VectorXd& u, double nu, int p = 16);
};

int quadrature_nodes(int p);  // 4p + 4

// Residual modes of f(x, nu) for |l| <= p (columns l = 0..p).
// Vortex:   r_l = -l nu (iJ) K x_l + g_l
// Filament: r_l = l^2 nu^2 K^2 x_l - 2 gamma l nu (iJ) K x_l + g_l
// with g_l the trapezoidal Fourier modes of grad V along the loop.
Eigen::MatrixXcd galerkin_residual(const FourierLoop& loop, const ProblemParams& p);

double residual_norm(const Eigen::MatrixXcd& r);

// Complex linear mode operator l^2 nu^2 K^2 - 2 gamma l nu (iJ)K  (vortex:
// -l nu (iJ)K); the diagonal part of the Galerkin Jacobian.
Eigen::MatrixXcd mode_linear_operator(int l, double nu, const ProblemParams& p);

// Real Jacobian of the stacked residual with respect to the stacked real
// unknowns [x_0; Re x_1; Im x_1; ...]; exposed for the block-structure tests.
Eigen::MatrixXd galerkin_jacobian_real(const FourierLoop& loop, const ProblemParams& p);

// Loop built from the kernel vector of m_k at a bifurcation point:
// a + amplitude * Re(T_k(w0) e^{it}). Satisfies the Z~_n(k) symmetry.
FourierLoop predictor(int k, const BifurcationPoint& bp, double amplitude,
                      const ProblemParams& p, int trunc = 16);

// Max defect of the Z~_n(k) relations over a time grid, including the
// gcd-branched central-element rule.
double symmetry_residual(const FourierLoop& loop, int k);

// Group action on loops: spatial shift/rotation per mode plus the time
// translation t -> t + time_phase.
FourierLoop act_group(const FourierLoop& loop, const GroupElement& g);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 20;
  bool reduced = true;          // solve in the W_k-reduced unknowns
  double cond_limit = 1e12;
  bool fix_nu = false;
};

struct BranchState {
  FourierLoop loop;
  double amplitude = 0.0;
  double arclength = 0.0;
  double residual_norm = 0.0;
  double symmetry_res = 0.0;
  int newton_iterations = 0;
};

// Newton on the Galerkin system augmented with the phase / rotation pins and
// an amplitude pin (2 |x_1| = amplitude). Throws NewtonFailure on
// non-convergence and DegenerateBifurcationError on conditioning blowup.
BranchState newton_correct(const FourierLoop& initial, int k, double amplitude,
                           const ProblemParams& p, const NewtonOptions& opts = {});

enum class Termination {
  MaxSteps,
  NormCap,
  PeriodCap,
  NearCollision,
  ReturnedToEquilibrium,
  NewtonFailure,
};

std::string to_string(Termination t);

struct BranchOptions {
  NewtonOptions newton{};
  double ds0 = -1.0;           // initial arclength step; <0 picks automatically
  double ds_max = 0.05;        // arclength step ceiling
  double norm_cap = 100.0;
  double period_cap = 1e4;     // terminate when 2pi/nu exceeds this
  double collision_eps = 1e-6; // near-collision stop at 10x this
};

struct BranchResult {
  std::vector<BranchState> states;
  Termination termination = Termination::MaxSteps;
  std::string detail;
};

BranchResult continue_branch(const BranchState& start, int k, int step_count,
                             const ProblemParams& p, const BranchOptions& opts = {});

}  // namespace ringbif
