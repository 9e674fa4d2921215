#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ringbif/params.hpp"

// Frequency-domain analysis: the Hermitian blocks m_k(nu) of the linearized
// bifurcation operator, Morse indices, the orientation sign sigma, index
// jumps eta, closed-form and scanned bifurcation frequencies, the Morse
// region tables and the spectral stability window.

namespace ringbif {

inline constexpr double kTolZero = 1e-9;  // Morse counting zero threshold
inline constexpr double kTolDegenerate = 1e-9;

struct SpectralBlock {
  int k = 0;
  double nu = 0.0;
  Eigen::MatrixXcd m;  // Hermitian: 2x2, 3x3, or 4x4 (n = 2, k = 1)
};

// Block of the mode operator. For mu = 0 and k in {1, n-1} the central
// element decouples and the reduced 2x2 peripheral block is returned.
SpectralBlock block_m(int k, double nu, const ProblemParams& p);

struct MorseCount {
  int negative = 0;  // eigenvalues < -tol
  int kernel = 0;    // eigenvalues in [-tol, tol]
};

MorseCount morse_count(const Eigen::MatrixXcd& m, double tol = kTolZero);
int morse_index(const Eigen::MatrixXcd& m, double tol = kTolZero);

// sigma = sgn(omega); throws DegenerateParameterError at omega = 0.
int sigma(const ProblemParams& p);

// Index jump eta_k(nu0) = sigma * (n_k(nu0 - rho) - n_k(nu0 + rho)).
// rho <= 0 requests the default probe 1e-4 (1 + |nu0|); the probe halves
// while the block is singular at a probe point and aborts below 1e-10.
int eta(int k, double nu0, const ProblemParams& p, double rho = -1.0);

enum class Provenance { ClosedForm, Scan };

struct BifurcationPoint {
  int k = 0;
  double nu = 0.0;
  int eta = 0;
  std::string symmetry;  // Z~_n(k) label
  Provenance provenance = Provenance::ClosedForm;
  double det_residual = 0.0;  // |det m_k(nu)| after evaluation
  std::string label;          // nu_k, nu0, nu_plus, nu_minus, nu_bar_..., scan
};

std::string symmetry_label(int n, int k);

// Positive bifurcation frequencies with their jumps (computed via eta).
std::vector<BifurcationPoint> vortex_bif_points(int k, const ProblemParams& p);
std::vector<BifurcationPoint> filament_bif_points(int k, const ProblemParams& p);

struct ScanResult {
  std::vector<BifurcationPoint> points;
  bool edge_warning = false;  // Morse change at a window edge
};

// Grid scan + bisection oracle for Morse-index changes of m_k over
// (nu_min, nu_max); grid >= 100 required.
ScanResult scan_bif_points(int k, const ProblemParams& p, double nu_min,
                           double nu_max, int grid);

// Upper bound on the modulus of any real root of det m_k, for scan windows.
double scan_nu_bound(int k, const ProblemParams& p);

struct RegionSample {
  std::string label;
  int morse = 0;          // Morse number asserted by the region table
  int morse_numeric = 0;  // cross-check from block_m at the query point
};

// Region classification of the vortex k = 1 block in the (mu, nu) plane
// (n >= 3 uses the three-curve table, n = 2 the seven-region table).
RegionSample morse_region_classify(double mu, double nu, int n);

struct StabilityWindow {
  double mu_lo = 0.0;  // mu_[n/2]
  double mu_hi = 0.0;  // mu_1 = s1^2
};

StabilityWindow stability_window(int n);

struct SpectralCheck {
  bool spectral_ok = false;
  double max_real_part = 0.0;
  double max_real_eigenvalue = 0.0;  // largest |lambda| among eigenvalues with
                                     // negligible imaginary part
  int imag_axis_roots = 0;  // roots of det M(nu) found on the real axis,
                            // counted with multiplicity (target 2(n+1))
};

// Numeric verdict for the vortex linearization -J K^{-1} D^2V(a) at a given
// mu. The structurally defective zero pair (rotation generator and its
// frequency shear partner) is deflated exactly before the eigensolve.
SpectralCheck stability_check(int n, double mu);

}  // namespace ringbif
