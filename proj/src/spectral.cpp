#include "ringbif/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "ringbif/errors.hpp"
#include "ringbif/model.hpp"
#include "ringbif/symmetry.hpp"

namespace ringbif {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

void check_k(int n, int k) {
  if (k < 1 || k > n) throw std::out_of_range("spectral block index k must lie in 1..n");
}

bool middle_block(int n, int k) { return !(k == 1 || (k == n - 1 && n >= 3)); }

// 2x2 block nu^2 I - 2 gamma nu (iJ) + diag(a, b)   (vortex: -nu (iJ) + diag).
Eigen::MatrixXcd two_by_two(double nu, double a, double b, const ProblemParams& p) {
  Eigen::MatrixXcd m(2, 2);
  if (p.kind == Kind::Vortex) {
    m << cd(a), I * nu, -I * nu, cd(b);
  } else {
    m << cd(nu * nu + a), 2.0 * I * p.gamma * nu, -2.0 * I * p.gamma * nu, cd(nu * nu + b);
  }
  return m;
}

Eigen::MatrixXcd block_k1(double nu, const ProblemParams& p) {
  const double s1 = p.s1(), mu = p.mu, g = p.gamma;
  const double c = std::sqrt(p.n / 2.0) * mu;
  Eigen::MatrixXcd m(3, 3);
  if (p.kind == Kind::Vortex) {
    m << cd(mu * (-nu + s1 + mu)), cd(-c), -I * c,
         cd(-c), cd(s1 + 2.0 * mu), I * nu,
         I * c, -I * nu, cd(s1);
  } else {
    m << cd(mu * (mu * nu * nu - 2.0 * g * nu + s1 + mu)), cd(-c), -I * c,
         cd(-c), cd(nu * nu + s1 + 2.0 * mu), 2.0 * I * g * nu,
         I * c, -2.0 * I * g * nu, cd(nu * nu + s1);
  }
  return m;
}

// n = 2, k = 1: 4x4 block on {(v, w, w)}. First-order term is
// -nu diag(mu iJ, iJ) (filament: -2 gamma nu), consistent with conjugating
// the mode operator by T_1.
Eigen::MatrixXcd block_n2_k1(double nu, const ProblemParams& p) {
  const double mu = p.mu, g = p.gamma;
  Eigen::MatrixXcd m = analytic_Bk(p, 1);
  if (p.kind == Kind::Vortex) {
    m(0, 1) += I * nu * mu;
    m(1, 0) += -I * nu * mu;
    m(2, 3) += I * nu;
    m(3, 2) += -I * nu;
  } else {
    m(0, 0) += nu * nu * mu * mu;
    m(1, 1) += nu * nu * mu * mu;
    m(2, 2) += nu * nu;
    m(3, 3) += nu * nu;
    m(0, 1) += 2.0 * I * g * nu * mu;
    m(1, 0) += -2.0 * I * g * nu * mu;
    m(2, 3) += 2.0 * I * g * nu;
    m(3, 2) += -2.0 * I * g * nu;
  }
  return m;
}

double det_abs(const Eigen::MatrixXcd& m) { return std::abs(m.determinant()); }

struct RawPoint {
  double nu;
  std::string label;
};

void attach(std::vector<BifurcationPoint>& out, const std::vector<RawPoint>& raw, int k,
            const ProblemParams& p, Provenance prov) {
  for (const auto& r : raw) {
    double sep = 1e30;
    for (const auto& o : raw)
      if (&o != &r) sep = std::min(sep, std::abs(o.nu - r.nu));
    double rho = std::min(1e-4 * (1.0 + std::abs(r.nu)), 0.25 * sep);
    BifurcationPoint bp;
    bp.k = k;
    bp.nu = r.nu;
    bp.eta = eta(k, r.nu, p, rho);
    bp.symmetry = symmetry_label(p.n, k);
    bp.provenance = prov;
    bp.det_residual = det_abs(block_m(k, r.nu, p).m);
    bp.label = r.label;
    out.push_back(bp);
  }
  std::sort(out.begin(), out.end(),
            [](const BifurcationPoint& a, const BifurcationPoint& b) { return a.nu < b.nu; });
}

// Real roots of the k = 1 block determinant (both signs) where closed forms
// exist; k = n-1 mirrors them through m_{n-1}(nu) = conj(m_1(-nu)).
std::vector<RawPoint> vortex_k1_roots(const ProblemParams& p) {
  const double s1 = p.s1(), mu = p.mu, w = p.omega();
  std::vector<RawPoint> roots;
  roots.push_back({w, "nu0"});
  if (mu < s1 * s1) {
    roots.push_back({std::sqrt(s1 * s1 - mu), "nu_plus"});
    roots.push_back({-std::sqrt(s1 * s1 - mu), "nu_minus"});
  }
  return roots;
}

std::vector<RawPoint> positive_side(const std::vector<RawPoint>& all, bool mirror) {
  std::vector<RawPoint> out;
  for (const auto& r : all) {
    const double nu = mirror ? -r.nu : r.nu;
    if (nu > kTolDegenerate) out.push_back({nu, r.label});
  }
  return out;
}

}  // namespace

std::string symmetry_label(int n, int k) {
  return "Z~_" + std::to_string(n) + "(" + std::to_string(k) + ")";
}

SpectralBlock block_m(int k, double nu, const ProblemParams& p) {
  p.validate();
  check_k(p.n, k);
  SpectralBlock b;
  b.k = k;
  b.nu = nu;

  if (middle_block(p.n, k)) {
    const double sk = p.s_k(k);
    b.m = two_by_two(nu, 2.0 * p.omega() - sk, sk, p);
    return b;
  }
  if (p.mu == 0.0) {
    // Central element decouples; the peripheral pair carries the block.
    b.m = two_by_two(nu, p.s1(), p.s1(), p);
    return b;
  }
  if (p.n == 2) {
    b.m = block_n2_k1(nu, p);
    return b;
  }
  if (k == 1) {
    b.m = block_k1(nu, p);
    return b;
  }
  b.m = block_k1(-nu, p).conjugate();  // m_{n-1}(nu) = conj(m_1(-nu))
  return b;
}

MorseCount morse_count(const Eigen::MatrixXcd& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  MorseCount c;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam < -tol)
      ++c.negative;
    else if (lam <= tol)
      ++c.kernel;
  }
  return c;
}

int morse_index(const Eigen::MatrixXcd& m, double tol) { return morse_count(m, tol).negative; }

int sigma(const ProblemParams& p) {
  p.validate();
  const double w = p.omega();
  if (std::abs(w) < kTolDegenerate)
    throw DegenerateParameterError("sigma undefined: omega = s1 + mu vanishes");
  return w > 0.0 ? 1 : -1;
}

int eta(int k, double nu0, const ProblemParams& p, double rho) {
  const int sg = sigma(p);
  if (rho <= 0.0) rho = 1e-4 * (1.0 + std::abs(nu0));
  while (rho >= 1e-10) {
    const MorseCount lo = morse_count(block_m(k, nu0 - rho, p).m);
    const MorseCount hi = morse_count(block_m(k, nu0 + rho, p).m);
    // a probe landing on a singular point halves the width and retries
    if (lo.kernel == 0 && hi.kernel == 0) return sg * (lo.negative - hi.negative);
    rho *= 0.5;
  }
  throw DegenerateParameterError("eta: block singular at every probe width near nu0");
}

std::vector<BifurcationPoint> vortex_bif_points(int k, const ProblemParams& p) {
  p.validate();
  check_k(p.n, k);
  ProblemParams pv = p;
  pv.kind = Kind::Vortex;
  (void)sigma(pv);  // omega = 0 is a degeneracy curve
  std::vector<BifurcationPoint> out;

  if (k == p.n) return out;  // nu_n = 0 is not a bifurcation point

  if (middle_block(pv.n, k)) {
    const double wk = pv.omega_k(k), w = pv.omega();
    if (std::abs(w - wk) < kTolDegenerate)
      throw DegenerateParameterError("vortex_bif_points: mu = mu_k (omega = omega_k)");
    if (w > wk) attach(out, {{2.0 * std::sqrt(wk * (w - wk)), "nu_k"}}, k, pv, Provenance::ClosedForm);
    return out;
  }

  const double s1 = pv.s1(), mu = pv.mu;
  if (mu == 0.0) {
    attach(out, {{s1, "nu0"}}, k, pv, Provenance::ClosedForm);
    return out;
  }

  if (pv.n == 2) {
    if (std::abs(mu + 1.25) < kTolDegenerate)
      throw DegenerateParameterError("vortex_bif_points: mu = -5/4 (B_1 singular)");
    if (std::abs(mu + 2.0) < kTolDegenerate)
      throw DegenerateParameterError("vortex_bif_points: mu = -2 (nu_0 and nu_1 coincide)");
    std::vector<RawPoint> raw{{std::abs(mu + 0.5), "nu0"}};
    if (mu < -1.25) raw.push_back({std::sqrt(3.0 * (-mu - 1.25)), "nu1"});
    attach(out, raw, k, pv, Provenance::ClosedForm);
    return out;
  }

  if (std::abs(mu - s1 * s1) < kTolDegenerate)
    throw DegenerateParameterError("vortex_bif_points: mu = mu_1 = s1^2");
  const auto raw = positive_side(vortex_k1_roots(pv), k != 1);
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (std::size_t j = i + 1; j < raw.size(); ++j)
      if (std::abs(raw[i].nu - raw[j].nu) < kTolDegenerate)
        throw DegenerateParameterError(
            "vortex_bif_points: coincident roots (the mu = -(2 s1 + 1) curve crossing)");
  attach(out, raw, k, pv, Provenance::ClosedForm);
  return out;
}

std::vector<BifurcationPoint> filament_bif_points(int k, const ProblemParams& p) {
  p.validate();
  check_k(p.n, k);
  ProblemParams pf = p;
  pf.kind = Kind::Filament;
  (void)sigma(pf);
  const double w = pf.omega(), g = pf.gamma;
  std::vector<BifurcationPoint> out;

  if (middle_block(pf.n, k)) {
    const double wk = pf.omega_k(k);
    const double a = 2.0 * g * g - w;
    const double q = 4.0 * wk * (w - wk);
    if (k == pf.n) {
      // q = 0: the double root at nu = 0 is excluded; one point survives.
      if (a > kTolDegenerate) attach(out, {{std::sqrt(2.0 * a), "nu_plus"}}, k, pf, Provenance::ClosedForm);
      return out;
    }
    if (std::abs(w - wk) < kTolDegenerate)
      throw DegenerateParameterError("filament_bif_points: mu = mu_k (omega = omega_k)");
    if (w < wk) {
      attach(out, {{std::sqrt(a + std::sqrt(a * a - q)), "nu_plus"}}, k, pf, Provenance::ClosedForm);
      return out;
    }
    const double disc = a * a - q;
    if (std::abs(disc) < kTolDegenerate * std::max(1.0, a * a))
      throw DegenerateParameterError("filament_bif_points: tangency gamma^2 = omega/2 + sqrt(omega_k (omega - omega_k))");
    if (a > 0.0 && disc > 0.0)
      attach(out,
             {{std::sqrt(a - std::sqrt(disc)), "nu_minus"}, {std::sqrt(a + std::sqrt(disc)), "nu_plus"}},
             k, pf, Provenance::ClosedForm);
    return out;
  }

  const double s1 = pf.s1(), mu = pf.mu;
  if (mu == 0.0) {
    // Reduced block; same quartic as the middle blocks with omega_k = s1/2.
    if (std::abs(g * g - s1) < kTolDegenerate)
      throw DegenerateParameterError("filament_bif_points: tangency gamma^2 = s1 at mu = 0");
    if (g * g > s1) {
      const double rad = std::sqrt(g * g - s1);
      attach(out, {{std::abs(g) - rad, "nu_minus"}, {std::abs(g) + rad, "nu_plus"}}, k, pf,
             Provenance::ClosedForm);
    }
    return out;
  }

  if (pf.n >= 3 && std::abs(mu - s1 * s1) < kTolDegenerate)
    throw DegenerateParameterError("filament_bif_points: mu = mu_1 = s1^2");
  if (pf.n == 2 && std::abs(mu + 1.25) < kTolDegenerate)
    throw DegenerateParameterError("filament_bif_points: mu = -5/4 (B_1 singular)");

  if (pf.n >= 3 && mu == 1.0) {
    // All circulations equal: explicit eigenvalue factorization.
    const double c = w * w - 2.0 * w;
    const double b = w - 2.0 * g * g;
    const double t1 = 0.5 * (w + std::sqrt(c));
    if (std::abs(g * g - w) < kTolDegenerate || std::abs(g * g - t1) < kTolDegenerate)
      throw DegenerateParameterError("filament_bif_points: mu = 1 tangency in gamma");
    std::vector<RawPoint> raw;
    if (g * g > t1) {
      raw.push_back({std::sqrt(-b - std::sqrt(b * b - c)), "nu_minus"});
      raw.push_back({std::sqrt(-b + std::sqrt(b * b - c)), "nu_plus"});
    }
    if (g * g > w) {
      // lambda_0 roots gamma +- sqrt(g^2 - w); k = n-1 sees their mirrors.
      std::vector<RawPoint> bar{{g - std::sqrt(g * g - w), "nu_bar_minus"},
                                {g + std::sqrt(g * g - w), "nu_bar_plus"}};
      for (const auto& r : positive_side(bar, k != 1)) raw.push_back(r);
    }
    attach(out, raw, k, pf, Provenance::ClosedForm);
    return out;
  }

  // No closed form for generic mu: locate Morse jumps by scan.
  ScanResult sr = scan_bif_points(k, pf, 1e-6, scan_nu_bound(k, pf), 800);
  return sr.points;
}

double scan_nu_bound(int k, const ProblemParams& p) {
  const Eigen::MatrixXcd B0 = block_m(k, 0.0, p).m;
  const double nB = B0.norm();  // Frobenius bounds the spectral norm
  const bool central = !middle_block(p.n, k) && p.mu != 0.0;
  const double minK = central ? std::min(p.mu * p.mu, 1.0) : 1.0;
  const double maxL = central ? std::max(std::abs(p.mu), 1.0) : 1.0;
  if (p.kind == Kind::Vortex) {
    const double minL = central ? std::min(std::abs(p.mu), 1.0) : 1.0;
    return nB / minL + 1.0;
  }
  const double gm = 2.0 * std::abs(p.gamma) * maxL;
  return (gm + std::sqrt(gm * gm + 4.0 * minK * nB)) / (2.0 * minK) + 1.0;
}

ScanResult scan_bif_points(int k, const ProblemParams& p, double nu_min, double nu_max, int grid) {
  p.validate();
  check_k(p.n, k);
  if (grid < 100) throw std::invalid_argument("scan_bif_points: grid must be >= 100");
  if (!(nu_min < nu_max)) throw std::invalid_argument("scan_bif_points: empty window");

  const double h = (nu_max - nu_min) / grid;
  std::vector<int> idx(grid + 1);
  for (int i = 0; i <= grid; ++i)
    idx[i] = morse_index(block_m(k, nu_min + i * h, p).m);

  ScanResult out;
  for (int i = 0; i < grid; ++i) {
    if (idx[i] == idx[i + 1]) continue;
    double lo = nu_min + i * h, hi = lo + h;
    const int left = idx[i];
    for (int it = 0; it < 60 && (hi - lo) > 1e-13 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (morse_index(block_m(k, mid, p).m) == left)
        lo = mid;
      else
        hi = mid;
    }
    double nu0 = 0.5 * (lo + hi);
    // The index flips where an eigenvalue crosses the Morse zero threshold;
    // polish to the actual determinant root when it changes sign nearby.
    {
      double a = nu0 - 2.0 * h, b = nu0 + 2.0 * h;
      a = std::max(a, nu_min);
      b = std::min(b, nu_max);
      auto det_at = [&](double nu) { return block_m(k, nu, p).m.determinant().real(); };
      double fa = det_at(a), fb = det_at(b);
      if (fa * fb < 0.0) {
        for (int it = 0; it < 80 && (b - a) > 1e-15 * (1.0 + b); ++it) {
          const double mid = 0.5 * (a + b), fm = det_at(mid);
          if (fa * fm <= 0.0) {
            b = mid;
            fb = fm;
          } else {
            a = mid;
            fa = fm;
          }
        }
        nu0 = 0.5 * (a + b);
      }
    }
    BifurcationPoint bp;
    bp.k = k;
    bp.nu = nu0;
    bp.eta = eta(k, nu0, p, 0.2 * h);
    bp.symmetry = symmetry_label(p.n, k);
    bp.provenance = Provenance::Scan;
    bp.det_residual = det_abs(block_m(k, nu0, p).m);
    bp.label = "scan";
    if (!out.points.empty() && std::abs(out.points.back().nu - nu0) < 1e-8) continue;
    out.points.push_back(bp);
    if (nu0 < nu_min + 2.0 * h || nu0 > nu_max - 2.0 * h) out.edge_warning = true;
  }
  return out;
}

namespace {

RegionSample classify_n_ge3(double mu, double nu, int n) {
  const double s1 = 0.5 * (n - 1);
  const double nu0 = mu + s1;
  const double par = nu * nu + mu - s1 * s1;  // <0 inside the parabola

  const double d_mu = std::abs(mu);
  const double d_line = std::abs(nu - nu0) / std::sqrt(2.0);
  const double d_par = std::abs(par) / std::sqrt(1.0 + 4.0 * nu * nu);
  if (d_mu < 1e-6 || d_line < 1e-6 || d_par < 1e-6)
    throw BoundaryError("morse_region_classify: point on a boundary curve");

  RegionSample r;
  if (mu > 0.0) {
    if (par < 0.0) {
      r.label = "0a"; r.morse = 0;
    } else if (nu > nu0) {
      r.label = "2b"; r.morse = 2;
    } else {
      r.label = "1a"; r.morse = 1;
    }
    return r;
  }
  const double nup = std::sqrt(s1 * s1 - mu);
  if (nu > nup) {
    r.label = "1b"; r.morse = 1;
  } else if (nu > std::max(nu0, -nup)) {
    r.label = "2c"; r.morse = 2;
  } else if (mu < -n && nu > nu0) {
    r.label = "1d"; r.morse = 1;
  } else if (mu > -n && nu > -nup) {
    r.label = "1c"; r.morse = 1;
  } else {
    r.label = "2a"; r.morse = 2;
  }
  return r;
}

RegionSample classify_n2(double mu, double nu) {
  const double av = std::abs(nu);  // the table lives on the nu > 0 semiplane
  const double nu0 = std::abs(mu + 0.5);
  const bool has_par = mu < -1.25;
  const double nu1 = has_par ? std::sqrt(3.0 * (-mu - 1.25)) : 0.0;

  const double d_mu = std::abs(mu);
  const double d_line = std::abs(av - nu0) / std::sqrt(2.0);
  const double d_par = std::abs(av * av + 3.0 * mu + 3.75) / std::sqrt(9.0 + 4.0 * av * av);
  if (d_mu < 1e-6 || d_line < 1e-6 || (has_par && d_par < 1e-6) || std::abs(mu + 1.25) < 1e-6)
    throw BoundaryError("morse_region_classify: point on a boundary curve");

  RegionSample r;
  if (av > nu0) {
    // nu1 < nu0 holds for every mu < -5/4, so above the V is above both curves.
    r.label = mu > 0.0 ? "2a" : "2b";
    r.morse = 2;
    return r;
  }
  if (mu > 0.0) {
    r.label = "1a"; r.morse = 1;
  } else if (mu > -0.5) {
    r.label = "1b"; r.morse = 1;
  } else if (mu > -1.25) {
    r.label = "3a"; r.morse = 3;
  } else if (av < nu1) {
    r.label = "2c"; r.morse = 2;
  } else if (mu > -2.0) {
    r.label = "3a"; r.morse = 3;  // sliver joining (3a) through the parabola vertex
  } else {
    r.label = "1c"; r.morse = 1;
  }
  return r;
}

}  // namespace

RegionSample morse_region_classify(double mu, double nu, int n) {
  if (n < 2) throw std::invalid_argument("morse_region_classify: n >= 2");
  RegionSample r = n == 2 ? classify_n2(mu, nu) : classify_n_ge3(mu, nu, n);
  ProblemParams p;
  p.n = n;
  p.mu = mu;
  p.kind = Kind::Vortex;
  r.morse_numeric = morse_index(block_m(1, nu, p).m);
  return r;
}

StabilityWindow stability_window(int n) {
  if (n < 3) throw std::invalid_argument("stability_window: n >= 3 required");
  ProblemParams p;
  p.n = n;
  const int kh = n / 2;
  return {p.s_k(kh) / 2.0 - p.s1(), p.s1() * p.s1()};
}

SpectralCheck stability_check(int n, double mu) {
  if (n < 3) throw std::invalid_argument("stability_check: n >= 3 required");
  if (mu == 0.0) throw UnsupportedParameterError("stability_check: mu = 0 has a singular K");
  ProblemParams p;
  p.n = n;
  p.mu = mu;
  p.kind = Kind::Vortex;

  const Eigen::VectorXd a = ring_equilibrium(p);
  const Eigen::MatrixXd H = hess_potential(a, p);
  const Eigen::VectorXd kw = kappa_weights(p);
  const int d = p.dim();

  // L = -J K^{-1} H
  Eigen::MatrixXd X = kw.cwiseInverse().asDiagonal() * H;
  Eigen::MatrixXd L(d, d);
  for (int j = 0; 2 * j < d; ++j) {
    L.row(2 * j) = X.row(2 * j + 1);
    L.row(2 * j + 1) = -X.row(2 * j);
  }

  // The rotation generator g and its shear partner v span a defective pair
  // L g = 0, L v = g. Deflate it exactly via the symplectic complement.
  const Eigen::VectorXd g = apply_J_all(a);
  const Eigen::VectorXd rhs = -(kw.asDiagonal() * a);
  const Eigen::VectorXd v = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(H).solve(rhs);

  Eigen::MatrixXd U(d, 2);
  U.col(0) = kw.asDiagonal() * apply_J_all(g);
  U.col(1) = kw.asDiagonal() * apply_J_all(v);
  const Eigen::MatrixXd Qfull =
      Eigen::HouseholderQR<Eigen::MatrixXd>(U).householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd Q = Qfull.rightCols(d - 2);

  const Eigen::MatrixXd A = Q.transpose() * L * Q;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);

  SpectralCheck out;
  out.max_real_part = es.eigenvalues().real().cwiseAbs().maxCoeff();
  out.imag_axis_roots = 2;  // the deflated structural pair at nu = 0
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const auto lam = es.eigenvalues()(i);
    if (std::abs(lam.real()) < 1e-8) ++out.imag_axis_roots;
    if (std::abs(lam.imag()) < 1e-6)
      out.max_real_eigenvalue = std::max(out.max_real_eigenvalue, std::abs(lam.real()));
  }
  out.spectral_ok = out.max_real_part < 1e-8;
  return out;
}

}  // namespace ringbif
