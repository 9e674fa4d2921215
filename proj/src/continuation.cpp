#include "ringbif/continuation.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ringbif/errors.hpp"
#include "ringbif/model.hpp"
#include "ringbif/symmetry.hpp"

namespace ringbif {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int real_dof(int dim, int p) { return dim * (2 * p + 1); }

// Stacked real coordinates [x_0; Re x_1; Im x_1; ...].
Eigen::VectorXd stack_modes(const Eigen::MatrixXcd& modes) {
  const int d = static_cast<int>(modes.rows());
  const int p = static_cast<int>(modes.cols()) - 1;
  Eigen::VectorXd z(real_dof(d, p));
  z.head(d) = modes.col(0).real();
  for (int l = 1; l <= p; ++l) {
    z.segment(d * (2 * l - 1), d) = modes.col(l).real();
    z.segment(d * 2 * l, d) = modes.col(l).imag();
  }
  return z;
}

Eigen::MatrixXcd unstack_modes(const Eigen::VectorXd& z, int d) {
  const int p = (static_cast<int>(z.size()) / d - 1) / 2;
  Eigen::MatrixXcd modes = Eigen::MatrixXcd::Zero(d, p + 1);
  modes.col(0) = z.head(d).cast<cd>();
  for (int l = 1; l <= p; ++l)
    for (int c = 0; c < d; ++c)
      modes(c, l) = cd(z(d * (2 * l - 1) + c), z(d * 2 * l + c));
  return modes;
}

// L2 pairing of two loops over one period (up to the constant 2 pi factor).
double loop_ip(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  double s = a.col(0).real().dot(b.col(0).real());
  for (int l = 1; l < a.cols(); ++l)
    s += 2.0 * (a.col(l).conjugate().dot(b.col(l))).real();
  return s;
}

// Gradient of z -> loop_ip(x(z) - ref, d) in stacked coordinates.
Eigen::VectorXd ip_gradient(const Eigen::MatrixXcd& dmodes) {
  const int d = static_cast<int>(dmodes.rows());
  const int p = static_cast<int>(dmodes.cols()) - 1;
  Eigen::VectorXd g(real_dof(d, p));
  g.head(d) = dmodes.col(0).real();
  for (int l = 1; l <= p; ++l) {
    g.segment(d * (2 * l - 1), d) = 2.0 * dmodes.col(l).real();
    g.segment(d * 2 * l, d) = 2.0 * dmodes.col(l).imag();
  }
  return g;
}

Eigen::MatrixXcd time_derivative(const Eigen::MatrixXcd& modes) {
  Eigen::MatrixXcd d = modes;
  d.col(0).setZero();
  for (int l = 1; l < modes.cols(); ++l) d.col(l) *= I * static_cast<double>(l);
  return d;
}

Eigen::MatrixXcd rotate_generator(const Eigen::MatrixXcd& modes) {
  Eigen::MatrixXcd d = modes;
  for (int l = 0; l < modes.cols(); ++l) d.col(l) = apply_J_all(modes.col(l).eval());
  return d;
}

int mode_irrep(int n, int k, int l) {
  const int j = ((l * k) % n + n) % n;
  return j == 0 ? n : j;
}

int mod_inverse(int k, int n) {
  for (int m = 1; m < n; ++m)
    if ((m * k) % n == 1) return m;
  throw std::logic_error("mod_inverse: gcd(k, n) != 1");
}

struct PinSpec {
  enum class Type { Amplitude, Arclength } type = Type::Amplitude;
  double amplitude = 0.0;
  // Arclength data in solver coordinates (unknowns..., nu):
  Eigen::VectorXd tangent;
  Eigen::VectorXd z_pred;
};

// W_k-reduced real basis: columns of Phi span the fixed-point space of
// Z~_n(k) in stacked coordinates; mode l lives in W_{lk mod n}. At mu = 0 the
// central element decouples and its columns are dropped.
Eigen::MatrixXd reduced_basis(int n, int k, int p, bool drop_central) {
  const int d = 2 * (n + 1);
  std::vector<Eigen::VectorXd> cols;
  for (int l = 0; l <= p; ++l) {
    const int j = mode_irrep(n, k, l);
    Eigen::MatrixXcd B = irrep_basis(n, j).columns;
    if (drop_central) {
      if (n >= 3 && (j == 1 || j == n - 1)) B = B.rightCols(2).eval();
      if (n == 2 && j == 1) B = B.rightCols(2).eval();
    }
    if (l == 0) {
      // Real part of the representation; mode 0 is a real vector.
      for (int c = 0; c < B.cols(); ++c) {
        Eigen::VectorXd col = Eigen::VectorXd::Zero(real_dof(d, p));
        col.head(d) = B.col(c).real();
        if (col.norm() < 1e-12) continue;  // imaginary basis directions vanish
        cols.push_back(col.normalized());
      }
    } else {
      for (int c = 0; c < B.cols(); ++c) {
        Eigen::VectorXd c1 = Eigen::VectorXd::Zero(real_dof(d, p));
        Eigen::VectorXd c2 = Eigen::VectorXd::Zero(real_dof(d, p));
        c1.segment(d * (2 * l - 1), d) = B.col(c).real();
        c1.segment(d * 2 * l, d) = B.col(c).imag();
        // direction i * b
        c2.segment(d * (2 * l - 1), d) = -B.col(c).imag();
        c2.segment(d * 2 * l, d) = B.col(c).real();
        cols.push_back(c1);
        cols.push_back(c2);
      }
    }
  }
  Eigen::MatrixXd Phi(real_dof(d, p), cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) Phi.col(i) = cols[i];
  return Phi;
}

struct NodeData {
  std::vector<Eigen::VectorXd> X;   // loop values
  std::vector<Eigen::VectorXd> G;   // grad V values
  std::vector<double> t;
};

NodeData evaluate_nodes(const FourierLoop& loop, const ProblemParams& p) {
  const int M = quadrature_nodes(loop.p);
  NodeData nd;
  nd.X.resize(M);
  nd.G.resize(M);
  nd.t.resize(M);
  for (int m = 0; m < M; ++m) {
    nd.t[m] = kTwoPi * m / M;
    nd.X[m] = loop.eval(nd.t[m]);
    try {
      nd.G[m] = grad_potential(nd.X[m], p);
    } catch (const CollisionError& e) {
      throw CollisionError(e.i, e.j, e.dist, m);
    }
  }
  return nd;
}

Eigen::MatrixXcd residual_from_nodes(const FourierLoop& loop, const ProblemParams& p,
                                     const NodeData& nd) {
  const int d = loop.dim();
  const int M = static_cast<int>(nd.t.size());
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(d, loop.p + 1);
  for (int m = 0; m < M; ++m)
    for (int l = 0; l <= loop.p; ++l)
      r.col(l) += std::exp(-I * static_cast<double>(l) * nd.t[m]) * nd.G[m].cast<cd>() /
                  static_cast<double>(M);
  for (int l = 0; l <= loop.p; ++l)
    r.col(l) += mode_linear_operator(l, loop.nu, p) * loop.modes.col(l);
  return r;
}

}  // namespace

Eigen::VectorXd FourierLoop::eval(double t) const {
  Eigen::VectorXd x = modes.col(0).real();
  for (int l = 1; l <= p; ++l)
    x += 2.0 * (modes.col(l) * std::exp(I * static_cast<double>(l) * t)).real();
  return x;
}

Eigen::VectorXd FourierLoop::velocity(double t) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(modes.rows());
  for (int l = 1; l <= p; ++l)
    v += 2.0 * (I * static_cast<double>(l) * modes.col(l) * std::exp(I * static_cast<double>(l) * t))
             .real();
  return v;
}

FourierLoop FourierLoop::constant(const Eigen::VectorXd& u, double nu, int p) {
  FourierLoop loop;
  loop.n = static_cast<int>(u.size()) / 2 - 1;
  loop.p = p;
  loop.nu = nu;
  loop.modes = Eigen::MatrixXcd::Zero(u.size(), p + 1);
  loop.modes.col(0) = u.cast<cd>();
  return loop;
}

int quadrature_nodes(int p) { return 4 * p + 4; }

Eigen::MatrixXcd mode_linear_operator(int l, double nu, const ProblemParams& p) {
  const int d = p.dim();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(d, d);
  const double ln = l * nu;
  for (int j = 0; j <= p.n; ++j) {
    const double k = p.kappa(j);
    // (iJ) kappa_j on the element pair
    const cd off = I * k;
    if (p.kind == Kind::Vortex) {
      A(2 * j, 2 * j + 1) += ln * off;       // -l nu (iJ)K: iJ = [[0,-i],[i,0]]
      A(2 * j + 1, 2 * j) += -ln * off;
    } else {
      A(2 * j, 2 * j) += ln * ln * k * k;
      A(2 * j + 1, 2 * j + 1) += ln * ln * k * k;
      A(2 * j, 2 * j + 1) += 2.0 * p.gamma * ln * off;
      A(2 * j + 1, 2 * j) += -2.0 * p.gamma * ln * off;
    }
  }
  return A;
}

Eigen::MatrixXcd galerkin_residual(const FourierLoop& loop, const ProblemParams& p) {
  p.validate();
  const NodeData nd = evaluate_nodes(loop, p);
  return residual_from_nodes(loop, p, nd);
}

double residual_norm(const Eigen::MatrixXcd& r) {
  double s = r.col(0).squaredNorm();
  for (int l = 1; l < r.cols(); ++l) s += 2.0 * r.col(l).squaredNorm();
  return std::sqrt(s);
}

Eigen::MatrixXd galerkin_jacobian_real(const FourierLoop& loop, const ProblemParams& p) {
  const int d = loop.dim();
  const int pt = loop.p;
  const int R = real_dof(d, pt);
  const int M = quadrature_nodes(pt);
  const NodeData nd = evaluate_nodes(loop, p);

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(R, R);
  // Mode-diagonal linear part, complex C = A + iB acting as [[A,-B],[B,A]].
  for (int l = 1; l <= pt; ++l) {
    const Eigen::MatrixXcd C = mode_linear_operator(l, loop.nu, p);
    const Eigen::MatrixXd A = C.real(), B = C.imag();
    J.block(d * (2 * l - 1), d * (2 * l - 1), d, d) += A;
    J.block(d * (2 * l - 1), d * 2 * l, d, d) += -B;
    J.block(d * 2 * l, d * (2 * l - 1), d, d) += B;
    J.block(d * 2 * l, d * 2 * l, d, d) += A;
  }
  // Quadrature part: rank-one-in-mode-space updates per node.
  Eigen::VectorXd wr(2 * pt + 1), wc(2 * pt + 1);
  for (int m = 0; m < M; ++m) {
    const Eigen::MatrixXd H = hess_potential(nd.X[m], p);
    wr(0) = 1.0 / M;
    wc(0) = 1.0;
    for (int l = 1; l <= pt; ++l) {
      wr(2 * l - 1) = std::cos(l * nd.t[m]) / M;
      wr(2 * l) = -std::sin(l * nd.t[m]) / M;
      wc(2 * l - 1) = 2.0 * std::cos(l * nd.t[m]);
      wc(2 * l) = -2.0 * std::sin(l * nd.t[m]);
    }
    for (int a = 0; a < 2 * pt + 1; ++a)
      for (int b = 0; b < 2 * pt + 1; ++b) J.block(d * a, d * b, d, d) += (wr(a) * wc(b)) * H;
  }
  return J;
}

FourierLoop predictor(int k, const BifurcationPoint& bp, double amplitude,
                      const ProblemParams& p, int trunc) {
  p.validate();
  const SpectralBlock blk = block_m(k, bp.nu, p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(blk.m);
  const auto evals = es.eigenvalues();
  int i0 = 0;
  for (int i = 1; i < evals.size(); ++i)
    if (std::abs(evals(i)) < std::abs(evals(i0))) i0 = i;
  double second = std::numeric_limits<double>::infinity();
  for (int i = 0; i < evals.size(); ++i)
    if (i != i0) second = std::min(second, std::abs(evals(i)));
  if (std::abs(evals(i0)) > 1e-6)
    throw DegenerateBifurcationError("predictor: m_k(nu0) has no kernel at the given point");
  if (second < 1e-6)
    throw DegenerateBifurcationError("predictor: kernel of m_k(nu0) is not one-dimensional");
  const Eigen::VectorXcd w0 = es.eigenvectors().col(i0);

  Eigen::MatrixXcd T = irrep_basis(p.n, k).columns;
  if (static_cast<int>(T.cols()) != w0.size()) T = T.rightCols(w0.size()).eval();  // mu = 0 reduction

  FourierLoop loop = FourierLoop::constant(ring_equilibrium(p), bp.nu, trunc);
  loop.modes.col(1) = 0.5 * amplitude * (T * w0);
  return loop;
}

FourierLoop act_group(const FourierLoop& loop, const GroupElement& g) {
  FourierLoop out = loop;
  for (int l = 0; l <= loop.p; ++l) {
    out.modes.col(l) = ringbif::act_group(loop.modes.col(l).eval(), g, loop.n);
    // x(t + phi): mode l picks up e^{il phi}
    out.modes.col(l) *= std::exp(I * static_cast<double>(l) * g.time_phase);
  }
  return out;
}

double symmetry_residual(const FourierLoop& loop, int k) {
  const int n = loop.n;
  const double zeta = kTwoPi / n;
  const int T = 128;
  double defect = 0.0;
  for (int it = 0; it < T; ++it) {
    const double t = kTwoPi * it / T;
    const Eigen::VectorXd x = loop.eval(t);
    for (int j = 1; j <= n - 1; ++j) {
      const Eigen::VectorXd xs = loop.eval(t + j * k * zeta);
      const Eigen::Vector2d lhs = x.segment<2>(2 * (j + 1));
      const Eigen::Vector2d rhs = rot2(j * zeta) * xs.segment<2>(2 * 1);
      defect = std::max(defect, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    if (std::gcd(k, n) > 1) {
      defect = std::max(defect, x.segment<2>(0).cwiseAbs().maxCoeff());
    } else {
      const int m = mod_inverse(k % n == 0 ? n : k % n, n);
      const Eigen::VectorXd xs = loop.eval(t + zeta);
      const Eigen::Vector2d rhs = rot2(m * zeta) * xs.segment<2>(0);
      defect = std::max(defect, (x.segment<2>(0) - rhs).cwiseAbs().maxCoeff());
    }
  }
  return defect;
}

namespace {

struct SolveSetup {
  bool reduced = false;
  Eigen::MatrixXd Phi;  // stacked-coordinate basis when reduced
  int unknowns = 0;     // reduced (or full) dof count, before nu/c1/c2
};

BranchState make_state(const FourierLoop& loop, int k, double rnorm, int iters) {
  BranchState st;
  st.loop = loop;
  st.amplitude = loop.amplitude();
  st.residual_norm = rnorm;
  st.symmetry_res = symmetry_residual(loop, k);
  st.newton_iterations = iters;
  return st;
}

// Newton on the bordered Galerkin system. Unknowns: loop modes (full or
// W_k-reduced), the frequency nu and two unfolding amplitudes c1, c2 along
// the group generators; equations: residual + phase, rotation and pin rows.
BranchState newton_core(FourierLoop x, int k, const ProblemParams& p, const NewtonOptions& opts,
                        PinSpec pin, const FourierLoop& ref) {
  const int d = x.dim();
  const int pt = x.p;
  const int R = real_dof(d, pt);

  SolveSetup setup;
  setup.reduced = opts.reduced;
  if (setup.reduced) {
    setup.Phi = reduced_basis(p.n, k, pt, p.mu == 0.0);
    setup.unknowns = static_cast<int>(setup.Phi.cols());
  } else {
    setup.unknowns = R;
  }

  const Eigen::MatrixXcd dphase = time_derivative(ref.modes);
  const Eigen::MatrixXcd drot = rotate_generator(ref.modes);
  const Eigen::VectorXd gphase_full = ip_gradient(dphase);
  const Eigen::VectorXd grot_full = ip_gradient(drot);

  double c1 = 0.0, c2 = 0.0;
  double rnorm = 0.0;

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    Eigen::MatrixXcd res = galerkin_residual(x, p);
    const Eigen::MatrixXcd gen1 = time_derivative(x.modes);
    const Eigen::MatrixXcd gen2 = rotate_generator(x.modes);
    res += c1 * gen1 + c2 * gen2;
    rnorm = residual_norm(res);

    const double cph = loop_ip(x.modes - ref.modes, dphase);
    const double crot = loop_ip(x.modes - ref.modes, drot);
    double cpin = 0.0;
    Eigen::VectorXd zsolver;  // current unknowns in solver coordinates
    if (setup.reduced)
      zsolver = setup.Phi.transpose() * stack_modes(x.modes);
    else
      zsolver = stack_modes(x.modes);

    if (pin.type == PinSpec::Type::Amplitude) {
      const double nrm = x.modes.col(1).norm();
      cpin = pin.amplitude == 0.0 ? nrm * nrm : nrm - 0.5 * pin.amplitude;
    } else {
      Eigen::VectorXd zfull(zsolver.size() + 1);
      zfull << zsolver, x.nu;
      cpin = pin.tangent.dot(zfull - pin.z_pred);
    }

    if (rnorm < opts.tol && std::abs(cph) < 1e-9 && std::abs(crot) < 1e-9 &&
        std::abs(cpin) < 1e-9)
      return make_state(x, k, rnorm, iter);
    if (iter == opts.max_iter) break;
    if (!std::isfinite(rnorm) || rnorm > 1e8)
      throw NewtonFailure("newton_correct: residual diverged", iter, rnorm);

    // Assemble the bordered Jacobian in full coordinates first.
    Eigen::MatrixXd Jfull = galerkin_jacobian_real(x, p);
    // c1 d(x')/dx + c2 d(Jx)/dx, both linear in the modes
    if (c1 != 0.0 || c2 != 0.0) {
      for (int l = 0; l <= pt; ++l) {
        if (l > 0) {
          // c1 * il on mode l (real representation)
          Jfull.block(d * (2 * l - 1), d * 2 * l, d, d) -=
              c1 * l * Eigen::MatrixXd::Identity(d, d);
          Jfull.block(d * 2 * l, d * (2 * l - 1), d, d) +=
              c1 * l * Eigen::MatrixXd::Identity(d, d);
        }
        Eigen::MatrixXd Jrot = Eigen::MatrixXd::Zero(d, d);
        for (int j = 0; 2 * j < d; ++j) {
          Jrot(2 * j, 2 * j + 1) = -1.0;
          Jrot(2 * j + 1, 2 * j) = 1.0;
        }
        if (l == 0) {
          Jfull.block(0, 0, d, d) += c2 * Jrot;
        } else {
          Jfull.block(d * (2 * l - 1), d * (2 * l - 1), d, d) += c2 * Jrot;
          Jfull.block(d * 2 * l, d * 2 * l, d, d) += c2 * Jrot;
        }
      }
    }

    // d(residual)/dnu
    Eigen::MatrixXcd dnu = Eigen::MatrixXcd::Zero(d, pt + 1);
    for (int l = 1; l <= pt; ++l) {
      const double ld = static_cast<double>(l);
      for (int j = 0; j <= p.n; ++j) {
        const double kap = p.kappa(j);
        const cd xl0 = x.modes(2 * j, l), xl1 = x.modes(2 * j + 1, l);
        if (p.kind == Kind::Vortex) {
          dnu(2 * j, l) += ld * I * kap * xl1;
          dnu(2 * j + 1, l) += -ld * I * kap * xl0;
        } else {
          dnu(2 * j, l) += 2.0 * ld * ld * x.nu * kap * kap * xl0 + 2.0 * p.gamma * ld * I * kap * xl1;
          dnu(2 * j + 1, l) +=
              2.0 * ld * ld * x.nu * kap * kap * xl1 - 2.0 * p.gamma * ld * I * kap * xl0;
        }
      }
    }

    const Eigen::VectorXd Fres = stack_modes(res);
    const Eigen::VectorXd col_nu = stack_modes(dnu);
    const Eigen::VectorXd col_c1 = stack_modes(gen1);
    const Eigen::VectorXd col_c2 = stack_modes(gen2);

    // Project to solver coordinates.
    Eigen::MatrixXd Jz;
    Eigen::VectorXd rz, cnu, cc1, cc2, gph, grt;
    if (setup.reduced) {
      Jz = setup.Phi.transpose() * Jfull * setup.Phi;
      rz = setup.Phi.transpose() * Fres;
      cnu = setup.Phi.transpose() * col_nu;
      cc1 = setup.Phi.transpose() * col_c1;
      cc2 = setup.Phi.transpose() * col_c2;
      gph = setup.Phi.transpose() * gphase_full;
      grt = setup.Phi.transpose() * grot_full;
    } else {
      Jz = Jfull;
      rz = Fres;
      cnu = col_nu;
      cc1 = col_c1;
      cc2 = col_c2;
      gph = gphase_full;
      grt = grot_full;
      if (p.mu == 0.0) {
        // kappa_0 = 0 decouples the central element: its residual rows vanish
        // identically, so pin the central unknowns instead.
        for (int a = 0; a < 2 * pt + 1; ++a)
          for (int c = 0; c < 2; ++c) {
            const int r = d * a + c;
            Jz.row(r).setZero();
            Jz(r, r) = 1.0;
            rz(r) = 0.0;
            cnu(r) = cc1(r) = cc2(r) = 0.0;
          }
      }
    }

    Eigen::VectorXd gpin = Eigen::VectorXd::Zero(setup.unknowns);
    double gpin_nu = 0.0;
    if (pin.type == PinSpec::Type::Amplitude) {
      Eigen::MatrixXcd damp = Eigen::MatrixXcd::Zero(d, pt + 1);
      const double nrm = x.modes.col(1).norm();
      if (pin.amplitude == 0.0)
        damp.col(1) = 2.0 * x.modes.col(1);
      else if (nrm > 1e-14)
        damp.col(1) = x.modes.col(1) / nrm;
      // gradient of |x_1| in stacked coords: (Re x1, Im x1)/|x1| without the
      // loop_ip factor 2, assemble directly
      Eigen::VectorXd gfull = Eigen::VectorXd::Zero(R);
      gfull.segment(d, d) = damp.col(1).real();
      gfull.segment(2 * d, d) = damp.col(1).imag();
      gpin = setup.reduced ? (setup.Phi.transpose() * gfull).eval() : gfull;
    } else {
      gpin = pin.tangent.head(setup.unknowns);
      gpin_nu = pin.tangent(setup.unknowns);
    }

    const int N = setup.unknowns + 3;
    Eigen::MatrixXd Jb = Eigen::MatrixXd::Zero(N, N);
    Eigen::VectorXd Fb(N);
    Jb.topLeftCorner(setup.unknowns, setup.unknowns) = Jz;
    Jb.block(0, setup.unknowns, setup.unknowns, 1) = cnu;
    Jb.block(0, setup.unknowns + 1, setup.unknowns, 1) = cc1;
    Jb.block(0, setup.unknowns + 2, setup.unknowns, 1) = cc2;
    Jb.row(setup.unknowns).head(setup.unknowns) = gph.transpose();
    Jb.row(setup.unknowns + 1).head(setup.unknowns) = grt.transpose();
    Jb.row(setup.unknowns + 2).head(setup.unknowns) = gpin.transpose();
    Jb(setup.unknowns + 2, setup.unknowns) = gpin_nu;
    Fb << rz, cph, crot, cpin;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Jb);
    const Eigen::VectorXd rdiag = qr.matrixR().diagonal().cwiseAbs();
    const double cond = rdiag.maxCoeff() / std::max(rdiag.minCoeff(), 1e-300);
    if (cond > opts.cond_limit)
      throw DegenerateBifurcationError(
          "newton_correct: near-degenerate bordered Jacobian (cond ~ " + std::to_string(cond) + ")");
    const Eigen::VectorXd step = qr.solve(Fb);

    Eigen::VectorXd znew = zsolver - step.head(setup.unknowns);
    if (setup.reduced)
      x.modes = unstack_modes(setup.Phi * znew, d);
    else
      x.modes = unstack_modes(znew, d);
    x.nu -= step(setup.unknowns);
    c1 -= step(setup.unknowns + 1);
    c2 -= step(setup.unknowns + 2);
  }
  throw NewtonFailure("newton_correct: no convergence", opts.max_iter, rnorm);
}

}  // namespace

BranchState newton_correct(const FourierLoop& initial, int k, double amplitude,
                           const ProblemParams& p, const NewtonOptions& opts) {
  p.validate();
  PinSpec pin;
  pin.type = PinSpec::Type::Amplitude;
  pin.amplitude = amplitude;
  return newton_core(initial, k, p, opts, pin, initial);
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::MaxSteps: return "max-steps";
    case Termination::NormCap: return "norm-cap";
    case Termination::PeriodCap: return "period-cap";
    case Termination::NearCollision: return "near-collision";
    case Termination::ReturnedToEquilibrium: return "returned-to-equilibrium";
    case Termination::NewtonFailure: return "newton-failure";
  }
  return "unknown";
}

BranchResult continue_branch(const BranchState& start, int k, int step_count,
                             const ProblemParams& p, const BranchOptions& opts) {
  p.validate();
  BranchResult out;
  out.states.push_back(start);
  const double a0 = start.amplitude;
  const int d = start.loop.dim();
  const int pt = start.loop.p;

  const bool reduced = opts.newton.reduced;
  const Eigen::MatrixXd Phi =
      reduced ? reduced_basis(p.n, k, pt, p.mu == 0.0) : Eigen::MatrixXd();
  auto to_solver = [&](const FourierLoop& loop) {
    Eigen::VectorXd z = reduced ? (Phi.transpose() * stack_modes(loop.modes)).eval()
                                : stack_modes(loop.modes);
    Eigen::VectorXd zf(z.size() + 1);
    zf << z, loop.nu;
    return zf;
  };
  auto from_solver = [&](const Eigen::VectorXd& zf) {
    FourierLoop loop = start.loop;
    const Eigen::VectorXd z = zf.head(zf.size() - 1);
    loop.modes = unstack_modes(reduced ? (Phi * z).eval() : z, d);
    loop.nu = zf(zf.size() - 1);
    return loop;
  };

  auto classify = [&](const FourierLoop& loop) -> std::optional<Termination> {
    if (loop.amplitude() < a0 / 10.0) return Termination::ReturnedToEquilibrium;
    if (2.0 * std::numbers::pi / loop.nu > opts.period_cap) return Termination::PeriodCap;
    double maxnorm = 0.0, mindist = 1e30;
    const int M = quadrature_nodes(pt);
    for (int m = 0; m < M; ++m) {
      const Eigen::VectorXd x = loop.eval(kTwoPi * m / M);
      maxnorm = std::max(maxnorm, x.cwiseAbs().maxCoeff());
      mindist = std::min(mindist, min_pair_distance(x).dist);
    }
    if (maxnorm > opts.norm_cap) return Termination::NormCap;
    if (mindist < 10.0 * opts.collision_eps) return Termination::NearCollision;
    return std::nullopt;
  };

  // Second point from a slightly larger amplitude pin.
  BranchState second;
  try {
    FourierLoop guess = start.loop;
    guess.modes.col(1) *= 1.2;
    second = newton_core(guess, k, p, opts.newton,
                         PinSpec{PinSpec::Type::Amplitude, 1.2 * a0, {}, {}}, start.loop);
  } catch (const std::exception& e) {
    out.termination = Termination::NewtonFailure;
    out.detail = e.what();
    return out;
  }
  second.arclength = (to_solver(second.loop) - to_solver(start.loop)).norm();
  out.states.push_back(second);

  Eigen::VectorXd z_prev = to_solver(start.loop);
  Eigen::VectorXd z_cur = to_solver(second.loop);
  double ds = opts.ds0 > 0.0 ? opts.ds0 : (z_cur - z_prev).norm();
  double arclength = second.arclength;

  for (int step = 2; step < step_count; ++step) {
    Eigen::VectorXd tangent = (z_cur - z_prev).normalized();
    bool accepted = false;
    for (int attempt = 0; attempt < 5 && !accepted; ++attempt) {
      PinSpec pin;
      pin.type = PinSpec::Type::Arclength;
      pin.tangent = tangent;
      pin.z_pred = z_cur + ds * tangent;
      try {
        const FourierLoop guess = from_solver(pin.z_pred);
        const FourierLoop& ref = out.states.back().loop;
        BranchState st = newton_core(guess, k, p, opts.newton, pin, ref);
        arclength += ds;
        st.arclength = arclength;
        out.states.push_back(st);
        z_prev = z_cur;
        z_cur = to_solver(st.loop);
        accepted = true;
        if (st.newton_iterations <= 4) ds = std::min(ds * 1.3, opts.ds_max);
      } catch (const CollisionError&) {
        out.termination = Termination::NearCollision;
        out.detail = "collision during correction";
        return out;
      } catch (const std::exception& e) {
        ds *= 0.5;
        if (attempt == 4) {
          out.termination = Termination::NewtonFailure;
          out.detail = e.what();
          return out;
        }
      }
    }
    if (auto term = classify(out.states.back().loop)) {
      out.termination = *term;
      return out;
    }
  }
  out.termination = Termination::MaxSteps;
  return out;
}

}  // namespace ringbif
