#include "ringbif/symmetry.hpp"

#include <stdexcept>

#include "ringbif/model.hpp"

namespace ringbif {

namespace {

using cd = std::complex<double>;

void check_k(int n, int k) {
  if (k < 1 || k > n) throw std::out_of_range("irrep index k must lie in 1..n");
}

// Central vectors v_1 = (1, i)/sqrt(2), v_{n-1} = (1, -i)/sqrt(2).
Eigen::Vector2cd central_vector(int n, int k) {
  const double r = 1.0 / std::sqrt(2.0);
  if (k == 1) return Eigen::Vector2cd(cd(r, 0.0), cd(0.0, r));
  if (k == n - 1) return Eigen::Vector2cd(cd(r, 0.0), cd(0.0, -r));
  throw std::logic_error("central vector only exists for k in {1, n-1}");
}

// Column T_k(w) for w = e_c, peripheral part only.
void fill_peripheral(Eigen::MatrixXcd& T, int col, int n, int k, int c) {
  const double zeta = 2.0 * std::numbers::pi / n;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 1; j <= n; ++j) {
    const cd phase = std::polar(scale, j * k * zeta);
    const Eigen::Matrix2d R = rot2(j * zeta);
    T(2 * j, col) = phase * R(0, c);
    T(2 * j + 1, col) = phase * R(1, c);
  }
}

}  // namespace

int irrep_dim(int n, int k) {
  check_k(n, k);
  if (n == 2) return k == 1 ? 4 : 2;
  return (k == 1 || k == n - 1) ? 3 : 2;
}

IrrepBasis irrep_basis(int n, int k) {
  check_k(n, k);
  const int d = 2 * (n + 1);
  IrrepBasis basis;
  basis.k = k;
  basis.columns = Eigen::MatrixXcd::Zero(d, irrep_dim(n, k));

  if (n == 2 && k == 1) {
    // W_1 = {(v, w, w)}: central pair then shared peripheral pair.
    const double r = 1.0 / std::sqrt(2.0);
    basis.columns(0, 0) = 1.0;
    basis.columns(1, 1) = 1.0;
    for (int j = 1; j <= 2; ++j) {
      basis.columns(2 * j, 2) = r;
      basis.columns(2 * j + 1, 3) = r;
    }
    return basis;
  }

  if (k == 1 || k == n - 1) {
    const Eigen::Vector2cd v = central_vector(n, k);
    basis.columns(0, 0) = v(0);
    basis.columns(1, 0) = v(1);
    fill_peripheral(basis.columns, 1, n, k, 0);
    fill_peripheral(basis.columns, 2, n, k, 1);
  } else {
    fill_peripheral(basis.columns, 0, n, k, 0);
    fill_peripheral(basis.columns, 1, n, k, 1);
  }
  return basis;
}

Eigen::MatrixXcd assemble_P(int n) {
  const int d = 2 * (n + 1);
  Eigen::MatrixXcd P(d, d);
  int col = 0;
  for (int k = 1; k <= n; ++k) {
    const IrrepBasis b = irrep_basis(n, k);
    P.middleCols(col, b.dim()) = b.columns;
    col += b.dim();
  }
  if (col != d) throw std::logic_error("irrep dimensions do not fill the space");
  return P;
}

BlockDecomposition decompose_hessian(const Eigen::MatrixXd& H, int n) {
  const int d = 2 * (n + 1);
  if (H.rows() != d || H.cols() != d)
    throw std::invalid_argument("decompose_hessian: matrix size must be 2(n+1)");
  const Eigen::MatrixXcd P = assemble_P(n);
  Eigen::MatrixXcd M = P.adjoint() * H.cast<cd>() * P;

  BlockDecomposition out;
  int offset = 0;
  for (int k = 1; k <= n; ++k) {
    const int dk = irrep_dim(n, k);
    out.blocks[k] = M.block(offset, offset, dk, dk);
    M.block(offset, offset, dk, dk).setZero();
    offset += dk;
  }
  out.residual = M.cwiseAbs().maxCoeff();
  return out;
}

Eigen::MatrixXcd analytic_Bk(const ProblemParams& p, int k) {
  p.validate();
  check_k(p.n, k);
  const double s1 = p.s1();
  const double mu = p.mu;

  if (p.n == 2 && k == 1) {
    // m_1(0) of the n = 2 vortex problem; real symmetric in the (v, w) basis.
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(4, 4);
    const double c = std::sqrt(2.0) * mu;
    B(0, 0) = mu * (mu + 2.5);
    B(1, 1) = mu * (mu - 1.5);
    B(2, 2) = 2.0 * mu + 0.5;
    B(3, 3) = 0.5;
    B(0, 2) = B(2, 0) = -c;
    B(1, 3) = B(3, 1) = c;
    return B;
  }

  if (k == 1 || k == p.n - 1) {
    const double c = std::sqrt(p.n / 2.0) * mu;
    Eigen::MatrixXcd B(3, 3);
    B.setZero();
    B(0, 0) = mu * (s1 + mu);
    B(1, 1) = s1 + 2.0 * mu;
    B(2, 2) = s1;
    B(0, 1) = B(1, 0) = -c;
    B(0, 2) = cd(0.0, -c);
    B(2, 0) = cd(0.0, c);
    if (k == p.n - 1) return B.conjugate();
    return B;
  }

  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(2, 2);
  B(0, 0) = 2.0 * (mu + s1) - p.s_k(k);
  B(1, 1) = p.s_k(k);
  return B;
}

double block_degeneracy_mu(const ProblemParams& p, int k) {
  check_k(p.n, k);
  const double s1 = p.s1();
  if (p.n == 2 && k == 1) return -1.25;  // root of det B_1 beyond mu = 0, omega = 0
  if (k == 1 || k == p.n - 1) return s1 * s1;
  return p.s_k(k) / 2.0 - s1;
}

}  // namespace ringbif
