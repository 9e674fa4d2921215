#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>

#include "ringbif/params.hpp"

// Symmetry-adapted change of variables: the irreducible bases T_k of the
// Z~_n action, the orthogonal map P assembled from them, and the blocks B_k
// of the Hessian at the ring equilibrium (numeric extraction and closed form).

namespace ringbif {

// Complex dimension of W_k.
int irrep_dim(int n, int k);

// Orthonormal basis of W_k as columns of a 2(n+1) x dim complex matrix.
// For k in {1, n-1} (n >= 3) the first column carries the central element
// through v_k = (1, +-i)/sqrt(2); for n = 2, k = 1 the basis is the
// four-dimensional {(v, w, w)} family.
struct IrrepBasis {
  int k = 0;
  Eigen::MatrixXcd columns;
  int dim() const { return static_cast<int>(columns.cols()); }
};

IrrepBasis irrep_basis(int n, int k);

// Unitary change of variables with columns grouped by k = 1..n.
Eigen::MatrixXcd assemble_P(int n);

struct BlockDecomposition {
  std::map<int, Eigen::MatrixXcd> blocks;
  double residual = 0.0;  // max |off-block entry| of P^* H P
};

// Numeric extraction of the blocks of a real symmetric matrix of size 2(n+1).
BlockDecomposition decompose_hessian(const Eigen::MatrixXd& H, int n);

// Closed-form block B_k of D^2 V at the ring equilibrium. For n = 2, k = 1
// this is the 4x4 matrix m_1(0) of the vortex problem.
Eigen::MatrixXcd analytic_Bk(const ProblemParams& p, int k);

// mu at which B_k becomes singular (mu_1 = s1^2, mu_k = s_k/2 - s1); B_n is
// singular for every mu (rotation kernel) and has no isolated degeneracy.
double block_degeneracy_mu(const ProblemParams& p, int k);

}  // namespace ringbif
