#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fermikit {

using cplx = std::complex<double>;
using Index = Eigen::Index;

/// Dense complex matrix, row-major. The universal carrier for operators,
/// states and vectors throughout the toolkit.
using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
using RVec = Eigen::VectorXd;

/// Default relative tolerance for all zero-comparisons (Frobenius-scaled).
inline constexpr double kDefaultTol = 1e-10;

enum class ErrorCode {
  ShapeMismatch,
  NotHermitian,
  NotPositive,
  NotFaithful,
  NotCP,
  NotFullAlgebra,
  NotGradingStable,
  NotCyclic,
  StateMismatch,
  CommutationFailed,
  OverlappingSets,
  NoConvergence,
  SiteOutOfRange,
  InvalidArgument,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

const char* to_string(ErrorCode code);

CMat identity(Index d);
CMat zeros(Index rows, Index cols);

inline CMat dagger(const CMat& a) { return a.adjoint(); }
inline double fro_norm(const CMat& a) { return a.norm(); }

/// Hilbert-Schmidt inner product <a,b> = tr(b^dag a), computed entrywise.
inline cplx hs_inner(const CMat& a, const CMat& b) {
  return b.conjugate().cwiseProduct(a).sum();
}

bool all_finite(const CMat& a);

/// Kronecker product; dimensions multiply.
CMat kron(const CMat& a, const CMat& b);

/// Eigenvalues of a Hermitian matrix, ascending. Throws NotHermitian when
/// ||a - a^dag||_F > tol * ||a||_F.
RVec herm_eigvals(const CMat& a, double tol = kDefaultTol);

struct HermEig {
  RVec values;   // ascending
  CMat vectors;  // columns, orthonormal
};

/// Full Hermitian eigendecomposition a = V diag(values) V^dag.
HermEig herm_eig(const CMat& a, double tol = kDefaultTol);

/// Orthonormal basis of the kernel of a. Rank decided against the
/// eigenvalues of a^dag a: an eigenvalue lambda belongs to the kernel iff
/// lambda < tol * lambda_max (ties count as nonzero).
std::vector<CVec> nullspace(const CMat& a, double tol = kDefaultTol);

struct LstsqResult {
  CMat x;
  double residual;  // ||a x - b||_F
};

/// Minimum-norm least-squares solution of a x = b.
LstsqResult solve_lstsq(const CMat& a, const CMat& b);

/// Column-stacking vectorization; satisfies vec(A X B) = (B^T kron A) vec(X).
CVec vec(const CMat& x);
CMat unvec(const CVec& v, Index rows, Index cols);

/// Linear map on matrices encoded as a matrix acting on the vectorized space.
struct SuperOp {
  Index dim_in = 0;   // input matrices are dim_in x dim_in
  Index dim_out = 0;  // output matrices are dim_out x dim_out
  CMat mat;           // dim_out^2 x dim_in^2

  CMat apply(const CMat& x) const;

  static SuperOp identity_map(Index d);
  static SuperOp from_kraus(const std::vector<CMat>& kraus);
  /// x -> u x u^dag
  static SuperOp conjugation(const CMat& u);
  /// x -> x^T
  static SuperOp transpose_map(Index d);
  static SuperOp compose(const SuperOp& f, const SuperOp& g);  // f after g
};

/// Choi matrix sum_ij E_ij kron Phi(E_ij) of a map on full M_d.
CMat choi_matrix(const SuperOp& phi);

}  // namespace fermikit
