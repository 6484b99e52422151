#include "fermikit/numlin.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace fermikit {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::NotFaithful: return "NotFaithful";
    case ErrorCode::NotCP: return "NotCP";
    case ErrorCode::NotFullAlgebra: return "NotFullAlgebra";
    case ErrorCode::NotGradingStable: return "NotGradingStable";
    case ErrorCode::NotCyclic: return "NotCyclic";
    case ErrorCode::StateMismatch: return "StateMismatch";
    case ErrorCode::CommutationFailed: return "CommutationFailed";
    case ErrorCode::OverlappingSets: return "OverlappingSets";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SiteOutOfRange: return "SiteOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

CMat identity(Index d) { return CMat::Identity(d, d); }
CMat zeros(Index rows, Index cols) { return CMat::Zero(rows, cols); }

bool all_finite(const CMat& a) { return a.allFinite(); }

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace {

void require_hermitian(const CMat& a, double tol) {
  if (a.rows() != a.cols())
    throw Error(ErrorCode::NotHermitian, "herm_eigvals: matrix not square");
  const double scale = a.norm();
  if ((a - a.adjoint()).norm() > tol * std::max(1.0, scale))
    throw Error(ErrorCode::NotHermitian, "herm_eigvals: matrix not Hermitian at tolerance");
}

}  // namespace

RVec herm_eigvals(const CMat& a, double tol) {
  require_hermitian(a, tol);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

HermEig herm_eig(const CMat& a, double tol) {
  require_hermitian(a, tol);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  return {es.eigenvalues(), es.eigenvectors()};
}

std::vector<CVec> nullspace(const CMat& a, double tol) {
  const Index n = a.cols();
  if (n == 0) return {};
  CMat gram = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
  const RVec& lam = es.eigenvalues();
  const double lam_max = lam.size() ? std::max(lam(lam.size() - 1), 0.0) : 0.0;
  const double cut = tol * lam_max;
  std::vector<CVec> out;
  for (Index k = 0; k < lam.size(); ++k)
    if (lam(k) < cut || lam_max == 0.0) out.push_back(es.eigenvectors().col(k));
  return out;
}

LstsqResult solve_lstsq(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows())
    throw Error(ErrorCode::ShapeMismatch, "solve_lstsq: incompatible shapes");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(a);
  CMat x = cod.solve(b);
  double residual = (a * x - b).norm();
  return {std::move(x), residual};
}

CVec vec(const CMat& x) {
  CVec v(x.rows() * x.cols());
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i) v(j * x.rows() + i) = x(i, j);
  return v;
}

CMat unvec(const CVec& v, Index rows, Index cols) {
  if (v.size() != rows * cols)
    throw Error(ErrorCode::ShapeMismatch, "unvec: size mismatch");
  CMat x(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) x(i, j) = v(j * rows + i);
  return x;
}

CMat SuperOp::apply(const CMat& x) const {
  if (x.rows() != dim_in || x.cols() != dim_in)
    throw Error(ErrorCode::ShapeMismatch, "SuperOp::apply: input dimension mismatch");
  return unvec(mat * vec(x), dim_out, dim_out);
}

SuperOp SuperOp::identity_map(Index d) {
  return {d, d, CMat::Identity(d * d, d * d)};
}

SuperOp SuperOp::from_kraus(const std::vector<CMat>& kraus) {
  if (kraus.empty())
    throw Error(ErrorCode::InvalidArgument, "SuperOp::from_kraus: empty Kraus list");
  const Index dout = kraus.front().rows();
  const Index din = kraus.front().cols();
  CMat m = CMat::Zero(dout * dout, din * din);
  for (const CMat& k : kraus) {
    if (k.rows() != dout || k.cols() != din)
      throw Error(ErrorCode::ShapeMismatch, "SuperOp::from_kraus: inconsistent Kraus shapes");
    // vec(K x K^dag) = (conj(K) kron K) vec(x)
    m += kron(k.conjugate(), k);
  }
  return {din, dout, std::move(m)};
}

SuperOp SuperOp::conjugation(const CMat& u) {
  return from_kraus({u});
}

SuperOp SuperOp::transpose_map(Index d) {
  CMat m = CMat::Zero(d * d, d * d);
  // vec(x^T)(j*d+i) = vec(x)(i*d+j)
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) m(j * d + i, i * d + j) = 1.0;
  return {d, d, std::move(m)};
}

SuperOp SuperOp::compose(const SuperOp& f, const SuperOp& g) {
  if (f.dim_in != g.dim_out)
    throw Error(ErrorCode::ShapeMismatch, "SuperOp::compose: dimension mismatch");
  return {g.dim_in, f.dim_out, f.mat * g.mat};
}

CMat choi_matrix(const SuperOp& phi) {
  const Index n = phi.dim_in;
  const Index m = phi.dim_out;
  CMat choi = CMat::Zero(n * m, n * m);
  CMat eij = CMat::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      eij(i, j) = 1.0;
      choi.block(i * m, j * m, m, m) = phi.apply(eij);
      eij(i, j) = 0.0;
    }
  return choi;
}

}  // namespace fermikit
