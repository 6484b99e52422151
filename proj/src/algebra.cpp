#include "fermikit/algebra.hpp"

namespace fermikit {

Grading::Grading(CMat gamma, double tol) : gamma_(std::move(gamma)) {
  if (gamma_.rows() != gamma_.cols())
    throw Error(ErrorCode::InvalidArgument, "Grading: matrix not square");
  const double scale = std::max(1.0, gamma_.norm());
  if ((gamma_ - gamma_.adjoint()).norm() > tol * scale)
    throw Error(ErrorCode::InvalidArgument, "Grading: Gamma not self-adjoint");
  if ((gamma_ * gamma_ - CMat::Identity(gamma_.rows(), gamma_.rows())).norm() > tol * scale)
    throw Error(ErrorCode::InvalidArgument, "Grading: Gamma^2 != I");
}

Grading Grading::trivial(Index dim) { return Grading(CMat::Identity(dim, dim)); }

bool Grading::is_trivial(double tol) const {
  return (gamma_ - CMat::Identity(dim(), dim())).norm() <= tol * std::sqrt(double(dim()));
}

std::vector<CMat> hs_orthonormalize(const std::vector<CMat>& mats, double tol) {
  if (mats.empty()) return {};
  const Index rows = mats.front().rows(), cols = mats.front().cols();
  double max_norm = 0.0;
  for (const CMat& m : mats) max_norm = std::max(max_norm, m.norm());

  Eigen::MatrixXcd q(rows * cols, static_cast<Index>(mats.size()));
  Index kept = 0;
  for (const CMat& m : mats) {
    Eigen::VectorXcd v = vec(m);
    // two MGS sweeps for numerical orthogonality
    for (int sweep = 0; sweep < 2; ++sweep)
      if (kept > 0) v -= q.leftCols(kept) * (q.leftCols(kept).adjoint() * v);
    const double n = v.norm();
    if (n > tol * std::max(1.0, max_norm)) q.col(kept++) = v / n;
  }
  std::vector<CMat> out;
  out.reserve(kept);
  for (Index c = 0; c < kept; ++c) out.push_back(unvec(q.col(c), rows, cols));
  return out;
}

OperatorAlgebra::OperatorAlgebra(Index ambient_dim, std::vector<CMat> basis,
                                 std::optional<Grading> grading,
                                 std::vector<CMat> generators)
    : ambient_dim_(ambient_dim),
      basis_(std::move(basis)),
      grading_(std::move(grading)),
      generators_(std::move(generators)) {
  for (const CMat& b : basis_)
    if (b.rows() != ambient_dim_ || b.cols() != ambient_dim_)
      throw Error(ErrorCode::ShapeMismatch, "OperatorAlgebra: basis dimension mismatch");
  if (grading_ && grading_->dim() != ambient_dim_)
    throw Error(ErrorCode::ShapeMismatch, "OperatorAlgebra: grading dimension mismatch");
}

OperatorAlgebra OperatorAlgebra::full_matrix(Index d) {
  std::vector<CMat> basis;
  basis.reserve(d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      CMat e = CMat::Zero(d, d);
      e(i, j) = 1.0;
      basis.push_back(std::move(e));
    }
  return OperatorAlgebra(d, std::move(basis));
}

OperatorAlgebra OperatorAlgebra::scalars(Index d) {
  CMat u = CMat::Identity(d, d) / std::sqrt(double(d));
  return OperatorAlgebra(d, {u});
}

CVec OperatorAlgebra::coords(const CMat& x) const {
  CVec c(dim());
  for (Index k = 0; k < dim(); ++k) c(k) = hs_inner(x, basis_[k]);
  return c;
}

CMat OperatorAlgebra::from_coords(const CVec& c) const {
  if (c.size() != dim())
    throw Error(ErrorCode::ShapeMismatch, "OperatorAlgebra::from_coords: size mismatch");
  CMat x = CMat::Zero(ambient_dim_, ambient_dim_);
  for (Index k = 0; k < dim(); ++k) x += c(k) * basis_[k];
  return x;
}

CMat OperatorAlgebra::project(const CMat& x) const { return from_coords(coords(x)); }

double OperatorAlgebra::span_residual(const CMat& x) const {
  return (x - project(x)).norm();
}

bool OperatorAlgebra::contains(const CMat& x, double tol) const {
  return span_residual(x) <= tol * std::max(1.0, x.norm());
}

OperatorAlgebra::ClosureReport OperatorAlgebra::closure_report() const {
  ClosureReport rep{0.0, 0.0, 0.0, 0.0};
  for (const CMat& b : basis_)
    rep.dagger_residual = std::max(rep.dagger_residual, span_residual(b.adjoint()));
  for (const CMat& a : basis_)
    for (const CMat& b : basis_)
      rep.product_residual = std::max(rep.product_residual, span_residual(a * b));
  rep.unit_residual = span_residual(CMat::Identity(ambient_dim_, ambient_dim_));
  for (Index k = 0; k < dim(); ++k)
    for (Index l = 0; l < dim(); ++l) {
      const cplx g = hs_inner(basis_[k], basis_[l]);
      const double target = (k == l) ? 1.0 : 0.0;
      rep.orthonormality_residual =
          std::max(rep.orthonormality_residual, std::abs(g - cplx(target)));
    }
  return rep;
}

OperatorAlgebra OperatorAlgebra::with_grading(Grading g) const {
  return OperatorAlgebra(ambient_dim_, basis_, std::move(g), generators_);
}

OperatorAlgebra OperatorAlgebra::with_generators(std::vector<CMat> gens) const {
  return OperatorAlgebra(ambient_dim_, basis_, grading_, std::move(gens));
}

double SubspaceBasis::span_residual(const CMat& x) const {
  CMat r = x;
  for (const CMat& q : mats) r -= hs_inner(x, q) * q;
  return r.norm();
}

OperatorAlgebra SubspaceBasis::as_algebra(std::optional<Grading> grading,
                                          std::vector<CMat> generators) const {
  return OperatorAlgebra(ambient_dim, mats, std::move(grading), std::move(generators));
}

SubspaceBasis SubspaceBasis::from_algebra(const OperatorAlgebra& alg) {
  return {alg.ambient_dim(), alg.basis()};
}

bool GradedFunctional::is_state(double tol) const {
  if (density.rows() != density.cols()) return false;
  if ((density - density.adjoint()).norm() > tol * std::max(1.0, density.norm()))
    return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(density, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) return false;
  return std::abs(density.trace() - cplx(1.0)) <= tol * std::max(1.0, density.norm());
}

bool GradedFunctional::is_even(const Grading& g, double tol) const {
  const CMat& gamma = g.gamma();
  return (gamma * density * gamma - density).norm() <= tol * std::max(1.0, density.norm());
}

GradedFunctional GradedFunctional::trace_state(Index d) {
  return {CMat::Identity(d, d) / double(d)};
}

GradedFunctional GradedFunctional::vector_state(const CVec& xi) {
  return {CMat(xi * xi.adjoint())};
}

}  // namespace fermikit
