#include "fermikit/commutant.hpp"

#include <algorithm>

#include "fermikit/rng.hpp"

namespace fermikit {

namespace {

// Candidate subspace V (d^2 x q, orthonormal columns) is cut down to the
// kernel of X -> BX - XB restricted to V. Kernel decided against the
// eigenvalues of the restricted normal matrix, threshold tol * lambda_max.
// The commutator action is batched into two products over stacked columns.
CMat restrict_to_commuting(const CMat& v_cols, const CMat& b, Index d, double tol) {
  const Index q = v_cols.cols();
  if (q == 0) return v_cols;
  Eigen::MatrixXcd horizontal(d, d * q);  // [X_1 | X_2 | ...]
  Eigen::MatrixXcd vertical(d * q, d);    // [X_1; X_2; ...]
  for (Index c = 0; c < q; ++c) {
    CMat x = unvec(v_cols.col(c), d, d);
    horizontal.middleCols(c * d, d) = x;
    vertical.middleRows(c * d, d) = x;
  }
  Eigen::MatrixXcd left = b * horizontal;   // B X_c blocks
  Eigen::MatrixXcd right = vertical * b;    // X_c B blocks
  CMat w(d * d, q);
  for (Index c = 0; c < q; ++c)
    w.col(c) = vec(CMat(left.middleCols(c * d, d) - right.middleRows(c * d, d)));

  const double scale = std::max(1.0, b.squaredNorm());
  // whole candidate space commutes when the largest violation is noise-level
  if (w.squaredNorm() <= tol * scale) return v_cols;
  CMat m = w.adjoint() * w;
  HermEig eig = herm_eig(CMat(0.5 * (m + m.adjoint())));
  const double lam_max = std::max(eig.values(q - 1), 0.0);
  if (lam_max <= tol * scale) return v_cols;
  const double cut = tol * lam_max;
  Index kernel = 0;
  while (kernel < q && eig.values(kernel) < cut) ++kernel;
  return v_cols * eig.vectors.leftCols(kernel);
}

// Eigenspaces of a generic Hermitian element of the algebra give an a-priori
// block reduction: the commutant of the algebra lies inside the commutant of
// any of its elements.
CMat generic_element_reduction(const std::vector<CMat>& constraint_set, Index d,
                               double tol) {
  Rng rng(0x5eedc0de5eedc0deULL);
  CMat t = CMat::Zero(d, d);
  for (const CMat& b : constraint_set) {
    const cplx c(rng.gaussian(), rng.gaussian());
    t += c * b + std::conj(c) * b.adjoint();
  }
  HermEig eig = herm_eig(CMat(0.5 * (t + t.adjoint())), 1e-6);
  const double scale = std::max({1.0, std::abs(eig.values(0)), std::abs(eig.values(d - 1))});

  // group eigenvalues; commutant of t = block matrices over eigenspaces
  std::vector<std::pair<Index, Index>> blocks;  // [start, end)
  Index start = 0;
  for (Index i = 1; i <= d; ++i) {
    if (i == d || eig.values(i) - eig.values(i - 1) > 1e-7 * scale) {
      blocks.emplace_back(start, i);
      start = i;
    }
  }
  Index total = 0;
  for (auto& [s, e] : blocks) total += (e - s) * (e - s);
  CMat v(d * d, total);
  Index col = 0;
  for (auto& [s, e] : blocks)
    for (Index a = s; a < e; ++a)
      for (Index b = s; b < e; ++b) {
        // vec(u_a u_b^dag) = conj(u_b) kron u_a
        CVec ua = eig.vectors.col(a);
        CVec ub = eig.vectors.col(b);
        CVec w(d * d);
        for (Index j = 0; j < d; ++j)
          w.segment(j * d, d) = std::conj(ub(j)) * ua;
        v.col(col++) = w;
      }
  (void)tol;
  return v;
}

}  // namespace

SubspaceBasis commutant(const OperatorAlgebra& alg, double tol) {
  const Index d = alg.ambient_dim();
  // a dagger-closed constraint set keeps the result a *-algebra; the basis
  // of an OperatorAlgebra spans a *-closed space already, generator lists
  // need their adjoints appended
  std::vector<CMat> closed;
  if (alg.generators().empty()) {
    closed = alg.basis();
  } else {
    closed = alg.generators();
    for (const CMat& b : alg.generators()) closed.push_back(b.adjoint());
  }

  CMat v = generic_element_reduction(closed, d, tol);
  for (const CMat& b : closed) {
    v = restrict_to_commuting(v, b, d, tol);
    if (v.cols() == 0) break;
  }

  SubspaceBasis out;
  out.ambient_dim = d;
  for (Index c = 0; c < v.cols(); ++c) out.mats.push_back(unvec(v.col(c), d, d));
  return out;
}

SubspaceBasis twisted_commutant(const OperatorAlgebra& alg, const Grading& g,
                                double tol) {
  const CMat& gamma = g.gamma();
  for (const CMat& b : alg.basis()) {
    CMat twisted = gamma * b * gamma;
    if (alg.span_residual(twisted) > tol * std::max(1.0, twisted.norm()))
      throw Error(ErrorCode::NotGradingStable,
                  "twisted_commutant: algebra not stable under ad_Gamma");
  }
  SubspaceBasis comm = commutant(alg, tol);
  std::vector<CMat> twisted;
  twisted.reserve(comm.mats.size());
  for (const CMat& c : comm.mats) twisted.push_back(klein_kappa(c, g));
  SubspaceBasis out;
  out.ambient_dim = comm.ambient_dim;
  out.mats = hs_orthonormalize(twisted, tol);
  return out;
}

SubspaceComparison subspace_equal(const SubspaceBasis& a, const SubspaceBasis& b,
                                  double tol) {
  if (a.ambient_dim != b.ambient_dim)
    throw Error(ErrorCode::ShapeMismatch, "subspace_equal: ambient dimension mismatch");
  // ||P_a - P_b||_F^2 = sum_i ||(1-P_b) a_i||^2 + sum_j ||(1-P_a) b_j||^2,
  // computed from projection residuals to avoid cancellation.
  const Index d2 = a.ambient_dim * a.ambient_dim;
  Eigen::MatrixXcd qa(d2, a.dim()), qb(d2, b.dim());
  for (Index i = 0; i < a.dim(); ++i) qa.col(i) = vec(a.mats[i]);
  for (Index j = 0; j < b.dim(); ++j) qb.col(j) = vec(b.mats[j]);
  double dist2 = 0.0;
  if (a.dim() > 0 && b.dim() > 0) {
    Eigen::MatrixXcd ra = qa - qb * (qb.adjoint() * qa);
    Eigen::MatrixXcd rb = qb - qa * (qa.adjoint() * qb);
    dist2 = ra.squaredNorm() + rb.squaredNorm();
  } else {
    dist2 = double(a.dim() + b.dim());
  }
  const double distance = std::sqrt(dist2);
  const double hs_dim = double(a.ambient_dim) * double(a.ambient_dim);
  return {distance <= tol * std::sqrt(hs_dim), distance};
}

RankVerdict cyclic_check(const CVec& xi, const OperatorAlgebra& alg, double tol) {
  const Index d = alg.ambient_dim();
  const Index m = alg.dim();
  CMat orbit(d, m);
  for (Index k = 0; k < m; ++k) orbit.col(k) = alg.basis()[k] * xi;
  CMat gram = orbit.adjoint() * orbit;
  RVec lam = herm_eigvals(CMat(0.5 * (gram + gram.adjoint())));
  const double lam_max = lam.size() ? std::max(lam(lam.size() - 1), 0.0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < lam.size(); ++i)
    if (lam_max > 0.0 && lam(i) >= tol * lam_max) ++rank;
  return {rank == d, rank, d};
}

RankVerdict separating_check(const CVec& xi, const OperatorAlgebra& alg, double tol) {
  const Index d = alg.ambient_dim();
  const Index m = alg.dim();
  CMat orbit(d, m);
  for (Index k = 0; k < m; ++k) orbit.col(k) = alg.basis()[k] * xi;
  CMat gram = orbit.adjoint() * orbit;
  RVec lam = herm_eigvals(CMat(0.5 * (gram + gram.adjoint())));
  const double lam_max = lam.size() ? std::max(lam(lam.size() - 1), 0.0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < lam.size(); ++i)
    if (lam_max > 0.0 && lam(i) >= tol * lam_max) ++rank;
  return {rank == m, rank, m};
}

BjlResult bjl_duality_check(const std::vector<int>& I, const FockSpace& fs,
                            double tol) {
  const int n = fs.sites();
  const std::uint32_t imask = fs.mask_of(I);

  auto doubled_basis = [&](const std::vector<int>& sites) {
    std::vector<CVec> zs;
    for (int l : sites) {
      CVec z1 = CVec::Zero(2 * n);
      z1(l - 1) = 1.0;  // (e_l, 0)
      CVec z2 = CVec::Zero(2 * n);
      z2(n + l - 1) = 1.0;  // (0, e_l)
      zs.push_back(z1);
      zs.push_back(z2);
    }
    return zs;
  };

  std::vector<int> complement;
  for (int l = 1; l <= n; ++l)
    if (!(imask & (1u << (l - 1)))) complement.push_back(l);

  OperatorAlgebra mz = I.empty() ? OperatorAlgebra::scalars(fs.dim())
                                 : algebra_MZ(doubled_basis(I), fs, tol);
  OperatorAlgebra mz_perp = complement.empty()
                                ? OperatorAlgebra::scalars(fs.dim())
                                : algebra_MZ(doubled_basis(complement), fs, tol);

  SubspaceBasis lhs = commutant(mz, tol);
  CMat k = k_operator(fs);
  SubspaceBasis rhs;
  rhs.ambient_dim = fs.dim();
  for (const CMat& b : mz_perp.basis()) rhs.mats.push_back(CMat(k * b * k.adjoint()));
  rhs.mats = hs_orthonormalize(rhs.mats, tol);

  SubspaceComparison cmp = subspace_equal(lhs, rhs, tol);

  // Prop gam'': cyclicity of the vacuum for M(Z) must match separation of
  // K f_empty for the twisted commutant.
  CVec vac = CVec::Zero(fs.dim());
  vac(0) = 1.0;
  Grading gamma = grading_operator(fs);
  SubspaceBasis twisted = twisted_commutant(mz.with_grading(gamma), gamma, tol);
  CVec kvac = k * vac;
  const bool cyc = cyclic_check(vac, mz, tol).ok;
  const bool sep = separating_check(kvac, twisted.as_algebra(), tol).ok;

  return {cmp.distance, cmp.equal, cyc == sep};
}

}  // namespace fermikit
