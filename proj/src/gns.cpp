#include "fermikit/gns.hpp"

#include <array>

namespace fermikit {

CMat GnsTriple::represent(const CMat& x) const {
  CVec c = algebra.coords(x);
  CMat out = CMat::Zero(dim, dim);
  for (Index k = 0; k < algebra.dim(); ++k) out += c(k) * pi[k];
  return out;
}

GnsTriple gns(const OperatorAlgebra& alg, const GradedFunctional& f, double tol) {
  const Index m = alg.dim();
  CMat gram(m, m);
  for (Index l = 0; l < m; ++l)
    for (Index k = 0; k < m; ++k)
      gram(l, k) = f.value(CMat(alg.basis()[l].adjoint() * alg.basis()[k]));
  CMat herm = 0.5 * (gram + gram.adjoint());
  HermEig eig = herm_eig(herm);
  const double lam_max = std::max(eig.values(m - 1), 0.0);
  if (eig.values(0) < -tol * std::max(1.0, lam_max))
    throw Error(ErrorCode::NotPositive, "gns: functional not positive on the algebra");

  Index first_kept = 0;
  while (first_kept < m && eig.values(first_kept) <= tol * lam_max) ++first_kept;
  const Index r = m - first_kept;

  GnsTriple g{alg, r, {}, CVec(), CMat(), CMat()};
  if (r == 0) {
    g.embed = CMat::Zero(0, m);
    g.lift = CMat::Zero(m, 0);
    g.xi = CVec::Zero(0);
    g.pi.assign(m, CMat::Zero(0, 0));
    return g;
  }

  CMat u = eig.vectors.rightCols(r);
  RVec lam = eig.values.tail(r);
  CMat sqrt_lam = CMat::Zero(r, r), inv_sqrt = CMat::Zero(r, r);
  for (Index i = 0; i < r; ++i) {
    sqrt_lam(i, i) = std::sqrt(lam(i));
    inv_sqrt(i, i) = 1.0 / std::sqrt(lam(i));
  }
  g.embed = sqrt_lam * u.adjoint();  // r x m
  g.lift = u * inv_sqrt;             // m x r

  for (Index k = 0; k < m; ++k) {
    // left multiplication coefficient matrix
    CMat s(m, m);
    for (Index i = 0; i < m; ++i)
      s.col(i) = alg.coords(CMat(alg.basis()[k] * alg.basis()[i]));
    g.pi.push_back(CMat(g.embed * s * g.lift));
  }
  g.xi = g.embed * alg.coords(CMat::Identity(alg.ambient_dim(), alg.ambient_dim()));
  return g;
}

CMat conjugation_coeff(const OperatorAlgebra& alg, const CMat& u) {
  const Index m = alg.dim();
  CMat t(m, m);
  for (Index k = 0; k < m; ++k)
    t.col(k) = alg.coords(CMat(u * alg.basis()[k] * u.adjoint()));
  return t;
}

CMat covariant_unitary(const GnsTriple& g, const CMat& theta_coeff) {
  return g.embed * theta_coeff * g.lift;
}

namespace {

// Polar decomposition of the antilinear S = M o conj: Delta = M^T conj(M),
// J-matrix = M conj(Delta^{-1/2}).
ModularData polar_antilinear(const CMat& m_s, double tol) {
  CMat delta = m_s.transpose() * m_s.conjugate();
  CMat herm = 0.5 * (delta + delta.adjoint());
  HermEig eig = herm_eig(herm, 1e-8);
  const double lam_max = std::max(eig.values(eig.values.size() - 1), 0.0);
  if (eig.values(0) <= tol * lam_max)
    throw Error(ErrorCode::NotFaithful, "modular data: S operator is singular");
  CMat inv_sqrt = CMat::Zero(herm.rows(), herm.cols());
  for (Index i = 0; i < eig.values.size(); ++i)
    inv_sqrt += (1.0 / std::sqrt(eig.values(i))) *
                CMat(eig.vectors.col(i) * eig.vectors.col(i).adjoint());
  ModularData md;
  md.delta = herm;
  md.j_mat = m_s * inv_sqrt.conjugate();
  return md;
}

}  // namespace

ModularData modular_data(const GnsTriple& g, double tol) {
  const Index m = g.algebra.dim();
  if (g.dim != m)
    throw Error(ErrorCode::NotFaithful, "modular_data: Gram rank below algebra dimension");
  CMat star(m, m);
  for (Index k = 0; k < m; ++k)
    star.col(k) = g.algebra.coords(CMat(g.algebra.basis()[k].adjoint()));
  CMat m_s = g.embed * star * g.lift.conjugate();
  return polar_antilinear(m_s, tol);
}

ModularData ambient_modular_data(const OperatorAlgebra& alg, const CVec& xi,
                                 double tol) {
  const Index d = alg.ambient_dim();
  const Index m = alg.dim();
  if (m != d)
    throw Error(ErrorCode::NotFaithful,
                "ambient_modular_data: algebra dimension must match the space");
  CMat v(d, m), w(d, m);
  for (Index k = 0; k < m; ++k) {
    v.col(k) = alg.basis()[k] * xi;
    w.col(k) = alg.basis()[k].adjoint() * xi;
  }
  // cyclicity = full rank of the orbit matrix
  CMat orbit_gram = v.adjoint() * v;
  RVec lam = herm_eigvals(CMat(0.5 * (orbit_gram + orbit_gram.adjoint())));
  const double lam_max = std::max(lam(lam.size() - 1), 0.0);
  if (lam_max <= 0.0 || lam(0) < tol * lam_max)
    throw Error(ErrorCode::NotCyclic, "ambient_modular_data: vector not cyclic");
  // solve m_s * conj(v) = w
  Eigen::MatrixXcd vc = v.conjugate();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(vc.transpose());
  CMat m_s = CMat(lu.solve(Eigen::MatrixXcd(w.transpose())).transpose());
  if ((m_s * vc - w).norm() > 1e-6 * std::max(1.0, w.norm()))
    throw Error(ErrorCode::NotCyclic, "ambient_modular_data: residual too large");
  return polar_antilinear(m_s, tol);
}

CMat modular_conjugate(const ModularData& md, const CMat& x) {
  return md.j_mat * x.transpose() * md.j_mat.conjugate();
}

DiagonalState::DiagonalState(const OperatorAlgebra& alg, const GradedFunctional& f,
                             double tol)
    : alg_(alg), gns_(gns(alg, f, tol)), md_(modular_data(gns_, tol)) {
  if (!alg_.grading())
    throw Error(ErrorCode::InvalidArgument, "DiagonalState: algebra carries no grading");
  if (!f.is_even(*alg_.grading(), 1e-8))
    throw Error(ErrorCode::InvalidArgument, "DiagonalState: state must be even");
  v_ = covariant_unitary(gns_, conjugation_coeff(alg_, alg_.grading()->gamma()));
  v_grading_.emplace(v_, 1e-8);

  const Index m = alg_.dim();
  table_ = CMat(m, m);
  for (Index p = 0; p < m; ++p)
    for (Index q = 0; q < m; ++q)
      table_(p, q) = eval(alg_.basis()[p], alg_.basis()[q]);
}

CMat DiagonalState::pi_delta(const CMat& a, const CMat& b) const {
  CMat pia = gns_.represent(a);
  CMat pib_star = gns_.represent(CMat(b.adjoint()));
  CMat jb = md_.j_mat * pib_star.conjugate() * md_.j_mat.conjugate();
  return pia * klein_eta(jb, *v_grading_);
}

cplx DiagonalState::eval(const CMat& a, const CMat& b) const {
  CMat op = pi_delta(a, b);
  return (gns_.xi.adjoint() * (op * gns_.xi))(0);
}

PositivityVerdict DiagonalState::gram_certificate(double tol) const {
  const Index m = alg_.dim();
  const Grading& gamma = *alg_.grading();

  std::vector<std::array<CMat, 2>> parts(m);
  for (Index k = 0; k < m; ++k)
    parts[k] = {even_part(alg_.basis()[k], gamma), odd_part(alg_.basis()[k], gamma)};

  // delta(x (x) y^o) is bilinear in the HS coordinates of x and y, so every
  // Gram entry contracts coordinate vectors through the precomputed table:
  // (b_k (x) b_l^o)^* (b_m (x) b_n^o)
  //   = sum eps(pa,pb) eps(pb,pc) (b_k^pa)^dag b_m^pc (x) (b_n (b_l^pb)^dag)^o
  const Index mm2 = m * m;
  std::vector<CVec> right(2 * mm2);
  for (Index l = 0; l < m; ++l)
    for (Index n = 0; n < m; ++n)
      for (int pb = 0; pb < 2; ++pb)
        right[2 * (l * m + n) + pb] =
            alg_.coords(CMat(alg_.basis()[n] * parts[l][pb].adjoint()));

  CMat gram(mm2, mm2);
  for (Index k = 0; k < m; ++k)
    for (Index mo = 0; mo < m; ++mo) {
      std::array<CVec, 4> u;
      for (int pa = 0; pa < 2; ++pa)
        for (int pc = 0; pc < 2; ++pc)
          u[2 * pa + pc] = table_.transpose() *
                           alg_.coords(CMat(parts[k][pa].adjoint() * parts[mo][pc]));
      for (Index l = 0; l < m; ++l)
        for (Index n = 0; n < m; ++n) {
          cplx entry = 0;
          for (int pa = 0; pa < 2; ++pa)
            for (int pb = 0; pb < 2; ++pb)
              for (int pc = 0; pc < 2; ++pc) {
                const int sign = fermi_sign(pa ? -1 : 1, pb ? -1 : 1) *
                                 fermi_sign(pb ? -1 : 1, pc ? -1 : 1);
                // bilinear contraction, no conjugation
                entry += double(sign) *
                         (u[2 * pa + pc].transpose() * right[2 * (l * m + n) + pb])(0);
              }
          gram(k * m + l, mo * m + n) = entry;
        }
    }

  CMat herm = 0.5 * (gram + gram.adjoint());
  RVec ev = herm_eigvals(herm, 1e-6);
  const double lam_max = std::max(ev(ev.size() - 1), 0.0);
  return {ev(0) >= -tol * std::max(1.0, lam_max), ev(0)};
}

GradedRepVerdict DiagonalState::representation_certificate() const {
  const Index m = alg_.dim();
  const Grading& gamma = *alg_.grading();
  GradedRepVerdict verdict{0.0, 0.0, 0.0};

  std::vector<std::array<CMat, 2>> parts(m);
  for (Index k = 0; k < m; ++k)
    parts[k] = {even_part(alg_.basis()[k], gamma), odd_part(alg_.basis()[k], gamma)};

  for (Index k = 0; k < m; ++k)
    for (Index l = 0; l < m; ++l) {
      // (a (x) b^o)^* = sum_pa,pb eps(pa,pb) (a_pa)^dag (x) ((b_pb)^dag)^o
      CMat star_lhs = CMat::Zero(gns_.dim, gns_.dim);
      for (int pa = 0; pa < 2; ++pa)
        for (int pb = 0; pb < 2; ++pb) {
          const int sign = fermi_sign(pa ? -1 : 1, pb ? -1 : 1);
          star_lhs += double(sign) * pi_delta(CMat(parts[k][pa].adjoint()),
                                              CMat(parts[l][pb].adjoint()));
        }
      CMat star_rhs = pi_delta(alg_.basis()[k], alg_.basis()[l]).adjoint();
      verdict.star_residual =
          std::max(verdict.star_residual, (star_lhs - star_rhs).norm());
    }

  for (Index k = 0; k < m; ++k)
    for (Index l = 0; l < m; ++l) {
      CMat left = pi_delta(alg_.basis()[k], alg_.basis()[l]);
      for (Index mo = 0; mo < m; ++mo)
        for (Index n = 0; n < m; ++n) {
          // (a (x) b^o)(c (x) d^o) = eps(pb,pc) (a c_pc (x) (d (b_pb))^o)
          CMat lhs = CMat::Zero(gns_.dim, gns_.dim);
          for (int pb = 0; pb < 2; ++pb)
            for (int pc = 0; pc < 2; ++pc) {
              const int sign = fermi_sign(pb ? -1 : 1, pc ? -1 : 1);
              lhs += double(sign) * pi_delta(CMat(alg_.basis()[k] * parts[mo][pc]),
                                             CMat(alg_.basis()[n] * parts[l][pb]));
            }
          CMat rhs = left * pi_delta(alg_.basis()[mo], alg_.basis()[n]);
          verdict.multiplicativity_residual =
              std::max(verdict.multiplicativity_residual, (lhs - rhs).norm());
        }
    }
  return verdict;
}

cplx diagonal_state(const OperatorAlgebra& alg, const GradedFunctional& f,
                    const CMat& a, const CMat& b, double tol) {
  DiagonalState ds(alg, f, tol);
  return ds.eval(a, b);
}

Stinespring stinespring(const SuperOp& phi, double tol) {
  const Index n = phi.dim_in;
  const Index mo = phi.dim_out;
  CMat choi = choi_matrix(phi);
  CMat herm = 0.5 * (choi + choi.adjoint());
  HermEig eig = herm_eig(herm, 1e-8);
  const double lam_max = std::max(eig.values(eig.values.size() - 1), 0.0);
  if (eig.values(0) < -tol * std::max(1.0, lam_max))
    throw Error(ErrorCode::NotCP, "stinespring: Choi matrix not positive semidefinite");

  Stinespring out;
  for (Index a = 0; a < eig.values.size(); ++a) {
    const double lam = eig.values(a);
    if (lam <= tol * std::max(1.0, lam_max)) continue;
    CMat k(mo, n);
    for (Index i = 0; i < n; ++i)
      for (Index r = 0; r < mo; ++r)
        k(r, i) = std::sqrt(lam) * eig.vectors(i * mo + r, a);
    out.kraus.push_back(std::move(k));
  }
  out.copies = static_cast<Index>(out.kraus.size());
  out.v = CMat::Zero(out.copies * n, mo);
  for (Index a = 0; a < out.copies; ++a)
    out.v.block(a * n, 0, n, mo) = out.kraus[a].adjoint();
  return out;
}

}  // namespace fermikit
