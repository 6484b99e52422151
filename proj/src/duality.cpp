#include "fermikit/duality.hpp"

#include "fermikit/graded.hpp"
#include "fermikit/rng.hpp"

namespace fermikit {

AlgebraMap::AlgebraMap(OperatorAlgebra domain, OperatorAlgebra codomain, CMat coeff)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), coeff_(std::move(coeff)) {
  if (coeff_.rows() != codomain_.dim() || coeff_.cols() != domain_.dim())
    throw Error(ErrorCode::ShapeMismatch, "AlgebraMap: coefficient matrix shape mismatch");
}

AlgebraMap AlgebraMap::identity_map(const OperatorAlgebra& alg) {
  return AlgebraMap(alg, alg, CMat(CMat::Identity(alg.dim(), alg.dim())));
}

AlgebraMap AlgebraMap::from_images(const OperatorAlgebra& domain,
                                   const OperatorAlgebra& codomain,
                                   const std::vector<CMat>& images, double tol) {
  if (static_cast<Index>(images.size()) != domain.dim())
    throw Error(ErrorCode::ShapeMismatch, "AlgebraMap::from_images: one image per basis element");
  CMat coeff(codomain.dim(), domain.dim());
  for (Index k = 0; k < domain.dim(); ++k) {
    if (codomain.span_residual(images[k]) > tol * std::max(1.0, images[k].norm()))
      throw Error(ErrorCode::InvalidArgument,
                  "AlgebraMap::from_images: image leaves the codomain span");
    coeff.col(k) = codomain.coords(images[k]);
  }
  return AlgebraMap(domain, codomain, std::move(coeff));
}

AlgebraMap AlgebraMap::from_function(const OperatorAlgebra& domain,
                                     const OperatorAlgebra& codomain,
                                     const std::function<CMat(const CMat&)>& fn,
                                     double tol) {
  std::vector<CMat> images;
  images.reserve(domain.dim());
  for (const CMat& b : domain.basis()) images.push_back(fn(b));
  return from_images(domain, codomain, images, tol);
}

AlgebraMap AlgebraMap::conjugation(const OperatorAlgebra& domain,
                                   const OperatorAlgebra& codomain, const CMat& u,
                                   double tol) {
  return from_function(domain, codomain,
                       [&](const CMat& x) { return CMat(u * x * u.adjoint()); }, tol);
}

AlgebraMap AlgebraMap::grading_map(const OperatorAlgebra& alg) {
  if (!alg.grading())
    throw Error(ErrorCode::InvalidArgument, "grading_map: algebra carries no grading");
  return conjugation(alg, alg, alg.grading()->gamma());
}

AlgebraMap AlgebraMap::even_projection(const OperatorAlgebra& alg) {
  if (!alg.grading())
    throw Error(ErrorCode::InvalidArgument, "even_projection: algebra carries no grading");
  const Grading& g = *alg.grading();
  return from_function(alg, alg, [&](const CMat& x) { return even_part(x, g); });
}

AlgebraMap AlgebraMap::from_superop(const OperatorAlgebra& domain,
                                    const OperatorAlgebra& codomain, const SuperOp& op,
                                    double tol) {
  return from_function(domain, codomain,
                       [&](const CMat& x) { return op.apply(x); }, tol);
}

AlgebraMap AlgebraMap::from_kraus(const OperatorAlgebra& domain,
                                  const OperatorAlgebra& codomain,
                                  const std::vector<CMat>& kraus, double tol) {
  return from_superop(domain, codomain, SuperOp::from_kraus(kraus), tol);
}

CMat AlgebraMap::apply(const CMat& x) const {
  return codomain_.from_coords(CVec(coeff_ * domain_.coords(x)));
}

AlgebraMap AlgebraMap::compose(const AlgebraMap& inner) const {
  if (inner.codomain_.dim() != domain_.dim() ||
      inner.codomain_.ambient_dim() != domain_.ambient_dim())
    throw Error(ErrorCode::ShapeMismatch, "AlgebraMap::compose: dimension mismatch");
  return AlgebraMap(inner.domain_, codomain_, CMat(coeff_ * inner.coeff_));
}

double AlgebraMap::distance(const AlgebraMap& other) const {
  double worst = 0.0;
  for (const CMat& b : domain_.basis())
    worst = std::max(worst, (apply(b) - other.apply(b)).norm());
  return worst;
}

bool AlgebraMap::is_unital(double tol) const {
  const CMat unit_dom = CMat::Identity(domain_.ambient_dim(), domain_.ambient_dim());
  const CMat unit_cod = CMat::Identity(codomain_.ambient_dim(), codomain_.ambient_dim());
  return (apply(unit_dom) - unit_cod).norm() <= tol * std::sqrt(double(codomain_.ambient_dim()));
}

namespace {

cplx vector_state(const CMat& op, const CVec& xi) {
  return (xi.adjoint() * (op * xi))(0);
}

// Solve for images of `targets` under the dual relation
//   <image(t) a_k xi_mu, xi_mu> = rhs(t, a_k)
// with image constrained to span(solution_space).
struct DualSolve {
  std::vector<CMat> images;
  double residual = 0.0;
};

DualSolve solve_dual(const OperatorAlgebra& m_alg, const SubspaceBasis& solution_space,
                     const std::vector<CMat>& targets,
                     const std::function<cplx(const CMat&, const CMat&)>& rhs,
                     const CVec& xi_mu) {
  const Index mdim = m_alg.dim();
  const Index sdim = solution_space.dim();
  CMat lhs(mdim, sdim);
  for (Index j = 0; j < sdim; ++j)
    for (Index k = 0; k < mdim; ++k)
      lhs(k, j) = vector_state(CMat(solution_space.mats[j] * m_alg.basis()[k]), xi_mu);

  CMat rhs_mat(mdim, static_cast<Index>(targets.size()));
  for (Index t = 0; t < static_cast<Index>(targets.size()); ++t)
    for (Index k = 0; k < mdim; ++k) rhs_mat(k, t) = rhs(targets[t], m_alg.basis()[k]);

  LstsqResult sol = solve_lstsq(lhs, rhs_mat);
  DualSolve out;
  out.residual = sol.residual;
  for (Index t = 0; t < static_cast<Index>(targets.size()); ++t) {
    CMat img = CMat::Zero(solution_space.ambient_dim, solution_space.ambient_dim);
    for (Index j = 0; j < sdim; ++j) img += sol.x(j, t) * solution_space.mats[j];
    out.images.push_back(std::move(img));
  }
  return out;
}

void require_state_compatible(const AlgebraMap& psi, const CVec& xi_mu,
                              const CVec& xi_nu, double tol) {
  double worst = 0.0;
  for (const CMat& a : psi.domain().basis())
    worst = std::max(worst, std::abs(vector_state(psi.apply(a), xi_nu) -
                                     vector_state(a, xi_mu)));
  if (worst > std::max(tol, 1e-8))
    throw Error(ErrorCode::StateMismatch, "dual_map: nu . Psi != mu on the domain");
}

}  // namespace

DualResult dual_map(const AlgebraMap& psi, const CVec& xi_mu, const CVec& xi_nu,
                    double tol) {
  if (!cyclic_check(xi_mu, psi.domain(), tol).ok)
    throw Error(ErrorCode::NotCyclic, "dual_map: xi_mu not cyclic for the domain");
  if (!cyclic_check(xi_nu, psi.codomain(), tol).ok)
    throw Error(ErrorCode::NotCyclic, "dual_map: xi_nu not cyclic for the codomain");
  require_state_compatible(psi, xi_mu, xi_nu, tol);

  SubspaceBasis m_comm = commutant(psi.domain(), tol);
  SubspaceBasis n_comm = commutant(psi.codomain(), tol);

  auto rhs = [&](const CMat& b_prime, const CMat& a) {
    return vector_state(CMat(b_prime * psi.apply(a)), xi_nu);
  };
  DualSolve sol = solve_dual(psi.domain(), m_comm, n_comm.mats, rhs, xi_mu);

  AlgebraMap dual = AlgebraMap::from_images(n_comm.as_algebra(), m_comm.as_algebra(),
                                            sol.images, 1e-6);
  // report the defining-relation residual over all basis pairs
  double worst = 0.0;
  for (Index t = 0; t < n_comm.dim(); ++t)
    for (const CMat& a : psi.domain().basis())
      worst = std::max(
          worst, std::abs(vector_state(CMat(sol.images[t] * a), xi_mu) -
                          rhs(n_comm.mats[t], a)));
  return {std::move(dual), worst};
}

DualResult twisted_dual(const AlgebraMap& psi, const CVec& xi_mu, const CVec& xi_nu,
                        double tol) {
  if (!psi.domain().grading() || !psi.codomain().grading())
    throw Error(ErrorCode::InvalidArgument, "twisted_dual: algebras must carry gradings");
  const Grading& g_mu = *psi.domain().grading();
  const Grading& g_nu = *psi.codomain().grading();

  DualResult prime = dual_map(psi, xi_mu, xi_nu, tol);
  SubspaceBasis n_twisted = twisted_commutant(psi.codomain(), g_nu, tol);
  SubspaceBasis m_twisted = twisted_commutant(psi.domain(), g_mu, tol);

  std::vector<CMat> images;
  images.reserve(n_twisted.dim());
  for (const CMat& b : n_twisted.mats)
    images.push_back(klein_kappa(prime.map.apply(klein_kappa(b, g_nu)), g_mu));

  AlgebraMap twisted = AlgebraMap::from_images(
      n_twisted.as_algebra(g_nu), m_twisted.as_algebra(g_mu), images, 1e-6);

  double worst = 0.0;
  for (Index t = 0; t < n_twisted.dim(); ++t)
    for (const CMat& a : psi.domain().basis())
      worst = std::max(worst,
                       std::abs(vector_state(CMat(images[t] * a), xi_mu) -
                                vector_state(CMat(n_twisted.mats[t] * psi.apply(a)), xi_nu)));
  return {std::move(twisted), worst};
}

bool check_even(const AlgebraMap& psi, double tol) {
  if (!psi.domain().grading() || !psi.codomain().grading())
    throw Error(ErrorCode::InvalidArgument, "check_even: algebras must carry gradings");
  const CMat& gm = psi.domain().grading()->gamma();
  const CMat& gn = psi.codomain().grading()->gamma();
  double worst = 0.0;
  double scale = 1.0;
  for (const CMat& b : psi.domain().basis()) {
    CMat lhs = psi.apply(CMat(gm * b * gm));
    CMat rhs = gn * psi.apply(b) * gn;
    worst = std::max(worst, (lhs - rhs).norm());
    scale = std::max(scale, rhs.norm());
  }
  return worst <= tol * scale * std::sqrt(double(psi.domain().dim()));
}

CpVerdict check_cp(const AlgebraMap& psi, double tol) {
  const Index d = psi.domain().ambient_dim();
  if (psi.domain().dim() != d * d)
    throw Error(ErrorCode::NotFullAlgebra,
                "check_cp: domain is not a full matrix algebra; transport it first");
  SuperOp op{d, psi.codomain().ambient_dim(), CMat()};
  op.mat = CMat(psi.codomain().ambient_dim() * psi.codomain().ambient_dim(), d * d);
  CMat eij = CMat::Zero(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      eij(i, j) = 1.0;
      op.mat.col(j * d + i) = vec(psi.apply(eij));
      eij(i, j) = 0.0;
    }
  CMat choi = choi_matrix(op);
  RVec ev = herm_eigvals(CMat(0.5 * (choi + choi.adjoint())), 1e-6);
  const double lam_max = std::max(ev(ev.size() - 1), 0.0);
  return {ev(0) >= -tol * std::max(1.0, lam_max), ev(0)};
}

SuperOp transport_to_full(const AlgebraMap& psi, const JkwIso& iso) {
  const Index d = iso.full_dim();
  SuperOp op{d, d, CMat(d * d, d * d)};
  CMat eij = CMat::Zero(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      eij(i, j) = 1.0;
      op.mat.col(j * d + i) = vec(iso.to_full(psi.apply(iso.from_full(eij))));
      eij(i, j) = 0.0;
    }
  return op;
}

SampledPositivity check_positive_sampled(const AlgebraMap& psi, int samples,
                                         std::uint64_t seed, double tol) {
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    CVec c = rng.vector(psi.domain().dim());
    CMat y = psi.domain().from_coords(c);
    CMat x = y.adjoint() * y;
    x /= std::max(1.0, x.norm());
    CMat out = psi.apply(x);
    RVec ev = herm_eigvals(CMat(0.5 * (out + out.adjoint())), 1e-6);
    worst = std::min(worst, ev(0) - (out - out.adjoint()).norm());
  }
  return {worst >= -tol * 100.0, worst, seed, samples};
}

SampledPositivity check_n_positive_sampled(const AlgebraMap& psi, Index n,
                                           int samples, std::uint64_t seed,
                                           double tol) {
  Rng rng(seed);
  const Index d = psi.domain().ambient_dim();
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    // PSD block matrix y^* y over M_n(domain)
    std::vector<std::vector<CMat>> y(n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        y[i].push_back(psi.domain().from_coords(rng.vector(psi.domain().dim())));
    CMat big = CMat::Zero(n * d, n * d);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        CMat block = CMat::Zero(d, d);
        for (Index k = 0; k < n; ++k) block += y[k][i].adjoint() * y[k][j];
        big.block(i * d, j * d, d, d) = psi.apply(block);
      }
    big /= std::max(1.0, big.norm());
    RVec ev = herm_eigvals(CMat(0.5 * (big + big.adjoint())), 1e-6);
    worst = std::min(worst, ev(0) - (big - big.adjoint()).norm());
  }
  return {worst >= -tol * 100.0, worst, seed, samples};
}

DualResult double_twisted_dual(const AlgebraMap& psi, const CVec& xi_mu,
                               const CVec& xi_nu, double tol) {
  DualResult first = twisted_dual(psi, xi_mu, xi_nu, tol);
  // the twisted dual runs N-twisted -> M-twisted, so the roles of the state
  // vectors swap for the second pass
  DualResult second = twisted_dual(first.map, xi_nu, xi_mu, tol);
  second.residual = std::max(second.residual, first.residual);
  return second;
}

FermionicDualResult fermionic_dual(const AlgebraMap& psi, const LatticeState& st,
                                   const FockSpace& fs, double tol) {
  if (!st.faithful())
    throw Error(ErrorCode::NotFaithful, "fermionic_dual: all p_s must be positive");
  CVec z = zeta(st, fs);
  OperatorAlgebra target = car_algebra(st.complement_sites(fs), fs, tol);

  // phi-preservation on the domain
  double pres = 0.0;
  for (const CMat& a : psi.domain().basis())
    pres = std::max(pres, std::abs(vector_state(psi.apply(a), z) - vector_state(a, z)));
  if (pres > std::max(tol, 1e-8))
    throw Error(ErrorCode::StateMismatch, "fermionic_dual: phi . Psi != phi");

  const bool even_input = psi.domain().grading() && psi.codomain().grading() &&
                          check_even(psi, std::max(tol, 1e-9));

  auto rhs = [&](const CMat& b, const CMat& a) {
    return vector_state(CMat(psi.apply(a) * b), z);
  };
  // B_phi(a, Psi^phi(b)) = <a Psi^phi(b) zeta, zeta>: solve with the target
  // basis on the right of the domain element
  const Index mdim = psi.domain().dim();
  const Index sdim = target.dim();
  CMat lhs(mdim, sdim);
  for (Index j = 0; j < sdim; ++j)
    for (Index k = 0; k < mdim; ++k)
      lhs(k, j) = vector_state(CMat(psi.domain().basis()[k] * target.basis()[j]), z);
  CMat rhs_mat(mdim, sdim);
  for (Index t = 0; t < sdim; ++t)
    for (Index k = 0; k < mdim; ++k)
      rhs_mat(k, t) = rhs(target.basis()[t], psi.domain().basis()[k]);
  LstsqResult sol = solve_lstsq(lhs, rhs_mat);

  std::vector<CMat> images;
  for (Index t = 0; t < sdim; ++t) {
    CMat img = CMat::Zero(fs.dim(), fs.dim());
    for (Index j = 0; j < sdim; ++j) img += sol.x(j, t) * target.basis()[j];
    images.push_back(std::move(img));
  }
  AlgebraMap dual = AlgebraMap::from_images(target, target, images, 1e-6);

  double worst = 0.0;
  for (Index t = 0; t < sdim; ++t)
    for (const CMat& a : psi.domain().basis())
      worst = std::max(worst, std::abs(vector_state(CMat(a * images[t]), z) -
                                       rhs(target.basis()[t], a)));
  return {std::move(dual), worst, even_input};
}

FermionicDualResult fermionic_dual_left(const AlgebraMap& phi, const LatticeState& st,
                                        const FockSpace& fs, double tol) {
  if (!st.faithful())
    throw Error(ErrorCode::NotFaithful, "fermionic_dual_left: all p_s must be positive");
  CVec z = zeta(st, fs);
  OperatorAlgebra a_i = car_algebra(st.subset, fs, tol);
  const OperatorAlgebra& a_c = phi.domain();  // A(L minus I)

  const bool even_input = check_even(phi, std::max(tol, 1e-9));

  // B(Psi(a), b) = B(a, Phi(b)): unknowns sit on the left of b
  const Index mdim = a_c.dim();
  const Index sdim = a_i.dim();
  CMat lhs(mdim, sdim);
  for (Index j = 0; j < sdim; ++j)
    for (Index k = 0; k < mdim; ++k)
      lhs(k, j) = vector_state(CMat(a_i.basis()[j] * a_c.basis()[k]), z);
  CMat rhs_mat(mdim, sdim);
  for (Index t = 0; t < sdim; ++t)
    for (Index k = 0; k < mdim; ++k)
      rhs_mat(k, t) =
          vector_state(CMat(a_i.basis()[t] * phi.apply(a_c.basis()[k])), z);
  LstsqResult sol = solve_lstsq(lhs, rhs_mat);

  std::vector<CMat> images;
  for (Index t = 0; t < sdim; ++t) {
    CMat img = CMat::Zero(fs.dim(), fs.dim());
    for (Index j = 0; j < sdim; ++j) img += sol.x(j, t) * a_i.basis()[j];
    images.push_back(std::move(img));
  }
  AlgebraMap dual = AlgebraMap::from_images(a_i, a_i, images, 1e-6);

  double worst = 0.0;
  for (Index t = 0; t < sdim; ++t)
    for (Index k = 0; k < mdim; ++k)
      worst = std::max(worst, std::abs(vector_state(CMat(images[t] * a_c.basis()[k]), z) -
                                       rhs_mat(k, t)));
  return {std::move(dual), worst, even_input};
}

}  // namespace fermikit
