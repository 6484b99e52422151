#include "fermikit/balance.hpp"

#include <algorithm>

#include "fermikit/graded.hpp"

namespace fermikit {

namespace {

cplx vector_state(const CMat& op, const CVec& xi) {
  return (xi.adjoint() * (op * xi))(0);
}

// normal-ordered words a^dag_{S} a_{T} over a site list, increasing indices
std::vector<CMat> normal_ordered_words(const std::vector<int>& sites,
                                       const FockSpace& fs) {
  std::vector<int> ordered = sites;
  std::sort(ordered.begin(), ordered.end());
  const int k = static_cast<int>(ordered.size());
  const Index d = fs.dim();
  std::vector<CMat> words;
  words.reserve(Index(1) << (2 * k));
  for (std::uint32_t s = 0; s < (1u << k); ++s)
    for (std::uint32_t t = 0; t < (1u << k); ++t) {
      CMat w = CMat::Identity(d, d);
      for (int m = 0; m < k; ++m)
        if (s & (1u << m)) w = w * creation(ordered[m], fs);
      for (int m = 0; m < k; ++m)
        if (t & (1u << m)) w = w * annihilation(ordered[m], fs);
      words.push_back(std::move(w));
    }
  return words;
}

std::vector<CMat> mapped_words(const std::vector<int>& sites,
                               const std::map<int, int>& iota, const FockSpace& fs) {
  std::vector<int> ordered = sites;
  std::sort(ordered.begin(), ordered.end());
  const int k = static_cast<int>(ordered.size());
  const Index d = fs.dim();
  std::vector<CMat> words;
  words.reserve(Index(1) << (2 * k));
  for (std::uint32_t s = 0; s < (1u << k); ++s)
    for (std::uint32_t t = 0; t < (1u << k); ++t) {
      // same factor order as the source word, sites relabelled through iota
      CMat w = CMat::Identity(d, d);
      for (int m = 0; m < k; ++m)
        if (s & (1u << m)) w = w * creation(iota.at(ordered[m]), fs);
      for (int m = 0; m < k; ++m)
        if (t & (1u << m)) w = w * annihilation(iota.at(ordered[m]), fs);
      words.push_back(std::move(w));
    }
  return words;
}

}  // namespace

CopyIso::CopyIso(const std::map<int, int>& iota, const FockSpace& fs, double tol) {
  std::vector<int> source_sites, target_sites;
  std::uint32_t smask = 0, tmask = 0;
  for (const auto& [from, to] : iota) {
    source_sites.push_back(from);
    target_sites.push_back(to);
    smask |= 1u << (from - 1);
    const std::uint32_t bit = 1u << (to - 1);
    if (tmask & bit)
      throw Error(ErrorCode::InvalidArgument, "CopyIso: iota not injective");
    tmask |= bit;
  }
  if (smask & tmask)
    throw Error(ErrorCode::OverlappingSets, "CopyIso: iota image meets its domain");
  std::sort(target_sites.begin(), target_sites.end());

  OperatorAlgebra source = car_algebra(source_sites, fs, tol);
  OperatorAlgebra target = car_algebra(target_sites, fs, tol);

  // expansion of the source HS basis in the word basis, mapped wordwise
  std::vector<CMat> words = normal_ordered_words(source_sites, fs);
  std::vector<CMat> images = mapped_words(source_sites, iota, fs);
  const Index nwords = static_cast<Index>(words.size());
  CMat gram(nwords, nwords);
  for (Index i = 0; i < nwords; ++i)
    for (Index j = 0; j < nwords; ++j) gram(i, j) = hs_inner(words[j], words[i]);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu((Eigen::MatrixXcd(gram)));

  std::vector<CMat> basis_images;
  basis_images.reserve(source.dim());
  for (const CMat& b : source.basis()) {
    CVec rhs(nwords);
    for (Index i = 0; i < nwords; ++i) rhs(i) = hs_inner(b, words[i]);
    CVec c = lu.solve(rhs);
    CMat img = CMat::Zero(fs.dim(), fs.dim());
    for (Index w = 0; w < nwords; ++w) img += c(w) * images[w];
    basis_images.push_back(std::move(img));
  }
  map_.emplace(AlgebraMap::from_images(source, target, basis_images, 1e-8));
  inverse_coeff_ = CMat(Eigen::MatrixXcd(map_->coeff()).partialPivLu().inverse());

  // certify the extension as a grading-equivariant *-isomorphism
  double worst = 0.0;
  const Grading& g = *source.grading();
  for (const CMat& gen : source.generators())
    for (const CMat& b : source.basis()) {
      CMat lhs = map_->apply(CMat(gen * b));
      CMat rhs2 = map_->apply(gen) * map_->apply(b);
      worst = std::max(worst, (lhs - rhs2).norm());
    }
  for (const CMat& b : source.basis()) {
    worst = std::max(worst, (map_->apply(CMat(b.adjoint())) - map_->apply(b).adjoint()).norm());
    CMat graded_lhs = map_->apply(CMat(g.gamma() * b * g.gamma()));
    CMat graded_rhs = g.gamma() * map_->apply(b) * g.gamma();
    worst = std::max(worst, (graded_lhs - graded_rhs).norm());
  }
  iso_residual_ = worst;
  if (worst > 1e-8)
    throw Error(ErrorCode::InvalidArgument, "CopyIso: word extension is not a *-isomorphism");
}

CMat CopyIso::apply_inverse(const CMat& y) const {
  return source().from_coords(CVec(inverse_coeff_ * target().coords(y)));
}

CopyIso copy_iso(const std::map<int, int>& iota, const FockSpace& fs, double tol) {
  return CopyIso(iota, fs, tol);
}

AlgebraMap copy_map(const AlgebraMap& psi, const CopyIso& k) {
  std::vector<CMat> images;
  images.reserve(k.target().dim());
  for (const CMat& b : k.target().basis())
    images.push_back(k.apply(psi.apply(k.apply_inverse(b))));
  return AlgebraMap::from_images(k.target(), k.target(), images, 1e-8);
}

FsqdbResult fsqdb_residual(const AlgebraMap& psi, const LatticeState& st,
                           const CopyIso& k, const FockSpace& fs, double tol) {
  if (!st.faithful())
    throw Error(ErrorCode::NotFaithful, "fsqdb_residual: all p_s must be positive");
  {
    std::vector<int> complement = st.complement_sites(fs);
    std::vector<int> image;
    for (const auto& [from, to] : st.iota) image.push_back(to);
    std::sort(image.begin(), image.end());
    if (image != complement)
      throw Error(ErrorCode::InvalidArgument,
                  "fsqdb_residual: iota must map I onto its complement");
  }
  CVec z = zeta(st, fs);
  AlgebraMap psi_iota = copy_map(psi, k);

  double scale = 1.0;
  for (const CMat& a : psi.domain().basis())
    scale = std::max(scale, psi.apply(a).norm());

  const Index ma = psi.domain().dim();
  const Index mb = k.target().dim();
  CMat defect(ma, mb);
  for (Index i = 0; i < ma; ++i) {
    const CMat& a = psi.domain().basis()[i];
    CMat psi_a = psi.apply(a);
    for (Index j = 0; j < mb; ++j) {
      const CMat& b = k.target().basis()[j];
      defect(i, j) = vector_state(CMat(a * psi_iota.apply(b)), z) -
                     vector_state(CMat(psi_a * b), z);
    }
  }
  const double max_abs = defect.cwiseAbs().maxCoeff();
  const double fro = defect.norm();

  // cross-check against the twisted dual (einddinFFB: Psi^phi = Psi^iota)
  DualResult tw = twisted_dual(psi, z, z, tol);
  double map_distance = 0.0;
  for (const CMat& b : k.target().basis())
    map_distance = std::max(map_distance, (tw.map.apply(b) - psi_iota.apply(b)).norm());

  return {max_abs, fro, max_abs / scale, map_distance, max_abs / scale <= tol};
}

DiagFsqdbResult diag_fsqdb_residual(const AlgebraMap& psi, const LatticeState& st,
                                    const CopyIso& k, const FockSpace& fs,
                                    double tol) {
  CVec z = zeta(st, fs);
  Grading gamma = grading_operator(fs);
  SubspaceBasis twisted = twisted_commutant(psi.domain(), gamma, tol);

  AlgebraMap psi_iota = copy_map(psi, k);
  const Index ma = psi.domain().dim();
  const Index mb = twisted.dim();
  CMat defect(ma, mb);
  for (Index i = 0; i < ma; ++i) {
    const CMat& a = psi.domain().basis()[i];
    CMat psi_a = psi.apply(a);
    for (Index j = 0; j < mb; ++j) {
      // B(a, Psi^kappa(b)) - B(Psi(a), b) with B(a,b) = <a b zeta, zeta>
      const CMat& b = twisted.mats[j];
      defect(i, j) = vector_state(CMat(a * psi_iota.apply(b)), z) -
                     vector_state(CMat(psi_a * b), z);
    }
  }
  return {defect.cwiseAbs().maxCoeff(), defect.norm()};
}

ThetaSqdbResult theta_sqdb_residual(const SuperOp& psi, const CMat& rho,
                                    const SuperOp& theta, double tol) {
  const Index n = rho.rows();
  OperatorAlgebra full = OperatorAlgebra::full_matrix(n);
  GradedFunctional mu{rho};

  double inv = 0.0;
  for (const CMat& b : full.basis())
    inv = std::max(inv, std::abs(mu.value(theta.apply(b)) - mu.value(b)));
  if (inv > std::max(tol, 1e-8))
    throw Error(ErrorCode::StateMismatch, "theta_sqdb: state not theta-invariant");

  GnsTriple g = gns(full, mu, tol);
  ModularData md = modular_data(g, tol);

  // representation algebra on the GNS space and the push / pull connectors
  std::vector<CMat> rep_images;
  rep_images.reserve(full.dim());
  for (Index kk = 0; kk < full.dim(); ++kk) rep_images.push_back(g.pi[kk]);
  CMat p(g.dim * g.dim, full.dim());
  for (Index kk = 0; kk < full.dim(); ++kk) p.col(kk) = vec(rep_images[kk]);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> pull_solver((Eigen::MatrixXcd(p)));

  auto push = [&](const CMat& x) { return g.represent(x); };
  auto pull = [&](const CMat& y) {
    CVec c = pull_solver.solve(vec(y));
    CMat out = CMat::Zero(n, n);
    for (Index kk = 0; kk < full.dim(); ++kk) out += c(kk) * full.basis()[kk];
    return out;
  };

  OperatorAlgebra rep_alg(g.dim, hs_orthonormalize(rep_images, tol), std::nullopt,
                          rep_images);
  AlgebraMap psi_rep = AlgebraMap::from_function(
      rep_alg, rep_alg, [&](const CMat& x) { return push(psi.apply(pull(x))); }, 1e-8);

  DualResult prime = dual_map(psi_rep, g.xi, g.xi, tol);
  auto j = [&](const CMat& x) { return modular_conjugate(md, x); };

  // Psi^theta = theta . j . Psi' . j . theta
  double worst = 0.0;
  for (const CMat& e : full.basis()) {
    CMat out = theta.apply(pull(j(prime.map.apply(j(push(theta.apply(e)))))));
    worst = std::max(worst, (out - psi.apply(e)).norm());
  }

  // rho-copy form (trivial grading): Psi' = varrho . Psi . varrho^{-1} with
  // varrho = j . theta, varrho^{-1} = theta . j
  double rho_worst = 0.0;
  for (const CMat& c : prime.map.domain().basis()) {
    CMat image = j(push(theta.apply(psi.apply(theta.apply(pull(j(c)))))));
    rho_worst = std::max(rho_worst, (prime.map.apply(c) - image).norm());
  }
  return {worst, rho_worst};
}

AbstractFsqdbResult abstract_fsqdb_residual(const DiagonalState& ds,
                                            const AlgebraMap& phi,
                                            const AlgebraMap& rho_carrier,
                                            double tol) {
  const OperatorAlgebra& alg = phi.domain();

  // certify rho as a *-anti-homomorphism (an iso onto the opposite algebra)
  double anti = 0.0;
  for (const CMat& x : alg.generators().empty() ? alg.basis() : alg.generators())
    for (const CMat& y : alg.basis()) {
      CMat lhs = rho_carrier.apply(CMat(x * y));
      CMat rhs = rho_carrier.apply(y) * rho_carrier.apply(x);
      anti = std::max(anti, (lhs - rhs).norm());
    }
  for (const CMat& x : alg.basis())
    anti = std::max(anti,
                    (rho_carrier.apply(CMat(x.adjoint())) - rho_carrier.apply(x).adjoint()).norm());

  CMat rho_inv_coeff = CMat(Eigen::MatrixXcd(rho_carrier.coeff()).partialPivLu().inverse());
  auto rho_inv = [&](const CMat& y) {
    return rho_carrier.domain().from_coords(CVec(rho_inv_coeff * rho_carrier.codomain().coords(y)));
  };

  const Index m = alg.dim();
  CMat defect(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index jx = 0; jx < m; ++jx) {
      const CMat& a = alg.basis()[i];
      const CMat& b = alg.basis()[jx];
      CMat phi_rho_b = rho_carrier.apply(phi.apply(rho_inv(b)));
      defect(i, jx) = ds.eval(a, phi_rho_b) - ds.eval(phi.apply(a), b);
    }
  (void)tol;
  return {defect.cwiseAbs().maxCoeff(), defect.norm(), anti};
}

AlgebraMap lattice_opposite_copy(const CopyIso& k, const LatticeState& st,
                                 const FockSpace& fs, double tol) {
  CVec z = zeta(st, fs);
  OperatorAlgebra aI = k.source();
  ModularData md = ambient_modular_data(aI, z, tol);
  Grading gamma = grading_operator(fs);
  return AlgebraMap::from_function(
      aI, aI,
      [&](const CMat& x) {
        CMat kx = k.apply(x);
        CMat eta_inv = klein_eta_inv(kx, gamma);
        return modular_conjugate(md, eta_inv);
      },
      1e-7);
}

}  // namespace fermikit
