#include "fermikit/graded.hpp"

#include <array>
#include <utility>

#include "fermikit/rng.hpp"

namespace fermikit {

namespace {

void require_same_dim(const CMat& a, const Grading& g, const char* who) {
  if (a.rows() != a.cols() || a.rows() != g.dim())
    throw Error(ErrorCode::ShapeMismatch, std::string(who) + ": dimension mismatch");
}

}  // namespace

CMat even_part(const CMat& a, const Grading& g) {
  require_same_dim(a, g, "even_part");
  return 0.5 * (a + g.gamma() * a * g.gamma());
}

CMat odd_part(const CMat& a, const Grading& g) {
  require_same_dim(a, g, "odd_part");
  return 0.5 * (a - g.gamma() * a * g.gamma());
}

CMat klein_kappa(const CMat& a, const Grading& g) {
  require_same_dim(a, g, "klein_kappa");
  return even_part(a, g) + g.gamma() * odd_part(a, g);
}

CMat klein_eta(const CMat& a, const Grading& g) {
  require_same_dim(a, g, "klein_eta");
  return even_part(a, g) + cplx(0, 1) * (g.gamma() * odd_part(a, g));
}

CMat klein_eta_inv(const CMat& a, const Grading& g) {
  require_same_dim(a, g, "klein_eta_inv");
  return even_part(a, g) - cplx(0, 1) * (g.gamma() * odd_part(a, g));
}

CMat klein_K(const Grading& g) {
  const Index d = g.dim();
  CMat p_plus = 0.5 * (CMat::Identity(d, d) + g.gamma());
  CMat p_minus = 0.5 * (CMat::Identity(d, d) - g.gamma());
  return p_plus - cplx(0, 1) * p_minus;
}

FermiTensorElement::FermiTensorElement(CMat ambient, Grading left, Grading right)
    : ambient_(std::move(ambient)), left_(std::move(left)), right_(std::move(right)) {
  const Index d = left_.dim() * right_.dim();
  if (ambient_.rows() != d || ambient_.cols() != d)
    throw Error(ErrorCode::ShapeMismatch,
                "FermiTensorElement: ambient dimension must be product of factor dimensions");
}

FermiTensorElement FermiTensorElement::elementary(const CMat& a, const CMat& b,
                                                  const Grading& ga, const Grading& gb) {
  if (a.rows() != ga.dim() || b.rows() != gb.dim())
    throw Error(ErrorCode::ShapeMismatch, "FermiTensorElement::elementary: dimension mismatch");
  return FermiTensorElement(kron(a, b), ga, gb);
}

CMat FermiTensorElement::left_component(int i) const {
  CMat g = kron(left_.gamma(), CMat::Identity(right_.dim(), right_.dim()));
  CMat twisted = g * ambient_ * g;
  return (i == 1) ? CMat(0.5 * (ambient_ + twisted)) : CMat(0.5 * (ambient_ - twisted));
}

CMat FermiTensorElement::right_component(int j) const {
  CMat g = kron(CMat::Identity(left_.dim(), left_.dim()), right_.gamma());
  CMat twisted = g * ambient_ * g;
  return (j == 1) ? CMat(0.5 * (ambient_ + twisted)) : CMat(0.5 * (ambient_ - twisted));
}

CMat FermiTensorElement::sector(int i, int j) const {
  FermiTensorElement li(left_component(i), left_, right_);
  return li.right_component(j);
}

FermiTensorElement FermiTensorElement::with_ambient(CMat m) const {
  return FermiTensorElement(std::move(m), left_, right_);
}

FermiTensorElement FermiTensorElement::operator+(const FermiTensorElement& o) const {
  return with_ambient(ambient_ + o.ambient_);
}
FermiTensorElement FermiTensorElement::operator-(const FermiTensorElement& o) const {
  return with_ambient(ambient_ - o.ambient_);
}
FermiTensorElement FermiTensorElement::operator*(cplx s) const {
  return with_ambient(CMat(s * ambient_));
}

FermiTensorElement fermi_star(const FermiTensorElement& x) {
  CMat out = CMat::Zero(x.ambient().rows(), x.ambient().cols());
  for (int i : {1, -1})
    for (int j : {1, -1})
      out += double(fermi_sign(i, j)) * x.sector(i, j).adjoint();
  return x.with_ambient(std::move(out));
}

FermiTensorElement fermi_mul(const FermiTensorElement& x, const FermiTensorElement& y) {
  if (x.left_grading().dim() != y.left_grading().dim() ||
      x.right_grading().dim() != y.right_grading().dim())
    throw Error(ErrorCode::ShapeMismatch, "fermi_mul: factor dimension mismatch");
  // xy = sum_{j,k} eps(j,k) x_{.,j} y_{k,.}
  CMat out = CMat::Zero(x.ambient().rows(), x.ambient().cols());
  for (int j : {1, -1})
    for (int k : {1, -1})
      out += double(fermi_sign(j, k)) * (x.right_component(j) * y.left_component(k));
  return x.with_ambient(std::move(out));
}

Grading product_grading(const Grading& ga, const Grading& gb) {
  return Grading(kron(ga.gamma(), gb.gamma()));
}

cplx product_functional(const GradedFunctional& om, const GradedFunctional& ph,
                        const FermiTensorElement& x) {
  CMat rho = kron(om.density, ph.density);
  return (rho * x.ambient()).trace();
}

PositivityVerdict functional_positivity_gram(
    const std::function<cplx(const FermiTensorElement&)>& f,
    const std::vector<FermiTensorElement>& basis, double tol) {
  const Index m = static_cast<Index>(basis.size());
  CMat gram(m, m);
  for (Index k = 0; k < m; ++k) {
    FermiTensorElement bk_star = fermi_star(basis[k]);
    for (Index l = 0; l < m; ++l)
      gram(k, l) = f(fermi_mul(bk_star, basis[l]));
  }
  // symmetrize rounding noise before the eigensolve
  CMat herm = 0.5 * (gram + gram.adjoint());
  RVec ev = herm_eigvals(herm);
  const double min_eig = ev.size() ? ev(0) : 0.0;
  return {min_eig >= -tol, min_eig};
}

FermiTensorElement conditional_expectation_even(const FermiTensorElement& x) {
  return x.with_ambient(x.left_component(1));
}

PositivityVerdict product_state_gram(const GradedFunctional& om,
                                     const GradedFunctional& ph,
                                     const std::vector<CMat>& basis_a,
                                     const std::vector<CMat>& basis_b,
                                     const Grading& ga, const Grading& gb,
                                     double tol) {
  const Index ma = static_cast<Index>(basis_a.size());
  const Index mb = static_cast<Index>(basis_b.size());

  // (a (x) b)^*(c (x) d) = eps(pa,pb) eps(pb,pc) a^* c (x) b^* d on
  // homogeneous components, so two small tables carry the whole Gram
  std::vector<std::array<CMat, 2>> pa_parts(ma), pb_parts(mb);
  for (Index k = 0; k < ma; ++k)
    pa_parts[k] = {even_part(basis_a[k], ga), odd_part(basis_a[k], ga)};
  for (Index l = 0; l < mb; ++l)
    pb_parts[l] = {even_part(basis_b[l], gb), odd_part(basis_b[l], gb)};

  std::vector<CMat> w(4), p(2);
  for (int pa = 0; pa < 2; ++pa)
    for (int pc = 0; pc < 2; ++pc) {
      CMat t(ma, ma);
      for (Index k = 0; k < ma; ++k)
        for (Index m = 0; m < ma; ++m)
          t(k, m) = om.value(CMat(pa_parts[k][pa].adjoint() * pa_parts[m][pc]));
      w[2 * pa + pc] = std::move(t);
    }
  for (int pb = 0; pb < 2; ++pb) {
    CMat t(mb, mb);
    for (Index l = 0; l < mb; ++l)
      for (Index n = 0; n < mb; ++n)
        t(l, n) = ph.value(CMat(pb_parts[l][pb].adjoint() * basis_b[n]));
    p[pb] = std::move(t);
  }

  CMat gram(ma * mb, ma * mb);
  for (Index k = 0; k < ma; ++k)
    for (Index l = 0; l < mb; ++l)
      for (Index m = 0; m < ma; ++m)
        for (Index n = 0; n < mb; ++n) {
          cplx entry = 0;
          for (int pa = 0; pa < 2; ++pa)
            for (int pb = 0; pb < 2; ++pb)
              for (int pc = 0; pc < 2; ++pc)
                entry += double(fermi_sign(pa ? -1 : 1, pb ? -1 : 1) *
                                fermi_sign(pb ? -1 : 1, pc ? -1 : 1)) *
                         w[2 * pa + pc](k, m) * p[pb](l, n);
          gram(k * mb + l, m * mb + n) = entry;
        }

  CMat herm = 0.5 * (gram + gram.adjoint());
  RVec ev = herm_eigvals(herm, 1e-6);
  const double lam_max = std::max(ev(ev.size() - 1), 0.0);
  return {ev(0) >= -tol * std::max(1.0, lam_max), ev(0)};
}

CounterexampleReport product_positivity_counterexample(std::uint64_t seed,
                                                       int max_samples, double tol) {
  CMat gamma2(2, 2);
  gamma2 << 1, 0, 0, -1;
  Grading g(gamma2);

  std::vector<FermiTensorElement> basis;
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      for (Index k = 0; k < 2; ++k)
        for (Index l = 0; l < 2; ++l) {
          CMat a = CMat::Zero(2, 2), b = CMat::Zero(2, 2);
          a(i, j) = 1.0;
          b(k, l) = 1.0;
          basis.push_back(FermiTensorElement::elementary(a, b, g, g));
        }

  Rng rng(seed);
  CounterexampleReport best{0.0, seed, 0, CMat(), CMat()};
  for (int s = 0; s < max_samples; ++s) {
    CVec psi = rng.unit_vector(2);
    CVec chi = rng.unit_vector(2);
    GradedFunctional om{CMat(psi * psi.adjoint())};
    GradedFunctional ph{CMat(chi * chi.adjoint())};
    if (om.is_even(g, 1e-6) || ph.is_even(g, 1e-6)) continue;
    auto f = [&](const FermiTensorElement& x) { return product_functional(om, ph, x); };
    PositivityVerdict v = functional_positivity_gram(f, basis, tol);
    best.samples = s + 1;
    if (v.min_eig < best.best_min_eig) {
      best.best_min_eig = v.min_eig;
      best.omega_density = om.density;
      best.phi_density = ph.density;
    }
  }
  return best;
}

GradedRepVerdict check_graded_product_rep(
    const std::vector<CMat>& domain_a, const std::vector<CMat>& domain_b,
    const std::function<CMat(const CMat&)>& pi1,
    const std::function<CMat(const CMat&)>& pi2, const Grading& ga,
    const Grading& gb, const Grading& target, double tol) {
  GradedRepVerdict verdict{0.0, 0.0, 0.0};

  auto homogeneous_parts = [](const CMat& x, const Grading& g) {
    return std::array<std::pair<int, CMat>, 2>{
        std::pair<int, CMat>{1, even_part(x, g)},
        std::pair<int, CMat>{-1, odd_part(x, g)}};
  };

  double scale = 1.0;
  for (const CMat& a : domain_a)
    for (const CMat& b : domain_b) {
      for (auto& [pa, ah] : homogeneous_parts(a, ga))
        for (auto& [pb, bh] : homogeneous_parts(b, gb)) {
          CMat lhs = pi1(ah) * pi2(bh);
          CMat rhs = double(fermi_sign(pa, pb)) * (pi2(bh) * pi1(ah));
          verdict.commutation_residual =
              std::max(verdict.commutation_residual, (lhs - rhs).norm());
          scale = std::max({scale, lhs.norm(), rhs.norm()});
        }
    }
  if (verdict.commutation_residual > tol * scale)
    throw Error(ErrorCode::CommutationFailed,
                "check_graded_product_rep: graded commutation rule violated");

  // pi(a (x) b) := pi1(a) pi2(b) against the Fermi operations
  auto pi = [&](const FermiTensorElement& x) {
    CMat out = CMat::Zero(target.dim(), target.dim());
    const Index db = gb.dim();
    // expand the ambient tensor matrix against elementary units of each leg
    for (Index ia = 0; ia < ga.dim(); ++ia)
      for (Index ja = 0; ja < ga.dim(); ++ja) {
        CMat block = x.ambient().block(ia * db, ja * db, db, db);
        if (block.norm() == 0.0) continue;
        CMat ea = CMat::Zero(ga.dim(), ga.dim());
        ea(ia, ja) = 1.0;
        out += pi1(ea) * pi2(block);
      }
    return out;
  };

  for (const CMat& a1 : domain_a)
    for (const CMat& b1 : domain_b)
      for (const CMat& a2 : domain_a)
        for (const CMat& b2 : domain_b) {
          FermiTensorElement x = FermiTensorElement::elementary(a1, b1, ga, gb);
          FermiTensorElement y = FermiTensorElement::elementary(a2, b2, ga, gb);
          CMat mul_lhs = pi(fermi_mul(x, y));
          CMat mul_rhs = pi(x) * pi(y);
          verdict.multiplicativity_residual =
              std::max(verdict.multiplicativity_residual, (mul_lhs - mul_rhs).norm());
          CMat star_lhs = pi(fermi_star(x));
          CMat star_rhs = pi(x).adjoint();
          verdict.star_residual =
              std::max(verdict.star_residual, (star_lhs - star_rhs).norm());
        }
  return verdict;
}

}  // namespace fermikit
