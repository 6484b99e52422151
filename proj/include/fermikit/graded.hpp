#pragma once

#include <functional>

#include "fermikit/algebra.hpp"

namespace fermikit {

CMat even_part(const CMat& a, const Grading& g);
CMat odd_part(const CMat& a, const Grading& g);

/// Klein transformation a_+ + Gamma a_-. Involutive, not a *-homomorphism.
CMat klein_kappa(const CMat& a, const Grading& g);

/// Twist automorphism a_+ + i Gamma a_-; equals K a K^dag.
CMat klein_eta(const CMat& a, const Grading& g);
CMat klein_eta_inv(const CMat& a, const Grading& g);

/// K = P_+ - i P_-; unitary with K^2 = Gamma.
CMat klein_K(const Grading& g);

/// Koszul sign: -1 iff both parities are -1.
inline int fermi_sign(int i, int j) { return (i == -1 && j == -1) ? -1 : 1; }

/// Element of the Fermi tensor product of two graded matrix algebras, stored
/// as its ambient tensor-space matrix. Sector components are recomputed from
/// the gradings on demand.
class FermiTensorElement {
 public:
  FermiTensorElement(CMat ambient, Grading left, Grading right);
  static FermiTensorElement elementary(const CMat& a, const CMat& b,
                                       const Grading& ga, const Grading& gb);

  const CMat& ambient() const { return ambient_; }
  const Grading& left_grading() const { return left_; }
  const Grading& right_grading() const { return right_; }

  /// Graded component x_{i,j} = (eps_i (x) eps_j)(x), i,j in {+1,-1}.
  CMat sector(int i, int j) const;
  /// Left-leg / right-leg homogeneous parts.
  CMat left_component(int i) const;
  CMat right_component(int j) const;

  FermiTensorElement with_ambient(CMat m) const;

  FermiTensorElement operator+(const FermiTensorElement& o) const;
  FermiTensorElement operator-(const FermiTensorElement& o) const;
  FermiTensorElement operator*(cplx s) const;

 private:
  CMat ambient_;
  Grading left_, right_;
};

/// Graded involution sum eps(i,j) x_{i,j}^dag.
FermiTensorElement fermi_star(const FermiTensorElement& x);

/// Graded product sum eps(j,k) x_{i,j} y_{k,l}.
FermiTensorElement fermi_mul(const FermiTensorElement& x, const FermiTensorElement& y);

/// Gamma_A (x) Gamma_B, the grading of the Fermi product.
Grading product_grading(const Grading& ga, const Grading& gb);

/// (omega x phi)(x) = trace((rho_omega (x) rho_phi) x_ambient).
cplx product_functional(const GradedFunctional& om, const GradedFunctional& ph,
                        const FermiTensorElement& x);

struct PositivityVerdict {
  bool psd;
  double min_eig;
};

/// Gram certificate G_kl = f(b_k^* b_l) for a functional on the Fermi product,
/// PSD iff min eigenvalue >= -tol.
PositivityVerdict functional_positivity_gram(
    const std::function<cplx(const FermiTensorElement&)>& f,
    const std::vector<FermiTensorElement>& basis, double tol = kDefaultTol);

/// Gram certificate of the product functional omega x phi over the elementary
/// tensors basisA (x) basisB, computed through the Koszul-sign expansion of
/// (a (x) b)^*(c (x) d); equivalent to the generic Gram but quartic instead of
/// exponential in the factor dimensions.
PositivityVerdict product_state_gram(const GradedFunctional& om,
                                     const GradedFunctional& ph,
                                     const std::vector<CMat>& basis_a,
                                     const std::vector<CMat>& basis_b,
                                     const Grading& ga, const Grading& gb,
                                     double tol = kDefaultTol);

/// Conditional expectation onto A_+ (x) B: even projection on the left leg.
FermiTensorElement conditional_expectation_even(const FermiTensorElement& x);

struct CounterexampleReport {
  double best_min_eig;  // most negative Gram eigenvalue found
  std::uint64_t seed;
  int samples;
  CMat omega_density;
  CMat phi_density;
};

/// Seeded random scan over pairs of pure non-even states of a single CAR site,
/// looking for a product functional whose Gram matrix fails positivity.
/// Reports the best violator found.
CounterexampleReport product_positivity_counterexample(std::uint64_t seed,
                                                       int max_samples,
                                                       double tol = kDefaultTol);

struct GradedRepVerdict {
  double commutation_residual;
  double multiplicativity_residual;
  double star_residual;
};

/// Checks the graded commutation rule pi1(a) pi2(b) = eps(a,b) pi2(b) pi1(a)
/// on homogeneous components of the given spanning sets, then verifies that
/// pi(a (x) b) := pi1(a) pi2(b) is multiplicative and *-preserving against
/// fermi_mul / fermi_star. Throws CommutationFailed when the rule is violated
/// above tol.
GradedRepVerdict check_graded_product_rep(
    const std::vector<CMat>& domain_a, const std::vector<CMat>& domain_b,
    const std::function<CMat(const CMat&)>& pi1,
    const std::function<CMat(const CMat&)>& pi2, const Grading& ga,
    const Grading& gb, const Grading& target, double tol = kDefaultTol);

}  // namespace fermikit
