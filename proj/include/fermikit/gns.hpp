#pragma once

#include "fermikit/graded.hpp"

namespace fermikit {

/// Finite-dimensional GNS data of a positive functional on an algebra: the
/// quotient of the algebra by the Gram kernel, with left multiplication as
/// the representation.
struct GnsTriple {
  OperatorAlgebra algebra;
  Index dim = 0;          // GNS space dimension
  std::vector<CMat> pi;   // images of the algebra basis elements
  CVec xi;                // class of the unit
  CMat embed;             // coefficient vector -> GNS coordinates
  CMat lift;              // GNS coordinates -> coefficient vector

  /// pi(x) for x in the algebra span.
  CMat represent(const CMat& x) const;
};

/// Throws NotPositive when the Gram matrix has an eigenvalue < -tol.
GnsTriple gns(const OperatorAlgebra& alg, const GradedFunctional& f,
              double tol = kDefaultTol);

/// Coefficient matrix of x -> u x u^dag restricted to the algebra span.
CMat conjugation_coeff(const OperatorAlgebra& alg, const CMat& u);

/// Unitary with V x_f = (theta x)_f for an automorphism theta given by its
/// coefficient matrix; requires f invariant under theta.
CMat covariant_unitary(const GnsTriple& g, const CMat& theta_coeff);

/// Antilinear operators are stored as a matrix composed with coordinate
/// conjugation: (J v) = j_mat * conj(v).
struct ModularData {
  CMat delta;  // positive
  CMat j_mat;
};

/// Modular data of a faithful functional from the polar decomposition of
/// S x_f = (x^*)_f. Throws NotFaithful when the Gram rank is deficient.
ModularData modular_data(const GnsTriple& g, double tol = kDefaultTol);

/// Tomita data computed directly on the ambient space for an algebra with a
/// cyclic and separating vector (the ambient space is its own GNS space).
ModularData ambient_modular_data(const OperatorAlgebra& alg, const CVec& xi,
                                 double tol = kDefaultTol);

/// j(x) = J x^* J as a linear operator.
CMat modular_conjugate(const ModularData& md, const CMat& x);

/// Diagonal state of an even faithful state: pairs the algebra with its
/// opposite through the modular conjugation and the twist automorphism,
/// delta(a (x) b^o) = <pi(a) eta_V(J pi(b^*) J) xi, xi>.
class DiagonalState {
 public:
  DiagonalState(const OperatorAlgebra& alg, const GradedFunctional& f,
                double tol = kDefaultTol);

  cplx eval(const CMat& a, const CMat& b) const;
  const GnsTriple& triple() const { return gns_; }

  /// Gram certificate of positivity on the spanning set b_k (x) b_l^o of the
  /// Fermi product with the opposite algebra.
  PositivityVerdict gram_certificate(double tol = kDefaultTol) const;

  /// Residuals of pi_delta being a *-representation (the paper's positivity
  /// route): multiplicativity and star over the spanning set.
  GradedRepVerdict representation_certificate() const;

 private:
  CMat pi_delta(const CMat& a, const CMat& b) const;  // pi(a) eta_V(J pi(b*) J)

  OperatorAlgebra alg_;
  GnsTriple gns_;
  ModularData md_;
  CMat v_;  // covariant grading unitary on the GNS space
  std::optional<Grading> v_grading_;
  CMat table_;  // delta(b_p (x) b_q^o)
};

/// One-shot evaluation per the spec operation signature.
cplx diagonal_state(const OperatorAlgebra& alg, const GradedFunctional& f,
                    const CMat& a, const CMat& b, double tol = kDefaultTol);

struct Stinespring {
  std::vector<CMat> kraus;
  Index copies = 0;  // number of Kraus factors = representation multiplicity
  CMat v;            // (copies * dim_in) x dim_out, V^dag pi(a) V = phi(a)
};

/// Stinespring dilation of a completely positive map on a full matrix
/// algebra, with Kraus factors from the Choi eigendecomposition. Throws
/// NotCP when the Choi matrix fails positivity at tol.
Stinespring stinespring(const SuperOp& phi, double tol = kDefaultTol);

}  // namespace fermikit
