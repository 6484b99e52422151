#pragma once

#include <cstdint>
#include <functional>

#include "fermikit/commutant.hpp"

namespace fermikit {

/// Linear map between operator algebras, stored as a coefficient matrix
/// against the two HS-orthonormal bases.
class AlgebraMap {
 public:
  AlgebraMap(OperatorAlgebra domain, OperatorAlgebra codomain, CMat coeff);

  static AlgebraMap identity_map(const OperatorAlgebra& alg);
  static AlgebraMap from_images(const OperatorAlgebra& domain,
                                const OperatorAlgebra& codomain,
                                const std::vector<CMat>& images,
                                double tol = kDefaultTol);
  static AlgebraMap from_function(const OperatorAlgebra& domain,
                                  const OperatorAlgebra& codomain,
                                  const std::function<CMat(const CMat&)>& fn,
                                  double tol = kDefaultTol);
  /// x -> u x u^dag
  static AlgebraMap conjugation(const OperatorAlgebra& domain,
                                const OperatorAlgebra& codomain, const CMat& u,
                                double tol = kDefaultTol);
  /// ad_Gamma restricted to the algebra
  static AlgebraMap grading_map(const OperatorAlgebra& alg);
  /// even projection x -> (x + Gamma x Gamma)/2
  static AlgebraMap even_projection(const OperatorAlgebra& alg);
  static AlgebraMap from_superop(const OperatorAlgebra& domain,
                                 const OperatorAlgebra& codomain, const SuperOp& op,
                                 double tol = kDefaultTol);
  static AlgebraMap from_kraus(const OperatorAlgebra& domain,
                               const OperatorAlgebra& codomain,
                               const std::vector<CMat>& kraus,
                               double tol = kDefaultTol);

  const OperatorAlgebra& domain() const { return domain_; }
  const OperatorAlgebra& codomain() const { return codomain_; }
  const CMat& coeff() const { return coeff_; }

  CMat apply(const CMat& x) const;
  /// this after inner
  AlgebraMap compose(const AlgebraMap& inner) const;
  /// max distance of basis images
  double distance(const AlgebraMap& other) const;
  bool is_unital(double tol = kDefaultTol) const;

 private:
  OperatorAlgebra domain_;
  OperatorAlgebra codomain_;
  CMat coeff_;  // codomain.dim x domain.dim
};

struct DualResult {
  AlgebraMap map;
  double residual;  // defining-relation residual over basis pairs
};

/// Dual Psi': N' -> M' of a state-compatible map Psi: M -> N, solved from
/// <Psi'(b') a xi_mu, xi_mu> = <b' Psi(a) xi_nu, xi_nu>.
/// Throws NotCyclic / StateMismatch when the preconditions fail.
DualResult dual_map(const AlgebraMap& psi, const CVec& xi_mu, const CVec& xi_nu,
                    double tol = kDefaultTol);

/// Twisted dual kappa_mu . Psi' . kappa_nu restricted to the twisted
/// commutant; both algebras must carry gradings.
DualResult twisted_dual(const AlgebraMap& psi, const CVec& xi_mu, const CVec& xi_nu,
                        double tol = kDefaultTol);

/// Grading equivariance Psi . ad_Gamma_mu = ad_Gamma_nu . Psi on the basis.
bool check_even(const AlgebraMap& psi, double tol = kDefaultTol);

struct CpVerdict {
  bool cp;
  double min_choi_eig;
};

/// Choi positivity; the domain must span a full matrix algebra on its
/// ambient space (throws NotFullAlgebra otherwise). CAR subalgebras are
/// transported through transport_to_full first.
CpVerdict check_cp(const AlgebraMap& psi, double tol = kDefaultTol);

/// Pull a map on A(sites) over to the full matrix algebra M_{2^k}.
SuperOp transport_to_full(const AlgebraMap& psi, const JkwIso& iso);

struct SampledPositivity {
  bool pass;
  double worst_min_eig;
  std::uint64_t seed;
  int samples;
};

/// Deterministic pseudo-random positivity certificate on inputs y^* y drawn
/// from the domain.
SampledPositivity check_positive_sampled(const AlgebraMap& psi, int samples,
                                         std::uint64_t seed, double tol = kDefaultTol);

/// n-positivity certificate: applies psi (x) id_n to sampled PSD block
/// matrices.
SampledPositivity check_n_positive_sampled(const AlgebraMap& psi, Index n,
                                           int samples, std::uint64_t seed,
                                           double tol = kDefaultTol);

/// Psi applied twice through the twisted dual; lands back on (M, N).
DualResult double_twisted_dual(const AlgebraMap& psi, const CVec& xi_mu,
                               const CVec& xi_nu, double tol = kDefaultTol);

struct FermionicDualResult {
  AlgebraMap map;  // on A(L minus I)
  double residual;
  bool even_input;  // theorem hypotheses met; false is a warning, not an error
};

/// Unique map with B_phi(Psi(a), b) = B_phi(a, Psi^phi(b)) for the entangled
/// state of the lattice; requires all p_s > 0 and phi-preservation.
FermionicDualResult fermionic_dual(const AlgebraMap& psi, const LatticeState& st,
                                   const FockSpace& fs, double tol = kDefaultTol);

/// The other leg of the duality: given Phi on A(L minus I), the unique map on
/// A(I) with B_phi(Psi(a), b) = B_phi(a, Phi(b)). Applying it to a fermionic
/// dual realizes Psi^{phi phi}.
FermionicDualResult fermionic_dual_left(const AlgebraMap& phi, const LatticeState& st,
                                        const FockSpace& fs, double tol = kDefaultTol);

}  // namespace fermikit
