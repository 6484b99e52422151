#pragma once

#include "fermikit/car.hpp"

namespace fermikit {

/// Orthonormal basis of {X : X B = B X for every B in the algebra}. Solved on
/// the vectorized space through normal equations; when the algebra carries a
/// generating set only the generators are imposed (same solution set).
SubspaceBasis commutant(const OperatorAlgebra& alg, double tol = kDefaultTol);

/// kappa_Gamma applied elementwise to the commutant basis, re-orthonormalized.
/// Throws NotGradingStable when ad_Gamma does not preserve the algebra span.
SubspaceBasis twisted_commutant(const OperatorAlgebra& alg, const Grading& g,
                                double tol = kDefaultTol);

struct SubspaceComparison {
  bool equal;
  double distance;  // ||P_a - P_b||_F of the HS-orthogonal projections
};

SubspaceComparison subspace_equal(const SubspaceBasis& a, const SubspaceBasis& b,
                                  double tol = kDefaultTol);

struct RankVerdict {
  bool ok;
  Index rank;
  Index required;
};

/// xi cyclic for the span: rank{B_k xi} equals the ambient dimension.
RankVerdict cyclic_check(const CVec& xi, const OperatorAlgebra& alg,
                         double tol = kDefaultTol);
/// xi separating: no nonzero span element kills xi.
RankVerdict separating_check(const CVec& xi, const OperatorAlgebra& alg,
                             double tol = kDefaultTol);

struct BjlResult {
  double subspace_distance;      // M(Z)' vs K M(Z_perp) K^dag
  bool consistent;               // distance within tolerance
  bool vacuum_relation_ok;       // cyclicity of vacuum for M(Z) matches
                                 // separation of K vacuum for the twisted commutant
};

/// Checks M(Z)' = K M(Z_perp) K^dag for Z spanned by the doubled basis
/// vectors of the sites in I.
BjlResult bjl_duality_check(const std::vector<int>& I, const FockSpace& fs,
                            double tol = kDefaultTol);

}  // namespace fermikit
