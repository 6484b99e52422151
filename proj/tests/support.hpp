#pragma once

// shared fixtures for the unit and acceptance suites

#include "fermikit/balance.hpp"
#include "fermikit/duality.hpp"
#include "fermikit/rng.hpp"

namespace fermikit::testsupport {

/// Homogeneous-even unitary from a random even Hermitian generator.
inline CMat random_even_unitary(const OperatorAlgebra& alg, Rng& rng) {
  const Grading& g = *alg.grading();
  CMat raw = even_part(alg.from_coords(rng.vector(alg.dim())), g);
  CMat h = 0.5 * (raw + raw.adjoint());
  HermEig eig = herm_eig(h);
  CMat u = CMat::Zero(h.rows(), h.cols());
  for (Index i = 0; i < eig.values.size(); ++i)
    u += std::exp(cplx(0, eig.values(i))) *
         CMat(eig.vectors.col(i) * eig.vectors.col(i).adjoint());
  return u;
}

/// Random even unital CP trace-preserving map on a graded algebra: a convex
/// mixture of conjugations by homogeneous unitaries.
inline AlgebraMap random_even_cptp(const OperatorAlgebra& alg, Rng& rng,
                                   int terms = 3) {
  std::vector<CMat> kraus;
  double total = 0.0;
  std::vector<double> weights;
  for (int t = 0; t < terms; ++t) {
    weights.push_back(rng.uniform() + 0.2);
    total += weights.back();
  }
  for (int t = 0; t < terms; ++t)
    kraus.push_back(CMat(std::sqrt(weights[t] / total) * random_even_unitary(alg, rng)));
  return AlgebraMap::from_kraus(alg, alg, kraus, 1e-8);
}

/// The rank-biased perturbation of the even projection used as the
/// detailed-balance negative control.
inline AlgebraMap perturbed_even_projection(const OperatorAlgebra& alg,
                                            const CMat& odd_unitary, double delta) {
  AlgebraMap eps = AlgebraMap::even_projection(alg);
  AlgebraMap conj = AlgebraMap::conjugation(alg, alg, odd_unitary, 1e-8);
  return AlgebraMap(alg, alg,
                    CMat((1.0 - delta) * eps.coeff() + delta * conj.coeff()));
}

}  // namespace fermikit::testsupport
