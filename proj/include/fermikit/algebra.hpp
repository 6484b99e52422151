#pragma once

#include <optional>
#include <vector>

#include "fermikit/numlin.hpp"

namespace fermikit {

/// Self-adjoint unitary Gamma; its adjoint action induces the Z2-grading on
/// the ambient matrix algebra.
class Grading {
 public:
  explicit Grading(CMat gamma, double tol = kDefaultTol);
  static Grading trivial(Index dim);

  const CMat& gamma() const { return gamma_; }
  Index dim() const { return gamma_.rows(); }
  bool is_trivial(double tol = kDefaultTol) const;

 private:
  CMat gamma_;
};

/// Modified Gram-Schmidt in the Hilbert-Schmidt inner product. Dependent
/// directions (norm after projection <= tol * largest input norm) are dropped.
std::vector<CMat> hs_orthonormalize(const std::vector<CMat>& mats,
                                    double tol = kDefaultTol);

/// A *-subalgebra of a matrix algebra, held as an HS-orthonormal basis plus
/// optional grading and generating set.
class OperatorAlgebra {
 public:
  OperatorAlgebra(Index ambient_dim, std::vector<CMat> basis,
                  std::optional<Grading> grading = std::nullopt,
                  std::vector<CMat> generators = {});

  static OperatorAlgebra full_matrix(Index d);
  static OperatorAlgebra scalars(Index d);

  Index ambient_dim() const { return ambient_dim_; }
  Index dim() const { return static_cast<Index>(basis_.size()); }
  const std::vector<CMat>& basis() const { return basis_; }
  const std::vector<CMat>& generators() const { return generators_; }
  const std::optional<Grading>& grading() const { return grading_; }

  /// HS coefficients of x against the basis.
  CVec coords(const CMat& x) const;
  CMat from_coords(const CVec& c) const;
  CMat project(const CMat& x) const;
  double span_residual(const CMat& x) const;
  bool contains(const CMat& x, double tol = kDefaultTol) const;

  struct ClosureReport {
    double dagger_residual;
    double product_residual;
    double unit_residual;
    double orthonormality_residual;
  };
  /// Residuals of the defining invariants: basis closed under adjoint and
  /// product, identity contained, basis HS-orthonormal.
  ClosureReport closure_report() const;

  OperatorAlgebra with_grading(Grading g) const;
  OperatorAlgebra with_generators(std::vector<CMat> gens) const;

 private:
  Index ambient_dim_;
  std::vector<CMat> basis_;
  std::optional<Grading> grading_;
  std::vector<CMat> generators_;
};

/// HS-orthonormal basis of a subspace of matrices (carrier for commutants).
struct SubspaceBasis {
  Index ambient_dim = 0;
  std::vector<CMat> mats;

  Index dim() const { return static_cast<Index>(mats.size()); }
  double span_residual(const CMat& x) const;
  /// Reinterpret the span as an algebra; the caller asserts closure.
  OperatorAlgebra as_algebra(std::optional<Grading> grading = std::nullopt,
                             std::vector<CMat> generators = {}) const;
  static SubspaceBasis from_algebra(const OperatorAlgebra& alg);
};

/// Positive linear functional x -> trace(density x), restricted to whichever
/// algebra it travels with.
struct GradedFunctional {
  CMat density;

  cplx value(const CMat& x) const { return (density * x).trace(); }
  bool is_state(double tol = kDefaultTol) const;
  bool is_even(const Grading& g, double tol = kDefaultTol) const;

  static GradedFunctional trace_state(Index d);
  static GradedFunctional vector_state(const CVec& xi);
};

}  // namespace fermikit
