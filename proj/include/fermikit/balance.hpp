#pragma once

#include "fermikit/duality.hpp"
#include "fermikit/gns.hpp"

namespace fermikit {

/// Copying *-isomorphism A(I) -> A(iota(I)) acting as a_l -> a_{iota(l)} on
/// generators, extended through the normal-ordered word basis.
class CopyIso {
 public:
  CopyIso(const std::map<int, int>& iota, const FockSpace& fs,
          double tol = kDefaultTol);

  const AlgebraMap& map() const { return *map_; }
  const OperatorAlgebra& source() const { return map_->domain(); }
  const OperatorAlgebra& target() const { return map_->codomain(); }
  CMat apply(const CMat& x) const { return map_->apply(x); }
  CMat apply_inverse(const CMat& y) const;
  /// worst multiplicativity / star residual found while certifying the map
  double iso_residual() const { return iso_residual_; }

 private:
  std::optional<AlgebraMap> map_;
  CMat inverse_coeff_;
  double iso_residual_ = 0.0;
};

CopyIso copy_iso(const std::map<int, int>& iota, const FockSpace& fs,
                 double tol = kDefaultTol);

/// Psi^iota = kappa . Psi . kappa^{-1} on A(iota(I)).
AlgebraMap copy_map(const AlgebraMap& psi, const CopyIso& k);

struct FsqdbResult {
  double residual;         // max |phi(a Psi^iota(b)) - phi(Psi(a) b)| over bases
  double fro_residual;     // Frobenius norm of the defect bilinear form
  double scaled_residual;  // residual / max(1, ||Psi||_basis)
  double map_distance;     // twisted dual vs copy, on the complement basis
  bool holds;
};

/// Fermionic standard quantum detailed balance residual of Psi on A(I) under
/// the entangled lattice state; requires iota(I) = L minus I and faithful p.
FsqdbResult fsqdb_residual(const AlgebraMap& psi, const LatticeState& st,
                           const CopyIso& k, const FockSpace& fs,
                           double tol = kDefaultTol);

struct DiagFsqdbResult {
  double residual;      // max over the twisted-commutant basis
  double fro_residual;  // basis-independent Frobenius defect
};

/// The same condition expressed through the diagonal-state bilinear form
/// B(a, b) = <a b zeta, zeta> on the twisted commutant.
DiagFsqdbResult diag_fsqdb_residual(const AlgebraMap& psi, const LatticeState& st,
                                    const CopyIso& k, const FockSpace& fs,
                                    double tol = kDefaultTol);

struct ThetaSqdbResult {
  double residual;           // || Psi^theta - Psi || over the basis
  double rho_copy_residual;  // || Psi' - Psi^{j.theta} || over the commutant
};

/// Standard quantum detailed balance with a reversing operation on a full
/// matrix algebra (trivial grading): Psi^theta = theta . j . Psi' . j . theta.
ThetaSqdbResult theta_sqdb_residual(const SuperOp& psi, const CMat& rho,
                                    const SuperOp& theta, double tol = kDefaultTol);

struct AbstractFsqdbResult {
  double residual;      // max over basis pairs of the defining relation
  double fro_residual;
  double anti_homo_residual;  // certification of rho as iso onto the opposite
};

/// C*-formulation through the diagonal state: the copying map rho is supplied
/// as its linear carrier A -> A, required to be a *-anti-homomorphism (that
/// is, an isomorphism onto the opposite algebra in the canonical realization).
AbstractFsqdbResult abstract_fsqdb_residual(const DiagonalState& ds,
                                            const AlgebraMap& phi,
                                            const AlgebraMap& rho_carrier,
                                            double tol = kDefaultTol);

/// The lattice-induced abstract copying map j . eta^{-1} . kappa, returned as
/// the linear carrier on A(I).
AlgebraMap lattice_opposite_copy(const CopyIso& k, const LatticeState& st,
                                 const FockSpace& fs, double tol = kDefaultTol);

}  // namespace fermikit
