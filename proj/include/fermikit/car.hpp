#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "fermikit/graded.hpp"

namespace fermikit {

/// n-site anti-symmetric Fock space. The basis vector f_s for a subset
/// s of {1..n} sits at index mask(s), where bit l-1 is set iff site l is in
/// s; f_s = a^dag_{l_1} ... a^dag_{l_k} f_empty with l_1 < ... < l_k.
class FockSpace {
 public:
  explicit FockSpace(int sites);

  int sites() const { return sites_; }
  Index dim() const { return Index(1) << sites_; }

  std::uint32_t mask_of(const std::vector<int>& subset) const;
  std::vector<int> subset_of(std::uint32_t mask) const;
  static int parity(std::uint32_t mask);  // +1 even length, -1 odd

 private:
  int sites_;
};

/// Creation operator a^dag_l; a^dag_l f_s = 0 if l in s, else
/// (-1)^{#{k in s : k < l}} f_{s + l}.
CMat creation(int site, const FockSpace& fs);
CMat annihilation(int site, const FockSpace& fs);

/// Per-site commuting 2x2 matrix units built from the CAR generators:
/// e11 = a a^dag, e12 = V_{j-1} a, e21 = V_{j-1} a^dag, e22 = a^dag a,
/// with V_j the product of U_1..U_j and U_j = a_j a_j^dag - a_j^dag a_j.
struct JkwUnits {
  // units[j][2*(k-1)+(l-1)] is e_kl at site j+1
  std::vector<std::array<CMat, 4>> units;
};
JkwUnits jkw_units(const FockSpace& fs);

/// Diagonal +-1 by subset parity.
Grading grading_operator(const FockSpace& fs);
/// Diagonal {1, -i} by subset parity; agrees with klein_K(grading_operator).
CMat k_operator(const FockSpace& fs);

/// Smallest dagger-closed unit-containing product-closed span of the
/// generators, computed by iterating products with HS Gram-Schmidt until the
/// dimension stabilizes.
OperatorAlgebra generated_algebra(const std::vector<CMat>& generators,
                                  Index ambient_dim, double tol = kDefaultTol);

/// The 4^k matrix-unit words of the sub-lattice: a spanning set of A(sites).
std::vector<CMat> car_word_basis(const std::vector<int>& sites, const FockSpace& fs);

/// A(I): the algebra generated by {a_l : l in I}, graded by the Fock grading.
OperatorAlgebra car_algebra(const std::vector<int>& sites, const FockSpace& fs,
                            double tol = kDefaultTol);

/// Diagonal lattice state: subset I, probabilities keyed by sub-masks of I,
/// and a bijection iota from I into the complement.
struct LatticeState {
  std::vector<int> subset;                       // I, ascending
  std::map<std::uint32_t, double> probabilities; // key: mask over I
  std::map<int, int> iota;

  static LatticeState uniform(std::vector<int> subset, std::map<int, int> iota,
                              const FockSpace& fs);
  void validate(const FockSpace& fs, double tol = 1e-12) const;
  bool faithful() const;  // all p_s > 0
  std::vector<int> complement_sites(const FockSpace& fs) const;
};

/// rho_I = sum_s p_s |f_s><f_s|.
CMat rho_I(const LatticeState& st, const FockSpace& fs);

/// Fermionic entangled vector sum_s sqrt(p_s) f_{s iota(s)}. The composite
/// index is realized as the creation string of s (increasing) followed by the
/// string of iota(s) (increasing); the fermionic sign of sorting the
/// concatenation is absorbed into the coefficient.
CVec zeta(const LatticeState& st, const FockSpace& fs);

/// True when some coefficient of zeta picks up a negative sorting sign,
/// which can only happen for order-incompatible iota; reports flag it.
bool zeta_has_nontrivial_signs(const LatticeState& st, const FockSpace& fs);

/// Self-dual field c(z) = a^dag(ECz) + a(Ez) on the doubled one-particle
/// space h + h with basis (e_k,0),(0,e_l); c(e_l,0) = a_l, c(0,e_l) = a^dag_l.
CMat selfdual_field(const CVec& z, const FockSpace& fs);

/// M(Z), the algebra generated by {c(z) : z in the given basis of Z}.
OperatorAlgebra algebra_MZ(const std::vector<CVec>& z_basis, const FockSpace& fs,
                           double tol = kDefaultTol);

/// *-isomorphism of A(sites) onto the full matrix algebra M_{2^k} through the
/// matrix units of the sub-lattice (sites relabelled in increasing order).
class JkwIso {
 public:
  JkwIso(const std::vector<int>& sites, const FockSpace& fs);

  Index full_dim() const { return full_dim_; }  // 2^k
  /// Transport x in span A(sites) to M_{2^k}.
  CMat to_full(const CMat& x) const;
  /// Pull y in M_{2^k} back into span A(sites).
  CMat from_full(const CMat& y) const;

 private:
  Index ambient_dim_;
  Index full_dim_;
  std::vector<CMat> word_ambient_;  // products of sub-lattice matrix units
  std::vector<CMat> word_full_;     // matching elementary tensors in M_{2^k}
  std::vector<std::pair<Index, Index>> word_pos_;
  double word_norm2_ = 1.0;         // HS norm^2 shared by all words
};

}  // namespace fermikit
