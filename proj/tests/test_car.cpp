#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "fermikit/car.hpp"
#include "fermikit/rng.hpp"

using namespace fermikit;

namespace {

// Independent sign oracle: sort a creation string by adjacent transpositions
// and count the swaps.
int sorting_sign(std::vector<int> string) {
  int sign = 1;
  for (size_t i = 0; i < string.size(); ++i)
    for (size_t j = i + 1; j < string.size(); ++j)
      if (string[i] > string[j]) sign = -sign;
  return sign;
}

CVec basis_vector(const FockSpace& fs, std::uint32_t mask) {
  CVec v = CVec::Zero(fs.dim());
  v(mask) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("creation on a single site") {
  FockSpace fs(1);
  CMat ad = creation(1, fs);
  CHECK(ad(1, 0) == cplx(1));
  CHECK(ad.norm() == doctest::Approx(1.0));
  // vacuum annihilation
  CHECK((ad.adjoint() * basis_vector(fs, 0)).norm() == 0.0);
  CHECK_THROWS_AS(creation(2, fs), Error);
}

TEST_CASE("canonical anticommutation relations at n=4") {
  FockSpace fs(4);
  const Index d = fs.dim();
  for (int j = 1; j <= 4; ++j)
    for (int k = 1; k <= 4; ++k) {
      CMat aj = annihilation(j, fs), ak = annihilation(k, fs);
      CMat adj = creation(j, fs);
      CHECK((aj * ak + ak * aj).norm() < 1e-14);
      CMat mixed = adj * ak + ak * adj;
      CMat target = (j == k) ? identity(d) : zeros(d, d);
      CHECK((mixed - target).norm() < 1e-14);
    }
}

TEST_CASE("creation signs match the string-sorting oracle") {
  FockSpace fs(3);
  // a2^dag f_(1) = -f_(1,2): the string (2,1) sorts with one swap
  CVec f1 = basis_vector(fs, fs.mask_of({1}));
  CVec f12 = basis_vector(fs, fs.mask_of({1, 2}));
  CHECK(((creation(2, fs) * f1) + f12).norm() < 1e-14);
  CHECK(sorting_sign({2, 1}) == -1);

  // a1^dag f_(2) = +f_(1,2)
  CVec f2 = basis_vector(fs, fs.mask_of({2}));
  CHECK(((creation(1, fs) * f2) - f12).norm() < 1e-14);
  CHECK(sorting_sign({1, 2}) == 1);

  // f_s built by applying the creation string in order equals the oracle sign
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    std::vector<int> string = {1, 2, 3};
    for (int i = 2; i > 0; --i)
      std::swap(string[i], string[rng.next_u64() % (i + 1)]);
    CVec v = basis_vector(fs, 0);
    for (auto it = string.rbegin(); it != string.rend(); ++it)
      v = creation(*it, fs) * v;
    CVec expected = double(sorting_sign(string)) * basis_vector(fs, fs.mask_of({1, 2, 3}));
    CHECK((v - expected).norm() < 1e-14);
  }
}

TEST_CASE("jkw units are commuting matrix units") {
  FockSpace fs(3);
  JkwUnits units = jkw_units(fs);
  const Index d = fs.dim();

  for (int j = 0; j < 3; ++j) {
    const auto& e = units.units[j];
    CHECK((e[0] + e[3] - identity(d)).norm() < 1e-14);  // e11 + e22 = 1
    // e_kl e_mn = delta_lm e_kn
    for (int k = 1; k <= 2; ++k)
      for (int l = 1; l <= 2; ++l)
        for (int m = 1; m <= 2; ++m)
          for (int n = 1; n <= 2; ++n) {
            CMat prod = e[2 * (k - 1) + (l - 1)] * e[2 * (m - 1) + (n - 1)];
            CMat target = (l == m) ? e[2 * (k - 1) + (n - 1)] : zeros(d, d);
            CHECK((prod - target).norm() < 1e-12);
          }
  }

  // cross-site commutation
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      for (int u = 0; u < 4; ++u)
        for (int v = 0; v < 4; ++v) {
          CMat x = units.units[i][u], y = units.units[j][v];
          CHECK((x * y - y * x).norm() < 1e-12);
        }
    }
}

TEST_CASE("jkw unit map is a *-isomorphism onto the tensor power") {
  FockSpace fs(3);
  JkwIso iso({1, 2, 3}, fs);
  Rng rng(23);

  // multiplicative and dagger-preserving on random span elements
  std::vector<CMat> gens;
  for (int l = 1; l <= 3; ++l) {
    gens.push_back(annihilation(l, fs));
    gens.push_back(creation(l, fs));
  }
  for (int t = 0; t < 10; ++t) {
    CMat x = identity(fs.dim()), y = identity(fs.dim());
    for (int w = 0; w < 3; ++w) {
      x = x * gens[rng.next_u64() % gens.size()];
      y = y * gens[rng.next_u64() % gens.size()];
    }
    CMat fx = iso.to_full(x), fy = iso.to_full(y);
    CHECK((iso.to_full(CMat(x * y)) - fx * fy).norm() < 1e-12 * std::max(1.0, fx.norm() * fy.norm()));
    CHECK((iso.to_full(CMat(x.adjoint())) - fx.adjoint()).norm() < 1e-12);
    CHECK((iso.from_full(fx) - x).norm() < 1e-12 * std::max(1.0, x.norm()));
  }

  // unit products map to elementary tensors
  JkwUnits units = jkw_units(fs);
  CMat w = units.units[0][1] * units.units[1][2] * units.units[2][0];  // e12 e21 e11
  CMat expected = CMat::Zero(8, 8);
  // eps12 (x) eps21 (x) eps11 has its single entry at row (0,1,0), col (1,0,0)
  expected(0 * 4 + 1 * 2 + 0, 1 * 4 + 0 * 2 + 0) = 1.0;
  CHECK((iso.to_full(w) - expected).norm() < 1e-12);
}

TEST_CASE("grading and K operators") {
  FockSpace fs(4);
  Grading g = grading_operator(fs);
  CMat k = k_operator(fs);

  CHECK(((g.gamma() * basis_vector(fs, 0)) - basis_vector(fs, 0)).norm() == 0.0);
  CVec f13 = basis_vector(fs, fs.mask_of({1, 3}));
  CHECK(((k * f13) - f13).norm() == 0.0);
  CHECK((k * k - g.gamma()).norm() < 1e-14);
  CHECK((k - klein_K(g)).norm() < 1e-14);

  for (int l = 1; l <= 4; ++l) {
    CMat al = annihilation(l, fs);
    CHECK((g.gamma() * al * g.gamma() + al).norm() < 1e-14);
  }
}

TEST_CASE("generated algebra dimensions") {
  FockSpace fs1(1);
  OperatorAlgebra m2 = generated_algebra({annihilation(1, fs1)}, fs1.dim());
  CHECK(m2.dim() == 4);

  OperatorAlgebra unit_only = generated_algebra({identity(4)}, 4);
  CHECK(unit_only.dim() == 1);

  FockSpace fs4(4);
  OperatorAlgebra a12 = car_algebra({1, 2}, fs4);
  CHECK(a12.dim() == 16);

  auto rep = a12.closure_report();
  CHECK(rep.dagger_residual < 1e-12);
  CHECK(rep.product_residual < 1e-12);
  CHECK(rep.unit_residual < 1e-12);
  CHECK(rep.orthonormality_residual < 1e-12);
}

TEST_CASE("word-basis construction matches the generic closure") {
  FockSpace fs(3);
  for (const std::vector<int>& sites :
       {std::vector<int>{1}, std::vector<int>{2, 3}, std::vector<int>{1, 3}}) {
    OperatorAlgebra words = car_algebra(sites, fs);
    std::vector<CMat> gens;
    for (int l : sites) gens.push_back(annihilation(l, fs));
    OperatorAlgebra closure = generated_algebra(gens, fs.dim());
    CHECK(words.dim() == closure.dim());
    for (const CMat& b : closure.basis()) CHECK(words.span_residual(b) < 1e-10);
  }
}

TEST_CASE("lattice state, rho and zeta") {
  FockSpace fs(4);
  LatticeState st = LatticeState::uniform({1, 2}, {{1, 3}, {2, 4}}, fs);

  CMat rho = rho_I(st, fs);
  CHECK(rho.trace().real() == doctest::Approx(1.0));
  CHECK(rho(fs.mask_of({1}), fs.mask_of({1})).real() == doctest::Approx(0.25));

  CVec z = zeta(st, fs);
  CVec expected = 0.5 * (basis_vector(fs, 0) + basis_vector(fs, fs.mask_of({1, 3})) +
                         basis_vector(fs, fs.mask_of({2, 4})) +
                         basis_vector(fs, fs.mask_of({1, 2, 3, 4})));
  CHECK((z - expected).norm() < 1e-14);

  // Gamma zeta = zeta
  Grading g = grading_operator(fs);
  CHECK(((g.gamma() * z) - z).norm() < 1e-14);

  // marginal property <a zeta, zeta> = tr(rho_I a) on A(I)
  OperatorAlgebra aI = car_algebra({1, 2}, fs);
  for (const CMat& b : aI.basis()) {
    cplx lhs = (z.adjoint() * (b * z))(0);
    cplx rhs = (rho * b).trace();
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("zeta edge cases") {
  FockSpace fs(4);
  LatticeState point;
  point.subset = {1, 2};
  point.iota = {{1, 3}, {2, 4}};
  point.probabilities[0] = 1.0;
  CHECK((zeta(point, fs) - basis_vector(fs, 0)).norm() == 0.0);

  Rng rng(29);
  for (int t = 0; t < 5; ++t) {
    LatticeState st;
    st.subset = {1, 2};
    st.iota = {{1, 3}, {2, 4}};
    double total = 0.0;
    std::vector<double> raw;
    for (int i = 0; i < 4; ++i) {
      raw.push_back(rng.uniform() + 0.01);
      total += raw.back();
    }
    const std::uint32_t imask = fs.mask_of({1, 2});
    int i = 0;
    for (std::uint32_t sub = imask;; sub = (sub - 1) & imask) {
      st.probabilities[sub] = raw[i++] / total;
      if (sub == 0) break;
    }
    CHECK(zeta(st, fs).norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("order-incompatible iota produces flagged sorting signs") {
  FockSpace fs(4);
  // iota interleaves the mirror sites, so the (3) term picks up a sign
  LatticeState st = LatticeState::uniform({1, 3}, {{1, 2}, {3, 4}}, fs);
  CHECK(zeta_has_nontrivial_signs(st, fs));
  LatticeState mirror = LatticeState::uniform({1, 2}, {{1, 3}, {2, 4}}, fs);
  CHECK_FALSE(zeta_has_nontrivial_signs(mirror, fs));

  CVec z = zeta(st, fs);
  CHECK(z.norm() == doctest::Approx(1.0));
  // the s = (1,3) term sorts (1,3,2,4) with one swap
  CHECK(z(fs.mask_of({1, 2, 3, 4})).real() == doctest::Approx(-0.5));
  CHECK(z(fs.mask_of({3, 4})).real() == doctest::Approx(0.5));

  // the marginal property survives the sign convention
  Grading g = grading_operator(fs);
  CHECK(((g.gamma() * z) - z).norm() < 1e-14);
  OperatorAlgebra aI = car_algebra({1, 3}, fs);
  CMat rho = rho_I(st, fs);
  for (const CMat& b : aI.basis()) {
    cplx lhs = (z.adjoint() * (b * z))(0);
    cplx rhs = (rho * b).trace();
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("lattice state validation") {
  FockSpace fs(4);
  LatticeState bad;
  bad.subset = {1, 2};
  bad.iota = {{1, 2}, {2, 4}};  // image meets I
  bad.probabilities[0] = 1.0;
  CHECK_THROWS_AS(bad.validate(fs), Error);

  LatticeState sum_off = LatticeState::uniform({1}, {{1, 2}}, fs);
  sum_off.probabilities[0] = 0.6;  // now sums to 1.1
  CHECK_THROWS_AS(sum_off.validate(fs), Error);
}

TEST_CASE("self-dual fields") {
  FockSpace fs(3);
  const int n = 3;
  CVec z = CVec::Zero(2 * n);
  z(0) = 1.0;  // (e_1, 0)
  CHECK((selfdual_field(z, fs) - annihilation(1, fs)).norm() == 0.0);

  z.setZero();
  z(n + 1) = 1.0;  // (0, e_2)
  CHECK((selfdual_field(z, fs) - creation(2, fs)).norm() == 0.0);

  Rng rng(31);
  for (int t = 0; t < 10; ++t) {
    CVec w = rng.vector(2 * n);
    // C(x, y) = (conj y, conj x)
    CVec cw(2 * n);
    cw.head(n) = w.tail(n).conjugate();
    cw.tail(n) = w.head(n).conjugate();
    CHECK((selfdual_field(w, fs).adjoint() - selfdual_field(cw, fs)).norm() < 1e-13);
  }
}

TEST_CASE("M(Z) recovers A(I)") {
  FockSpace fs(3);
  const int n = 3;
  std::vector<CVec> zbasis;
  for (int l : {1, 3}) {
    CVec z1 = CVec::Zero(2 * n), z2 = CVec::Zero(2 * n);
    z1(l - 1) = 1.0;
    z2(n + l - 1) = 1.0;
    zbasis.push_back(z1);
    zbasis.push_back(z2);
  }
  OperatorAlgebra mz = algebra_MZ(zbasis, fs);
  OperatorAlgebra aI = car_algebra({1, 3}, fs);
  CHECK(mz.dim() == aI.dim());
  for (const CMat& b : mz.basis())
    CHECK(aI.span_residual(b) < 1e-10);
}
