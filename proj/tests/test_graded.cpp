#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fermikit/car.hpp"
#include "fermikit/graded.hpp"
#include "fermikit/rng.hpp"

using namespace fermikit;

namespace {

Grading fock2_grading() { return grading_operator(FockSpace(2)); }

}  // namespace

TEST_CASE("even and odd parts") {
  FockSpace fs(2);
  Grading g = fock2_grading();

  CHECK((even_part(g.gamma(), g) - g.gamma()).norm() < 1e-14);
  CHECK(odd_part(identity(4), g).norm() == 0.0);

  CMat a1 = annihilation(1, fs);
  // Gamma a1 Gamma = -a1 by direct product
  CHECK((g.gamma() * a1 * g.gamma() + a1).norm() < 1e-14);
  CHECK(even_part(a1, g).norm() < 1e-14);
  CHECK((odd_part(a1, g) - a1).norm() < 1e-14);

  Rng rng(2);
  CMat x = rng.matrix(4, 4);
  CHECK((even_part(x, g) + odd_part(x, g) - x).norm() == 0.0);
}

TEST_CASE("klein kappa") {
  Grading triv = Grading::trivial(3);
  Rng rng(4);
  CMat x = rng.matrix(3, 3);
  CHECK((klein_kappa(x, triv) - x).norm() == 0.0);

  FockSpace fs(2);
  Grading g = fock2_grading();
  CMat y = rng.matrix(4, 4);
  CHECK((klein_kappa(klein_kappa(y, g), g) - y).norm() < 1e-13 * y.norm());

  CMat a1 = annihilation(1, fs);
  CHECK((klein_kappa(a1, g) - g.gamma() * a1).norm() < 1e-14);
}

TEST_CASE("klein eta is a *-automorphism implemented by K") {
  FockSpace fs(2);
  Grading g = fock2_grading();
  CMat k = klein_K(g);

  CHECK((klein_eta(identity(4), g) - identity(4)).norm() == 0.0);
  CHECK((k * k - g.gamma()).norm() < 1e-14);
  CHECK((k * k.adjoint() - identity(4)).norm() < 1e-14);

  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    CMat a = rng.matrix(4, 4), b = rng.matrix(4, 4);
    CMat lhs = klein_eta(CMat(a * b), g);
    CMat rhs = klein_eta(a, g) * klein_eta(b, g);
    CHECK((lhs - rhs).norm() < 1e-12 * std::max(1.0, lhs.norm()));
    CHECK((klein_eta(a, g) - k * a * k.adjoint()).norm() < 1e-12 * a.norm());
    CHECK((klein_eta(klein_eta(a, g), g) - g.gamma() * a * g.gamma()).norm() <
          1e-12 * a.norm());
    CHECK((klein_eta_inv(klein_eta(a, g), g) - a).norm() < 1e-12 * a.norm());
  }
}

TEST_CASE("klein K on simple gradings") {
  CHECK((klein_K(Grading::trivial(2)) - identity(2)).norm() == 0.0);

  CMat gamma(2, 2);
  gamma << 1, 0, 0, -1;
  CMat k = klein_K(Grading(gamma));
  CHECK(k(0, 0) == cplx(1, 0));
  CHECK(k(1, 1) == cplx(0, -1));

  FockSpace fs(2);
  CMat kf = k_operator(fs);
  CVec f1 = CVec::Zero(4);
  f1(1) = 1.0;  // f_{(1)}
  CHECK(((kf * f1) - cplx(0, -1) * f1).norm() < 1e-14);
  CHECK((kf - klein_K(grading_operator(fs))).norm() < 1e-14);
}

TEST_CASE("eta = eps-tilde after kappa") {
  FockSpace fs(2);
  Grading g = fock2_grading();
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    CMat a = rng.matrix(4, 4);
    CMat eps_tilde_of_kappa =
        even_part(klein_kappa(a, g), g) + cplx(0, 1) * odd_part(klein_kappa(a, g), g);
    CMat kappa_of_eps_tilde =
        klein_kappa(CMat(even_part(a, g) + cplx(0, 1) * odd_part(a, g)), g);
    CMat eta = klein_eta(a, g);
    CHECK((eps_tilde_of_kappa - eta).norm() < 1e-12 * std::max(1.0, eta.norm()));
    CHECK((kappa_of_eps_tilde - eta).norm() < 1e-12 * std::max(1.0, eta.norm()));
  }
}

TEST_CASE("omega(kappa(a) b) = omega(a b) for even vector mixtures") {
  FockSpace fs(2);
  Grading g = fock2_grading();
  Rng rng(10);
  // density supported on even vectors: Gamma rho = rho
  CVec v1 = CVec::Zero(4), v2 = CVec::Zero(4);
  v1(0) = 1.0;                      // f_empty
  v2(3) = 1.0;                      // f_{(1,2)}
  CVec mix = (v1 + 2.0 * v2) / std::sqrt(5.0);
  CMat rho = 0.5 * (v1 * v1.adjoint()) + 0.5 * (mix * mix.adjoint());
  for (int t = 0; t < 10; ++t) {
    CMat a = rng.matrix(4, 4), b = rng.matrix(4, 4);
    cplx lhs = (rho * klein_kappa(a, g) * b).trace();
    cplx rhs = (rho * a * b).trace();
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("fermi sign table") {
  CHECK(fermi_sign(1, 1) == 1);
  CHECK(fermi_sign(1, -1) == 1);
  CHECK(fermi_sign(-1, 1) == 1);
  CHECK(fermi_sign(-1, -1) == -1);
}

TEST_CASE("fermi star on elementary tensors") {
  FockSpace fs(1);
  Grading g = grading_operator(fs);  // diag(1,-1)
  Rng rng(12);

  // both even
  CMat ae = even_part(rng.matrix(2, 2), g), be = even_part(rng.matrix(2, 2), g);
  FermiTensorElement x = FermiTensorElement::elementary(ae, be, g, g);
  CHECK((fermi_star(x).ambient() - kron(CMat(ae.adjoint()), CMat(be.adjoint()))).norm() <
        1e-13);

  // both odd generators pick up the sign
  CMat a1 = annihilation(1, fs);
  FermiTensorElement y = FermiTensorElement::elementary(a1, a1, g, g);
  CHECK((fermi_star(y).ambient() +
         kron(CMat(a1.adjoint()), CMat(a1.adjoint()))).norm() < 1e-13);

  // star is involutive on mixed elements: check via the sector sign oracle
  for (int t = 0; t < 10; ++t) {
    FermiTensorElement z(rng.matrix(4, 4), g, g);
    CHECK((fermi_star(fermi_star(z)).ambient() - z.ambient()).norm() <
          1e-13 * z.ambient().norm());
    // oracle: star of each homogeneous sector separately
    CMat expected = CMat::Zero(4, 4);
    for (int i : {1, -1})
      for (int j : {1, -1})
        expected += double(fermi_sign(i, j)) * z.sector(i, j).adjoint();
    CHECK((fermi_star(z).ambient() - expected).norm() < 1e-13);
  }
}

TEST_CASE("fermi product on elementary tensors") {
  FockSpace fs(1);
  Grading g = grading_operator(fs);
  Rng rng(14);

  CMat a = rng.matrix(2, 2), b = rng.matrix(2, 2);
  FermiTensorElement left = FermiTensorElement::elementary(a, identity(2), g, g);
  FermiTensorElement right = FermiTensorElement::elementary(identity(2), b, g, g);
  CHECK((fermi_mul(left, right).ambient() - kron(a, b)).norm() < 1e-13);

  // (1 (x) b)(A (x) 1) = -A (x) b when b, A are odd
  CMat a1 = annihilation(1, fs);
  CMat odd_b = a1, odd_a = CMat(a1.adjoint());
  FermiTensorElement lb = FermiTensorElement::elementary(identity(2), odd_b, g, g);
  FermiTensorElement ra = FermiTensorElement::elementary(odd_a, identity(2), g, g);
  CHECK((fermi_mul(lb, ra).ambient() + kron(odd_a, odd_b)).norm() < 1e-13);

  // associativity on random triples
  for (int t = 0; t < 10; ++t) {
    FermiTensorElement x(rng.matrix(4, 4), g, g);
    FermiTensorElement y(rng.matrix(4, 4), g, g);
    FermiTensorElement z(rng.matrix(4, 4), g, g);
    CMat lhs = fermi_mul(fermi_mul(x, y), z).ambient();
    CMat rhs = fermi_mul(x, fermi_mul(y, z)).ambient();
    CHECK((lhs - rhs).norm() < 1e-12 * std::max(1.0, lhs.norm()));
  }

  // star is an anti-homomorphism for the graded product
  for (int t = 0; t < 5; ++t) {
    FermiTensorElement x(rng.matrix(4, 4), g, g);
    FermiTensorElement y(rng.matrix(4, 4), g, g);
    CMat lhs = fermi_star(fermi_mul(x, y)).ambient();
    CMat rhs = fermi_mul(fermi_star(y), fermi_star(x)).ambient();
    CHECK((lhs - rhs).norm() < 1e-12 * std::max(1.0, lhs.norm()));
  }

  // ordinary matrix product when one grading is trivial
  Grading triv = Grading::trivial(2);
  for (int t = 0; t < 5; ++t) {
    FermiTensorElement x(rng.matrix(4, 4), triv, g);
    FermiTensorElement y(rng.matrix(4, 4), triv, g);
    CHECK((fermi_mul(x, y).ambient() - x.ambient() * y.ambient()).norm() <
          1e-12 * std::max(1.0, x.ambient().norm() * y.ambient().norm()));
  }
}

TEST_CASE("product grading") {
  Grading triv = Grading::trivial(2);
  CHECK((product_grading(triv, triv).gamma() - identity(4)).norm() == 0.0);

  CMat gz(2, 2);
  gz << 1, 0, 0, -1;
  Grading g(gz);
  CMat expected = kron(gz, gz);
  CHECK((product_grading(g, g).gamma() - expected).norm() == 0.0);
  CHECK(expected(0, 0) == cplx(1));
  CHECK(expected(1, 1) == cplx(-1));
  CHECK(expected(2, 2) == cplx(-1));
  CHECK(expected(3, 3) == cplx(1));

  // odd (x) odd sector is even for the product grading
  FockSpace fs(1);
  CMat a1 = annihilation(1, fs);
  FermiTensorElement x = FermiTensorElement::elementary(a1, a1, g, g);
  Grading pg = product_grading(g, g);
  CHECK(odd_part(x.ambient(), pg).norm() < 1e-14);
}

TEST_CASE("product functional") {
  FockSpace fs(1);
  Grading g = grading_operator(fs);
  GradedFunctional tr2 = GradedFunctional::trace_state(2);

  FermiTensorElement unit = FermiTensorElement::elementary(identity(2), identity(2), g, g);
  CHECK(std::abs(product_functional(tr2, tr2, unit) - cplx(1)) < 1e-14);

  Rng rng(16);
  CMat a = rng.matrix(2, 2);
  FermiTensorElement left = FermiTensorElement::elementary(a, identity(2), g, g);
  CHECK(std::abs(product_functional(tr2, tr2, left) - tr2.value(a)) < 1e-13);

  CMat a1 = annihilation(1, fs);
  FermiTensorElement odd = FermiTensorElement::elementary(a1, a1, g, g);
  CHECK(std::abs(product_functional(tr2, tr2, odd)) < 1e-14);
}

TEST_CASE("positivity gram for the trace state on M2") {
  Grading triv = Grading::trivial(2);
  GradedFunctional tr2 = GradedFunctional::trace_state(2);
  GradedFunctional point{CMat(identity(1))};  // scalar second factor
  Grading triv1 = Grading::trivial(1);

  std::vector<FermiTensorElement> basis;
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      CMat e = CMat::Zero(2, 2);
      e(i, j) = 1.0;
      basis.push_back(FermiTensorElement::elementary(e, identity(1), triv, triv1));
    }
  auto f = [&](const FermiTensorElement& x) {
    return product_functional(tr2, point, x);
  };
  PositivityVerdict v = functional_positivity_gram(f, basis);
  CHECK(v.psd);
  CHECK(v.min_eig == doctest::Approx(0.5));
}

TEST_CASE("product functional positive when one factor is even") {
  FockSpace fs(1);
  Grading g = grading_operator(fs);
  Rng rng(18);
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
  for (int t = 0; t < 10; ++t) {
    CMat rho_even = even_part(rng.density(2), g);
    rho_even /= rho_even.trace();
    GradedFunctional om{rho_even};
    GradedFunctional ph{rng.density(2)};
    REQUIRE(om.is_even(g, 1e-10));
    auto f = [&](const FermiTensorElement& x) { return product_functional(om, ph, x); };
    PositivityVerdict v = functional_positivity_gram(f, basis);
    CHECK(v.min_eig >= -1e-10);
  }
}

TEST_CASE("non-even pairs violate positivity") {
  CounterexampleReport rep = product_positivity_counterexample(42, 500);
  CHECK(rep.best_min_eig < -1e-6);
}

TEST_CASE("sign-expansion gram agrees with the generic gram") {
  FockSpace fs(1);
  Grading g = grading_operator(fs);
  std::vector<CMat> units;
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      CMat e = CMat::Zero(2, 2);
      e(i, j) = 1.0;
      units.push_back(e);
    }
  std::vector<FermiTensorElement> basis;
  for (const CMat& a : units)
    for (const CMat& b : units)
      basis.push_back(FermiTensorElement::elementary(a, b, g, g));

  Rng rng(22);
  for (int t = 0; t < 5; ++t) {
    GradedFunctional om{rng.density(2)}, ph{rng.density(2)};
    auto f = [&](const FermiTensorElement& x) { return product_functional(om, ph, x); };
    PositivityVerdict generic = functional_positivity_gram(f, basis);
    PositivityVerdict fast = product_state_gram(om, ph, units, units, g, g);
    CHECK(fast.min_eig == doctest::Approx(generic.min_eig).epsilon(1e-10));
  }
}

TEST_CASE("product functional obeys the Cauchy-Schwarz bound") {
  FockSpace fs(1);
  Grading g = grading_operator(fs);
  Rng rng(19);
  for (int t = 0; t < 10; ++t) {
    CMat rho_even = even_part(rng.density(2), g);
    rho_even /= rho_even.trace();
    GradedFunctional om{rho_even}, ph{rng.density(2)};
    FermiTensorElement x(rng.matrix(4, 4), g, g);
    auto f = [&](const FermiTensorElement& e) { return product_functional(om, ph, e); };
    const double lhs = std::norm(f(x));
    const double rhs = f(fermi_mul(fermi_star(x), x)).real();
    CHECK(lhs <= rhs * (1.0 + 1e-10) + 1e-12);
  }
}

TEST_CASE("conditional expectation onto the even left leg") {
  FockSpace fs(1);
  Grading g = grading_operator(fs);
  Rng rng(20);

  CMat b = rng.matrix(2, 2);
  FermiTensorElement unit_b = FermiTensorElement::elementary(identity(2), b, g, g);
  CHECK((conditional_expectation_even(unit_b).ambient() - unit_b.ambient()).norm() <
        1e-14);

  CMat a1 = annihilation(1, fs);
  FermiTensorElement odd_b = FermiTensorElement::elementary(a1, b, g, g);
  CHECK(conditional_expectation_even(odd_b).ambient().norm() < 1e-14);

  // idempotent, bimodule over even-left elements, positive on x*x
  for (int t = 0; t < 10; ++t) {
    FermiTensorElement x(rng.matrix(4, 4), g, g);
    FermiTensorElement ex = conditional_expectation_even(x);
    CHECK((conditional_expectation_even(ex).ambient() - ex.ambient()).norm() < 1e-13);

    CMat even_a = even_part(rng.matrix(2, 2), g);
    FermiTensorElement y = FermiTensorElement::elementary(even_a, rng.matrix(2, 2), g, g);
    CMat lhs = conditional_expectation_even(fermi_mul(x, y)).ambient();
    CMat rhs = fermi_mul(ex, y).ambient();
    CHECK((lhs - rhs).norm() < 1e-12 * std::max(1.0, lhs.norm()));

    FermiTensorElement xx = fermi_mul(fermi_star(x), x);
    CMat exx = conditional_expectation_even(xx).ambient();
    RVec ev = herm_eigvals(CMat(0.5 * (exx + exx.adjoint())), 1e-8);
    CHECK(ev(0) >= -1e-10 * std::max(1.0, exx.norm()));
  }
}

TEST_CASE("graded product representation of the two leg embeddings") {
  FockSpace fs(2);
  Grading g = grading_operator(fs);
  FockSpace fs1(1);
  Grading g1 = grading_operator(fs1);

  // A({1}) and A({2}) inside A(L), realized through the JKW legs
  JkwIso leg1({1}, fs), leg2({2}, fs);
  auto pi1 = [&](const CMat& x) { return leg1.from_full(x); };
  auto pi2 = [&](const CMat& x) { return leg2.from_full(x); };

  std::vector<CMat> dom;
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      CMat e = CMat::Zero(2, 2);
      e(i, j) = 1.0;
      dom.push_back(e);
    }

  GradedRepVerdict v = check_graded_product_rep(dom, dom, pi1, pi2, g1, g1, g);
  CHECK(v.commutation_residual < 1e-12);
  CHECK(v.multiplicativity_residual < 1e-12);
  CHECK(v.star_residual < 1e-12);

  // pi2 = pi1 violates graded commutation
  CHECK_THROWS_AS(check_graded_product_rep(dom, dom, pi1, pi1, g1, g1, g), Error);

  // trivial gradings reduce to the ordinary tensor product check
  Grading t2 = Grading::trivial(2), t4 = Grading::trivial(4);
  auto left = [&](const CMat& x) { return kron(x, identity(2)); };
  auto right = [&](const CMat& x) { return kron(identity(2), x); };
  GradedRepVerdict w = check_graded_product_rep(dom, dom, left, right, t2, t2, t4);
  CHECK(w.commutation_residual < 1e-14);
  CHECK(w.multiplicativity_residual < 1e-14);
  CHECK(w.star_residual < 1e-14);
}
