#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fermikit/balance.hpp"
#include "fermikit/scenario.hpp"

namespace py = pybind11;
using namespace fermikit;

namespace {

Eigen::MatrixXcd to_dense(const CMat& m) { return m; }

std::vector<Eigen::MatrixXcd> to_dense_list(const std::vector<CMat>& mats) {
  return {mats.begin(), mats.end()};
}

OperatorAlgebra make_car_algebra(const std::vector<int>& sites, int n) {
  return car_algebra(sites, FockSpace(n));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "finite-dimensional CAR / fermionic detailed balance toolkit";

  py::register_exception<Error>(m, "FermikitError");

  // --- dense kernel
  m.def("kron", [](const CMat& a, const CMat& b) { return to_dense(kron(a, b)); });
  m.def("herm_eigvals",
        [](const CMat& a, double tol) { return herm_eigvals(a, tol); },
        py::arg("a"), py::arg("tol") = kDefaultTol);
  m.def("nullspace",
        [](const CMat& a, double tol) {
          std::vector<Eigen::VectorXcd> out;
          for (const CVec& v : nullspace(a, tol)) out.push_back(v);
          return out;
        },
        py::arg("a"), py::arg("tol") = kDefaultTol);
  m.def("solve_lstsq", [](const CMat& a, const CMat& b) {
    LstsqResult r = solve_lstsq(a, b);
    return py::make_tuple(to_dense(r.x), r.residual);
  });

  // --- Fock space operators
  m.def("creation", [](int site, int n) { return to_dense(creation(site, FockSpace(n))); },
        py::arg("site"), py::arg("sites"));
  m.def("annihilation",
        [](int site, int n) { return to_dense(annihilation(site, FockSpace(n))); },
        py::arg("site"), py::arg("sites"));
  m.def("grading", [](int n) { return to_dense(grading_operator(FockSpace(n)).gamma()); },
        py::arg("sites"));
  m.def("k_operator", [](int n) { return to_dense(k_operator(FockSpace(n))); },
        py::arg("sites"));

  m.def("klein_kappa", [](const CMat& a, const CMat& gamma) {
    return to_dense(klein_kappa(a, Grading(gamma)));
  });
  m.def("klein_eta", [](const CMat& a, const CMat& gamma) {
    return to_dense(klein_eta(a, Grading(gamma)));
  });
  m.def("klein_K", [](const CMat& gamma) { return to_dense(klein_K(Grading(gamma))); });

  py::class_<OperatorAlgebra>(m, "OperatorAlgebra")
      .def_property_readonly("dim", &OperatorAlgebra::dim)
      .def_property_readonly("ambient_dim", &OperatorAlgebra::ambient_dim)
      .def("basis", [](const OperatorAlgebra& alg) { return to_dense_list(alg.basis()); })
      .def("contains", &OperatorAlgebra::contains, py::arg("x"),
           py::arg("tol") = kDefaultTol);

  m.def("car_algebra", &make_car_algebra, py::arg("sites"), py::arg("n"),
        "the algebra generated by the annihilators of the given sites");

  m.def("commutant_basis", [](const OperatorAlgebra& alg) {
    return to_dense_list(commutant(alg).mats);
  });
  m.def("twisted_commutant_basis", [](const OperatorAlgebra& alg, const CMat& gamma) {
    return to_dense_list(twisted_commutant(alg, Grading(gamma)).mats);
  });
  m.def("subspace_distance", [](const std::vector<CMat>& a, const std::vector<CMat>& b) {
    if (a.empty() || b.empty())
      throw Error(ErrorCode::InvalidArgument, "subspace_distance: empty basis");
    SubspaceBasis sa{a.front().rows(), a}, sb{b.front().rows(), b};
    return subspace_equal(sa, sb).distance;
  });

  // --- lattice states
  m.def("zeta",
        [](const std::vector<int>& subset, const std::map<int, int>& iota,
           const std::map<std::string, double>& probabilities, int n) {
          FockSpace fs(n);
          LatticeState st;
          st.subset = subset;
          st.iota = iota;
          for (const auto& [key, p] : probabilities) {
            std::vector<int> sites;
            std::stringstream ss(key);
            std::string tok;
            while (std::getline(ss, tok, ','))
              if (!tok.empty()) sites.push_back(std::stoi(tok));
            st.probabilities[fs.mask_of(sites)] = p;
          }
          return Eigen::VectorXcd(zeta(st, fs));
        },
        py::arg("subset"), py::arg("iota"), py::arg("probabilities"), py::arg("sites"));

  // --- balance residuals for the uniform mirror lattice
  m.def("fsqdb_residual_grading",
        [](int n) {
          FockSpace fs(n);
          const int half = n / 2;
          std::vector<int> subset;
          std::map<int, int> iota;
          for (int l = 1; l <= half; ++l) {
            subset.push_back(l);
            iota[l] = l + half;
          }
          LatticeState st = LatticeState::uniform(subset, iota, fs);
          OperatorAlgebra a_i = car_algebra(subset, fs);
          CopyIso k(iota, fs);
          FsqdbResult r =
              fsqdb_residual(AlgebraMap::grading_map(a_i), st, k, fs);
          return py::make_tuple(r.residual, r.holds);
        },
        py::arg("sites"),
        "detailed-balance residual of the grading automorphism on the "
        "half-lattice of an even mirror lattice");

  // --- scenario runner
  m.def("run_scenario_json", [](const std::string& text) {
    return report_to_json(run_scenario(parse_scenario(text)));
  });
  m.def("demo_report_json", [](int sites) {
    return report_to_json(run_scenario(demo_scenario(sites)));
  });
  m.def("demo_scenario_json", [](int sites) {
    return scenario_to_json(demo_scenario(sites));
  });
  m.def("list_checks", []() { return list_checks(); });

  m.attr("__version__") = FERMIKIT_VERSION;
}
