#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fermikit/balance.hpp"

namespace fermikit {

/// Declarative description of the dynamics to verify.
struct MapSpec {
  std::string kind = "identity";  // identity | grading | even-projection |
                                  // kraus | superop | conjugation
  std::vector<CMat> matrices;     // kraus factors or the conjugating unitary
  CMat superop;                   // d^2 x d^2 when kind == "superop"
};

struct Scenario {
  int sites = 4;
  std::vector<int> subset;
  std::map<int, int> iota;
  std::map<std::uint32_t, double> probabilities;
  MapSpec map;
  std::vector<std::string> checks;
  double tol = kDefaultTol;
  std::uint64_t seed = 42;

  LatticeState lattice_state() const;
};

/// Parses and schema-validates; errors carry the offending field path.
Scenario parse_scenario(const std::string& json_text);
std::string scenario_to_json(const Scenario& s);
Scenario demo_scenario(int sites);

struct CheckRecord {
  std::string name;
  bool pass = false;
  std::map<std::string, double> residuals;
  double tolerance = kDefaultTol;
  std::uint64_t seed = 0;
  double elapsed_ms = 0.0;  // console diagnostics; kept out of the report file
  std::string error;        // non-empty when the check itself failed to run
};

struct Report {
  std::string toolkit;
  std::string scenario_digest;
  double tol = kDefaultTol;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> checks;
  bool pass = false;
};

const std::vector<std::string>& list_checks();

/// Executes the requested checks; parallelism capped by FERMIKIT_THREADS.
Report run_scenario(const Scenario& s);

/// Deterministic serialization: byte-identical for identical
/// (scenario, seed, version).
std::string report_to_json(const Report& r);

}  // namespace fermikit
