#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hgad {

// One self-check suite outcome: how many checks ran and what failed.
struct SuiteResult {
  std::string name;
  int checks = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

// Closed-form degenerate-autoencoder errors against a numeric oracle
// (principal-direction reconstruction and mean reconstruction computed from
// explicitly built instances), plus domain-violation errors.
SuiteResult verify_reconstruction_gap();

// Distance ordering euclidean <= lorentz < poincare for unit tangent pairs
// pushed through exp_o, random dims in [2, 64]; strict margins above 1e-9
// away from antipodal pairs, equality at exact antipodes, and a worked
// orthogonal pair pinned to high-precision constants.
SuiteResult verify_distance_ordering(int pairs = 10000, std::uint64_t seed = 1);

// Manifold-law properties of the geometry kernels (map inverses, manifold
// membership, distance axioms, transport isometry, gyro identities,
// centralization laws, tape/plain agreement).
SuiteResult verify_geometry(std::uint64_t seed = 1);

// Tape gradients against central finite differences on a 12-node instance,
// all 12 configurations (3 geometries x message passing on/off x alpha in
// {0, 0.5}), tolerance 1e-4. A non-empty geometry name restricts the sweep
// to that geometry's 4 configurations.
SuiteResult verify_gradcheck(const std::string& geometry = "");

// roc-auc / average-precision against exhaustive pair-counting and
// threshold-sweep oracles: random tied-score cases plus every label pattern
// for n <= 8.
SuiteResult verify_metrics(int cases = 1000, std::uint64_t seed = 1);

// All suites in a stable order, optionally filtered by substring of the name.
std::vector<SuiteResult> verify_all(const std::string& only = "");

}  // namespace hgad
