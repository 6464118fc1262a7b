#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace om {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OracleAgreement {
  std::size_t pairs = 0;
  std::size_t disagreements = 0;
};

// Exact matcher against exhaustive injection search over every connected
// query class with <= max_query nodes and every graph class with <= max_target
// nodes (one representative per isomorphism class, uniform labels).
OracleAgreement check_oracle(std::size_t max_query, std::size_t max_target);

struct GeometryViolations {
  std::size_t transitivity = 0;
  std::size_t antisymmetry = 0;
  std::size_t intersection = 0;
};

// Random nonnegative integer-grid triples so that equality cases occur.
GeometryViolations check_geometry(std::size_t triples, std::uint64_t seed);

struct GradientAgreement {
  double max_relative_error = 0.0;
  std::size_t batches = 0;
  std::size_t resampled = 0;  // draws rejected for sitting too close to a kink
};

// Analytic vs central-difference gradients of margin loss over a small
// encoder on random tiny batches.
GradientAgreement check_gradients(std::size_t batches, std::uint64_t seed);

std::vector<SelftestCheck> run_selftest(std::uint64_t seed);

}  // namespace om
