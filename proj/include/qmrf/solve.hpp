#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qmrf/mrf.hpp"
#include "qmrf/qubo.hpp"

namespace qmrf {

struct SolveResult {
  Bits best_x;
  double best_energy = 0.0;    // x^T Q x, offset not included
  std::vector<double> samples;  // one energy per read
  std::chrono::nanoseconds elapsed{0};
};

/// Spin form of a QUBO: sum h_i s_i + sum_{i<j} J_ij s_i s_j + offset equals
/// x^T Q x for x = (s + 1) / 2.
struct IsingModel {
  std::vector<double> h;
  std::vector<QuboEntry> J;  // i < j
  double offset = 0.0;

  double evaluate(std::span<const std::int8_t> spins) const;
};

inline constexpr int kExhaustiveMaxVars = 24;

/// Enumerates all 2^n assignments (Gray-code order, exact re-evaluation on
/// near ties). Ties go to the lexicographically smallest bitstring.
/// Throws CapacityError for n > 24.
SolveResult solve_exhaustive(const QuboInstance& q);

struct SaParams {
  int reads = 500;
  int sweeps = 1000;
  /// Inverse temperatures; derived from Q when unset.
  std::optional<std::pair<double, double>> beta_range;
  std::uint64_t seed = 0;
  /// Worker threads over reads; results do not depend on it.
  int jobs = 1;
};

/// (ln 2 / largest single-flip magnitude, ln 100 / smallest nonzero one).
std::pair<double, double> default_beta_range(const QuboInstance& q);

/// Metropolis single-bit-flip annealing with a geometric beta schedule, one
/// sequential sweep over all variables per step. Each read has its own RNG
/// stream derived from (seed, read index); the lowest final energy wins,
/// ties to the lowest read index.
SolveResult solve_sa(const QuboInstance& q, const SaParams& params);

/// Exact MAP on a field whose edges form vertex-disjoint simple paths.
/// Throws StructureError for a vertex of degree > 2 or a cycle.
MapResult solve_chain_dp(const MarkovRandomField& mrf);

IsingModel qubo_to_ising(const QuboInstance& q);

/// Hex form of a bitstring: x_0 is the most significant bit of the first
/// digit; the final digit is zero-padded on the right.
std::string bits_to_hex(std::span<const std::uint8_t> x);
Bits bits_from_hex(const std::string& hex, int n);

/// {"solver", "n", "best_energy", "offset", "best_x", "energies"[, "elapsed_ms"]}
std::string solve_result_json(const SolveResult& r, const QuboInstance& q, const std::string& solver,
                              bool include_timing);

}  // namespace qmrf
