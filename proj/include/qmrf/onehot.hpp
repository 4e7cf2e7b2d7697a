#pragma once

#include <span>
#include <vector>

#include "qmrf/mrf.hpp"
#include "qmrf/qubo.hpp"

namespace qmrf {

/// Per-vertex rectifier quantities for the one-hot encoding.
///
/// gamma[v][k][r]  max pairwise cost on the k-th incident edge of v with v at label r
/// chi[v]          upper bound on the energy change of switching on the first label of v
/// zeta[v][r]      sum of all negative pairwise costs reachable from label r of v
/// theta[v](r, s)  min{0, phi(r) + zeta(r) - eps, phi(s) + zeta(s) - eps}
/// lambda_diag     chi, per label
/// lambda_off      (chi - theta) / 2, per label pair
struct RectifierTable {
  std::vector<std::vector<std::vector<double>>> gamma;
  std::vector<double> chi;
  std::vector<std::vector<double>> zeta;
  std::vector<CostMatrix> theta;
  std::vector<std::vector<double>> lambda_diag;
  std::vector<CostMatrix> lambda_off;
  double epsilon = 0.0;
};

/// 1e-6 * max(1, largest absolute potential).
double default_epsilon(const MarkovRandomField& mrf);

RectifierTable compute_rectifiers(const MarkovRandomField& mrf, double epsilon);

/// Index of the first one-hot variable of every vertex (size V + 1).
std::vector<int> one_hot_offsets(const MarkovRandomField& mrf);

/// One-hot QUBO with granular rectifiers scaled by t. For every one-hot
/// feasible x, evaluate(x) + offset equals the MRF energy of the decoded
/// labelling. Every same-vertex pair and every cross-edge label pair is kept
/// as a coupler, including zero-weight ones.
QuboInstance encode_one_hot(const MarkovRandomField& mrf, double epsilon, double t = 1.0);
QuboInstance encode_one_hot(const MarkovRandomField& mrf, const RectifierTable& rect, double t = 1.0);

struct DecodedLabelling {
  Labelling labels;
  std::vector<bool> feasible;  // exactly one bit set for that vertex

  bool all_feasible() const;
};

/// Lowest set label per vertex; label 0 when none is set.
DecodedLabelling decode(const QuboInstance& q, std::span<const std::uint8_t> x);

/// True iff x sets exactly one label bit for every vertex of mrf.
bool verify_feasible_optimum(const MarkovRandomField& mrf, const QuboInstance& q,
                             std::span<const std::uint8_t> x);

/// 1.414 * R * sqrt(D): R the population standard deviation of the
/// off-diagonal coefficients, D the average degree of the problem graph.
double chain_strength(const QuboInstance& q);

}  // namespace qmrf
