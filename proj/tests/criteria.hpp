#pragma once

// Checks shared by the acceptance binaries and the synthetic integration test.

#include <cmath>
#include <cstdint>
#include <vector>

#include "qmrf/eval.hpp"
#include "qmrf/onehot.hpp"
#include "qmrf/rng.hpp"
#include "qmrf/solve.hpp"
#include "qmrf/stereo.hpp"

namespace criteria {

/// First-level line fields of a pair, one per selected row.
inline std::vector<qmrf::MarkovRandomField> coarse_lines(const qmrf::GrayImage& left, const qmrf::GrayImage& right,
                                                         const qmrf::StereoConfig& cfg, int count) {
  const qmrf::GrayImage l = qmrf::resize_area(left, cfg.levels.front().factor);
  const qmrf::GrayImage r = qmrf::resize_area(right, cfg.levels.front().factor);
  const qmrf::CandidateSet c = qmrf::candidates_at_level(0, nullptr, cfg, l.width, l.height);
  std::vector<qmrf::MarkovRandomField> out;
  const int n = std::min(count, l.height);
  for (int k = 0; k < n; ++k) {
    const int row = static_cast<int>((static_cast<long>(k) * l.height) / n + l.height / (2 * n));
    out.push_back(qmrf::build_bundle_mrf(l, r, std::min(row, l.height - 1), 1, c, cfg.levels.front(), cfg.regularizer));
  }
  return out;
}

struct Dominance {
  int lines = 0;
  int violations = 0;  // SA energy below the exact optimum
  int equal = 0;
  double worst_gap = 0.0;
};

/// QUBO-level comparison: SA best energy plus offset against the chain optimum.
inline Dominance sa_dominance(const std::vector<qmrf::MarkovRandomField>& lines, const qmrf::SaParams& base) {
  Dominance d;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const qmrf::MarkovRandomField& mrf = lines[k];
    const double opt = qmrf::solve_chain_dp(mrf).energy;
    const qmrf::QuboInstance q = qmrf::encode_one_hot(mrf, qmrf::default_epsilon(mrf), 1.0);
    qmrf::SaParams p = base;
    p.seed = qmrf::derive_seed(base.seed, k);
    const double e = qmrf::solve_sa(q, p).best_energy + q.offset();
    const double tol = 1e-9 * std::max(1.0, std::abs(opt));
    ++d.lines;
    if (e < opt - tol) ++d.violations;
    if (std::abs(e - opt) <= tol) ++d.equal;
    d.worst_gap = std::max(d.worst_gap, e - opt);
  }
  return d;
}

/// Mean over lines of energy(mrf, decode(SA result)) minus the chain optimum.
inline double mean_gap(const std::vector<qmrf::MarkovRandomField>& lines, double t, const qmrf::SaParams& base) {
  double sum = 0.0;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const qmrf::MarkovRandomField& mrf = lines[k];
    const double opt = qmrf::solve_chain_dp(mrf).energy;
    const qmrf::QuboInstance q = qmrf::encode_one_hot(mrf, qmrf::default_epsilon(mrf), t);
    qmrf::SaParams p = base;
    p.seed = qmrf::derive_seed(base.seed, k);
    const qmrf::SolveResult r = qmrf::solve_sa(q, p);
    sum += qmrf::energy(mrf, qmrf::decode(q, r.best_x).labels) - opt;
  }
  return sum / static_cast<double>(lines.size());
}

}  // namespace criteria
