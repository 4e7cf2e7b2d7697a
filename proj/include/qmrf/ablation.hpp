#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qmrf/dataset.hpp"
#include "qmrf/qubo.hpp"
#include "qmrf/stereo.hpp"

namespace qmrf {

/// Ablation axes:
///   regularizer  truncated | linear | none
///   filters      on | off | median | bilateral   (which post-filters stay on)
///   levels       k: drop the k coarsest levels
///   t            rectifier strength (QUBO solvers only)
enum class AblationAxis { Regularizer, Filters, Levels, T };
AblationAxis ablation_axis_from_string(const std::string& s);
std::string to_string(AblationAxis a);

StereoConfig apply_ablation(const StereoConfig& base, AblationAxis axis, const std::string& value);

struct AblationRow {
  std::string value;
  std::string pair;  // "mean" for the per-value average
  double rmse = 0.0;
  double bpp = 0.0;
};

std::vector<AblationRow> run_ablation(const std::vector<StereoPairFiles>& pairs, const StereoConfig& base,
                                      AblationAxis axis, const std::vector<std::string>& grid, int jobs = 1);

/// Header "axis,value,pair,rmse,bpp" then one line per row.
void write_ablation_csv(std::ostream& out, AblationAxis axis, const std::vector<AblationRow>& rows);

/// One-hot QUBO of a single first-level line of random texture: width pixels,
/// labels candidates, Middlebury first-level costs.
QuboInstance synthetic_line_qubo(int width, int labels, std::uint64_t seed);

}  // namespace qmrf
