#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmrf/image.hpp"
#include "qmrf/qubo.hpp"
#include "qmrf/stereo.hpp"

namespace qmrf {

/// Pixels scored by the metrics: valid in gt and at least `crop` pixels away
/// from every border.
struct EvalRegion {
  int crop = 0;
};

std::size_t count_scored(const DisparityMap& gt, EvalRegion region = {});

/// sqrt(mean squared error) over the scored pixels. Throws InvalidArgument on
/// a size mismatch and UndefinedStatistic when no pixel is scored.
double rmse(const DisparityMap& est, const DisparityMap& gt, EvalRegion region = {});

/// Percentage of scored pixels with |est - gt| > delta.
double bpp(const DisparityMap& est, const DisparityMap& gt, double delta = 1.0, EvalRegion region = {});

struct GraphStats {
  int nodes = 0;                       // variables that appear in some entry
  std::size_t edges = 0;               // distinct off-diagonal couplers
  std::vector<std::size_t> degree_histogram;  // [d] = nodes of degree d
  double density = 0.0;                // edges / (nodes choose 2)
};

GraphStats graph_stats(const QuboInstance& q);
std::string graph_stats_json(const GraphStats& s);

std::uint64_t fnv1a64(std::string_view bytes);
/// 16 hex digits of the FNV-1a hash of the canonical config JSON.
std::string config_hash(const StereoConfig& cfg);

struct MetricsReport {
  double rmse = 0.0;
  double bpp = 0.0;
  std::size_t n_valid = 0;
  std::string config_hash;
  std::string solver;
  std::optional<double> elapsed_ms;
};

MetricsReport evaluate(const DisparityMap& est, const DisparityMap& gt, double delta = 1.0, EvalRegion region = {});

/// {"rmse", "bpp", "n_valid", "config_hash", "solver"[, "elapsed_ms"]}
std::string metrics_json(const MetricsReport& r);

}  // namespace qmrf
