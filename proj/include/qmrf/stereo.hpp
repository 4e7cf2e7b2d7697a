#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmrf/image.hpp"
#include "qmrf/mrf.hpp"
#include "qmrf/qubo.hpp"
#include "qmrf/solve.hpp"

namespace qmrf {

struct LevelConfig {
  double factor = 1.0;  // resolution relative to the input
  int labels = 4;       // dr
  double tau = 0.15;    // intensity edge threshold
  double q = 10.0;      // divisor across edges
  double m = 0.0015;    // truncation cap, may be +inf
  double s = 0.0005;    // slope per disparity unit
  int median_window = 7;
};

struct BilateralConfig {
  bool enabled = true;
  int diameter = 12;
  double sigma_color = 75.0;
  double sigma_space = 75.0;
};

enum class StereoSolver { ChainDp, Sa, Exhaustive };
std::string to_string(StereoSolver s);
StereoSolver stereo_solver_from_string(const std::string& s);

enum class Regularizer { Truncated, Linear, None };
std::string to_string(Regularizer r);
Regularizer regularizer_from_string(const std::string& s);

struct SolverConfig {
  StereoSolver kind = StereoSolver::ChainDp;
  Scheme encoding = Scheme::OneHot;  // QUBO route only
  int reads = 500;
  int sweeps = 1000;
  std::optional<std::pair<double, double>> beta_range;
  std::uint64_t seed = 0;
};

struct RectifierConfig {
  std::optional<double> epsilon;  // unset: 1e-6 * max(1, max |potential|)
  double t = 1.0;
};

struct StereoConfig {
  std::vector<LevelConfig> levels;
  int bundle_height = 1;
  BilateralConfig bilateral;
  bool median = true;
  Regularizer regularizer = Regularizer::Truncated;
  /// Disparities are multiplied by this before bilateral filtering.
  double filter_scale = 8.0;
  SolverConfig solver;
  RectifierConfig rectifier;

  /// Throws InvalidArgument on a violated invariant.
  void validate() const;
};

/// Three levels at 1/4, 1/2 and 1 with 6, 4, 4 labels.
StereoConfig middlebury_config();
/// Six levels at 1/32 ... 1.
StereoConfig sintel_config();

/// JSON form; "m" may be the string "inf" and factors may be written "1/4".
/// Missing keys keep the Middlebury defaults.
StereoConfig config_from_json(const std::string& text);
std::string config_to_json(const StereoConfig& cfg);
StereoConfig load_config(const std::filesystem::path& path);

/// Out-of-range penalty of the data term.
inline constexpr double kOutOfRangeCost = 1.0;

/// (IL(i,j) - IR(i-d,j))^2, or kOutOfRangeCost when i-d leaves the image.
double data_term(const GrayImage& left, const GrayImage& right, int i, int j, int d);

/// min(m, s|d - d'|), divided by q when |IL(p) - IL(p')| > tau.
double smoothness_term(double intensity_diff, int d, int d2, const LevelConfig& level);
double smoothness_term(const GrayImage& left, int pi, int pj, int qi, int qj, int d, int d2,
                       const LevelConfig& level);

/// Per-pixel candidate disparities in level units, dr per pixel.
struct CandidateSet {
  int width = 0;
  int height = 0;
  int labels = 0;
  std::vector<int> values;

  std::span<const int> at(int i, int j) const {
    return {values.data() + (static_cast<std::size_t>(j) * width + i) * labels, static_cast<std::size_t>(labels)};
  }
};

/// Level 0: {0, ..., dr-1}. Later levels: with d_hat the previous full-res
/// estimate at the pixel centre in previous-level units and rho the level
/// ratio, the window starts at rho*d_hat - floor((dr-1)/2) and is shifted
/// inward to stay within [0, width-1].
CandidateSet candidates_at_level(int level, const DisparityMap* prev, const StereoConfig& cfg, int width,
                                 int height);

/// One vertex per pixel of rows [row0, row0 + rows), row-major; 4-neighbour
/// edges inside the bundle.
MarkovRandomField build_bundle_mrf(const GrayImage& left, const GrayImage& right, int row0, int rows,
                                   const CandidateSet& cand, const LevelConfig& level,
                                   Regularizer reg = Regularizer::Truncated);

/// Labelling and MRF energy of one bundle.
MapResult solve_bundle(const MarkovRandomField& mrf, const StereoConfig& cfg, std::uint64_t seed);

struct LevelSolution {
  DisparityMap disparity;            // level units, before upsampling
  std::vector<double> bundle_energy;  // MRF energy per bundle
};

/// Solves every bundle of one level; jobs caps worker threads.
LevelSolution solve_level(const GrayImage& left, const GrayImage& right, const CandidateSet& cand,
                          const StereoConfig& cfg, int level, int jobs = 1);

struct LevelTrace {
  int level = 0;
  int width = 0;
  int height = 0;
  std::vector<double> bundle_energy;
};

struct StereoResult {
  DisparityMap disparity;  // full resolution, full-resolution units
  std::vector<LevelTrace> trace;
};

StereoResult stereo_match(const GrayImage& left, const GrayImage& right, const StereoConfig& cfg, int jobs = 1);

}  // namespace qmrf
