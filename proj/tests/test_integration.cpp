#include <doctest.h>

#include "criteria.hpp"
#include "qmrf/ablation.hpp"
#include "synthetic.hpp"

using namespace qmrf;

namespace {

const synth::Scene& scene() {
  static const synth::Scene s = synth::layered(256, 64, 4, 12, 80, 180, 12, 52, 0.1, 3);
  return s;
}

double scene_rmse(const StereoConfig& cfg) {
  return rmse(stereo_match(scene().left, scene().right, cfg).disparity, scene().gt);
}

}  // namespace

TEST_CASE("sampler never beats the exact line optimum and often reaches it") {
  const auto lines = criteria::coarse_lines(scene().left, scene().right, middlebury_config(), 12);
  SaParams sa;
  sa.reads = 50;
  sa.seed = 5;
  const criteria::Dominance d = criteria::sa_dominance(lines, sa);
  MESSAGE("lines " << d.lines << ", equal " << d.equal << ", largest gap " << d.worst_gap);
  CHECK(d.lines == 12);
  CHECK(d.violations == 0);
  CHECK(d.equal * 10 >= d.lines);
}

TEST_CASE("energy gap to the line optimum is non-negative for any rectifier scale") {
  const auto lines = criteria::coarse_lines(scene().left, scene().right, middlebury_config(), 6);
  SaParams sa;
  sa.reads = 20;
  sa.sweeps = 200;
  sa.seed = 9;
  for (double t : {1.0, 0.5, 0.25}) {
    const double gap = criteria::mean_gap(lines, t, sa);
    MESSAGE("t " << t << " mean gap " << gap);
    CHECK(gap >= -1e-12);
  }
}

TEST_CASE("pipeline recovers a two-layer scene") {
  const double e = scene_rmse(middlebury_config());
  MESSAGE("rmse " << e);
  CHECK(e < 1.0);
}

TEST_CASE("removing the regularizer or the filters raises RMSE") {
  const StereoConfig base = middlebury_config();
  const double full = scene_rmse(base);
  const double no_reg = scene_rmse(apply_ablation(base, AblationAxis::Regularizer, "none"));
  const double no_filter = scene_rmse(apply_ablation(base, AblationAxis::Filters, "off"));
  MESSAGE("full " << full << ", no regularizer " << no_reg << ", no filters " << no_filter);
  CHECK(no_reg > full);
  CHECK(no_filter > full);
}
