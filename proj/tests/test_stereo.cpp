#include <doctest.h>

#include <json.hpp>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "qmrf/errors.hpp"
#include "qmrf/eval.hpp"
#include "qmrf/onehot.hpp"
#include "qmrf/stereo.hpp"

using namespace qmrf;

namespace {

LevelConfig first_level() { return middlebury_config().levels.front(); }

GrayImage random_image(std::uint64_t seed, int w, int h) {
  Rng rng(seed);
  GrayImage g(w, h);
  for (double& v : g.values) v = rng.uniform();
  return g;
}

}  // namespace

TEST_CASE("data term") {
  GrayImage l(3, 1), r(3, 1);
  l.values = {0.8, 0.8, 0.3};
  r.values = {0.5, 0.3, 0.1};
  CHECK(data_term(l, r, 2, 0, 1) == 0.0);
  CHECK(data_term(l, r, 0, 0, 0) == doctest::Approx(0.09));
  CHECK(data_term(l, r, 1, 0, 2) == kOutOfRangeCost);
  CHECK(kOutOfRangeCost == 1.0);
}

TEST_CASE("smoothness term") {
  LevelConfig lc;
  lc.tau = 0.15;
  lc.q = 10;
  lc.m = 0.0015;
  lc.s = 0.0005;
  CHECK(smoothness_term(0.9, 4, 4, lc) == 0.0);
  CHECK(smoothness_term(0.1, 0, 3, lc) == doctest::Approx(0.0015));
  CHECK(smoothness_term(0.2, 0, 3, lc) == doctest::Approx(0.00015));
  CHECK(smoothness_term(-0.2, 5, 2, lc) == doctest::Approx(0.00015));
  CHECK(smoothness_term(0.1, 0, 1, lc) == doctest::Approx(0.0005));
  lc.m = std::numeric_limits<double>::infinity();
  CHECK(smoothness_term(0.0, 0, 7, lc) == doctest::Approx(0.0035));

  GrayImage img(2, 2);
  img.values = {0.1, 0.2, 0.5, 0.9};
  lc.m = 0.0015;
  CHECK(smoothness_term(img, 0, 0, 1, 0, 0, 3, lc) == doctest::Approx(0.0015));
  CHECK(smoothness_term(img, 0, 0, 0, 1, 0, 3, lc) == doctest::Approx(0.00015));
}

TEST_CASE("candidates at the first level") {
  const StereoConfig cfg = middlebury_config();
  const CandidateSet c = candidates_at_level(0, nullptr, cfg, 10, 2);
  CHECK(c.labels == 6);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 10; ++i) CHECK(std::vector<int>(c.at(i, j).begin(), c.at(i, j).end()) == std::vector<int>{0, 1, 2, 3, 4, 5});
  CHECK_THROWS_AS(candidates_at_level(0, nullptr, cfg, 5, 1), InvalidArgument);
  CHECK_THROWS_AS(candidates_at_level(1, nullptr, cfg, 10, 1), InvalidArgument);
  CHECK_THROWS_AS(candidates_at_level(3, nullptr, cfg, 10, 1), InvalidArgument);
}

TEST_CASE("candidate windows follow the doubled estimate") {
  StereoConfig cfg = middlebury_config();
  cfg.levels.erase(cfg.levels.begin());  // 1/2 then 1
  DisparityMap prev(20, 1, 6.0);         // 3 at half resolution
  prev(0, 0) = 0.0;
  prev(19, 0) = 18.0;
  const CandidateSet c = candidates_at_level(1, &prev, cfg, 20, 1);
  auto at = [&](int i) { return std::vector<int>(c.at(i, 0).begin(), c.at(i, 0).end()); };
  CHECK(at(5) == std::vector<int>{5, 6, 7, 8});
  CHECK(at(0) == std::vector<int>{0, 1, 2, 3});
  CHECK(at(19) == std::vector<int>{16, 17, 18, 19});

  // quarter to half: the previous map is sampled at the level pixel centre
  const StereoConfig mb = middlebury_config();
  DisparityMap full(8, 2, 8.0);
  full(2, 0) = 4.0;
  full(3, 0) = 4.0;
  const CandidateSet h = candidates_at_level(1, &full, mb, 4, 1);
  CHECK(std::vector<int>(h.at(0, 0).begin(), h.at(0, 0).end()) == std::vector<int>{0, 1, 2, 3});
  CHECK(std::vector<int>(h.at(1, 0).begin(), h.at(1, 0).end()) == std::vector<int>{0, 1, 2, 3});
  CHECK(std::vector<int>(h.at(2, 0).begin(), h.at(2, 0).end()) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("bundle fields have the expected structure") {
  const StereoConfig cfg = middlebury_config();
  const GrayImage l = random_image(1, 30, 4), r = random_image(2, 30, 4);
  const CandidateSet c = candidates_at_level(0, nullptr, cfg, 30, 4);
  const MarkovRandomField line = build_bundle_mrf(l, r, 1, 1, c, first_level());
  CHECK(line.vertex_count() == 30);
  CHECK(line.edge_count() == 29);
  for (int v = 0; v < 30; ++v) CHECK(line.degree(v) <= 2);
  CHECK(line.unary(3)[2] == data_term(l, r, 3, 1, 2));
  CHECK(line.pairwise(0)(1, 4) == smoothness_term(l, 0, 1, 1, 1, 1, 4, first_level()));

  const MarkovRandomField two = build_bundle_mrf(l, r, 2, 2, c, first_level());
  CHECK(two.vertex_count() == 60);
  CHECK(two.edge_count() == 2 * 29 + 30);
  CHECK_THROWS_AS(build_bundle_mrf(l, r, 3, 2, c, first_level()), InvalidArgument);

  const MarkovRandomField flat = build_bundle_mrf(l, r, 0, 1, c, first_level(), Regularizer::None);
  CHECK(flat.edge_count() == 29);
  for (int e = 0; e < flat.edge_count(); ++e)
    for (double v : flat.pairwise(e).values()) CHECK(v == 0.0);

  const MarkovRandomField lin = build_bundle_mrf(l, r, 0, 1, c, first_level(), Regularizer::Linear);
  bool untruncated = false;
  for (int e = 0; e < lin.edge_count(); ++e) untruncated = untruncated || lin.pairwise(e)(0, 5) > 0.0015;
  CHECK(untruncated);
}

TEST_CASE("a 2x2 shifted pair is recovered by the chain solver") {
  GrayImage l(2, 2), r(2, 2);
  l.values = {0.2, 0.9, 0.7, 0.1};
  r.values = {0.9, 0.4, 0.1, 0.6};
  StereoConfig cfg = middlebury_config();
  cfg.levels.front().labels = 2;
  const CandidateSet c = candidates_at_level(0, nullptr, cfg, 2, 2);
  for (int row = 0; row < 2; ++row) {
    const MapResult m = solve_chain_dp(build_bundle_mrf(l, r, row, 1, c, cfg.levels.front()));
    CHECK(m.labels[1] == 1);
  }
}

TEST_CASE("QUBO and chain routes agree on short lines") {
  StereoConfig dp = middlebury_config();
  dp.levels.front().labels = 4;
  StereoConfig ex = dp;
  ex.solver.kind = StereoSolver::Exhaustive;
  StereoConfig bin = ex;
  bin.solver.encoding = Scheme::Binary;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GrayImage l = random_image(seed, 4, 1), r = random_image(seed + 100, 4, 1);
    const CandidateSet c = candidates_at_level(0, nullptr, dp, 4, 1);
    const MarkovRandomField mrf = build_bundle_mrf(l, r, 0, 1, c, dp.levels.front());
    const double opt = solve_bundle(mrf, dp, 0).energy;
    CHECK(opt == doctest::Approx(oracle::mrf_min_energy(mrf)).epsilon(1e-12));
    CHECK(solve_bundle(mrf, ex, 0).energy == doctest::Approx(opt).epsilon(1e-12));
    CHECK(solve_bundle(mrf, bin, 0).energy == doctest::Approx(opt).epsilon(1e-12));
  }
}

TEST_CASE("level solutions stay inside their candidate sets") {
  const synth::Scene s = synth::shifted(64, 12, 8, 3);
  StereoConfig cfg = middlebury_config();
  cfg.bundle_height = 1;
  DisparityMap prev(64, 12, 8.0);
  for (int lvl = 0; lvl < 3; ++lvl) {
    const GrayImage l = resize_area(s.left, cfg.levels[lvl].factor);
    const GrayImage r = resize_area(s.right, cfg.levels[lvl].factor);
    const CandidateSet c = candidates_at_level(lvl, lvl ? &prev : nullptr, cfg, l.width, l.height);
    const LevelSolution sol = solve_level(l, r, c, cfg, lvl);
    CHECK(sol.bundle_energy.size() == static_cast<std::size_t>(l.height));
    for (double e : sol.bundle_energy) CHECK(std::isfinite(e));
    for (int j = 0; j < l.height; ++j)
      for (int i = 0; i < l.width; ++i) {
        const auto cand = c.at(i, j);
        CHECK(std::find(cand.begin(), cand.end(), static_cast<int>(sol.disparity(i, j))) != cand.end());
      }
  }
}

TEST_CASE("identical views give zero disparity") {
  const synth::Scene s = synth::shifted(64, 16, 0, 5);
  const StereoResult r = stereo_match(s.left, s.left, middlebury_config());
  for (double v : r.disparity.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.trace.size() == 3);
  CHECK(r.trace[0].width == 16);
  CHECK(r.trace[0].bundle_energy.size() == 4);
}

TEST_CASE("a uniform shift of eight is recovered exactly") {
  const synth::Scene s = synth::shifted(96, 32, 8, 7);
  const StereoResult r = stereo_match(s.left, s.right, middlebury_config());
  DisparityMap gt = s.gt;
  for (int j = 0; j < gt.height; ++j)
    for (int i = 0; i < gt.width; ++i) gt.valid[gt.index(i, j)] = i >= 24;
  CHECK(rmse(r.disparity, gt) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(bpp(r.disparity, gt) == 0.0);
}

TEST_CASE("results do not depend on the number of workers") {
  const synth::Scene s = synth::layered(64, 24, 2, 6, 20, 44, 6, 18, 0.05, 9);
  StereoConfig cfg = middlebury_config();
  const StereoResult a = stereo_match(s.left, s.right, cfg, 1);
  const StereoResult b = stereo_match(s.left, s.right, cfg, 3);
  CHECK(a.disparity.values == b.disparity.values);

  cfg.solver.kind = StereoSolver::Sa;
  cfg.solver.reads = 4;
  cfg.solver.sweeps = 20;
  cfg.solver.seed = 11;
  cfg.levels.resize(1);
  cfg.levels.front().factor = 1.0;
  const synth::Scene small = synth::shifted(16, 6, 2, 1);
  const StereoResult c = stereo_match(small.left, small.right, cfg, 1);
  const StereoResult d = stereo_match(small.left, small.right, cfg, 4);
  CHECK(c.disparity.values == d.disparity.values);
  for (std::size_t k = 0; k < c.trace.size(); ++k) CHECK(c.trace[k].bundle_energy == d.trace[k].bundle_energy);
}

TEST_CASE("bundle failures name the bundle") {
  const synth::Scene s = synth::shifted(32, 8, 4, 2);
  StereoConfig cfg = middlebury_config();
  cfg.bundle_height = 2;
  try {
    stereo_match(s.left, s.right, cfg);
    FAIL("chain solver must reject grid bundles");
  } catch (const StructureError& e) {
    CHECK(std::string(e.what()).find("level 0 bundle 0") != std::string::npos);
  }
}

TEST_CASE("preset configurations") {
  const StereoConfig m = middlebury_config();
  REQUIRE(m.levels.size() == 3);
  CHECK(m.levels[0].factor == 0.25);
  CHECK(m.levels[1].s == 0.0003);
  CHECK(std::isinf(m.levels[2].m));
  CHECK(m.levels[2].tau == 0.3);
  CHECK(m.bilateral.diameter == 12);
  CHECK(m.bilateral.sigma_color == 75);
  m.validate();

  const StereoConfig s = sintel_config();
  REQUIRE(s.levels.size() == 6);
  CHECK(s.levels[0].factor == 1.0 / 32);
  CHECK(s.levels[3].labels == 4);
  CHECK(s.levels[2].median_window == 3);
  CHECK(s.levels[5].median_window == 7);
  s.validate();
}

TEST_CASE("config JSON round trip and validation") {
  StereoConfig c = sintel_config();
  c.solver.kind = StereoSolver::Sa;
  c.solver.beta_range = std::pair{0.1, 5.0};
  c.rectifier.t = 0.25;
  c.rectifier.epsilon = 1e-4;
  c.regularizer = Regularizer::Linear;
  const std::string text = config_to_json(c);
  const StereoConfig back = config_from_json(text);
  CHECK(config_to_json(back) == text);
  CHECK(std::isinf(back.levels.back().m));

  const StereoConfig partial = config_from_json(R"({"levels": [{"factor": "1/2", "labels": 6, "m": "inf"}, {"factor": 1, "labels": 4}], "solver": {"id": "exhaustive"}})");
  CHECK(partial.levels.size() == 2);
  CHECK(partial.levels[0].factor == 0.5);
  CHECK(partial.solver.kind == StereoSolver::Exhaustive);

  CHECK_THROWS_AS(config_from_json("{not json"), ParseError);
  CHECK_THROWS_AS(config_from_json(R"({"levels": [{"factor": 0.5, "labels": 4}]})"), InvalidArgument);
  CHECK_THROWS_AS(config_from_json(R"({"levels": [{"factor": 1, "labels": 1}]})"), InvalidArgument);
  CHECK_THROWS_AS(config_from_json(R"({"levels": [{"factor": 1, "labels": 4, "q": 0}]})"), InvalidArgument);
  CHECK_THROWS_AS(config_from_json(R"({"levels": [{"factor": 1, "labels": 4, "median": 4}]})"), InvalidArgument);
  CHECK_THROWS_AS(config_from_json(R"({"levels": [{"factor": 1, "labels": 4}, {"factor": 0.5, "labels": 4}]})"),
                  InvalidArgument);
  CHECK_THROWS_AS(config_from_json(R"({"solver": {"id": "gurobi"}})"), InvalidArgument);
}
