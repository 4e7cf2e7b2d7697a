#include "qmrf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "qmrf/errors.hpp"

namespace qmrf {

namespace {

void check_pair(const DisparityMap& est, const DisparityMap& gt, EvalRegion region) {
  if (est.width != gt.width || est.height != gt.height)
    throw InvalidArgument("estimate and ground truth differ in size");
  if (region.crop < 0) throw InvalidArgument("crop must be non-negative");
}

template <typename F>
std::size_t for_each_scored(const DisparityMap& gt, EvalRegion region, F&& f) {
  std::size_t n = 0;
  for (int j = region.crop; j < gt.height - region.crop; ++j)
    for (int i = region.crop; i < gt.width - region.crop; ++i) {
      const std::size_t k = gt.index(i, j);
      if (!gt.valid[k]) continue;
      f(k);
      ++n;
    }
  return n;
}

}  // namespace

std::size_t count_scored(const DisparityMap& gt, EvalRegion region) {
  return for_each_scored(gt, region, [](std::size_t) {});
}

double rmse(const DisparityMap& est, const DisparityMap& gt, EvalRegion region) {
  check_pair(est, gt, region);
  double sum = 0.0;
  const std::size_t n = for_each_scored(gt, region, [&](std::size_t k) {
    const double e = est.values[k] - gt.values[k];
    sum += e * e;
  });
  if (n == 0) throw UndefinedStatistic("RMSE undefined: no valid ground-truth pixels");
  return std::sqrt(sum / static_cast<double>(n));
}

double bpp(const DisparityMap& est, const DisparityMap& gt, double delta, EvalRegion region) {
  check_pair(est, gt, region);
  std::size_t bad = 0;
  const std::size_t n = for_each_scored(gt, region, [&](std::size_t k) {
    if (std::abs(est.values[k] - gt.values[k]) > delta) ++bad;
  });
  if (n == 0) throw UndefinedStatistic("BPP undefined: no valid ground-truth pixels");
  return 100.0 * static_cast<double>(bad) / static_cast<double>(n);
}

GraphStats graph_stats(const QuboInstance& q) {
  std::vector<std::size_t> degree(q.n(), 0);
  std::vector<bool> present(q.n(), false);
  GraphStats s;
  for (const QuboEntry& e : q.entries()) {
    present[e.i] = present[e.j] = true;
    if (e.i != e.j) {
      ++degree[e.i];
      ++degree[e.j];
      ++s.edges;
    }
  }
  for (int v = 0; v < q.n(); ++v) {
    if (!present[v]) continue;
    ++s.nodes;
    if (degree[v] >= s.degree_histogram.size()) s.degree_histogram.resize(degree[v] + 1, 0);
    ++s.degree_histogram[degree[v]];
  }
  if (s.nodes > 1) s.density = static_cast<double>(s.edges) / (0.5 * s.nodes * (s.nodes - 1.0));
  return s;
}

std::string graph_stats_json(const GraphStats& s) {
  nlohmann::ordered_json j;
  j["nodes"] = s.nodes;
  j["edges"] = s.edges;
  j["density"] = s.density;
  j["degree_histogram"] = s.degree_histogram;
  return j.dump();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const StereoConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config_to_json(cfg))));
  return buf;
}

MetricsReport evaluate(const DisparityMap& est, const DisparityMap& gt, double delta, EvalRegion region) {
  MetricsReport r;
  r.rmse = rmse(est, gt, region);
  r.bpp = bpp(est, gt, delta, region);
  r.n_valid = count_scored(gt, region);
  return r;
}

std::string metrics_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["rmse"] = r.rmse;
  j["bpp"] = r.bpp;
  j["n_valid"] = r.n_valid;
  j["config_hash"] = r.config_hash;
  j["solver"] = r.solver;
  if (r.elapsed_ms) j["elapsed_ms"] = *r.elapsed_ms;
  return j.dump();
}

}  // namespace qmrf
