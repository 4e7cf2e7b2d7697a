#include "qmrf/stereo.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <iterator>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "qmrf/errors.hpp"
#include "qmrf/onehot.hpp"
#include "qmrf/pbo.hpp"
#include "qmrf/rng.hpp"

namespace qmrf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int level_ratio(double factor) {
  if (!(factor > 0.0) || factor > 1.0) throw InvalidArgument("level factor must be in (0, 1]");
  const long r = std::lround(1.0 / factor);
  if (std::abs(1.0 / factor - r) > 1e-9 || r > 32 || !std::has_single_bit(static_cast<unsigned long>(r)))
    throw InvalidArgument("level factor must be 1/2^k with k <= 5");
  return static_cast<int>(r);
}

LevelConfig level(double factor, int labels, double tau, double m, double s, int median) {
  LevelConfig l;
  l.factor = factor;
  l.labels = labels;
  l.tau = tau;
  l.q = 10.0;
  l.m = m;
  l.s = s;
  l.median_window = median;
  return l;
}

}  // namespace

std::string to_string(StereoSolver s) {
  switch (s) {
    case StereoSolver::ChainDp: return "chain-dp";
    case StereoSolver::Sa: return "sa";
    case StereoSolver::Exhaustive: return "exhaustive";
  }
  return "?";
}

StereoSolver stereo_solver_from_string(const std::string& s) {
  if (s == "chain-dp") return StereoSolver::ChainDp;
  if (s == "sa") return StereoSolver::Sa;
  if (s == "exhaustive") return StereoSolver::Exhaustive;
  throw InvalidArgument("unknown solver '" + s + "' (expected chain-dp, sa or exhaustive)");
}

std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::Truncated: return "truncated";
    case Regularizer::Linear: return "linear";
    case Regularizer::None: return "none";
  }
  return "?";
}

Regularizer regularizer_from_string(const std::string& s) {
  if (s == "truncated") return Regularizer::Truncated;
  if (s == "linear") return Regularizer::Linear;
  if (s == "none") return Regularizer::None;
  throw InvalidArgument("unknown regularizer '" + s + "' (expected truncated, linear or none)");
}

void StereoConfig::validate() const {
  if (levels.empty()) throw InvalidArgument("stereo config needs at least one level");
  int prev_ratio = 0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const LevelConfig& l = levels[k];
    const int ratio = level_ratio(l.factor);
    if (k > 0 && ratio >= prev_ratio) throw InvalidArgument("level factors must be strictly ascending");
    prev_ratio = ratio;
    if (l.labels < 2) throw InvalidArgument("each level needs at least 2 disparity labels");
    if (!(l.tau >= 0.0)) throw InvalidArgument("tau must be non-negative");
    if (!(l.q > 0.0)) throw InvalidArgument("q must be positive");
    if (!(l.m > 0.0)) throw InvalidArgument("m must be positive");
    if (!(l.s >= 0.0) || !std::isfinite(l.s)) throw InvalidArgument("s must be finite and non-negative");
    if (l.median_window < 1 || l.median_window % 2 == 0) throw InvalidArgument("median window must be odd");
  }
  if (levels.back().factor != 1.0) throw InvalidArgument("the last level must be at full resolution");
  if (bundle_height < 1) throw InvalidArgument("bundle height must be at least 1");
  if (bilateral.diameter < 1 || !(bilateral.sigma_color > 0.0) || !(bilateral.sigma_space > 0.0))
    throw InvalidArgument("bilateral filter needs diameter >= 1 and positive sigmas");
  if (!(filter_scale > 0.0)) throw InvalidArgument("filter scale must be positive");
  if (solver.reads < 1 || solver.sweeps < 1) throw InvalidArgument("reads and sweeps must be positive");
  if (solver.encoding == Scheme::Raw) throw InvalidArgument("encoding must be onehot or binary");
  if (!(rectifier.t >= 0.0)) throw InvalidArgument("rectifier t must be non-negative");
  if (rectifier.epsilon && !(*rectifier.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
}

StereoConfig middlebury_config() {
  StereoConfig c;
  c.levels = {level(0.25, 6, 0.15, 0.0015, 0.0005, 7), level(0.5, 4, 0.15, 0.0015, 0.0003, 7),
              level(1.0, 4, 0.3, kInf, 0.0005, 7)};
  return c;
}

StereoConfig sintel_config() {
  StereoConfig c;
  c.levels = {level(1.0 / 32, 6, 0.15, 0.0015, 0.0005, 3), level(1.0 / 16, 6, 0.15, 0.0015, 0.0005, 3),
              level(1.0 / 8, 6, 0.15, 0.0015, 0.0005, 3),  level(1.0 / 4, 4, 0.15, 0.0015, 0.0005, 3),
              level(1.0 / 2, 4, 0.15, 0.0015, 0.0003, 3),  level(1.0, 4, 0.3, kInf, 0.0005, 7)};
  return c;
}

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

double factor_from_json(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    } catch (const std::exception&) {
    }
  }
  throw InvalidArgument("level factor must be a number or a fraction string");
}

double real_or_inf(const json& v, const char* key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "Infinity" || s == "infinity") return kInf;
  }
  throw InvalidArgument(std::string(key) + " must be a number or \"inf\"");
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

StereoConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("bad stereo config: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw ParseError("stereo config must be a JSON object", 0);
  StereoConfig c = middlebury_config();
  try {
    if (j.contains("preset")) {
      const std::string p = j.at("preset").get<std::string>();
      if (p == "middlebury") c = middlebury_config();
      else if (p == "sintel") c = sintel_config();
      else throw InvalidArgument("unknown preset '" + p + "'");
    }
    if (j.contains("levels")) {
      c.levels.clear();
      for (const json& lj : j.at("levels")) {
        LevelConfig l;
        if (!lj.contains("factor") || !lj.contains("labels")) throw InvalidArgument("each level needs factor and labels");
        l.factor = factor_from_json(lj.at("factor"));
        l.labels = lj.at("labels").get<int>();
        read_opt(lj, "tau", l.tau);
        read_opt(lj, "q", l.q);
        if (lj.contains("m")) l.m = real_or_inf(lj.at("m"), "m");
        read_opt(lj, "s", l.s);
        read_opt(lj, "median", l.median_window);
        c.levels.push_back(l);
      }
    }
    read_opt(j, "bundle_height", c.bundle_height);
    read_opt(j, "median", c.median);
    read_opt(j, "filter_scale", c.filter_scale);
    if (j.contains("regularizer")) c.regularizer = regularizer_from_string(j.at("regularizer").get<std::string>());
    if (j.contains("bilateral")) {
      const json& b = j.at("bilateral");
      read_opt(b, "enabled", c.bilateral.enabled);
      read_opt(b, "diameter", c.bilateral.diameter);
      read_opt(b, "sigma_color", c.bilateral.sigma_color);
      read_opt(b, "sigma_space", c.bilateral.sigma_space);
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      if (s.contains("id")) c.solver.kind = stereo_solver_from_string(s.at("id").get<std::string>());
      if (s.contains("encoding")) c.solver.encoding = scheme_from_string(s.at("encoding").get<std::string>());
      read_opt(s, "reads", c.solver.reads);
      read_opt(s, "sweeps", c.solver.sweeps);
      read_opt(s, "seed", c.solver.seed);
      if (s.contains("beta")) {
        const auto b = s.at("beta").get<std::vector<double>>();
        if (b.size() != 2) throw InvalidArgument("solver.beta must have two entries");
        c.solver.beta_range = std::pair{b[0], b[1]};
      }
    }
    if (j.contains("rectifier")) {
      const json& r = j.at("rectifier");
      read_opt(r, "t", c.rectifier.t);
      if (r.contains("epsilon")) {
        const json& e = r.at("epsilon");
        if (e.is_string() && e.get<std::string>() == "rel") c.rectifier.epsilon.reset();
        else if (e.is_number()) c.rectifier.epsilon = e.get<double>();
        else throw InvalidArgument("rectifier.epsilon must be \"rel\" or a number");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad stereo config: ") + e.what(), 0);
  }
  c.validate();
  return c;
}

std::string config_to_json(const StereoConfig& c) {
  ordered_json j;
  ordered_json levels = ordered_json::array();
  for (const LevelConfig& l : c.levels) {
    ordered_json lj;
    const int ratio = level_ratio(l.factor);
    if (ratio == 1) lj["factor"] = 1;
    else lj["factor"] = "1/" + std::to_string(ratio);
    lj["labels"] = l.labels;
    lj["tau"] = l.tau;
    lj["q"] = l.q;
    if (std::isinf(l.m)) lj["m"] = "inf";
    else lj["m"] = l.m;
    lj["s"] = l.s;
    lj["median"] = l.median_window;
    levels.push_back(lj);
  }
  j["levels"] = levels;
  j["bundle_height"] = c.bundle_height;
  j["median"] = c.median;
  j["regularizer"] = to_string(c.regularizer);
  j["filter_scale"] = c.filter_scale;
  j["bilateral"] = {{"enabled", c.bilateral.enabled},
                    {"diameter", c.bilateral.diameter},
                    {"sigma_color", c.bilateral.sigma_color},
                    {"sigma_space", c.bilateral.sigma_space}};
  ordered_json s;
  s["id"] = to_string(c.solver.kind);
  s["encoding"] = to_string(c.solver.encoding);
  s["reads"] = c.solver.reads;
  s["sweeps"] = c.solver.sweeps;
  s["seed"] = c.solver.seed;
  if (c.solver.beta_range) s["beta"] = {c.solver.beta_range->first, c.solver.beta_range->second};
  j["solver"] = s;
  ordered_json r;
  if (c.rectifier.epsilon) r["epsilon"] = *c.rectifier.epsilon;
  else r["epsilon"] = "rel";
  r["t"] = c.rectifier.t;
  j["rectifier"] = r;
  return j.dump(2);
}

StereoConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config " + path.string(), 0);
  return config_from_json({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
}

double data_term(const GrayImage& left, const GrayImage& right, int i, int j, int d) {
  const int k = i - d;
  if (k < 0 || k >= right.width) return kOutOfRangeCost;
  const double diff = left(i, j) - right(k, j);
  return diff * diff;
}

double smoothness_term(double intensity_diff, int d, int d2, const LevelConfig& l) {
  const double r = std::min(l.m, l.s * std::abs(d - d2));
  return std::abs(intensity_diff) <= l.tau ? r : r / l.q;
}

double smoothness_term(const GrayImage& left, int pi, int pj, int qi, int qj, int d, int d2, const LevelConfig& l) {
  return smoothness_term(left(pi, pj) - left(qi, qj), d, d2, l);
}

CandidateSet candidates_at_level(int lvl, const DisparityMap* prev, const StereoConfig& cfg, int width, int height) {
  if (lvl < 0 || lvl >= static_cast<int>(cfg.levels.size())) throw InvalidArgument("level index out of range");
  const LevelConfig& l = cfg.levels[lvl];
  if (l.labels > width) throw InvalidArgument("level has more disparity labels than pixels per row");
  CandidateSet c;
  c.width = width;
  c.height = height;
  c.labels = l.labels;
  c.values.resize(static_cast<std::size_t>(width) * height * l.labels);

  if (lvl == 0) {
    for (std::size_t px = 0; px < static_cast<std::size_t>(width) * height; ++px)
      for (int k = 0; k < l.labels; ++k) c.values[px * l.labels + k] = k;
    return c;
  }
  if (prev == nullptr) throw InvalidArgument("levels after the first need the previous estimate");
  const double r_prev = cfg.levels[lvl - 1].factor;
  const int rho = level_ratio(r_prev) / level_ratio(l.factor);
  const int half = (l.labels - 1) / 2;
  for (int j = 0; j < height; ++j) {
    const int y = std::min(prev->height - 1, static_cast<int>(std::floor((j + 0.5) / l.factor)));
    for (int i = 0; i < width; ++i) {
      const int x = std::min(prev->width - 1, static_cast<int>(std::floor((i + 0.5) / l.factor)));
      const double est = prev->is_valid(x, y) ? (*prev)(x, y) : 0.0;
      const long d_hat = std::lround(est * r_prev);
      const long start = std::clamp<long>(rho * d_hat - half, 0, width - l.labels);
      int* out = &c.values[(static_cast<std::size_t>(j) * width + i) * l.labels];
      for (int k = 0; k < l.labels; ++k) out[k] = static_cast<int>(start + k);
    }
  }
  return c;
}

MarkovRandomField build_bundle_mrf(const GrayImage& left, const GrayImage& right, int row0, int rows,
                                   const CandidateSet& cand, const LevelConfig& lc, Regularizer reg) {
  if (rows < 1 || row0 < 0 || row0 + rows > left.height) throw InvalidArgument("bundle rows outside the image");
  if (left.width != right.width || left.height != right.height || cand.width != left.width ||
      cand.height != left.height)
    throw InvalidArgument("bundle images and candidates must share dimensions");
  const int w = left.width;
  LevelConfig eff = lc;
  if (reg == Regularizer::Linear) eff.m = kInf;

  std::vector<std::vector<double>> unary(static_cast<std::size_t>(w) * rows);
  for (int r = 0; r < rows; ++r)
    for (int i = 0; i < w; ++i) {
      auto c = cand.at(i, row0 + r);
      auto& u = unary[static_cast<std::size_t>(r) * w + i];
      u.resize(c.size());
      for (std::size_t k = 0; k < c.size(); ++k) u[k] = data_term(left, right, i, row0 + r, c[k]);
    }

  std::vector<Edge> edges;
  std::vector<CostMatrix> pairwise;
  auto link = [&](int pi, int pj, int qi, int qj) {
    auto cp = cand.at(pi, pj);
    auto cq = cand.at(qi, qj);
    CostMatrix m(static_cast<int>(cp.size()), static_cast<int>(cq.size()));
    if (reg != Regularizer::None) {
      const double di = left(pi, pj) - left(qi, qj);
      for (std::size_t a = 0; a < cp.size(); ++a)
        for (std::size_t b = 0; b < cq.size(); ++b)
          m(static_cast<int>(a), static_cast<int>(b)) = smoothness_term(di, cp[a], cq[b], eff);
    }
    edges.push_back({(pj - row0) * w + pi, (qj - row0) * w + qi});
    pairwise.push_back(std::move(m));
  };
  for (int r = 0; r < rows; ++r)
    for (int i = 0; i < w; ++i) {
      if (i + 1 < w) link(i, row0 + r, i + 1, row0 + r);
      if (r + 1 < rows) link(i, row0 + r, i, row0 + r + 1);
    }
  return MarkovRandomField(std::move(unary), std::move(edges), std::move(pairwise));
}

MapResult solve_bundle(const MarkovRandomField& mrf, const StereoConfig& cfg, std::uint64_t seed) {
  if (cfg.solver.kind == StereoSolver::ChainDp) return solve_chain_dp(mrf);

  QuboInstance q;
  if (cfg.solver.encoding == Scheme::Binary) {
    q = pbo_to_qubo(quadratize(encode_binary(mrf)));
  } else {
    const double eps = cfg.rectifier.epsilon.value_or(default_epsilon(mrf));
    q = encode_one_hot(mrf, eps, cfg.rectifier.t);
  }
  SolveResult r;
  if (cfg.solver.kind == StereoSolver::Exhaustive) {
    r = solve_exhaustive(q);
  } else {
    SaParams p;
    p.reads = cfg.solver.reads;
    p.sweeps = cfg.solver.sweeps;
    p.beta_range = cfg.solver.beta_range;
    p.seed = seed;
    r = solve_sa(q, p);
  }
  Labelling lab = cfg.solver.encoding == Scheme::Binary ? decode_binary(mrf, r.best_x) : decode(q, r.best_x).labels;
  const double e = energy(mrf, lab);
  return {std::move(lab), e};
}

namespace {

[[noreturn]] void rethrow_for_bundle(std::exception_ptr ep, int lvl, int bundle) {
  const std::string where = "level " + std::to_string(lvl) + " bundle " + std::to_string(bundle) + ": ";
  try {
    std::rethrow_exception(ep);
  } catch (const CapacityError& e) {
    throw CapacityError(where + e.what());
  } catch (const StructureError& e) {
    throw StructureError(where + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(where + e.what());
  } catch (const std::exception& e) {
    throw SolverError(where + e.what());
  }
}

}  // namespace

LevelSolution solve_level(const GrayImage& left, const GrayImage& right, const CandidateSet& cand,
                          const StereoConfig& cfg, int lvl, int jobs) {
  const int h = left.height;
  const int w = left.width;
  const int bh = cfg.bundle_height;
  const int bundles = (h + bh - 1) / bh;
  const LevelConfig& lc = cfg.levels.at(lvl);

  LevelSolution out;
  out.disparity = DisparityMap(w, h);
  out.bundle_energy.assign(bundles, 0.0);
  std::vector<std::exception_ptr> errors(bundles);
  const std::uint64_t level_seed = derive_seed(cfg.solver.seed, static_cast<std::uint64_t>(lvl));

  auto run = [&](int b) {
    try {
      const int row0 = b * bh;
      const int rows = std::min(bh, h - row0);
      const MarkovRandomField mrf = build_bundle_mrf(left, right, row0, rows, cand, lc, cfg.regularizer);
      const MapResult res = solve_bundle(mrf, cfg, derive_seed(level_seed, static_cast<std::uint64_t>(b)));
      for (int r = 0; r < rows; ++r)
        for (int i = 0; i < w; ++i)
          out.disparity(i, row0 + r) = cand.at(i, row0 + r)[res.labels[static_cast<std::size_t>(r) * w + i]];
      out.bundle_energy[b] = res.energy;
    } catch (...) {
      errors[b] = std::current_exception();
    }
  };

  const int workers = std::clamp(jobs, 1, std::max(1, bundles));
  if (workers == 1) {
    for (int b = 0; b < bundles; ++b) run(b);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (int b = next++; b < bundles; b = next++) run(b);
      });
    for (auto& th : pool) th.join();
  }
  for (int b = 0; b < bundles; ++b)
    if (errors[b]) rethrow_for_bundle(errors[b], lvl, b);
  return out;
}

StereoResult stereo_match(const GrayImage& left, const GrayImage& right, const StereoConfig& cfg, int jobs) {
  cfg.validate();
  if (left.width != right.width || left.height != right.height)
    throw InvalidArgument("left and right images must have the same dimensions");
  if (left.width == 0 || left.height == 0) throw InvalidArgument("empty input images");

  StereoResult result;
  DisparityMap current;
  for (int lvl = 0; lvl < static_cast<int>(cfg.levels.size()); ++lvl) {
    const LevelConfig& lc = cfg.levels[lvl];
    const int ratio = level_ratio(lc.factor);
    const GrayImage l = resize_area(left, lc.factor);
    const GrayImage r = resize_area(right, lc.factor);
    const CandidateSet cand = candidates_at_level(lvl, lvl == 0 ? nullptr : &current, cfg, l.width, l.height);
    LevelSolution sol = solve_level(l, r, cand, cfg, lvl, jobs);

    current = upsample_nearest(sol.disparity, ratio, left.width, left.height);
    for (double& v : current.values) v *= ratio;
    if (cfg.median) current = median_filter(current, lc.median_window);
    result.trace.push_back({lvl, l.width, l.height, std::move(sol.bundle_energy)});
  }

  if (cfg.bilateral.enabled) {
    for (double& v : current.values) v *= cfg.filter_scale;
    current = bilateral_filter(current, cfg.bilateral.diameter, cfg.bilateral.sigma_color, cfg.bilateral.sigma_space);
    for (double& v : current.values) v /= cfg.filter_scale;
  }
  result.disparity = std::move(current);
  return result;
}

}  // namespace qmrf
