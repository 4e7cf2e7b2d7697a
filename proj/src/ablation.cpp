#include "qmrf/ablation.hpp"

#include <ostream>

#include "qmrf/errors.hpp"
#include "qmrf/eval.hpp"
#include "qmrf/image.hpp"
#include "qmrf/onehot.hpp"
#include "qmrf/rng.hpp"

namespace qmrf {

AblationAxis ablation_axis_from_string(const std::string& s) {
  if (s == "regularizer") return AblationAxis::Regularizer;
  if (s == "filters") return AblationAxis::Filters;
  if (s == "levels") return AblationAxis::Levels;
  if (s == "t") return AblationAxis::T;
  throw InvalidArgument("unknown ablation '" + s + "' (expected regularizer, filters, levels or t)");
}

std::string to_string(AblationAxis a) {
  switch (a) {
    case AblationAxis::Regularizer: return "regularizer";
    case AblationAxis::Filters: return "filters";
    case AblationAxis::Levels: return "levels";
    case AblationAxis::T: return "t";
  }
  return "?";
}

StereoConfig apply_ablation(const StereoConfig& base, AblationAxis axis, const std::string& value) {
  StereoConfig c = base;
  switch (axis) {
    case AblationAxis::Regularizer:
      c.regularizer = regularizer_from_string(value);
      break;
    case AblationAxis::Filters:
      if (value == "on") {
        c.median = c.bilateral.enabled = true;
      } else if (value == "off") {
        c.median = c.bilateral.enabled = false;
      } else if (value == "median") {
        c.median = true;
        c.bilateral.enabled = false;
      } else if (value == "bilateral") {
        c.median = false;
        c.bilateral.enabled = true;
      } else {
        throw InvalidArgument("filters ablation takes on, off, median or bilateral");
      }
      break;
    case AblationAxis::Levels: {
      int drop = 0;
      try {
        drop = std::stoi(value);
      } catch (const std::exception&) {
        throw InvalidArgument("levels ablation takes a count of dropped levels");
      }
      if (drop < 0 || drop >= static_cast<int>(c.levels.size()))
        throw InvalidArgument("cannot drop " + value + " of " + std::to_string(c.levels.size()) + " levels");
      c.levels.erase(c.levels.begin(), c.levels.begin() + drop);
      break;
    }
    case AblationAxis::T:
      try {
        c.rectifier.t = std::stod(value);
      } catch (const std::exception&) {
        throw InvalidArgument("t ablation takes real values");
      }
      if (c.solver.kind == StereoSolver::ChainDp)
        throw InvalidArgument("t ablation needs a QUBO solver (sa or exhaustive)");
      break;
  }
  c.validate();
  return c;
}

std::vector<AblationRow> run_ablation(const std::vector<StereoPairFiles>& pairs, const StereoConfig& base,
                                      AblationAxis axis, const std::vector<std::string>& grid, int jobs) {
  if (pairs.empty()) throw InvalidArgument("ablation needs at least one stereo pair");
  struct Loaded {
    std::string name;
    GrayImage left, right;
    DisparityMap gt;
  };
  std::vector<Loaded> data;
  for (const auto& p : pairs) data.push_back({p.name, load_image(p.left), load_image(p.right), load_disparity(p.gt, p.gt_scale)});

  std::vector<AblationRow> rows;
  for (const std::string& value : grid) {
    const StereoConfig cfg = apply_ablation(base, axis, value);
    double sum_rmse = 0.0;
    double sum_bpp = 0.0;
    for (const Loaded& d : data) {
      const DisparityMap est = stereo_match(d.left, d.right, cfg, jobs).disparity;
      AblationRow r{value, d.name, rmse(est, d.gt), bpp(est, d.gt)};
      sum_rmse += r.rmse;
      sum_bpp += r.bpp;
      rows.push_back(r);
    }
    const double n = static_cast<double>(data.size());
    rows.push_back({value, "mean", sum_rmse / n, sum_bpp / n});
  }
  return rows;
}

void write_ablation_csv(std::ostream& out, AblationAxis axis, const std::vector<AblationRow>& rows) {
  out << "axis,value,pair,rmse,bpp\n";
  out.precision(10);
  for (const AblationRow& r : rows) out << to_string(axis) << ',' << r.value << ',' << r.pair << ',' << r.rmse << ',' << r.bpp << '\n';
}

QuboInstance synthetic_line_qubo(int width, int labels, std::uint64_t seed) {
  if (width < labels) throw InvalidArgument("line must be at least as wide as the label count");
  Rng rng(seed);
  GrayImage left(width, 1);
  GrayImage right(width, 1);
  for (double& v : left.values) v = rng.uniform();
  for (double& v : right.values) v = rng.uniform();
  StereoConfig cfg = middlebury_config();
  cfg.levels.front().labels = labels;
  const CandidateSet cand = candidates_at_level(0, nullptr, cfg, width, 1);
  const MarkovRandomField mrf = build_bundle_mrf(left, right, 0, 1, cand, cfg.levels.front());
  return encode_one_hot(mrf, default_epsilon(mrf));
}

}  // namespace qmrf
