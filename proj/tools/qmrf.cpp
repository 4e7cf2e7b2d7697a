// qmrf: encode MRFs as QUBOs, solve them, and run the stereo pipeline.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmrf/ablation.hpp"
#include "qmrf/dataset.hpp"
#include "qmrf/errors.hpp"
#include "qmrf/eval.hpp"
#include "qmrf/image.hpp"
#include "qmrf/mrf.hpp"
#include "qmrf/onehot.hpp"
#include "qmrf/pbo.hpp"
#include "qmrf/qubo.hpp"
#include "qmrf/solve.hpp"
#include "qmrf/stereo.hpp"

namespace {

using namespace qmrf;

enum Exit { kOk = 0, kUsage = 2, kData = 3, kCapacity = 4, kSolver = 5 };

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + out_path);
  out << text << '\n';
}

double millis_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// "rel" or "abs:<value>"
std::optional<double> parse_epsilon_rule(const std::string& rule) {
  if (rule == "rel") return std::nullopt;
  if (rule.rfind("abs:", 0) == 0) {
    try {
      return std::stod(rule.substr(4));
    } catch (const std::exception&) {
    }
  }
  throw InvalidArgument("epsilon rule must be 'rel' or 'abs:<value>'");
}

struct EncodeOpts {
  std::string mrf, scheme = "onehot", epsilon_rule = "rel", out, poly;
  double t = 1.0;
};

int run_encode(const EncodeOpts& o) {
  const MarkovRandomField mrf = read_mrf_file(o.mrf);
  QuboInstance q;
  if (o.scheme == "onehot") {
    const double eps = parse_epsilon_rule(o.epsilon_rule).value_or(default_epsilon(mrf));
    q = encode_one_hot(mrf, eps, o.t);
  } else if (o.scheme == "binary") {
    const PseudoBooleanPolynomial poly = quadratize(encode_binary(mrf));
    if (!o.poly.empty()) {
      std::ofstream out(o.poly);
      dump_polynomial(out, poly);
    }
    q = pbo_to_qubo(poly);
  } else {
    throw InvalidArgument("scheme must be onehot or binary");
  }
  save_qubo(o.out, q);
  std::cerr << "encoded " << mrf.vertex_count() << " vertices into " << q.n() << " variables, "
            << q.off_diagonal_count() << " couplers\n";
  return kOk;
}

struct SolveOpts {
  std::string qubo, mrf, solver = "sa", out;
  int reads = 500, sweeps = 1000, jobs = 1;
  std::vector<double> beta;
  std::uint64_t seed = 0;
  bool timing = false;
};

int run_solve(const SolveOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  if (o.solver == "chain-dp") {
    if (o.mrf.empty()) throw InvalidArgument("chain-dp solves the MRF directly; pass --mrf");
    const MarkovRandomField mrf = read_mrf_file(o.mrf);
    const MapResult r = solve_chain_dp(mrf);
    nlohmann::ordered_json j;
    j["solver"] = "chain-dp";
    j["mrf_energy"] = r.energy;
    j["labels"] = r.labels;
    if (o.timing) j["elapsed_ms"] = millis_since(t0);
    emit(o.out, j.dump());
    return kOk;
  }
  if (o.qubo.empty()) throw InvalidArgument("pass --qubo");
  const QuboInstance q = load_qubo(o.qubo);
  SolveResult r;
  if (o.solver == "exhaustive") {
    r = solve_exhaustive(q);
  } else if (o.solver == "sa") {
    SaParams p;
    p.reads = o.reads;
    p.sweeps = o.sweeps;
    p.seed = o.seed;
    p.jobs = o.jobs;
    if (!o.beta.empty()) {
      if (o.beta.size() != 2) throw InvalidArgument("--beta takes two values");
      p.beta_range = std::pair{o.beta[0], o.beta[1]};
    }
    r = solve_sa(q, p);
  } else {
    throw InvalidArgument("solver must be exhaustive, sa or chain-dp");
  }
  auto j = nlohmann::ordered_json::parse(solve_result_json(r, q, o.solver, o.timing));
  j["energy_with_offset"] = r.best_energy + q.offset();
  if (!o.mrf.empty()) {
    const MarkovRandomField mrf = read_mrf_file(o.mrf);
    Labelling lab;
    if (q.scheme() == Scheme::Binary) {
      lab = decode_binary(mrf, r.best_x);
    } else if (q.scheme() == Scheme::OneHot) {
      const DecodedLabelling d = decode(q, r.best_x);
      j["feasible"] = d.all_feasible();
      lab = d.labels;
    } else {
      throw InvalidArgument("QUBO has no encoding metadata; cannot decode against --mrf");
    }
    j["labels"] = lab;
    j["mrf_energy"] = energy(mrf, lab);
  }
  std::cerr << "solved n=" << q.n() << " in " << millis_since(t0) << " ms\n";
  emit(o.out, j.dump());
  return kOk;
}

struct StereoOpts {
  std::string left, right, config, solver, out, float_out, gt, trace, metrics;
  double gt_scale = 8.0, scale = 8.0, delta = 1.0;
  std::optional<std::uint64_t> seed;
  int jobs = 1, crop = 0;
  bool timing = false;
};

int run_stereo(const StereoOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  StereoConfig cfg = o.config.empty() ? middlebury_config() : load_config(o.config);
  if (!o.solver.empty()) cfg.solver.kind = stereo_solver_from_string(o.solver);
  if (o.seed) cfg.solver.seed = *o.seed;
  const GrayImage left = load_image(o.left);
  const GrayImage right = load_image(o.right);
  const StereoResult res = stereo_match(left, right, cfg, o.jobs);
  save_pgm(res.disparity, o.out, o.scale);
  if (!o.float_out.empty()) save_disparity_float(res.disparity, o.float_out);
  if (!o.trace.empty()) {
    std::ofstream out(o.trace);
    out << "level,width,height,bundle,energy\n";
    out.precision(17);
    for (const LevelTrace& t : res.trace)
      for (std::size_t b = 0; b < t.bundle_energy.size(); ++b)
        out << t.level << ',' << t.width << ',' << t.height << ',' << b << ',' << t.bundle_energy[b] << '\n';
  }
  const double ms = millis_since(t0);
  std::cerr << "stereo " << left.width << "x" << left.height << " in " << ms << " ms\n";
  if (!o.gt.empty()) {
    MetricsReport m = evaluate(res.disparity, load_disparity(o.gt, o.gt_scale), o.delta, EvalRegion{o.crop});
    m.config_hash = config_hash(cfg);
    m.solver = to_string(cfg.solver.kind);
    if (o.timing) m.elapsed_ms = ms;
    emit(o.metrics, metrics_json(m));
  }
  return kOk;
}

struct EvalOpts {
  std::string est, gt, out, config, solver;
  double scale = 8.0, est_scale = 8.0, delta = 1.0;
  int crop = 0;
};

int run_eval(const EvalOpts& o) {
  const DisparityMap gt = load_disparity(o.gt, o.scale);
  DisparityMap est;
  {
    std::ifstream probe(o.est, std::ios::binary);
    char magic[2] = {};
    probe.read(magic, 2);
    est = magic[0] == 'P' ? load_disparity(o.est, o.est_scale) : load_disparity_float(o.est);
  }
  MetricsReport m = evaluate(est, gt, o.delta, EvalRegion{o.crop});
  m.config_hash = config_hash(o.config.empty() ? middlebury_config() : load_config(o.config));
  m.solver = o.solver;
  emit(o.out, metrics_json(m));
  return kOk;
}

struct StatsOpts {
  std::string qubo;
  int line = 0, labels = 0;
  std::uint64_t seed = 0;
};

int run_stats(const StatsOpts& o) {
  QuboInstance q;
  if (!o.qubo.empty()) q = load_qubo(o.qubo);
  else if (o.line > 0 && o.labels > 0) q = synthetic_line_qubo(o.line, o.labels, o.seed);
  else throw InvalidArgument("pass --qubo, or --line and --labels");
  const GraphStats s = graph_stats(q);
  auto j = nlohmann::ordered_json::parse(graph_stats_json(s));
  if (s.edges > 0) j["chain_strength"] = chain_strength(q);
  std::cout << "nodes " << s.nodes << "\nedges " << s.edges << '\n' << j.dump() << '\n';
  return kOk;
}

struct AblateOpts {
  std::string which, config, solver, out, data;
  std::vector<std::string> grid, pairs;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

int run_ablate(const AblateOpts& o) {
  StereoConfig cfg = o.config.empty() ? middlebury_config() : load_config(o.config);
  if (!o.solver.empty()) cfg.solver.kind = stereo_solver_from_string(o.solver);
  if (o.seed) cfg.solver.seed = *o.seed;
  std::vector<StereoPairFiles> pairs = o.data.empty() ? std::vector<StereoPairFiles>{} : find_pairs(o.data);
  for (const std::string& dir : o.pairs) {
    auto p = find_pair(dir);
    if (!p) throw ParseError("no stereo pair layout recognised in " + dir, 0);
    pairs.push_back(*p);
  }
  const AblationAxis axis = ablation_axis_from_string(o.which);
  const auto rows = run_ablation(pairs, cfg, axis, o.grid, o.jobs);
  std::ostringstream csv;
  write_ablation_csv(csv, axis, rows);
  std::string text = csv.str();
  text.pop_back();
  emit(o.out, text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmrf: MRF to QUBO encodings, solvers and coarse-to-fine stereo"};
  app.require_subcommand(1);

  EncodeOpts enc;
  auto* c_enc = app.add_subcommand("encode", "Encode an MRF file as a QUBO (writes <out> and <out>.json)");
  c_enc->add_option("--mrf", enc.mrf, "MRF text file")->required();
  c_enc->add_option("--scheme", enc.scheme, "onehot or binary")->check(CLI::IsMember({"onehot", "binary"}));
  c_enc->add_option("--epsilon-rule", enc.epsilon_rule, "rel or abs:<value>");
  c_enc->add_option("--t", enc.t, "rectifier strength");
  c_enc->add_option("--dump-poly", enc.poly, "write the quadratized polynomial (binary scheme)");
  c_enc->add_option("--out", enc.out, "QUBO output file")->required();

  SolveOpts sol;
  auto* c_sol = app.add_subcommand("solve", "Solve a QUBO (or an MRF with chain-dp); prints JSON");
  c_sol->add_option("--qubo", sol.qubo, "QUBO file");
  c_sol->add_option("--mrf", sol.mrf, "MRF file for chain-dp or to decode the result");
  c_sol->add_option("--solver", sol.solver, "exhaustive, sa or chain-dp")
      ->check(CLI::IsMember({"exhaustive", "sa", "chain-dp"}));
  c_sol->add_option("--reads", sol.reads, "annealing reads")->check(CLI::PositiveNumber);
  c_sol->add_option("--sweeps", sol.sweeps, "sweeps per read")->check(CLI::PositiveNumber);
  c_sol->add_option("--beta", sol.beta, "beta_start beta_end")->expected(2);
  c_sol->add_option("--seed", sol.seed, "random seed");
  c_sol->add_option("--jobs", sol.jobs, "worker threads")->check(CLI::PositiveNumber);
  c_sol->add_flag("--timing", sol.timing, "include elapsed_ms in the JSON");
  c_sol->add_option("--out", sol.out, "JSON output file (default stdout)");

  StereoOpts st;
  auto* c_st = app.add_subcommand("stereo", "Coarse-to-fine stereo matching");
  c_st->add_option("--left", st.left, "left image (PGM/PPM)")->required();
  c_st->add_option("--right", st.right, "right image (PGM/PPM)")->required();
  c_st->add_option("--config", st.config, "JSON stereo config (default: Middlebury)");
  c_st->add_option("--solver", st.solver, "chain-dp, sa or exhaustive")
      ->check(CLI::IsMember({"exhaustive", "sa", "chain-dp"}));
  c_st->add_option("--seed", st.seed, "random seed");
  c_st->add_option("--jobs", st.jobs, "worker threads over bundles")->check(CLI::PositiveNumber);
  c_st->add_option("--out", st.out, "disparity PGM")->required();
  c_st->add_option("--scale", st.scale, "PGM value per disparity unit");
  c_st->add_option("--float-out", st.float_out, "float32 disparity sidecar");
  c_st->add_option("--trace", st.trace, "CSV of per-bundle optimal energies");
  c_st->add_option("--gt", st.gt, "ground-truth PGM for inline metrics");
  c_st->add_option("--gt-scale", st.gt_scale, "ground-truth PGM value per disparity unit");
  c_st->add_option("--delta", st.delta, "bad-pixel threshold");
  c_st->add_option("--crop", st.crop, "border pixels excluded from metrics");
  c_st->add_option("--metrics", st.metrics, "metrics JSON file (default stdout)");
  c_st->add_flag("--timing", st.timing, "include elapsed_ms in the metrics JSON");

  EvalOpts ev;
  auto* c_ev = app.add_subcommand("eval", "RMSE and bad-pixel percentage of a disparity map");
  c_ev->add_option("--est", ev.est, "estimated disparity (PGM or float sidecar)")->required();
  c_ev->add_option("--gt", ev.gt, "ground-truth PGM")->required();
  c_ev->add_option("--scale", ev.scale, "ground-truth PGM value per disparity unit");
  c_ev->add_option("--est-scale", ev.est_scale, "estimate PGM value per disparity unit");
  c_ev->add_option("--delta", ev.delta, "bad-pixel threshold");
  c_ev->add_option("--crop", ev.crop, "border pixels excluded");
  c_ev->add_option("--config", ev.config, "config whose hash is reported");
  c_ev->add_option("--solver", ev.solver, "solver label for the report");
  c_ev->add_option("--out", ev.out, "JSON output file (default stdout)");

  StatsOpts ss;
  auto* c_ss = app.add_subcommand("stats", "Problem-graph statistics of a QUBO");
  c_ss->add_option("--qubo", ss.qubo, "QUBO file");
  c_ss->add_option("--line", ss.line, "width of a synthetic one-line stereo QUBO");
  c_ss->add_option("--labels", ss.labels, "labels of the synthetic line");
  c_ss->add_option("--seed", ss.seed, "texture seed of the synthetic line");

  AblateOpts ab;
  auto* c_ab = app.add_subcommand("ablate", "Stereo ablation sweep; writes CSV of RMSE/BPP per setting");
  c_ab->add_option("--which", ab.which, "regularizer, filters, levels or t")
      ->required()
      ->check(CLI::IsMember({"regularizer", "filters", "levels", "t"}));
  c_ab->add_option("--grid", ab.grid, "values to sweep")->required()->delimiter(',');
  c_ab->add_option("--pair", ab.pairs, "directory holding one stereo pair");
  c_ab->add_option("--data", ab.data, "directory of pair directories");
  c_ab->add_option("--config", ab.config, "base JSON stereo config");
  c_ab->add_option("--solver", ab.solver, "chain-dp, sa or exhaustive");
  c_ab->add_option("--seed", ab.seed, "random seed");
  c_ab->add_option("--jobs", ab.jobs, "worker threads over bundles")->check(CLI::PositiveNumber);
  c_ab->add_option("--out", ab.out, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*c_enc) return run_encode(enc);
    if (*c_sol) return run_solve(sol);
    if (*c_st) return run_stereo(st);
    if (*c_ev) return run_eval(ev);
    if (*c_ss) return run_stats(ss);
    if (*c_ab) return run_ablate(ab);
  } catch (const CapacityError& e) {
    std::cerr << "capacity: " << e.what() << '\n';
    return kCapacity;
  } catch (const ParseError& e) {
    std::cerr << "parse: " << e.what() << '\n';
    return kData;
  } catch (const UndefinedStatistic& e) {
    std::cerr << "data: " << e.what() << '\n';
    return kData;
  } catch (const InvalidArgument& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const StructureError& e) {
    std::cerr << "solver: " << e.what() << '\n';
    return kSolver;
  } catch (const SolverError& e) {
    std::cerr << "solver: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
  return kUsage;
}
