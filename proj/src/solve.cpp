#include "qmrf/solve.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>

#include <json.hpp>

#include "qmrf/errors.hpp"
#include "qmrf/rng.hpp"

namespace qmrf {

namespace {

// Adjacency view of a QUBO for incremental flip energies.
struct FlipGraph {
  std::vector<double> diag;
  std::vector<int> start;  // CSR row pointers
  std::vector<int> nbr;
  std::vector<double> w;

  explicit FlipGraph(const QuboInstance& q) : diag(q.n(), 0.0), start(q.n() + 1, 0) {
    for (const QuboEntry& e : q.entries()) {
      if (e.i == e.j) {
        diag[e.i] += e.weight;
      } else {
        ++start[e.i + 1];
        ++start[e.j + 1];
      }
    }
    for (int i = 0; i < q.n(); ++i) start[i + 1] += start[i];
    nbr.resize(start.back());
    w.resize(start.back());
    std::vector<int> fill(start.begin(), start.end() - 1);
    for (const QuboEntry& e : q.entries()) {
      if (e.i == e.j) continue;
      nbr[fill[e.i]] = e.j;
      w[fill[e.i]++] = e.weight;
      nbr[fill[e.j]] = e.i;
      w[fill[e.j]++] = e.weight;
    }
  }

  int n() const { return static_cast<int>(diag.size()); }

  // Energy change of flipping bit i given off-diagonal local fields.
  double delta(int i, std::uint8_t xi, const std::vector<double>& local) const {
    const double d = diag[i] + local[i];
    return xi ? -d : d;
  }

  void apply_flip(int i, std::uint8_t new_xi, std::vector<double>& local) const {
    const double sign = new_xi ? 1.0 : -1.0;
    for (int k = start[i]; k < start[i + 1]; ++k) local[nbr[k]] += sign * w[k];
  }
};

template <typename Clock = std::chrono::steady_clock>
std::chrono::nanoseconds since(typename Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0);
}

}  // namespace

double IsingModel::evaluate(std::span<const std::int8_t> s) const {
  if (s.size() != h.size()) throw InvalidArgument("spin vector length does not match the model");
  double total = offset;
  for (std::size_t i = 0; i < h.size(); ++i) total += h[i] * s[i];
  for (const QuboEntry& e : J) total += e.weight * s[e.i] * s[e.j];
  return total;
}

SolveResult solve_exhaustive(const QuboInstance& q) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = q.n();
  if (n > kExhaustiveMaxVars)
    throw CapacityError("exhaustive solver limited to " + std::to_string(kExhaustiveMaxVars) +
                        " variables, got " + std::to_string(n));
  const FlipGraph g(q);
  double scale = 1.0;
  for (const QuboEntry& e : q.entries()) scale += std::abs(e.weight);
  const double tol = 1e-9 * scale;

  Bits x(n, 0);
  std::vector<double> local(n, 0.0);
  double running = 0.0;
  Bits best_x = x;
  double best_exact = q.evaluate(x);
  double best_running = running;

  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int i = std::countr_zero(k);
    running += g.delta(i, x[i], local);
    x[i] ^= 1u;
    g.apply_flip(i, x[i], local);

    if (running < best_running - tol) {
      best_x = x;
      best_running = running;
      best_exact = q.evaluate(x);
    } else if (running <= best_running + tol) {
      const double exact = q.evaluate(x);
      if (exact < best_exact || (exact == best_exact && x < best_x)) {
        best_x = x;
        best_exact = exact;
        best_running = running;
      }
    }
  }
  SolveResult r;
  r.best_x = std::move(best_x);
  r.best_energy = best_exact;
  r.samples = {best_exact};
  r.elapsed = since(t0);
  return r;
}

std::pair<double, double> default_beta_range(const QuboInstance& q) {
  const FlipGraph g(q);
  double max_flip = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    double m = std::abs(g.diag[i]);
    for (int k = g.start[i]; k < g.start[i + 1]; ++k) m += std::abs(g.w[k]);
    max_flip = std::max(max_flip, m);
  }
  double min_flip = std::numeric_limits<double>::infinity();
  for (const QuboEntry& e : q.entries())
    if (e.weight != 0.0) min_flip = std::min(min_flip, std::abs(e.weight));
  if (max_flip == 0.0 || !std::isfinite(min_flip)) return {0.1, 1.0};
  return {std::log(2.0) / max_flip, std::log(100.0) / min_flip};
}

SolveResult solve_sa(const QuboInstance& q, const SaParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  if (params.reads < 1) throw InvalidArgument("simulated annealing needs at least one read");
  if (params.sweeps < 1) throw InvalidArgument("simulated annealing needs at least one sweep");
  const auto [beta0, beta1] = params.beta_range.value_or(default_beta_range(q));
  if (!(beta0 > 0.0) || !(beta0 <= beta1) || !std::isfinite(beta1))
    throw InvalidArgument("beta range must satisfy 0 < beta_start <= beta_end");

  std::vector<double> betas(params.sweeps);
  for (int k = 0; k < params.sweeps; ++k) {
    const double f = params.sweeps == 1 ? 0.0 : static_cast<double>(k) / (params.sweeps - 1);
    betas[k] = beta0 * std::pow(beta1 / beta0, f);
  }

  const FlipGraph g(q);
  const int n = g.n();
  std::vector<Bits> finals(params.reads);
  std::vector<double> energies(params.reads);

  auto run_read = [&](int read) {
    Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(read)));
    Bits x(n);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng.bits() & 1u);
    std::vector<double> local(n, 0.0);
    for (int i = 0; i < n; ++i)
      if (x[i])
        for (int k = g.start[i]; k < g.start[i + 1]; ++k) local[g.nbr[k]] += g.w[k];
    for (double beta : betas) {
      for (int i = 0; i < n; ++i) {
        const double d = g.delta(i, x[i], local);
        bool flip = d <= 0.0;
        if (!flip) {
          const double arg = beta * d;
          // exp(-40) is below the resolution of the uniform draw
          flip = arg < 40.0 && rng.uniform() < std::exp(-arg);
        }
        if (flip) {
          x[i] ^= 1u;
          g.apply_flip(i, x[i], local);
        }
      }
    }
    energies[read] = q.evaluate(x);
    finals[read] = std::move(x);
  };

  const int jobs = std::clamp(params.jobs, 1, params.reads);
  if (jobs == 1) {
    for (int r = 0; r < params.reads; ++r) run_read(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (int r = next++; r < params.reads; r = next++) run_read(r);
      });
    for (auto& th : pool) th.join();
  }

  const auto best = std::min_element(energies.begin(), energies.end()) - energies.begin();
  SolveResult res;
  res.best_x = finals[best];
  res.best_energy = energies[best];
  res.samples = std::move(energies);
  res.elapsed = since(t0);
  return res;
}

MapResult solve_chain_dp(const MarkovRandomField& mrf) {
  const int nv = mrf.vertex_count();
  for (int v = 0; v < nv; ++v)
    if (mrf.degree(v) > 2)
      throw StructureError("chain DP needs a path graph; vertex " + std::to_string(v) + " has degree " +
                           std::to_string(mrf.degree(v)));

  Labelling lab(nv, 0);
  std::vector<bool> visited(nv, false);
  std::vector<int> path;
  std::vector<const Incidence*> via;  // via[k]: incidence from path[k-1] to path[k]
  std::vector<std::vector<double>> cost;
  std::vector<std::vector<int>> back;

  for (int start = 0; start < nv; ++start) {
    if (visited[start] || mrf.degree(start) > 1) continue;
    path.assign(1, start);
    via.assign(1, nullptr);
    visited[start] = true;
    int prev = -1;
    int cur = start;
    while (true) {
      const Incidence* step = nullptr;
      for (const Incidence& inc : mrf.incident(cur))
        if (inc.neighbour != prev) step = &inc;
      if (step == nullptr) break;
      prev = cur;
      cur = step->neighbour;
      visited[cur] = true;
      path.push_back(cur);
      via.push_back(step);
    }

    const std::size_t len = path.size();
    cost.assign(len, {});
    back.assign(len, {});
    auto phi0 = mrf.unary(path[0]);
    cost[0].assign(phi0.begin(), phi0.end());
    for (std::size_t k = 1; k < len; ++k) {
      const int v = path[k];
      const int u = path[k - 1];
      const int kv = mrf.label_count(v);
      const int ku = mrf.label_count(u);
      cost[k].resize(kv);
      back[k].resize(kv);
      for (int l = 0; l < kv; ++l) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int lp = 0; lp < ku; ++lp) {
          const double c = cost[k - 1][lp] + mrf.pairwise_from(*via[k], lp, l);
          if (c < best) {
            best = c;
            arg = lp;
          }
        }
        cost[k][l] = mrf.unary(v)[l] + best;
        back[k][l] = arg;
      }
    }
    int l = static_cast<int>(std::min_element(cost[len - 1].begin(), cost[len - 1].end()) - cost[len - 1].begin());
    for (std::size_t k = len; k-- > 0;) {
      lab[path[k]] = l;
      if (k > 0) l = back[k][l];
    }
  }
  for (int v = 0; v < nv; ++v)
    if (!visited[v]) throw StructureError("chain DP needs a path graph; found a cycle through vertex " + std::to_string(v));

  return {lab, energy(mrf, lab)};
}

IsingModel qubo_to_ising(const QuboInstance& q) {
  IsingModel m;
  m.h.assign(q.n(), 0.0);
  for (const QuboEntry& e : q.entries()) {
    if (e.i == e.j) {
      m.h[e.i] += e.weight / 2.0;
      m.offset += e.weight / 2.0;
    } else {
      // stored weight is q_ij + q_ji
      m.h[e.i] += e.weight / 4.0;
      m.h[e.j] += e.weight / 4.0;
      m.offset += e.weight / 4.0;
      m.J.push_back({e.i, e.j, e.weight / 4.0});
    }
  }
  return m;
}

std::string bits_to_hex(std::span<const std::uint8_t> x) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t k = 0; k < x.size(); k += 4) {
    unsigned d = 0;
    for (std::size_t b = 0; b < 4; ++b) d = (d << 1) | ((k + b < x.size() && x[k + b]) ? 1u : 0u);
    out.push_back(kDigits[d]);
  }
  return out;
}

Bits bits_from_hex(const std::string& hex, int n) {
  if (n < 0 || hex.size() != static_cast<std::size_t>((n + 3) / 4))
    throw InvalidArgument("hex bitstring length does not match n");
  Bits x(n, 0);
  for (std::size_t k = 0; k < hex.size(); ++k) {
    const char c = hex[k];
    unsigned d = 0;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else throw InvalidArgument("bad hex digit");
    for (int b = 0; b < 4; ++b) {
      const std::size_t i = 4 * k + b;
      if (i < x.size()) x[i] = (d >> (3 - b)) & 1u;
    }
  }
  return x;
}

std::string solve_result_json(const SolveResult& r, const QuboInstance& q, const std::string& solver,
                              bool include_timing) {
  nlohmann::ordered_json j;
  j["solver"] = solver;
  j["n"] = q.n();
  j["best_energy"] = r.best_energy;
  j["offset"] = q.offset();
  j["best_x"] = bits_to_hex(r.best_x);
  j["energies"] = r.samples;
  if (include_timing) j["elapsed_ms"] = std::chrono::duration<double, std::milli>(r.elapsed).count();
  return j.dump();
}

}  // namespace qmrf
