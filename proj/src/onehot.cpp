#include "qmrf/onehot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmrf/errors.hpp"

namespace qmrf {

double default_epsilon(const MarkovRandomField& mrf) {
  return 1e-6 * std::max(1.0, mrf.max_abs_potential());
}

RectifierTable compute_rectifiers(const MarkovRandomField& mrf, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("rectifier epsilon must be positive");
  const int nv = mrf.vertex_count();
  RectifierTable t;
  t.epsilon = epsilon;
  t.gamma.resize(nv);
  t.chi.resize(nv);
  t.zeta.resize(nv);
  t.theta.resize(nv);
  t.lambda_diag.resize(nv);
  t.lambda_off.resize(nv);

  for (int p = 0; p < nv; ++p) {
    const int k = mrf.label_count(p);
    const auto incident = mrf.incident(p);
    std::span<const double> phi = mrf.unary(p);

    auto& gamma = t.gamma[p];
    gamma.assign(incident.size(), std::vector<double>(k));
    std::vector<double>& zeta = t.zeta[p];
    zeta.assign(k, 0.0);
    for (std::size_t e = 0; e < incident.size(); ++e) {
      const Incidence& inc = incident[e];
      const int kq = mrf.label_count(inc.neighbour);
      for (int r = 0; r < k; ++r) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < kq; ++s) {
          const double c = mrf.pairwise_from(inc, r, s);
          mx = std::max(mx, c);
          zeta[r] += std::min(0.0, c);
        }
        gamma[e][r] = mx;
      }
    }

    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < k; ++r) {
      double worst = phi[r];
      for (std::size_t e = 0; e < incident.size(); ++e) worst += std::max(0.0, gamma[e][r]);
      best = std::min(best, worst);
    }
    const double chi = std::max(0.0, best + epsilon);
    t.chi[p] = chi;

    CostMatrix theta(k, k);
    CostMatrix off(k, k);
    for (int r = 0; r < k; ++r) {
      for (int s = 0; s < k; ++s) {
        theta(r, s) = std::min({0.0, phi[r] + zeta[r] - epsilon, phi[s] + zeta[s] - epsilon});
        off(r, s) = (chi - theta(r, s)) / 2.0;
      }
    }
    t.theta[p] = std::move(theta);
    t.lambda_off[p] = std::move(off);
    t.lambda_diag[p].assign(k, chi);
  }
  return t;
}

std::vector<int> one_hot_offsets(const MarkovRandomField& mrf) {
  std::vector<int> base(mrf.vertex_count() + 1, 0);
  for (int v = 0; v < mrf.vertex_count(); ++v) base[v + 1] = base[v] + mrf.label_count(v);
  return base;
}

QuboInstance encode_one_hot(const MarkovRandomField& mrf, double epsilon, double t) {
  return encode_one_hot(mrf, compute_rectifiers(mrf, epsilon), t);
}

QuboInstance encode_one_hot(const MarkovRandomField& mrf, const RectifierTable& rect, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("rectifier strength t must be non-negative");
  const std::vector<int> base = one_hot_offsets(mrf);
  QuboBuilder b(base.back());
  std::vector<VarMeta> meta(base.back());

  double offset = 0.0;
  for (int v = 0; v < mrf.vertex_count(); ++v) {
    const int k = mrf.label_count(v);
    for (int l = 0; l < k; ++l) {
      meta[base[v] + l] = {v, l};
      b.add_structural(base[v] + l, base[v] + l, mrf.unary(v)[l] - t * rect.lambda_diag[v][l]);
    }
    for (int r = 0; r < k; ++r)
      for (int s = r + 1; s < k; ++s)
        b.add_structural(base[v] + r, base[v] + s, 2.0 * t * rect.lambda_off[v](r, s));
    // A feasible x picks up exactly one -t*Lambda(l, l) per vertex.
    offset += t * rect.chi[v];
  }
  for (int e = 0; e < mrf.edge_count(); ++e) {
    const Edge& ed = mrf.edge(e);
    const CostMatrix& m = mrf.pairwise(e);
    for (int r = 0; r < m.rows(); ++r)
      for (int s = 0; s < m.cols(); ++s) b.add_structural(base[ed.p] + r, base[ed.q] + s, m(r, s));
  }
  b.add_offset(offset);
  b.set_meta(std::move(meta));
  b.set_scheme(Scheme::OneHot);
  return b.build();
}

bool DecodedLabelling::all_feasible() const {
  return std::all_of(feasible.begin(), feasible.end(), [](bool f) { return f; });
}

DecodedLabelling decode(const QuboInstance& q, std::span<const std::uint8_t> x) {
  if (static_cast<int>(x.size()) != q.n())
    throw InvalidArgument("bitstring length " + std::to_string(x.size()) + " does not match n = " +
                          std::to_string(q.n()));
  if (q.scheme() == Scheme::Binary) throw InvalidArgument("decode() expects a one-hot QUBO; use decode_binary");
  int nv = 0;
  for (const VarMeta& m : q.var_meta()) nv = std::max(nv, m.vertex + 1);

  std::vector<int> lowest(nv, -1);
  std::vector<int> count(nv, 0);
  for (int i = 0; i < q.n(); ++i) {
    const VarMeta& m = q.var_meta()[i];
    if (m.vertex < 0 || !x[i]) continue;
    ++count[m.vertex];
    if (lowest[m.vertex] < 0 || m.label < lowest[m.vertex]) lowest[m.vertex] = m.label;
  }
  DecodedLabelling out;
  out.labels.resize(nv);
  out.feasible.resize(nv);
  for (int v = 0; v < nv; ++v) {
    out.labels[v] = std::max(0, lowest[v]);
    out.feasible[v] = count[v] == 1;
  }
  return out;
}

bool verify_feasible_optimum(const MarkovRandomField& mrf, const QuboInstance& q,
                             std::span<const std::uint8_t> x) {
  if (static_cast<int>(x.size()) != q.n()) return false;
  std::vector<int> count(mrf.vertex_count(), 0);
  for (int i = 0; i < q.n(); ++i) {
    const VarMeta& m = q.var_meta()[i];
    if (m.vertex < 0 || m.vertex >= mrf.vertex_count()) return false;
    count[m.vertex] += x[i] ? 1 : 0;
  }
  return std::all_of(count.begin(), count.end(), [](int c) { return c == 1; });
}

double chain_strength(const QuboInstance& q) {
  std::vector<double> w;
  std::vector<bool> present(q.n(), false);
  for (const QuboEntry& e : q.entries()) {
    present[e.i] = present[e.j] = true;
    if (e.i != e.j) w.push_back(e.weight);
  }
  if (w.empty()) throw UndefinedStatistic("chain strength needs at least one off-diagonal entry");

  // Welford: all-equal weights give exactly zero spread.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double d = w[k] - mean;
    mean += d / static_cast<double>(k + 1);
    m2 += d * (w[k] - mean);
  }
  const double var = m2 / static_cast<double>(w.size());

  const double nodes = static_cast<double>(std::count(present.begin(), present.end(), true));
  const double avg_degree = 2.0 * static_cast<double>(w.size()) / nodes;
  return 1.414 * std::sqrt(var) * std::sqrt(avg_degree);
}

}  // namespace qmrf
