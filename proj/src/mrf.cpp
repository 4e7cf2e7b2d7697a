#include "qmrf/mrf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "qmrf/errors.hpp"
#include "qmrf/rng.hpp"
#include "text_scanner.hpp"

namespace qmrf {

CostMatrix::CostMatrix(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows < 0 || cols < 0 || values_.size() != static_cast<std::size_t>(rows) * cols)
    throw InvalidArgument("cost matrix size does not match its shape");
}

CostMatrix CostMatrix::transposed() const {
  CostMatrix t(cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int s = 0; s < cols_; ++s) t(s, r) = (*this)(r, s);
  return t;
}

MarkovRandomField::MarkovRandomField(std::vector<std::vector<double>> unary,
                                     std::vector<Edge> edges,
                                     std::vector<CostMatrix> pairwise)
    : unary_(std::move(unary)), edges_(std::move(edges)), pairwise_(std::move(pairwise)) {
  const int n = vertex_count();
  for (int v = 0; v < n; ++v)
    if (unary_[v].empty()) throw InvalidArgument("vertex " + std::to_string(v) + " has no labels");
  if (pairwise_.size() != edges_.size())
    throw InvalidArgument("one pairwise table is required per edge");

  std::set<std::pair<int, int>> seen;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    Edge& ed = edges_[e];
    if (ed.p < 0 || ed.q < 0 || ed.p >= n || ed.q >= n)
      throw InvalidArgument("edge references a vertex out of range");
    if (ed.p == ed.q) throw InvalidArgument("self-loop on vertex " + std::to_string(ed.p));
    if (ed.p > ed.q) {
      std::swap(ed.p, ed.q);
      pairwise_[e] = pairwise_[e].transposed();
    }
    if (!seen.insert({ed.p, ed.q}).second)
      throw InvalidArgument("duplicate edge (" + std::to_string(ed.p) + ", " + std::to_string(ed.q) + ")");
    if (pairwise_[e].rows() != label_count(ed.p) || pairwise_[e].cols() != label_count(ed.q))
      throw InvalidArgument("pairwise table shape does not match endpoint label counts");
  }

  incidence_.assign(n, {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    incidence_[ed.p].push_back({static_cast<int>(e), ed.q, true});
    incidence_[ed.q].push_back({static_cast<int>(e), ed.p, false});
  }
}

double MarkovRandomField::max_abs_potential() const {
  double m = 0.0;
  for (const auto& u : unary_)
    for (double c : u) m = std::max(m, std::abs(c));
  for (const auto& t : pairwise_)
    for (double c : t.values()) m = std::max(m, std::abs(c));
  return m;
}

void MarkovRandomField::check_labelling(const Labelling& lab) const {
  if (static_cast<int>(lab.size()) != vertex_count())
    throw InvalidArgument("labelling has " + std::to_string(lab.size()) + " entries for " +
                          std::to_string(vertex_count()) + " vertices");
  for (int v = 0; v < vertex_count(); ++v)
    if (lab[v] < 0 || lab[v] >= label_count(v))
      throw InvalidArgument("label out of range at vertex " + std::to_string(v));
}

double energy(const MarkovRandomField& mrf, const Labelling& lab) {
  mrf.check_labelling(lab);
  double total = 0.0;
  for (int v = 0; v < mrf.vertex_count(); ++v) total += mrf.unary(v)[lab[v]];
  for (int e = 0; e < mrf.edge_count(); ++e) {
    const Edge& ed = mrf.edge(e);
    total += mrf.pairwise(e)(lab[ed.p], lab[ed.q]);
  }
  return total;
}

MapResult brute_force_map(const MarkovRandomField& mrf) {
  const int n = mrf.vertex_count();
  double states = 1.0;
  for (int v = 0; v < n; ++v) states *= mrf.label_count(v);
  if (states > kBruteForceStateLimit)
    throw CapacityError("brute-force state space of " + std::to_string(states) + " exceeds 1e7");

  // Odometer with vertex 0 most significant visits labellings in
  // lexicographic order, so a strict comparison keeps the first optimum.
  Labelling lab(n, 0);
  MapResult best{lab, energy(mrf, lab)};
  while (true) {
    int v = n - 1;
    while (v >= 0 && lab[v] + 1 == mrf.label_count(v)) {
      lab[v] = 0;
      --v;
    }
    if (v < 0) break;
    ++lab[v];
    double e = energy(mrf, lab);
    if (e < best.energy) best = {lab, e};
  }
  return best;
}

MarkovRandomField random_mrf(std::uint64_t seed, int vertices, int labels, double edge_prob,
                             CostRange costs) {
  return random_mrf(seed, vertices, labels, labels, edge_prob, costs);
}

MarkovRandomField random_mrf(std::uint64_t seed, int vertices, int min_labels, int max_labels,
                             double edge_prob, CostRange costs) {
  if (vertices < 1) throw InvalidArgument("random_mrf needs at least one vertex");
  if (min_labels < 1 || max_labels < min_labels) throw InvalidArgument("bad label count range");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw InvalidArgument("edge_prob must lie in [0, 1]");

  Rng rng(seed);
  std::vector<std::vector<double>> unary(vertices);
  for (auto& u : unary) {
    int k = min_labels + static_cast<int>(rng.bits() % static_cast<std::uint64_t>(max_labels - min_labels + 1));
    u.resize(k);
    for (double& c : u) c = rng.uniform(costs.lo, costs.hi);
  }
  std::vector<Edge> edges;
  std::vector<CostMatrix> tables;
  for (int p = 0; p < vertices; ++p) {
    for (int q = p + 1; q < vertices; ++q) {
      if (!(rng.uniform() < edge_prob)) continue;
      CostMatrix m(static_cast<int>(unary[p].size()), static_cast<int>(unary[q].size()));
      for (int r = 0; r < m.rows(); ++r)
        for (int s = 0; s < m.cols(); ++s) m(r, s) = rng.uniform(costs.lo, costs.hi);
      edges.push_back({p, q});
      tables.push_back(std::move(m));
    }
  }
  return MarkovRandomField(std::move(unary), std::move(edges), std::move(tables));
}

MarkovRandomField read_mrf(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  detail::TextScanner sc(buf.str());

  sc.expect("mrf");
  const std::int64_t nv = sc.integer();
  const std::int64_t ne = sc.integer();
  if (nv < 0 || ne < 0) sc.fail("negative vertex or edge count");

  std::vector<std::vector<double>> unary(nv);
  std::vector<bool> defined(nv, false);
  for (std::int64_t i = 0; i < nv; ++i) {
    sc.expect("vertex");
    std::size_t at = sc.peek_offset();
    std::int64_t id = sc.integer();
    if (id < 0 || id >= nv || defined[id]) throw ParseError("bad or repeated vertex id", at);
    defined[id] = true;
    at = sc.peek_offset();
    std::int64_t k = sc.integer();
    if (k < 1) throw ParseError("vertex needs at least one label", at);
    unary[id].resize(k);
    for (double& c : unary[id]) c = sc.real();
  }

  std::vector<Edge> edges;
  std::vector<CostMatrix> tables;
  for (std::int64_t i = 0; i < ne; ++i) {
    sc.expect("edge");
    std::size_t at = sc.peek_offset();
    std::int64_t p = sc.integer();
    std::int64_t q = sc.integer();
    if (p < 0 || q < 0 || p >= nv || q >= nv) throw ParseError("edge endpoint out of range", at);
    CostMatrix m(static_cast<int>(unary[p].size()), static_cast<int>(unary[q].size()));
    for (int r = 0; r < m.rows(); ++r)
      for (int s = 0; s < m.cols(); ++s) m(r, s) = sc.real();
    edges.push_back({static_cast<int>(p), static_cast<int>(q)});
    tables.push_back(std::move(m));
  }
  if (!sc.at_end()) sc.fail("trailing content after last edge");
  try {
    return MarkovRandomField(std::move(unary), std::move(edges), std::move(tables));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), sc.offset());
  }
}

MarkovRandomField read_mrf_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path, 0);
  return read_mrf(in);
}

void write_mrf(std::ostream& out, const MarkovRandomField& mrf) {
  out << std::setprecision(17);
  out << "mrf " << mrf.vertex_count() << ' ' << mrf.edge_count() << '\n';
  for (int v = 0; v < mrf.vertex_count(); ++v) {
    out << "vertex " << v << ' ' << mrf.label_count(v);
    for (double c : mrf.unary(v)) out << ' ' << c;
    out << '\n';
  }
  for (int e = 0; e < mrf.edge_count(); ++e) {
    const CostMatrix& m = mrf.pairwise(e);
    out << "edge " << mrf.edge(e).p << ' ' << mrf.edge(e).q << '\n';
    for (int r = 0; r < m.rows(); ++r) {
      for (int s = 0; s < m.cols(); ++s) out << (s ? " " : "") << m(r, s);
      out << '\n';
    }
  }
}

}  // namespace qmrf
