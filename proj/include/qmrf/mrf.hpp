#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qmrf {

/// Dense |L_p| x |L_q| table of pairwise costs, row-major in the p label.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(static_cast<std::size_t>(rows) * cols, fill) {}
  CostMatrix(int rows, int cols, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double operator()(int r, int s) const { return values_[static_cast<std::size_t>(r) * cols_ + s]; }
  double& operator()(int r, int s) { return values_[static_cast<std::size_t>(r) * cols_ + s]; }
  std::span<const double> values() const { return values_; }

  CostMatrix transposed() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

/// Undirected edge, canonical p < q.
struct Edge {
  int p = 0;
  int q = 0;
};

/// One incident edge seen from a vertex.
struct Incidence {
  int edge = 0;       // index into edges()
  int neighbour = 0;  // the other endpoint
  bool is_first = false;  // true if this vertex is the edge's p (rows of the cost matrix)
};

/// Per-vertex label index into [0, label_count(v)).
using Labelling = std::vector<int>;

/// Pairwise Markov random field with dense per-edge cost tables. Immutable
/// once built; edges are canonicalised to p < q on construction (the cost
/// matrix is transposed when an edge is given as q, p).
class MarkovRandomField {
 public:
  MarkovRandomField() = default;
  MarkovRandomField(std::vector<std::vector<double>> unary, std::vector<Edge> edges,
                    std::vector<CostMatrix> pairwise);

  int vertex_count() const { return static_cast<int>(unary_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int label_count(int v) const { return static_cast<int>(unary_[v].size()); }
  std::span<const double> unary(int v) const { return unary_[v]; }
  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  const CostMatrix& pairwise(int e) const { return pairwise_[e]; }
  std::span<const Incidence> incident(int v) const { return incidence_[v]; }
  int degree(int v) const { return static_cast<int>(incidence_[v].size()); }

  /// Pairwise cost of (label r at v, label s at the neighbour) across an incidence.
  double pairwise_from(const Incidence& inc, int r, int s) const {
    const CostMatrix& m = pairwise_[inc.edge];
    return inc.is_first ? m(r, s) : m(s, r);
  }

  /// Largest absolute unary or pairwise cost; 0 for an empty field.
  double max_abs_potential() const;

  /// Throws InvalidArgument unless lab has one in-range label per vertex.
  void check_labelling(const Labelling& lab) const;

 private:
  std::vector<std::vector<double>> unary_;
  std::vector<Edge> edges_;
  std::vector<CostMatrix> pairwise_;
  std::vector<std::vector<Incidence>> incidence_;
};

/// Unaries in vertex order, then pairwise terms in edge-list order.
double energy(const MarkovRandomField& mrf, const Labelling& lab);

struct MapResult {
  Labelling labels;
  double energy = 0.0;
};

inline constexpr double kBruteForceStateLimit = 1e7;

/// Exhaustive MAP; ties go to the lexicographically smallest labelling.
/// Throws CapacityError when the product of label counts exceeds 1e7.
MapResult brute_force_map(const MarkovRandomField& mrf);

struct CostRange {
  double lo = -1.0;
  double hi = 1.0;
};

/// Seeded random field: every pair (p, q), p < q, becomes an edge with
/// probability edge_prob; costs uniform in the range.
MarkovRandomField random_mrf(std::uint64_t seed, int vertices, int labels, double edge_prob,
                             CostRange costs);

/// As above but with per-vertex label counts drawn uniformly from
/// [min_labels, max_labels].
MarkovRandomField random_mrf(std::uint64_t seed, int vertices, int min_labels, int max_labels,
                             double edge_prob, CostRange costs);

// Text format:
//   mrf <V> <E>
//   vertex <id> <k> <phi_0> ... <phi_{k-1}>      (V lines)
//   edge <p> <q>  followed by |L_p| rows of |L_q| costs   (E blocks)
// Whitespace separated, '#' starts a comment that runs to end of line.
MarkovRandomField read_mrf(std::istream& in);
MarkovRandomField read_mrf_file(const std::string& path);
void write_mrf(std::ostream& out, const MarkovRandomField& mrf);

}  // namespace qmrf
