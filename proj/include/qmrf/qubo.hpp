#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qmrf {

/// Binary assignment, one byte (0 or 1) per variable.
using Bits = std::vector<std::uint8_t>;

/// Coefficient of x_i x_j (i < j) or of x_i (i == j). Off-diagonal weights
/// are the symmetrised sum Q_ij + Q_ji, stored once.
struct QuboEntry {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

/// Which (vertex, label) a variable stands for. Auxiliary variables of the
/// binary scheme carry vertex = -1; in the binary scheme `label` is the
/// bit position within the vertex's group.
struct VarMeta {
  int vertex = -1;
  int label = -1;
};

enum class Scheme { Raw, OneHot, Binary };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

class QuboBuilder;

/// Sparse upper-triangular QUBO, immutable after build. Energies returned by
/// evaluate() exclude `offset`; the offset is what must be added to recover
/// the source problem's energy.
class QuboInstance {
 public:
  QuboInstance() = default;

  int n() const { return n_; }
  std::span<const QuboEntry> entries() const { return entries_; }
  std::span<const VarMeta> var_meta() const { return meta_; }
  double offset() const { return offset_; }
  Scheme scheme() const { return scheme_; }

  /// x^T Q x, summed in stored entry order.
  double evaluate(std::span<const std::uint8_t> x) const;

  std::size_t off_diagonal_count() const;

 private:
  friend class QuboBuilder;
  int n_ = 0;
  std::vector<QuboEntry> entries_;
  std::vector<VarMeta> meta_;
  double offset_ = 0.0;
  Scheme scheme_ = Scheme::Raw;
};

/// Accumulates coefficients for a QuboInstance. Exact zeros are dropped at
/// build() unless the coupler was registered as structural.
class QuboBuilder {
 public:
  explicit QuboBuilder(int n);

  /// Adds w to the coefficient of x_i x_j (order of i, j irrelevant).
  void add(int i, int j, double w);
  /// As add(), but the entry survives build() even if its total is zero.
  void add_structural(int i, int j, double w);
  void add_offset(double c) { offset_ += c; }
  void set_meta(std::vector<VarMeta> meta);
  void set_scheme(Scheme s) { scheme_ = s; }

  QuboInstance build() const;

 private:
  struct Slot {
    double weight = 0.0;
    bool structural = false;
  };
  int n_;
  std::map<std::pair<int, int>, Slot> slots_;
  std::vector<VarMeta> meta_;
  double offset_ = 0.0;
  Scheme scheme_ = Scheme::Raw;
};

// Sparse QUBO interchange text:
//   p qubo 0 <maxnode> <ndiag> <noffdiag>
//   <i> <i> <w>        diagonal lines
//   <i> <j> <w>        coupler lines, i < j
// Lines starting with 'c' are comments. maxnode is the variable count.
void write_qubo(std::ostream& out, const QuboInstance& q);
QuboInstance read_qubo(std::istream& in);

/// JSON sidecar carrying scheme, offset and var_meta.
std::string qubo_sidecar_json(const QuboInstance& q);

/// Writes <path> and <path>.json.
void save_qubo(const std::string& path, const QuboInstance& q);
/// Reads <path>; applies <path>.json when present.
QuboInstance load_qubo(const std::string& path);

/// Re-attaches metadata to a QUBO read from the bare text format.
QuboInstance with_metadata(const QuboInstance& q, Scheme scheme, std::vector<VarMeta> meta,
                           double offset);

}  // namespace qmrf
