#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "qmrf/mrf.hpp"
#include "qmrf/qubo.hpp"

namespace qmrf {

/// Multilinear polynomial over binary variables. Terms are keyed by sorted,
/// duplicate-free index sets; the empty set is the constant.
class PseudoBooleanPolynomial {
 public:
  using Monomial = std::vector<int>;

  PseudoBooleanPolynomial() = default;
  explicit PseudoBooleanPolynomial(int n, int original_n = -1);

  int n() const { return n_; }
  int original_n() const { return original_n_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  std::span<const VarMeta> meta() const { return meta_; }

  /// Adds coeff to the term over `vars`; indices are sorted, repeats rejected.
  void add_term(Monomial vars, double coeff);
  /// Appends a fresh auxiliary variable and returns its index.
  int add_auxiliary();
  void set_meta(int var, VarMeta m) { meta_.at(var) = m; }

  double evaluate(std::span<const std::uint8_t> x) const;
  int max_degree() const;
  double coefficient(const Monomial& vars) const;

  /// Drops terms whose |coefficient| < tol.
  void prune(double tol = 1e-12);

 private:
  int n_ = 0;
  int original_n_ = 0;
  std::map<Monomial, double> terms_;
  std::vector<VarMeta> meta_;
};

/// Bit groups of the binary label encoding: vertex v owns variables
/// [first[v], first[v] + bits[v]), most significant bit first.
struct BinaryLayout {
  std::vector<int> first;
  std::vector<int> bits;
  int total = 0;
};

BinaryLayout binary_layout(const MarkovRandomField& mrf);

/// Label of a code word; codes past the last label duplicate it.
inline int label_of_code(int code, int label_count) { return code < label_count ? code : label_count - 1; }

/// Log-size label encoding. Per edge, f = phi_p/deg(p) + phi_pq + phi_q/deg(q)
/// is expanded by inclusion-exclusion over code-word subsets; isolated
/// vertices contribute their unary on their own.
PseudoBooleanPolynomial encode_binary(const MarkovRandomField& mrf);

/// Ishikawa reduction of every term of degree >= 3. Auxiliaries are appended
/// after the existing variables; min over them reproduces the input.
PseudoBooleanPolynomial quadratize(const PseudoBooleanPolynomial& poly);

/// Degree <= 2 polynomial to QUBO; the constant goes to the offset.
QuboInstance pbo_to_qubo(const PseudoBooleanPolynomial& poly);

/// Reads each vertex's bit group as an unsigned number; extra bits ignored.
Labelling decode_binary(const MarkovRandomField& mrf, std::span<const std::uint8_t> x);

/// One `coefficient : i,j,k` line per term.
void dump_polynomial(std::ostream& out, const PseudoBooleanPolynomial& poly);

}  // namespace qmrf
