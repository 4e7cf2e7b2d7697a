#include "qmrf/pbo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "qmrf/errors.hpp"

namespace qmrf {

PseudoBooleanPolynomial::PseudoBooleanPolynomial(int n, int original_n)
    : n_(n), original_n_(original_n < 0 ? n : original_n), meta_(n) {
  if (n < 0 || original_n_ > n) throw InvalidArgument("bad polynomial variable counts");
}

void PseudoBooleanPolynomial::add_term(Monomial vars, double coeff) {
  std::sort(vars.begin(), vars.end());
  if (std::adjacent_find(vars.begin(), vars.end()) != vars.end())
    throw InvalidArgument("repeated variable in a multilinear term");
  if (!vars.empty() && (vars.front() < 0 || vars.back() >= n_))
    throw InvalidArgument("term variable out of range");
  terms_[std::move(vars)] += coeff;
}

int PseudoBooleanPolynomial::add_auxiliary() {
  meta_.push_back(VarMeta{});
  return n_++;
}

double PseudoBooleanPolynomial::evaluate(std::span<const std::uint8_t> x) const {
  if (static_cast<int>(x.size()) != n_) throw InvalidArgument("assignment length does not match polynomial");
  double total = 0.0;
  for (const auto& [vars, c] : terms_) {
    bool on = true;
    for (int v : vars) on = on && x[v];
    if (on) total += c;
  }
  return total;
}

int PseudoBooleanPolynomial::max_degree() const {
  int d = 0;
  for (const auto& [vars, c] : terms_) d = std::max(d, static_cast<int>(vars.size()));
  return d;
}

double PseudoBooleanPolynomial::coefficient(const Monomial& vars) const {
  auto it = terms_.find(vars);
  return it == terms_.end() ? 0.0 : it->second;
}

void PseudoBooleanPolynomial::prune(double tol) {
  std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) < tol; });
}

BinaryLayout binary_layout(const MarkovRandomField& mrf) {
  BinaryLayout l;
  l.first.resize(mrf.vertex_count());
  l.bits.resize(mrf.vertex_count());
  for (int v = 0; v < mrf.vertex_count(); ++v) {
    const auto k = static_cast<unsigned>(mrf.label_count(v));
    l.bits[v] = k <= 1 ? 0 : std::bit_width(k - 1);
    l.first[v] = l.total;
    l.total += l.bits[v];
  }
  return l;
}

namespace {

// Inclusion-exclusion over sub-masks: a[m] = sum_{m' subset m} (-1)^{|m|-|m'|} f[m'].
std::vector<double> mobius(const std::vector<double>& f) {
  std::vector<double> a(f.size(), 0.0);
  for (unsigned m = 0; m < f.size(); ++m) {
    const int km = std::popcount(m);
    unsigned sub = m;
    while (true) {
      const double sign = ((km - std::popcount(sub)) & 1) ? -1.0 : 1.0;
      a[m] += sign * f[sub];
      if (sub == 0) break;
      sub = (sub - 1) & m;
    }
  }
  return a;
}

// Variables of a vertex's bit group selected by the set bits of a code mask.
void append_code_vars(PseudoBooleanPolynomial::Monomial& out, unsigned code, int first, int bits) {
  for (int i = 0; i < bits; ++i)
    if ((code >> (bits - 1 - i)) & 1u) out.push_back(first + i);
}

}  // namespace

PseudoBooleanPolynomial encode_binary(const MarkovRandomField& mrf) {
  const BinaryLayout layout = binary_layout(mrf);
  PseudoBooleanPolynomial poly(layout.total);
  for (int v = 0; v < mrf.vertex_count(); ++v)
    for (int i = 0; i < layout.bits[v]; ++i) poly.set_meta(layout.first[v] + i, {v, i});

  for (int v = 0; v < mrf.vertex_count(); ++v) {
    if (mrf.degree(v) != 0) continue;
    const int b = layout.bits[v];
    std::vector<double> f(std::size_t{1} << b);
    for (unsigned c = 0; c < f.size(); ++c) f[c] = mrf.unary(v)[label_of_code(static_cast<int>(c), mrf.label_count(v))];
    const std::vector<double> a = mobius(f);
    for (unsigned m = 0; m < a.size(); ++m) {
      if (a[m] == 0.0) continue;
      PseudoBooleanPolynomial::Monomial vars;
      append_code_vars(vars, m, layout.first[v], b);
      poly.add_term(std::move(vars), a[m]);
    }
  }

  for (int e = 0; e < mrf.edge_count(); ++e) {
    const Edge& ed = mrf.edge(e);
    const int bp = layout.bits[ed.p];
    const int bq = layout.bits[ed.q];
    const int kp = mrf.label_count(ed.p);
    const int kq = mrf.label_count(ed.q);
    const double dp = mrf.degree(ed.p);
    const double dq = mrf.degree(ed.q);
    std::vector<double> f(std::size_t{1} << (bp + bq));
    for (unsigned cp = 0; cp < (1u << bp); ++cp) {
      const int lp = label_of_code(static_cast<int>(cp), kp);
      for (unsigned cq = 0; cq < (1u << bq); ++cq) {
        const int lq = label_of_code(static_cast<int>(cq), kq);
        f[(cp << bq) | cq] =
            mrf.unary(ed.p)[lp] / dp + mrf.pairwise(e)(lp, lq) + mrf.unary(ed.q)[lq] / dq;
      }
    }
    const std::vector<double> a = mobius(f);
    for (unsigned m = 0; m < a.size(); ++m) {
      if (a[m] == 0.0) continue;
      PseudoBooleanPolynomial::Monomial vars;
      append_code_vars(vars, m >> bq, layout.first[ed.p], bp);
      append_code_vars(vars, m & ((1u << bq) - 1u), layout.first[ed.q], bq);
      poly.add_term(std::move(vars), a[m]);
    }
  }
  poly.prune();
  return poly;
}

PseudoBooleanPolynomial quadratize(const PseudoBooleanPolynomial& poly) {
  PseudoBooleanPolynomial out(poly.n(), poly.original_n());
  for (int v = 0; v < poly.n(); ++v) out.set_meta(v, poly.meta()[v]);

  for (const auto& [vars, a] : poly.terms()) {
    const int d = static_cast<int>(vars.size());
    if (d <= 2 || a == 0.0) {
      out.add_term(vars, a);
      continue;
    }
    if (a < 0.0) {
      // a x_1..x_d = min_w a w (S1 - (d - 1))
      const int w = out.add_auxiliary();
      for (int x : vars) out.add_term({x, w}, a);
      out.add_term({w}, -a * (d - 1));
      continue;
    }
    // a x_1..x_d = a min_{w} [ sum_i w_i (c_i (-S1 + 2i) - 1) + S2 ],
    // i = 1..floor((d-1)/2), c_i = 1 when d is odd and i is the last index, else 2.
    const int nw = (d - 1) / 2;
    for (int i = 1; i <= nw; ++i) {
      const double c = (d % 2 == 1 && i == nw) ? 1.0 : 2.0;
      const int w = out.add_auxiliary();
      for (int x : vars) out.add_term({x, w}, -a * c);
      out.add_term({w}, a * (2.0 * i * c - 1.0));
    }
    for (int j = 0; j < d; ++j)
      for (int k = j + 1; k < d; ++k) out.add_term({vars[j], vars[k]}, a);
  }
  out.prune();
  return out;
}

QuboInstance pbo_to_qubo(const PseudoBooleanPolynomial& poly) {
  if (poly.max_degree() > 2) throw InvalidArgument("pbo_to_qubo needs a polynomial of degree <= 2");
  QuboBuilder b(poly.n());
  for (const auto& [vars, c] : poly.terms()) {
    switch (vars.size()) {
      case 0: b.add_offset(c); break;
      case 1: b.add(vars[0], vars[0], c); break;
      default: b.add(vars[0], vars[1], c); break;
    }
  }
  b.set_meta(std::vector<VarMeta>(poly.meta().begin(), poly.meta().end()));
  b.set_scheme(Scheme::Binary);
  return b.build();
}

Labelling decode_binary(const MarkovRandomField& mrf, std::span<const std::uint8_t> x) {
  const BinaryLayout layout = binary_layout(mrf);
  if (static_cast<int>(x.size()) < layout.total)
    throw InvalidArgument("bitstring shorter than the " + std::to_string(layout.total) + " label bits");
  Labelling lab(mrf.vertex_count());
  for (int v = 0; v < mrf.vertex_count(); ++v) {
    int code = 0;
    for (int i = 0; i < layout.bits[v]; ++i) code = (code << 1) | (x[layout.first[v] + i] ? 1 : 0);
    lab[v] = label_of_code(code, mrf.label_count(v));
  }
  return lab;
}

void dump_polynomial(std::ostream& out, const PseudoBooleanPolynomial& poly) {
  out << std::setprecision(17);
  for (const auto& [vars, c] : poly.terms()) {
    out << c << " :";
    for (std::size_t k = 0; k < vars.size(); ++k) out << (k ? "," : " ") << vars[k];
    out << '\n';
  }
}

}  // namespace qmrf
