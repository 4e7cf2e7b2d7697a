#include "qmrf/qubo.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "qmrf/errors.hpp"
#include "text_scanner.hpp"

namespace qmrf {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::OneHot: return "onehot";
    case Scheme::Binary: return "binary";
    case Scheme::Raw: break;
  }
  return "raw";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "onehot") return Scheme::OneHot;
  if (s == "binary") return Scheme::Binary;
  if (s == "raw") return Scheme::Raw;
  throw InvalidArgument("unknown encoding scheme '" + s + "'");
}

double QuboInstance::evaluate(std::span<const std::uint8_t> x) const {
  if (static_cast<int>(x.size()) != n_)
    throw InvalidArgument("bitstring length " + std::to_string(x.size()) + " does not match n = " +
                          std::to_string(n_));
  double total = 0.0;
  for (const QuboEntry& e : entries_)
    if (x[e.i] && x[e.j]) total += e.weight;
  return total;
}

std::size_t QuboInstance::off_diagonal_count() const {
  std::size_t c = 0;
  for (const QuboEntry& e : entries_) c += e.i != e.j;
  return c;
}

QuboBuilder::QuboBuilder(int n) : n_(n) {
  if (n < 0) throw InvalidArgument("negative QUBO size");
}

void QuboBuilder::add(int i, int j, double w) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw InvalidArgument("QUBO index out of range");
  if (i > j) std::swap(i, j);
  slots_[{i, j}].weight += w;
}

void QuboBuilder::add_structural(int i, int j, double w) {
  add(i, j, w);
  if (i > j) std::swap(i, j);
  slots_[{i, j}].structural = true;
}

void QuboBuilder::set_meta(std::vector<VarMeta> meta) {
  if (static_cast<int>(meta.size()) != n_) throw InvalidArgument("var_meta must cover every variable");
  meta_ = std::move(meta);
}

QuboInstance QuboBuilder::build() const {
  QuboInstance q;
  q.n_ = n_;
  q.offset_ = offset_;
  q.scheme_ = scheme_;
  q.meta_ = meta_.empty() ? std::vector<VarMeta>(n_) : meta_;
  q.entries_.reserve(slots_.size());
  for (const auto& [key, slot] : slots_)
    if (slot.weight != 0.0 || slot.structural) q.entries_.push_back({key.first, key.second, slot.weight});
  return q;
}

QuboInstance with_metadata(const QuboInstance& q, Scheme scheme, std::vector<VarMeta> meta, double offset) {
  QuboBuilder b(q.n());
  for (const QuboEntry& e : q.entries()) b.add_structural(e.i, e.j, e.weight);
  b.set_meta(std::move(meta));
  b.set_scheme(scheme);
  b.add_offset(offset);
  return b.build();
}

void write_qubo(std::ostream& out, const QuboInstance& q) {
  std::size_t ndiag = 0;
  for (const QuboEntry& e : q.entries()) ndiag += e.i == e.j;
  const std::size_t noff = q.entries().size() - ndiag;
  out << std::setprecision(17);
  out << "p qubo 0 " << q.n() << ' ' << ndiag << ' ' << noff << '\n';
  for (const QuboEntry& e : q.entries())
    if (e.i == e.j) out << e.i << ' ' << e.j << ' ' << e.weight << '\n';
  for (const QuboEntry& e : q.entries())
    if (e.i != e.j) out << e.i << ' ' << e.j << ' ' << e.weight << '\n';
}

QuboInstance read_qubo(std::istream& in) {
  // 'c' comment lines: strip them up front so the scanner only sees data.
  std::string text;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t k = line.find_first_not_of(" \t\r");
    if (k != std::string::npos && line[k] == 'c') {
      text.append(line.size(), ' ');
    } else {
      text += line;
    }
    text += '\n';
  }
  detail::TextScanner sc(std::move(text));
  sc.expect("p");
  sc.expect("qubo");
  sc.integer();  // topology id, always 0
  const std::int64_t n = sc.integer();
  const std::int64_t ndiag = sc.integer();
  const std::int64_t noff = sc.integer();
  if (n < 0 || ndiag < 0 || noff < 0) sc.fail("negative count in header");

  QuboBuilder b(static_cast<int>(n));
  for (std::int64_t k = 0; k < ndiag + noff; ++k) {
    std::size_t at = sc.peek_offset();
    std::int64_t i = sc.integer();
    std::int64_t j = sc.integer();
    double w = sc.real();
    if (i < 0 || j < 0 || i >= n || j >= n) throw ParseError("QUBO index out of range", at);
    if ((k < ndiag) != (i == j)) throw ParseError("diagonal/coupler line count mismatch", at);
    b.add_structural(static_cast<int>(i), static_cast<int>(j), w);
  }
  if (!sc.at_end()) sc.fail("trailing content after last QUBO entry");
  return b.build();
}

std::string qubo_sidecar_json(const QuboInstance& q) {
  nlohmann::json j;
  j["scheme"] = to_string(q.scheme());
  j["n"] = q.n();
  j["offset"] = q.offset();
  nlohmann::json meta = nlohmann::json::array();
  for (const VarMeta& m : q.var_meta()) meta.push_back({m.vertex, m.label});
  j["var_meta"] = std::move(meta);
  return j.dump();
}

void save_qubo(const std::string& path, const QuboInstance& q) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  write_qubo(out, q);
  std::ofstream side(path + ".json", std::ios::binary);
  if (!side) throw InvalidArgument("cannot write " + path + ".json");
  side << qubo_sidecar_json(q) << '\n';
}

QuboInstance load_qubo(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path, 0);
  QuboInstance q = read_qubo(in);
  std::ifstream side(path + ".json", std::ios::binary);
  if (!side) return q;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(side);
    std::vector<VarMeta> meta;
    for (const auto& m : j.at("var_meta")) meta.push_back({m.at(0).get<int>(), m.at(1).get<int>()});
    if (j.at("n").get<int>() != q.n()) throw ParseError("sidecar n does not match QUBO header", 0);
    return with_metadata(q, scheme_from_string(j.at("scheme").get<std::string>()), std::move(meta),
                         j.at("offset").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad QUBO sidecar: ") + e.what(), 0);
  }
}

}  // namespace qmrf
