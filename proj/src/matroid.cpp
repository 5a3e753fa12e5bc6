#include "mbw/matroid.hpp"

#include <algorithm>
#include <istream>
#include <iterator>
#include <map>
#include <sstream>

#include "mbw/errors.hpp"

namespace mbw {

std::string to_string(ElementSet s) {
  std::string out = "{";
  bool first = true;
  for (int e : s.elements()) {
    if (!first) out += ",";
    out += std::to_string(e + 1);
    first = false;
  }
  return out + "}";
}

ElementSet parse_element_list(const std::string& text, int n) {
  ElementSet s;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(token, &used);
      if (used != token.size()) throw InputError("");
    } catch (const std::exception&) {
      throw InputError("bad element id '" + token + "'");
    }
    if (id < 1 || id > n) throw InputError("element " + token + " out of range [1," + std::to_string(n) + "]");
    s.insert(id - 1);
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == '{' || c == '}') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  return s;
}

// ---------------------------------------------------------------- vector

VectorMatroid::VectorMatroid(GfMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.cols() > static_cast<std::size_t>(ElementSet::kMaxElements))
    throw LimitError("vector matroid limited to 64 elements");
  for (std::size_t c = 0; c < matrix_.cols(); ++c)
    if (matrix_.column_is_zero(c)) throw InputError("column " + std::to_string(c + 1) + " is zero (a loop)");
}

int VectorMatroid::rank_of(ElementSet s) const {
  std::vector<std::size_t> cols;
  for (int e : s.elements()) cols.push_back(static_cast<std::size_t>(e));
  return static_cast<int>(rank(matrix_.select_columns(cols)));
}

// -------------------------------------------------------------- explicit

ExplicitMatroid::ExplicitMatroid(int n, std::vector<ElementSet> dependents) : n_(n), generators_(std::move(dependents)) {
  if (n < 0 || n > kMaxElements) throw LimitError("explicit matroids are limited to 20 elements");
  dependent_.assign(std::size_t{1} << n, false);
  const ElementSet ground = ElementSet::full(n);
  for (ElementSet d : generators_) {
    if (!d.subset_of(ground)) throw InputError("dependent set " + to_string(d) + " is outside the ground set");
    dependent_[d.bits()] = true;
  }
  close_upwards();
}

ExplicitMatroid ExplicitMatroid::from_table(int n, std::vector<bool> table) {
  if (n < 0 || n > kMaxElements) throw LimitError("explicit matroids are limited to 20 elements");
  if (table.size() != (std::size_t{1} << n)) throw InputError("dependent table has the wrong size");
  ExplicitMatroid m;
  m.n_ = n;
  m.dependent_ = std::move(table);
  m.close_upwards();
  m.generators_ = m.minimal_dependents();
  return m;
}

void ExplicitMatroid::close_upwards() {
  const std::size_t total = dependent_.size();
  for (int i = 0; i < n_; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t mask = 0; mask < total; ++mask)
      if (!(mask & bit) && dependent_[mask]) dependent_[mask | bit] = true;
  }
}

std::vector<ElementSet> ExplicitMatroid::minimal_dependents() const {
  std::vector<ElementSet> out;
  for (std::size_t mask = 0; mask < dependent_.size(); ++mask) {
    if (!dependent_[mask]) continue;
    bool minimal = true;
    for (std::size_t b = mask; b != 0 && minimal; b &= b - 1) {
      const std::size_t low = b & (~b + 1);
      if (dependent_[mask & ~low]) minimal = false;
    }
    if (minimal) out.emplace_back(mask);
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

int ExplicitMatroid::rank_of(ElementSet s) const {
  ElementSet basis;
  for (int e : s.elements()) {
    ElementSet grown = basis;
    grown.insert(e);
    if (!is_dependent(grown)) basis = grown;
  }
  return basis.size();
}

// ---------------------------------------------------------------- oracle

int Matroid::size() const {
  return std::visit([](const auto& m) { return m.size(); }, impl_);
}

namespace {
void check_in_ground(const Matroid& m, ElementSet s) {
  if (!s.subset_of(m.ground()))
    throw InputError("set " + to_string(s) + " is not contained in the ground set of size " + std::to_string(m.size()));
}
}  // namespace

bool is_independent(const Matroid& m, ElementSet s) {
  check_in_ground(m, s);
  if (const auto* v = std::get_if<VectorMatroid>(&m.impl_)) return v->rank_of(s) == s.size();
  return !std::get<ExplicitMatroid>(m.impl_).is_dependent(s);
}

int rank_of(const Matroid& m, ElementSet s) {
  check_in_ground(m, s);
  return std::visit([s](const auto& x) { return x.rank_of(s); }, m.impl_);
}

int connectivity(const Matroid& m, ElementSet b) {
  const ElementSet ground = m.ground();
  return rank_of(m, b) + rank_of(m, ground - b) - rank_of(m, ground);
}

int connectivity_by_subspaces(const VectorMatroid& m, ElementSet b) {
  const ElementSet rest = ElementSet::full(m.size()) - b;
  std::vector<GfVector> inside, outside;
  for (int e : b.elements()) inside.push_back(m.vector(e));
  for (int e : rest.elements()) outside.push_back(m.vector(e));
  const std::size_t dim = m.matrix().rows();
  return static_cast<int>(
      intersect(Subspace::span(m.field(), dim, inside), Subspace::span(m.field(), dim, outside)).dim());
}

std::vector<bool> independence_table(const Matroid& m) {
  const int n = m.size();
  if (n > ExplicitMatroid::kMaxElements) throw LimitError("independence table limited to 20 elements");
  std::vector<bool> indep(std::size_t{1} << n, false);
  indep[0] = true;
  if (const auto* e = m.as_explicit()) {
    for (std::size_t mask = 0; mask < indep.size(); ++mask) indep[mask] = !e->is_dependent(ElementSet(mask));
    return indep;
  }
  const auto& v = *m.as_vector();
  for (std::size_t mask = 1; mask < indep.size(); ++mask) {
    const std::size_t low = mask & (~mask + 1);
    // subsets of dependent sets' supersets are dependent; only test when the
    // set minus its lowest element is independent
    if (!indep[mask & ~low]) continue;
    ElementSet s(mask);
    indep[mask] = v.rank_of(s) == s.size();
  }
  return indep;
}

std::vector<ElementSet> circuits(const Matroid& m, int bound) {
  if (m.size() > bound)
    throw LimitError("circuit enumeration bound " + std::to_string(bound) + " exceeded (" + std::to_string(m.size()) +
                     " elements)");
  const auto indep = independence_table(m);
  std::vector<ElementSet> out;
  for (std::size_t mask = 1; mask < indep.size(); ++mask) {
    if (indep[mask]) continue;
    bool minimal = true;
    for (std::size_t b = mask; b != 0 && minimal; b &= b - 1) {
      const std::size_t low = b & (~b + 1);
      if (!indep[mask & ~low]) minimal = false;
    }
    if (minimal) out.emplace_back(mask);
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

VectorMatroid graphic_matroid(const std::vector<std::pair<int, int>>& edges) {
  std::map<int, std::size_t> row_of;
  for (auto [u, v] : edges) {
    if (u == v) throw InputError("self-loop at vertex " + std::to_string(u) + " (a matroid loop)");
    row_of.emplace(u, 0);
    row_of.emplace(v, 0);
  }
  std::size_t next = 0;
  for (auto& [vertex, row] : row_of) row = next++;
  GfMatrix m(Field(2), row_of.size(), edges.size());
  for (std::size_t j = 0; j < edges.size(); ++j) {
    m(row_of[edges[j].first], j) = 1;
    m(row_of[edges[j].second], j) = 1;
  }
  return VectorMatroid(std::move(m));
}

AxiomReport validate_independents(int n, const std::vector<ElementSet>& independents, int bound) {
  if (n > bound) throw LimitError("axiom validation bound " + std::to_string(bound) + " exceeded");
  std::vector<bool> in(std::size_t{1} << n, false);
  for (ElementSet s : independents) {
    if (!s.subset_of(ElementSet::full(n))) throw InputError("set " + to_string(s) + " outside ground set");
    in[s.bits()] = true;
  }
  AxiomReport report;
  report.empty_set_missing = !in[0];
  std::vector<std::size_t> members;
  for (std::size_t mask = 0; mask < in.size(); ++mask)
    if (in[mask]) members.push_back(mask);
  for (std::size_t mask : members) {
    if (report.hereditary) break;
    for (int e : ElementSet(mask).elements()) {
      ElementSet smaller(mask);
      smaller.erase(e);
      if (!in[smaller.bits()]) {
        report.hereditary = std::make_pair(ElementSet(mask), smaller);
        break;
      }
    }
  }
  for (std::size_t a : members) {
    if (report.exchange) break;
    for (std::size_t b : members) {
      const ElementSet i1(a), i2(b);
      if (i1.size() >= i2.size()) continue;
      bool augmentable = false;
      for (int e : (i2 - i1).elements())
        if (in[a | (std::size_t{1} << e)]) {
          augmentable = true;
          break;
        }
      if (!augmentable) {
        report.exchange = std::make_pair(i1, i2);
        break;
      }
    }
  }
  return report;
}

AxiomReport validate_axioms(const ExplicitMatroid& m, int bound) {
  if (m.size() > bound) throw LimitError("axiom validation bound " + std::to_string(bound) + " exceeded");
  std::vector<ElementSet> independents;
  for (std::size_t mask = 0; mask < m.table().size(); ++mask)
    if (!m.table()[mask]) independents.emplace_back(mask);
  return validate_independents(m.size(), independents, bound);
}

Matroid restriction(const Matroid& m, ElementSet s) {
  check_in_ground(m, s);
  const auto keep = s.elements();
  if (const auto* v = m.as_vector()) {
    std::vector<std::size_t> cols(keep.begin(), keep.end());
    return VectorMatroid(v->matrix().select_columns(cols));
  }
  const auto& e = *m.as_explicit();
  const int k = static_cast<int>(keep.size());
  std::vector<bool> table(std::size_t{1} << k, false);
  for (std::size_t mask = 0; mask < table.size(); ++mask) {
    ElementSet original;
    for (int i = 0; i < k; ++i)
      if (mask & (std::size_t{1} << i)) original.insert(keep[static_cast<std::size_t>(i)]);
    table[mask] = e.is_dependent(original);
  }
  return ExplicitMatroid::from_table(k, std::move(table));
}

ExplicitMatroid to_explicit(const Matroid& m) {
  if (const auto* e = m.as_explicit()) return *e;
  auto indep = independence_table(m);
  std::vector<bool> dep(indep.size());
  for (std::size_t i = 0; i < indep.size(); ++i) dep[i] = !indep[i];
  return ExplicitMatroid::from_table(m.size(), std::move(dep));
}

// -------------------------------------------------------------------- io

std::vector<std::pair<int, int>> read_graph(std::istream& in) {
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    int u = 0, v = 0;
    if (kw != "edge" || !(ls >> u >> v))
      throw InputError("graph line " + std::to_string(line_no) + ": expected 'edge <u> <v>'");
    edges.emplace_back(u, v);
  }
  return edges;
}

ExplicitMatroid read_explicit(std::istream& in) {
  std::string line;
  int line_no = 0, n = -1;
  std::vector<ElementSet> deps;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (n < 0) {
      std::istringstream ls(line);
      std::string kw;
      if (!(ls >> kw >> n) || kw != "ground" || n < 0)
        throw InputError("explicit matroid line " + std::to_string(line_no) + ": expected 'ground <n>'");
      if (n > ExplicitMatroid::kMaxElements) throw LimitError("explicit matroids are limited to 20 elements");
      continue;
    }
    try {
      deps.push_back(parse_element_list(line, n));
    } catch (const InputError& err) {
      throw InputError("explicit matroid line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  if (n < 0) throw InputError("explicit matroid: missing 'ground <n>'");
  return ExplicitMatroid(n, std::move(deps));
}

std::string format_explicit(const ExplicitMatroid& m) {
  std::string out = "ground " + std::to_string(m.size()) + "\n";
  for (ElementSet d : m.generators()) {
    bool first = true;
    for (int e : d.elements()) {
      out += (first ? "" : " ") + std::to_string(e + 1);
      first = false;
    }
    out += "\n";
  }
  return out;
}

std::string format_graph(const std::vector<std::pair<int, int>>& edges) {
  std::string out;
  for (auto [u, v] : edges) out += "edge " + std::to_string(u) + " " + std::to_string(v) + "\n";
  return out;
}

Matroid parse_matroid(const std::string& text) {
  std::istringstream probe(text);
  std::string first;
  probe >> first;
  std::istringstream in(text);
  if (first == "field") return VectorMatroid(read_matrix(in));
  if (first == "edge") return graphic_matroid(read_graph(in));
  if (first == "ground") return read_explicit(in);
  throw InputError("unrecognized matroid format (expected 'field', 'edge' or 'ground'), got '" + first + "'");
}

Matroid read_matroid(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_matroid(text);
}

}  // namespace mbw
