#include "mbw/grammar.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "mbw/errors.hpp"
#include "mbw/pipeline.hpp"
#include "mbw/text_cursor.hpp"

namespace mbw {

namespace {

void check_indices(int n, const std::vector<int>& idx, const char* what) {
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int i : idx) {
    if (i < 0 || i >= n) throw InputError(std::string(what) + " index " + std::to_string(i + 1) + " out of range");
    if (seen[static_cast<std::size_t>(i)]) throw InputError(std::string(what) + " index " + std::to_string(i + 1) + " repeated");
    seen[static_cast<std::size_t>(i)] = true;
  }
}

std::vector<int> others(int n, const std::vector<int>& idx) {
  std::vector<bool> in(static_cast<std::size_t>(n), false);
  for (int i : idx)
    if (i >= 0 && i < n) in[static_cast<std::size_t>(i)] = true;
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (!in[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

std::vector<int> range(int from, int count) {
  std::vector<int> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = from + i;
  return out;
}

ElementSet set_of(const std::vector<int>& idx) {
  ElementSet s;
  for (int i : idx) s.insert(i);
  return s;
}

ElementSet image(ElementSet s, const std::vector<int>& map) {
  ElementSet out;
  for (int e : s.elements()) out.insert(map[static_cast<std::size_t>(e)]);
  return out;
}

void up_close(int n, std::vector<bool>& table) {
  for (int i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t mask = 0; mask < table.size(); ++mask)
      if (!(mask & bit) && table[mask]) table[mask | bit] = true;
  }
}

std::vector<std::uint64_t> minimal_sets(const std::vector<bool>& table) {
  std::vector<std::uint64_t> out;
  for (std::size_t mask = 0; mask < table.size(); ++mask) {
    if (!table[mask]) continue;
    bool minimal = true;
    for (std::size_t b = mask; b != 0 && minimal; b &= b - 1)
      if (table[mask & ~(b & (~b + 1))]) minimal = false;
    if (minimal) out.push_back(mask);
  }
  return out;
}

// The up-closure of the seeds, then `steps` rounds of (A1): every pair of
// distinct minimal members sharing an element e of `eliminable` adds their
// union minus e. Stops early once a round adds nothing.
std::vector<bool> staged_closure(int n, const std::vector<ElementSet>& seeds, ElementSet eliminable, int steps) {
  std::vector<bool> table(std::size_t{1} << n, false);
  for (ElementSet s : seeds) table[s.bits()] = true;
  up_close(n, table);
  for (int step = 0; step < steps; ++step) {
    const auto mins = minimal_sets(table);
    std::vector<std::uint64_t> fresh;
    for (std::size_t i = 0; i < mins.size(); ++i)
      for (std::size_t j = i + 1; j < mins.size(); ++j) {
        const std::uint64_t common = mins[i] & mins[j] & eliminable.bits();
        const std::uint64_t both = mins[i] | mins[j];
        for (std::uint64_t c = common; c != 0; c &= c - 1) {
          const std::uint64_t d = both & ~(c & (~c + 1));
          if (!table[d]) fresh.push_back(d);
        }
      }
    if (fresh.empty()) break;
    for (std::uint64_t d : fresh) table[d] = true;
    up_close(n, table);
  }
  return table;
}

std::vector<bool> prefix_table(const ExplicitMatroid& m, int k) {
  const auto& t = m.table();
  return {t.begin(), t.begin() + static_cast<std::ptrdiff_t>(std::size_t{1} << k)};
}

}  // namespace

// ------------------------------------------------------- boundaried matrices

std::vector<int> BoundariedMatrix::internal() const { return others(static_cast<int>(matrix.cols()), boundary); }

GfMatrix BoundariedMatrix::internal_matrix() const {
  const auto in = internal();
  std::vector<std::size_t> cols(in.begin(), in.end());
  return matrix.select_columns(cols);
}

void check_boundaried(const BoundariedMatrix& a) {
  check_indices(static_cast<int>(a.matrix.cols()), a.boundary, "boundary");
  std::vector<std::size_t> cols(a.boundary.begin(), a.boundary.end());
  if (rank(a.matrix.select_columns(cols)) != cols.size()) throw InputError("boundary columns are dependent");
}

ExplicitMatroid column_matroid(const GfMatrix& m) {
  const int n = static_cast<int>(m.cols());
  if (n > ExplicitMatroid::kMaxElements) throw LimitError("column matroids are limited to 20 columns");
  std::vector<bool> dep(std::size_t{1} << n, false);
  for (std::size_t mask = 1; mask < dep.size(); ++mask) {
    bool below = false;
    for (std::size_t b = mask; b != 0 && !below; b &= b - 1) below = dep[mask & ~(b & (~b + 1))];
    if (below) {
      dep[mask] = true;
      continue;
    }
    std::vector<std::size_t> cols;
    for (std::size_t b = mask; b != 0; b &= b - 1) cols.push_back(static_cast<std::size_t>(std::countr_zero(b)));
    dep[mask] = rank(m.select_columns(cols)) < cols.size();
  }
  return ExplicitMatroid::from_table(n, std::move(dep));
}

GfMatrix oplus_bar(const BoundariedMatrix& a1, const BoundariedMatrix& a2) {
  if (!(a1.matrix.field() == a2.matrix.field())) throw InputError("boundaried matrices over different fields");
  if (a1.t() != a2.t())
    throw InputError("boundary sizes differ (" + std::to_string(a1.t()) + " and " + std::to_string(a2.t()) + ")");
  check_indices(static_cast<int>(a1.matrix.cols()), a1.boundary, "boundary");
  check_indices(static_cast<int>(a2.matrix.cols()), a2.boundary, "boundary");
  const Field& f = a1.matrix.field();
  const std::size_t r1 = a1.matrix.rows(), dim = r1 + a2.matrix.rows();
  auto embed = [&](const BoundariedMatrix& a, int c, bool second) {
    GfVector v(dim, 0);
    for (std::size_t r = 0; r < a.matrix.rows(); ++r) v[(second ? r1 : 0) + r] = a.matrix(r, static_cast<std::size_t>(c));
    return v;
  };
  std::vector<GfVector> relations;
  for (int j = 0; j < a1.t(); ++j) {
    GfVector v = embed(a1, a1.boundary[static_cast<std::size_t>(j)], false);
    const GfVector w = embed(a2, a2.boundary[static_cast<std::size_t>(j)], true);
    for (std::size_t r = 0; r < dim; ++r) v[r] = f.sub(v[r], w[r]);
    relations.push_back(std::move(v));
  }
  const Subspace kernel = Subspace::span(f, dim, relations);
  // Greedy base: canonical vectors of E1, then of E2, kept when independent
  // modulo the kernel and the vectors already chosen.
  std::vector<GfVector> base;
  std::vector<GfVector> spanning = kernel.basis();
  for (std::size_t i = 0; i < dim; ++i) {
    GfVector e(dim, 0);
    e[i] = 1;
    if (Subspace::span(f, dim, spanning).contains(e)) continue;
    base.push_back(e);
    spanning.push_back(e);
  }
  std::vector<GfVector> generators = base;
  generators.insert(generators.end(), kernel.basis().begin(), kernel.basis().end());
  std::vector<GfVector> columns;
  auto express = [&](const BoundariedMatrix& a, bool second) {
    for (int c : a.internal()) {
      auto coeffs = solve_combination(f, dim, generators, embed(a, c, second));
      columns.emplace_back(coeffs->begin(), coeffs->begin() + static_cast<std::ptrdiff_t>(base.size()));
    }
  };
  express(a1, false);
  express(a2, true);
  return GfMatrix::from_columns(f, base.size(), columns);
}

BoundariedMatrix upsilon0(const Field& f) { return {GfMatrix::from_rows(f, {{1, 0}, {0, 1}}), {0}}; }
BoundariedMatrix upsilon1(const Field& f) { return {GfMatrix::from_rows(f, {{1, 1}}), {0}}; }

BoundariedMatrix odot(const CharacteristicLabel& n, const BoundariedMatrix& a1, const BoundariedMatrix& a2,
                      bool right_first) {
  const auto& w = n.widths;
  if (a1.t() != w[0] || a2.t() != w[1])
    throw InputError("boundary sizes " + std::to_string(a1.t()) + " and " + std::to_string(a2.t()) +
                     " do not match the parts of " + format_label(n));
  auto part = [&](int i) {
    return BoundariedMatrix{n.matrix, range(static_cast<int>(n.offset(i)), w[static_cast<std::size_t>(i)])};
  };
  const int k1 = static_cast<int>(a1.matrix.cols()) - a1.t();
  GfMatrix result(n.matrix.field(), 0, 0);
  if (!right_first) {
    // a1 internals, then parts 2 and 3
    BoundariedMatrix x{oplus_bar(a1, part(0)), range(k1, w[1])};
    result = oplus_bar(x, a2);
  } else {
    // parts 1 and 3, then a2 internals
    BoundariedMatrix x{oplus_bar(part(1), a2), range(0, w[0])};
    result = oplus_bar(a1, x);
  }
  BoundariedMatrix out{std::move(result), range(k1, w[2])};
  std::vector<std::size_t> cols(out.boundary.begin(), out.boundary.end());
  if (rank(out.matrix.select_columns(cols)) != cols.size())
    throw InputError("the third part of " + format_label(n) + " is dependent after composition");
  return out;
}

// ------------------------------------------------------- abstract matroids

std::vector<int> BoundariedExplicit::internal() const { return others(matroid.size(), boundary); }

void check_boundaried(const BoundariedExplicit& m) {
  check_indices(m.matroid.size(), m.boundary, "boundary");
  if (m.matroid.is_dependent(set_of(m.boundary))) throw InputError("boundary is dependent");
}

BoundariedExplicit PartitionedExplicit::boundaried(int part) const {
  return {matroid, range(offset(part), widths[static_cast<std::size_t>(part)])};
}

void check_partitioned(const PartitionedExplicit& n) {
  if (n.widths[0] < 0 || n.widths[1] < 0 || n.widths[2] < 0 ||
      n.widths[0] + n.widths[1] + n.widths[2] != n.matroid.size())
    throw InputError("part widths do not add up to the ground set");
  for (int i = 0; i < 3; ++i)
    if (n.matroid.is_dependent(set_of(range(n.offset(i), n.widths[static_cast<std::size_t>(i)]))))
      throw InputError("part " + std::to_string(i + 1) + " is dependent");
}

namespace {

// Element maps of a gluing: internals of m1, internals of m2, then the shared
// boundary elements.
struct Glue {
  std::vector<int> map1, map2;
  int k1 = 0, k2 = 0, t = 0;
  int size() const { return k1 + k2 + t; }
};

Glue glue(const BoundariedExplicit& m1, const BoundariedExplicit& m2) {
  check_indices(m1.matroid.size(), m1.boundary, "boundary");
  check_indices(m2.matroid.size(), m2.boundary, "boundary");
  if (m1.t() != m2.t())
    throw InputError("boundary sizes differ (" + std::to_string(m1.t()) + " and " + std::to_string(m2.t()) + ")");
  Glue g;
  g.t = m1.t();
  const auto in1 = m1.internal(), in2 = m2.internal();
  g.k1 = static_cast<int>(in1.size());
  g.k2 = static_cast<int>(in2.size());
  g.map1.assign(static_cast<std::size_t>(m1.matroid.size()), 0);
  g.map2.assign(static_cast<std::size_t>(m2.matroid.size()), 0);
  for (int i = 0; i < g.k1; ++i) g.map1[static_cast<std::size_t>(in1[static_cast<std::size_t>(i)])] = i;
  for (int i = 0; i < g.k2; ++i) g.map2[static_cast<std::size_t>(in2[static_cast<std::size_t>(i)])] = g.k1 + i;
  for (int j = 0; j < g.t; ++j) {
    g.map1[static_cast<std::size_t>(m1.boundary[static_cast<std::size_t>(j)])] = g.k1 + g.k2 + j;
    g.map2[static_cast<std::size_t>(m2.boundary[static_cast<std::size_t>(j)])] = g.k1 + g.k2 + j;
  }
  return g;
}

ExplicitMatroid connection(const BoundariedExplicit& m1, const BoundariedExplicit& m2, bool series) {
  if (m1.t() != 1 || m2.t() != 1) throw InputError("connections need boundaries of size 1");
  const Glue g = glue(m1, m2);
  const int p = g.k1 + g.k2;
  const auto c1 = m1.matroid.minimal_dependents(), c2 = m2.matroid.minimal_dependents();
  std::vector<ElementSet> out;
  std::vector<ElementSet> through1, through2;
  for (ElementSet c : c1) (c.contains(m1.boundary[0]) ? through1 : out).push_back(image(c, g.map1));
  for (ElementSet c : c2) (c.contains(m2.boundary[0]) ? through2 : out).push_back(image(c, g.map2));
  if (!series) out.insert(out.end(), through1.begin(), through1.end());
  if (!series) out.insert(out.end(), through2.begin(), through2.end());
  for (ElementSet a : through1)
    for (ElementSet b : through2) {
      ElementSet u = a | b;
      if (!series) u.erase(p);
      out.push_back(u);
    }
  return ExplicitMatroid(g.size(), std::move(out));
}

ExplicitMatroid without_last(const ExplicitMatroid& m) {
  return ExplicitMatroid::from_table(m.size() - 1, prefix_table(m, m.size() - 1));
}

}  // namespace

ExplicitMatroid series_connection(const BoundariedExplicit& m1, const BoundariedExplicit& m2) {
  return connection(m1, m2, true);
}
ExplicitMatroid parallel_connection(const BoundariedExplicit& m1, const BoundariedExplicit& m2) {
  return connection(m1, m2, false);
}
ExplicitMatroid oplus_s(const BoundariedExplicit& m1, const BoundariedExplicit& m2) {
  return without_last(series_connection(m1, m2));
}
ExplicitMatroid oplus_p(const BoundariedExplicit& m1, const BoundariedExplicit& m2) {
  return without_last(parallel_connection(m1, m2));
}

ExplicitMatroid pushout(const BoundariedExplicit& m1, const BoundariedExplicit& m2, int steps) {
  const Glue g = glue(m1, m2);
  if (g.size() > 16) throw LimitError("pushout ground set exceeds 16 elements");
  std::vector<ElementSet> seeds;
  for (ElementSet d : m1.matroid.minimal_dependents()) seeds.push_back(image(d, g.map1));
  for (ElementSet d : m2.matroid.minimal_dependents()) seeds.push_back(image(d, g.map2));
  auto table = staged_closure(g.size(), seeds, ElementSet::full(g.size()), steps < 0 ? g.t : steps);
  // the closure is complete after t rounds
  assert(steps >= 0 || table == staged_closure(g.size(), seeds, ElementSet::full(g.size()), g.t + 1));
  return ExplicitMatroid::from_table(g.size(), std::move(table));
}

ExplicitMatroid tilde_oplus(const BoundariedExplicit& m1, const BoundariedExplicit& m2) {
  const ExplicitMatroid full = pushout(m1, m2);
  const int k = full.size() - m1.t();
  return ExplicitMatroid::from_table(k, prefix_table(full, k));
}

BoundariedExplicit odot(const PartitionedExplicit& n, const BoundariedExplicit& m1, const BoundariedExplicit& m2) {
  const auto& w = n.widths;
  if (m1.t() != w[0] || m2.t() != w[1])
    throw InputError("boundary sizes " + std::to_string(m1.t()) + " and " + std::to_string(m2.t()) +
                     " do not match the part widths");
  const int k1 = m1.matroid.size() - m1.t();
  // m1 internals, then parts 2 and 3
  BoundariedExplicit x{tilde_oplus(m1, n.boundaried(0)), range(k1, w[1])};
  BoundariedExplicit out{tilde_oplus(x, m2), range(k1, w[2])};
  if (out.matroid.is_dependent(set_of(out.boundary)))
    throw InputError("the third part is dependent after composition");
  return out;
}

// ------------------------------------------------------------- signatures

std::string format_boundary_signature(const BoundarySignature& s) {
  std::string out = "{";
  bool first = true;
  for (std::uint32_t a = 0; a < (1U << s.t); ++a) {
    if (!s.contains(a)) continue;
    out += first ? "{" : ",{";
    first = false;
    bool inner = true;
    for (int i = 0; i < s.t; ++i)
      if (a >> i & 1U) {
        out += (inner ? "" : ",") + std::to_string(i + 1);
        inner = false;
      }
    out += "}";
  }
  return out + "}";
}

BoundarySignature boundary_signature(const BoundariedExplicit& m, ElementSet x) {
  if (m.t() > 6) throw LimitError("boundary signatures need boundaries of size at most 6");
  if (!x.subset_of(ElementSet::full(m.matroid.size()))) throw InputError("set " + to_string(x) + " is outside the ground set");
  if (!(x & set_of(m.boundary)).empty()) throw InputError("set " + to_string(x) + " meets the boundary");
  BoundarySignature s{m.t(), 0};
  for (std::uint32_t a = 0; a < (1U << m.t()); ++a) {
    ElementSet y = x;
    for (int i = 0; i < m.t(); ++i)
      if (a >> i & 1U) y.insert(m.boundary[static_cast<std::size_t>(i)]);
    if (m.matroid.is_dependent(y)) s.family |= std::uint64_t{1} << a;
  }
  return s;
}

namespace {

// Members of an up-closed family that have no proper subset in it.
std::vector<std::uint32_t> minimal_members(const BoundarySignature& s) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t a = 0; a < (1U << s.t); ++a) {
    if (!s.contains(a)) continue;
    bool minimal = true;
    for (std::uint32_t b = a; b != 0 && minimal; b &= b - 1)
      if (s.contains(a & ~(b & (~b + 1)))) minimal = false;
    if (minimal) out.push_back(a);
  }
  return out;
}

struct ComposeMemo {
  std::mutex mutex;
  std::map<std::tuple<std::uint64_t, std::uint64_t, std::array<int, 3>, std::vector<bool>>, std::uint64_t> values;
};

ComposeMemo& compose_memo() {
  static ComposeMemo memo;
  return memo;
}

}  // namespace

BoundarySignature compose_signatures(const BoundarySignature& mu, const BoundarySignature& ga,
                                     const PartitionedExplicit& n) {
  const auto& w = n.widths;
  if (mu.t != w[0] || ga.t != w[1])
    throw InputError("signature sizes " + std::to_string(mu.t) + " and " + std::to_string(ga.t) +
                     " do not match the part widths");
  if (w[2] > 6) throw LimitError("boundary signatures need boundaries of size at most 6");
  auto key = std::make_tuple(mu.family, ga.family, w, n.matroid.table());
  auto& memo = compose_memo();
  {
    std::lock_guard lock(memo.mutex);
    auto it = memo.values.find(key);
    if (it != memo.values.end()) return {w[2], it->second};
  }
  // Tokens x1 = 0 and x2 = 1 stand for the children's sets; n's elements follow.
  const int size = 2 + n.matroid.size();
  if (size > 20) throw LimitError("3-partitioned label too large for signature composition");
  auto shifted = [&](int part, std::uint32_t subset) {
    ElementSet s;
    for (int i = 0; i < 32 && (subset >> i) != 0; ++i)
      if (subset >> i & 1U) s.insert(2 + n.offset(part) + i);
    return s;
  };
  std::vector<ElementSet> seeds;
  for (std::uint32_t a : minimal_members(mu)) seeds.push_back(shifted(0, a) | ElementSet::single(0));
  for (std::uint32_t b : minimal_members(ga)) seeds.push_back(shifted(1, b) | ElementSet::single(1));
  for (ElementSet d : n.matroid.minimal_dependents()) seeds.push_back(ElementSet(d.bits() << 2));
  const ElementSet glued = set_of(range(2, w[0] + w[1]));
  const auto table = staged_closure(size, seeds, glued, w[0] + w[1]);
  BoundarySignature out{w[2], 0};
  for (std::uint32_t a = 0; a < (1U << w[2]); ++a)
    if (table[(shifted(2, a) | ElementSet{0, 1}).bits()]) out.family |= std::uint64_t{1} << a;
  std::lock_guard lock(memo.mutex);
  memo.values.emplace(std::move(key), out.family);
  return out;
}

// ------------------------------------------------------------ parse trees

bool ParseTree::abstract() const {
  return !labels.empty() && (std::holds_alternative<BoundariedExplicit>(labels.front()) ||
                             std::holds_alternative<PartitionedExplicit>(labels.front()));
}

namespace {

std::vector<int> preorder_numbers(const DecompositionTree& d) {
  std::vector<int> out(static_cast<std::size_t>(d.node_count()), 0);
  if (d.node_count() == 0) return out;
  int next = 0;
  std::vector<int> stack{d.root()};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    out[static_cast<std::size_t>(v)] = next++;
    if (!d.is_leaf(v)) {
      stack.push_back(d.node(v).right);
      stack.push_back(d.node(v).left);
    }
  }
  return out;
}

int boundary_size(const ParseLabel& l) {
  if (std::holds_alternative<Upsilon>(l)) return 1;
  if (const auto* n = std::get_if<CharacteristicLabel>(&l)) return n->widths[2];
  if (const auto* m = std::get_if<BoundariedExplicit>(&l)) return m->t();
  return std::get<PartitionedExplicit>(l).widths[2];
}

bool parts_independent(const CharacteristicLabel& n) {
  for (int part = 0; part < 3; ++part) {
    std::vector<std::size_t> cols;
    for (int j = 0; j < n.widths[static_cast<std::size_t>(part)]; ++j) {
      const std::size_t c = n.offset(part) + static_cast<std::size_t>(j);
      if (!n.matrix.column_is_zero(c)) cols.push_back(c);
    }
    if (rank(n.matrix.select_columns(cols)) != cols.size()) return false;
  }
  return true;
}

std::vector<int> leaves_in_order(const DecompositionTree& d) {
  std::vector<int> out;
  for (int i = 0; i < d.node_count(); ++i)
    if (d.is_leaf(i)) out.push_back(i);
  return out;
}

}  // namespace

void check_parse_tree(const ParseTree& t) {
  const auto& d = t.shape;
  if (t.labels.size() != static_cast<std::size_t>(d.node_count())) throw InputError("parse tree has a label count mismatch");
  if (t.empty()) return;
  const bool abstract = t.abstract();
  const auto pre = preorder_numbers(d);
  for (int i = 0; i < d.node_count(); ++i) {
    auto fail = [&](const std::string& what) {
      throw InputError("parse tree node " + std::to_string(pre[static_cast<std::size_t>(i)] + 1) + ": " + what);
    };
    const ParseLabel& l = t.label(i);
    const bool leaf = d.is_leaf(i);
    if (abstract) {
      if (leaf) {
        const auto* m = std::get_if<BoundariedExplicit>(&l);
        if (!m) fail("expected an abstract leaf");
        try {
          check_boundaried(*m);
        } catch (const InputError& e) {
          fail(e.what());
        }
        if (!validate_axioms(m->matroid, 16).ok()) fail("leaf is not a matroid");
        continue;
      }
      const auto* n = std::get_if<PartitionedExplicit>(&l);
      if (!n) fail("expected a 3-partitioned matroid");
      try {
        check_partitioned(*n);
      } catch (const InputError& e) {
        fail(e.what());
      }
      if (!validate_axioms(n->matroid, 16).ok()) fail("label is not a matroid");
    } else {
      if (leaf) {
        if (!std::holds_alternative<Upsilon>(l)) fail("expected Y0 or Y1");
        continue;
      }
      const auto* n = std::get_if<CharacteristicLabel>(&l);
      if (!n) fail("expected a 3-partitioned matrix");
      if (!(n->matrix.field() == t.field)) fail("label over the wrong field");
      if (n->matrix.cols() != static_cast<std::size_t>(n->widths[0] + n->widths[1] + n->widths[2]))
        fail("label widths do not match its columns");
      if (!parts_independent(*n)) fail("a part of " + format_label(*n) + " is dependent");
    }
    const auto& node = d.node(i);
    const auto& w = abstract ? std::get<PartitionedExplicit>(l).widths : std::get<CharacteristicLabel>(l).widths;
    if (boundary_size(t.label(node.left)) != w[0]) fail("first part does not match the left child's boundary");
    if (boundary_size(t.label(node.right)) != w[1]) fail("second part does not match the right child's boundary");
  }
  if (!abstract) check_labeling(d, static_cast<int>(leaves_in_order(d).size()));
}

BoundariedMatrix parse_boundaried(const ParseTree& t) {
  if (t.abstract()) throw InputError("parse_boundaried needs a matrix parse tree");
  check_parse_tree(t);
  if (t.empty()) return {GfMatrix(t.field, 0, 0), {}};
  std::vector<BoundariedMatrix> at;
  at.reserve(t.labels.size());
  for (int i = 0; i < t.shape.node_count(); ++i) {
    const ParseLabel& l = t.label(i);
    if (const auto* u = std::get_if<Upsilon>(&l)) {
      at.push_back(*u == Upsilon::Zero ? upsilon0(t.field) : upsilon1(t.field));
    } else {
      const auto& node = t.shape.node(i);
      at.push_back(odot(std::get<CharacteristicLabel>(l), at[static_cast<std::size_t>(node.left)],
                        at[static_cast<std::size_t>(node.right)]));
    }
  }
  return at.back();
}

GfMatrix parsed_matrix(const ParseTree& t) {
  const GfMatrix in = parse_boundaried(t).internal_matrix();
  const auto leaves = leaves_in_order(t.shape);
  std::vector<std::size_t> order(leaves.size());
  for (std::size_t j = 0; j < leaves.size(); ++j)
    order[static_cast<std::size_t>(t.shape.node(leaves[j]).element)] = j;
  return in.select_columns(order);
}

BoundariedExplicit parse_explicit(const ParseTree& t) {
  if (!t.empty() && !t.abstract()) throw InputError("parse_explicit needs an abstract parse tree");
  check_parse_tree(t);
  if (t.empty()) return {ExplicitMatroid(0, {}), {}};
  std::vector<BoundariedExplicit> at;
  at.reserve(t.labels.size());
  for (int i = 0; i < t.shape.node_count(); ++i) {
    const ParseLabel& l = t.label(i);
    if (const auto* m = std::get_if<BoundariedExplicit>(&l)) {
      at.push_back(*m);
    } else {
      const auto& node = t.shape.node(i);
      at.push_back(odot(std::get<PartitionedExplicit>(l), at[static_cast<std::size_t>(node.left)],
                        at[static_cast<std::size_t>(node.right)]));
    }
  }
  return at.back();
}

namespace {

// Removes (or inserts) a zero column as part `part` of n.
CharacteristicLabel without_part(const CharacteristicLabel& n, int part) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < n.matrix.cols(); ++c)
    if (c != n.offset(part)) cols.push_back(c);
  CharacteristicLabel out{n.matrix.select_columns(cols), n.widths};
  out.widths[static_cast<std::size_t>(part)] = 0;
  return out;
}

CharacteristicLabel with_zero_part(const CharacteristicLabel& n, int part) {
  std::vector<GfVector> cols;
  for (std::size_t c = 0; c < n.matrix.cols(); ++c) {
    if (c == n.offset(part)) cols.emplace_back(n.matrix.rows(), 0);
    cols.push_back(n.matrix.column(c));
  }
  if (n.offset(part) == n.matrix.cols()) cols.emplace_back(n.matrix.rows(), 0);
  CharacteristicLabel out{GfMatrix::from_columns(n.matrix.field(), n.matrix.rows(), cols), n.widths};
  out.widths[static_cast<std::size_t>(part)] = 1;
  return out;
}

}  // namespace

EnhancedTree enhanced_from_parse(const ParseTree& t) {
  if (t.empty() || t.abstract()) throw InputError("enhanced_from_parse needs a nonempty matrix parse tree");
  check_parse_tree(t);
  const auto& d = t.shape;
  std::vector<CharacteristicLabel> labels;
  for (int i = 0; i < d.node_count(); ++i) {
    const ParseLabel& l = t.label(i);
    if (const auto* u = std::get_if<Upsilon>(&l)) {
      labels.push_back(*u == Upsilon::Zero ? CharacteristicLabel::leaf_zero(t.field)
                                           : CharacteristicLabel::leaf_one(t.field));
      continue;
    }
    CharacteristicLabel n = std::get<CharacteristicLabel>(l);
    const auto& node = d.node(i);
    for (int side : {1, 0}) {
      const int child = side == 0 ? node.left : node.right;
      const auto* u = std::get_if<Upsilon>(&t.label(child));
      if (!u || *u != Upsilon::Zero) continue;
      if (!n.matrix.column_is_zero(n.offset(side)))
        throw InputError("a Y0 child must face a zero column in " + format_label(n));
      n = without_part(n, side);
    }
    // Enhanced labels need full row rank.
    if (rank(n.matrix) != n.matrix.rows()) n.matrix = rref(n.matrix).reduced;
    labels.push_back(std::move(n));
  }
  return EnhancedTree(t.field, d, std::move(labels));
}

ParseTree parse_from_enhanced(const EnhancedTree& e) {
  ParseTree out{e.field(), e.shape(), {}};
  const auto& d = e.shape();
  for (int i = 0; i < d.node_count(); ++i) {
    const auto& lab = e.label(i);
    if (d.is_leaf(i)) {
      out.labels.emplace_back(lab.is_leaf_zero() ? Upsilon::Zero : Upsilon::One);
      continue;
    }
    CharacteristicLabel n = lab;
    const auto& node = d.node(i);
    if (e.label(node.left).is_leaf_zero() && d.is_leaf(node.left)) n = with_zero_part(n, 0);
    if (e.label(node.right).is_leaf_zero() && d.is_leaf(node.right)) n = with_zero_part(n, 1);
    out.labels.emplace_back(std::move(n));
  }
  return out;
}

namespace {

struct SigState {
  BoundarySignature sig;
  bool support = false;
};

}  // namespace

bool is_dependent_parse(const ParseTree& t, ElementSet x) {
  if (t.empty()) return false;
  if (!t.abstract()) throw InputError("is_dependent_parse needs an abstract parse tree");
  check_parse_tree(t);
  std::vector<SigState> at(t.labels.size());
  int offset = 0;
  for (int i = 0; i < t.shape.node_count(); ++i) {
    const ParseLabel& l = t.label(i);
    if (const auto* m = std::get_if<BoundariedExplicit>(&l)) {
      const auto in = m->internal();
      ElementSet local;
      for (std::size_t j = 0; j < in.size(); ++j)
        if (x.contains(offset + static_cast<int>(j))) local.insert(in[j]);
      offset += static_cast<int>(in.size());
      const auto sig = boundary_signature(*m, local);
      at[static_cast<std::size_t>(i)] = {sig, !sig.none()};
      continue;
    }
    const auto& node = t.shape.node(i);
    const auto& a = at[static_cast<std::size_t>(node.left)];
    const auto& b = at[static_cast<std::size_t>(node.right)];
    at[static_cast<std::size_t>(i)] = {compose_signatures(a.sig, b.sig, std::get<PartitionedExplicit>(l)),
                                       a.support || b.support};
  }
  if (!x.subset_of(ElementSet::full(offset))) throw InputError("set " + to_string(x) + " is outside the ground set");
  return at.back().sig.contains(0) && at.back().support;
}

namespace {

struct Expansion {
  DecompositionTree shape;
  std::vector<int> op, leaf, number;
  std::vector<bool> top;
};

void append(Expansion& out, const Expansion& l, const Expansion& r) {
  out.shape = DecompositionTree::join(l.shape, r.shape);
  auto cat = [](auto& dst, const auto& a, const auto& b) {
    dst = a;
    dst.insert(dst.end(), b.begin(), b.end());
  };
  cat(out.op, l.op, r.op);
  cat(out.leaf, l.leaf, r.leaf);
  cat(out.number, l.number, r.number);
  cat(out.top, l.top, r.top);
}

Expansion balanced(int leaf, int first_id, int from, int count) {
  Expansion e;
  if (count == 1) {
    e.shape = DecompositionTree::leaf(first_id + from);
    e.op = {-1};
    e.leaf = {leaf};
    e.number = {from};
    e.top = {false};
    return e;
  }
  const int half = count / 2;
  append(e, balanced(leaf, first_id, from, half), balanced(leaf, first_id, from + half, count - half));
  e.op.push_back(-1);
  e.leaf.push_back(leaf);
  e.number.push_back(-1);
  e.top.push_back(false);
  return e;
}

}  // namespace

ExpandedParseTree expand_parse_tree(const ParseTree& t) {
  if (t.empty() || !t.abstract()) throw InputError("expand_parse_tree needs a nonempty abstract parse tree");
  check_parse_tree(t);
  ExpandedParseTree out;
  std::vector<Expansion> at(t.labels.size());
  int next_id = 0;
  for (int i = 0; i < t.shape.node_count(); ++i) {
    const ParseLabel& l = t.label(i);
    auto& e = at[static_cast<std::size_t>(i)];
    if (const auto* m = std::get_if<BoundariedExplicit>(&l)) {
      const int k = static_cast<int>(m->internal().size());
      if (k == 0) throw InputError("abstract leaves need at least one internal element");
      const int index = static_cast<int>(out.leaves.size());
      out.leaves.push_back(*m);
      e = balanced(index, next_id, 0, k);
      e.top.back() = true;
      next_id += k;
      continue;
    }
    const auto& node = t.shape.node(i);
    append(e, at[static_cast<std::size_t>(node.left)], at[static_cast<std::size_t>(node.right)]);
    e.op.push_back(static_cast<int>(out.ops.size()));
    out.ops.push_back(std::get<PartitionedExplicit>(l));
    e.leaf.push_back(-1);
    e.number.push_back(-1);
    e.top.push_back(false);
  }
  auto& root = at.back();
  out.shape = std::move(root.shape);
  out.op = std::move(root.op);
  out.leaf = std::move(root.leaf);
  out.number = std::move(root.number);
  out.top = std::move(root.top);
  return out;
}

namespace {

struct ExpandedState {
  bool is_sig = false;
  std::uint32_t mask = 0;
  SigState sig;
};

SigState to_signature(const BoundariedExplicit& m, std::uint32_t mask) {
  const auto in = m.internal();
  ElementSet x;
  for (std::size_t j = 0; j < in.size(); ++j)
    if (mask >> j & 1U) x.insert(in[j]);
  const auto sig = boundary_signature(m, x);
  return {sig, !sig.none()};
}

}  // namespace

bool is_dependent_expanded(const ExpandedParseTree& t, ElementSet x) {
  const auto& d = t.shape;
  std::vector<ExpandedState> at(static_cast<std::size_t>(d.node_count()));
  for (int i = 0; i < d.node_count(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    auto& s = at[ui];
    if (t.op[ui] >= 0) {
      const auto& a = at[static_cast<std::size_t>(d.node(i).left)];
      const auto& b = at[static_cast<std::size_t>(d.node(i).right)];
      s.is_sig = true;
      s.sig = {compose_signatures(a.sig.sig, b.sig.sig, t.ops[static_cast<std::size_t>(t.op[ui])]),
               a.sig.support || b.sig.support};
      continue;
    }
    if (d.is_leaf(i)) {
      s.mask = x.contains(d.node(i).element) ? 1U << t.number[ui] : 0U;
    } else {
      s.mask = at[static_cast<std::size_t>(d.node(i).left)].mask | at[static_cast<std::size_t>(d.node(i).right)].mask;
    }
    if (t.top[ui]) {
      s.is_sig = true;
      s.sig = to_signature(t.leaves[static_cast<std::size_t>(t.leaf[ui])], s.mask);
    }
  }
  return at.back().sig.sig.contains(0) && at.back().sig.support;
}

// --------------------------------------------------------------- formulas

namespace {

std::string explicit_spec(const ExplicitMatroid& m) {
  std::string out = "[E: " + std::to_string(m.size()) + ";";
  for (ElementSet d : m.minimal_dependents()) {
    out += " {";
    bool first = true;
    for (int e : d.elements()) {
      out += (first ? "" : ",") + std::to_string(e + 1);
      first = false;
    }
    out += "}";
  }
  return out + "]";
}

std::string partitioned_spec(const PartitionedExplicit& n) {
  std::string s = explicit_spec(n.matroid);
  const auto semi = s.find(';');
  return "[P: (" + std::to_string(n.widths[0]) + "|" + std::to_string(n.widths[1]) + "|" +
         std::to_string(n.widths[2]) + ")" + s.substr(semi);
}

std::string leaf_spec(const BoundariedExplicit& m) {
  std::string out = "(abstract " + explicit_spec(m.matroid) + " boundary";
  for (int b : m.boundary) out += " " + std::to_string(b + 1);
  return out + ")";
}

class GrammarDepAutomaton : public Automaton {
 public:
  GrammarDepAutomaton(std::shared_ptr<TreeAlphabet> a, int tracks, int track, int k, int t)
      : Automaton(std::move(a), tracks), track_(track), k_(k), t_(t) {}
  bool deterministic() const override { return true; }
  std::span<const StateId> leaf(int symbol, std::uint64_t bits) override {
    return single_.of(transition(kLeaf, 0, symbol, (bits >> track_) & 1U));
  }
  std::span<const StateId> step(StateId l, StateId r, int symbol, std::uint64_t) override {
    return single_.of(transition(l, r, symbol, 0));
  }
  bool accepting(StateId q) override {
    const auto c = code(q);
    return (c >> 63) && (c >> 62 & 1U) && (c & 1U);
  }
  std::size_t state_count() const override {
    std::lock_guard lock(mutex_);
    return codes_.size();
  }

 private:
  static constexpr StateId kLeaf = 0xFFFFFFFFU;

  // mask states: the mask; signature states: bit 63, support at bit 62, t at
  // bits 40.., the family below.
  static std::uint64_t encode(const SigState& s) {
    return (std::uint64_t{1} << 63) | (std::uint64_t{s.support} << 62) | (static_cast<std::uint64_t>(s.sig.t) << 40) |
           s.sig.family;
  }
  static SigState decode(std::uint64_t c) {
    return {BoundarySignature{static_cast<int>(c >> 40 & 0xFF), c & ((std::uint64_t{1} << 40) - 1)}, (c >> 62 & 1U) != 0};
  }

  std::uint64_t code(StateId q) const {
    std::lock_guard lock(mutex_);
    return codes_[q];
  }

  StateId transition(StateId l, StateId r, int symbol, std::uint64_t bit) {
    const auto key = std::make_tuple(l, r, symbol, bit);
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    const auto* g = dynamic_cast<const GrammarPayload*>(alphabet()->symbol(symbol).payload.get());
    if (!g) throw InputError("symbol '" + alphabet()->symbol(symbol).name + "' carries no grammar label");
    std::uint64_t c = 0;
    if (g->kind == GrammarPayload::Kind::Op) {
      const auto a = code(l), b = code(r);
      if (!(a >> 63) || !(b >> 63)) throw InputError("malformed expanded parse tree");
      const auto x = decode(a), y = decode(b);
      if (g->op->widths[2] > t_) throw LimitError("boundary larger than the grammar bound");
      c = encode({compose_signatures(x.sig, y.sig, *g->op), x.support || y.support});
    } else {
      std::uint64_t mask = 0;
      if (g->kind == GrammarPayload::Kind::Element) {
        if (l != kLeaf) throw InputError("malformed expanded parse tree");
        mask = bit << g->number;
      } else {
        const auto a = code(l), b = code(r);
        if ((a >> 63) || (b >> 63)) throw InputError("malformed expanded parse tree");
        mask = a | b;
      }
      c = mask;
      if (g->top) {
        if (static_cast<int>(g->leaf->internal().size()) > k_ || g->leaf->t() > t_)
          throw LimitError("abstract leaf larger than the grammar bound");
        c = encode(to_signature(*g->leaf, static_cast<std::uint32_t>(mask)));
      }
    }
    std::lock_guard lock(mutex_);
    auto it = ids_.find(c);
    StateId q;
    if (it != ids_.end()) {
      q = it->second;
    } else {
      q = static_cast<StateId>(codes_.size());
      codes_.push_back(c);
      ids_.emplace(c, q);
    }
    cache_.emplace(key, q);
    return q;
  }

  int track_, k_, t_;
  mutable std::mutex mutex_;
  std::vector<std::uint64_t> codes_;
  std::map<std::uint64_t, StateId> ids_;
  std::map<std::tuple<StateId, StateId, int, std::uint64_t>, StateId> cache_;
  class Single {
   public:
    std::span<const StateId> of(StateId q) {
      std::lock_guard lock(mutex_);
      while (ids_.size() <= q) ids_.push_back(static_cast<StateId>(ids_.size()));
      return {&ids_[q], 1};
    }

   private:
    std::mutex mutex_;
    std::deque<StateId> ids_;
  } single_;
};

}  // namespace

LabeledTree labeled_from_expanded(const ExpandedParseTree& t, TreeAlphabet& alphabet) {
  std::vector<std::shared_ptr<const PartitionedExplicit>> ops;
  std::vector<std::shared_ptr<const BoundariedExplicit>> leaves;
  for (const auto& n : t.ops) ops.push_back(std::make_shared<const PartitionedExplicit>(n));
  for (const auto& m : t.leaves) leaves.push_back(std::make_shared<const BoundariedExplicit>(m));
  LabeledTree out{t.shape, {}};
  for (int i = 0; i < t.shape.node_count(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    auto p = std::make_shared<GrammarPayload>();
    TreeSymbol s;
    s.leaf = t.shape.is_leaf(i);
    if (t.op[ui] >= 0) {
      p->kind = GrammarPayload::Kind::Op;
      p->op = ops[static_cast<std::size_t>(t.op[ui])];
      s.name = "op " + partitioned_spec(*p->op);
    } else {
      p->leaf = leaves[static_cast<std::size_t>(t.leaf[ui])];
      p->top = t.top[ui];
      p->kind = s.leaf ? GrammarPayload::Kind::Element : GrammarPayload::Kind::Fork;
      p->number = s.leaf ? t.number[ui] : 0;
      s.name = (s.leaf ? "elem " + std::to_string(p->number + 1) : std::string("fork")) + (p->top ? " top " : " ") +
               leaf_spec(*p->leaf);
    }
    s.payload = std::move(p);
    out.symbols.push_back(alphabet.intern(std::move(s)));
  }
  return out;
}

GrammarDep::GrammarDep(int k, int t) : k_(k), t_(t) {
  if (k < 1 || k > 16) throw LimitError("grammar leaves are limited to 16 internal elements");
  if (t < 0 || t > 5) throw LimitError("grammar boundaries are limited to 5 elements");
}

std::string GrammarDep::name() const {
  return "grammar-dep(k=" + std::to_string(k_) + ",t=" + std::to_string(t_) + ")";
}

AutomatonPtr GrammarDep::automaton(std::shared_ptr<TreeAlphabet> alphabet, int tracks, int track) const {
  return std::make_shared<GrammarDepAutomaton>(std::move(alphabet), tracks, track, k_, t_);
}

FormulaPtr translate_grammar(const Formula& phi, int k, int t) {
  return translate(phi, std::make_shared<const GrammarDep>(k, t));
}

// ------------------------------------------------------------ text formats

namespace {

ElementSet parse_braced_set(TextCursor& in, int n) {
  in.expect('{');
  ElementSet s;
  if (in.accept('}')) return s;
  do {
    const long long v = in.integer();
    if (v < 1 || v > n) in.fail("element " + std::to_string(v) + " outside 1.." + std::to_string(n));
    s.insert(static_cast<int>(v - 1));
  } while (in.accept(','));
  in.expect('}');
  return s;
}

std::vector<ElementSet> parse_set_list(TextCursor& in, int n) {
  std::vector<ElementSet> out;
  while (in.peek() == '{') out.push_back(parse_braced_set(in, n));
  return out;
}

ExplicitMatroid parse_explicit_spec(TextCursor& in) {
  in.expect('[');
  in.expect_word("E");
  in.expect(':');
  const long long n = in.integer();
  if (n < 0 || n > ExplicitMatroid::kMaxElements) in.fail("ground size out of range");
  in.expect(';');
  auto sets = parse_set_list(in, static_cast<int>(n));
  in.expect(']');
  return ExplicitMatroid(static_cast<int>(n), std::move(sets));
}

PartitionedExplicit parse_partitioned_spec(TextCursor& in) {
  in.expect('[');
  in.expect_word("P");
  in.expect(':');
  in.expect('(');
  std::array<int, 3> w{};
  for (int i = 0; i < 3; ++i) {
    if (i) in.expect('|');
    const long long v = in.integer();
    if (v < 0 || v > 6) in.fail("part width out of range");
    w[static_cast<std::size_t>(i)] = static_cast<int>(v);
  }
  in.expect(')');
  in.expect(';');
  const int n = w[0] + w[1] + w[2];
  auto sets = parse_set_list(in, n);
  in.expect(']');
  return {ExplicitMatroid(n, std::move(sets)), w};
}

struct ParsedSubtree {
  DecompositionTree shape;
  std::vector<ParseLabel> labels;
  std::vector<int> ids;  // leaf ids in leaf order, -1 when absent
};

ParsedSubtree parse_term(TextCursor& in, const std::optional<Field>& field, int depth) {
  if (depth > 4096) in.fail("tree too deep");
  in.expect('(');
  const std::string kind = in.word();
  ParsedSubtree out;
  if (kind == "Y0" || kind == "Y1") {
    if (!field) in.fail("Y0/Y1 leaves need a 'field' line");
    int id = -1;
    if (in.peek() != ')') {
      const long long v = in.integer();
      if (v < 1 || v > ElementSet::kMaxElements) in.fail("leaf id out of range");
      id = static_cast<int>(v - 1);
    }
    out.shape = DecompositionTree::leaf(0);
    out.labels.emplace_back(kind == "Y0" ? Upsilon::Zero : Upsilon::One);
    out.ids.push_back(id);
  } else if (kind == "abstract") {
    BoundariedExplicit m{parse_explicit_spec(in), {}};
    in.expect_word("boundary");
    while (in.peek() != ')') {
      const long long v = in.integer();
      if (v < 1 || v > m.matroid.size()) in.fail("boundary element out of range");
      m.boundary.push_back(static_cast<int>(v - 1));
    }
    out.shape = DecompositionTree::leaf(0);
    out.labels.emplace_back(std::move(m));
    out.ids.push_back(-1);
  } else if (kind == "op") {
    ParseLabel lab = Upsilon::Zero;
    if (in.peek() != '[') in.fail("expected a label");
    {
      TextCursor probe = in;
      probe.expect('[');
      const std::string tag = probe.word();
      if (tag == "N") {
        if (!field) in.fail("matrix labels need a 'field' line");
        lab = parse_label(in, *field);
      } else if (tag == "P") {
        lab = parse_partitioned_spec(in);
      } else {
        in.fail("expected an [N: ...] or [P: ...] label");
      }
    }
    auto l = parse_term(in, field, depth + 1);
    auto r = parse_term(in, field, depth + 1);
    out.shape = DecompositionTree::join(l.shape, r.shape);
    out.labels = std::move(l.labels);
    out.labels.insert(out.labels.end(), std::make_move_iterator(r.labels.begin()), std::make_move_iterator(r.labels.end()));
    out.labels.push_back(std::move(lab));
    out.ids = std::move(l.ids);
    out.ids.insert(out.ids.end(), r.ids.begin(), r.ids.end());
  } else {
    in.fail("expected op, Y0, Y1 or abstract");
  }
  in.expect(')');
  return out;
}

// Rebuilds the shape with the given leaf ids (in leaf order).
DecompositionTree with_leaf_ids(const DecompositionTree& d, const std::vector<int>& ids) {
  std::vector<DecompositionTree> at;
  std::size_t next = 0;
  for (int i = 0; i < d.node_count(); ++i) {
    if (d.is_leaf(i)) {
      at.push_back(DecompositionTree::leaf(ids[next++]));
    } else {
      at.push_back(DecompositionTree::join(at[static_cast<std::size_t>(d.node(i).left)],
                                           at[static_cast<std::size_t>(d.node(i).right)]));
    }
  }
  return at.empty() ? DecompositionTree{} : at.back();
}

}  // namespace

std::string format_parse_tree(const ParseTree& t) {
  const auto& d = t.shape;
  std::string out;
  if (!t.abstract() && !t.empty()) out = "field " + std::to_string(t.field.p()) + "\n";
  if (t.empty()) return out + "()\n";
  const auto leaves = leaves_in_order(d);
  bool sequential = true;
  for (std::size_t j = 0; j < leaves.size(); ++j)
    if (d.node(leaves[j]).element != static_cast<int>(j)) sequential = false;
  auto go = [&](auto&& self, int v) -> std::string {
    const ParseLabel& l = t.label(v);
    if (const auto* u = std::get_if<Upsilon>(&l)) {
      std::string s = *u == Upsilon::Zero ? "(Y0" : "(Y1";
      if (!sequential) s += " " + std::to_string(d.node(v).element + 1);
      return s + ")";
    }
    if (const auto* m = std::get_if<BoundariedExplicit>(&l)) return leaf_spec(*m);
    const std::string lab = std::holds_alternative<CharacteristicLabel>(l)
                                ? format_label(std::get<CharacteristicLabel>(l))
                                : partitioned_spec(std::get<PartitionedExplicit>(l));
    return "(op " + lab + " " + self(self, d.node(v).left) + " " + self(self, d.node(v).right) + ")";
  };
  return out + go(go, d.root()) + "\n";
}

ParseTree parse_parse_tree(const std::string& text) {
  TextCursor in(text);
  std::optional<Field> field;
  if (in.peek() == 'f') {
    in.expect_word("field");
    const long long p = in.integer();
    try {
      field = Field(static_cast<int>(p));
    } catch (const InputError& e) {
      in.fail(e.what());
    }
  }
  ParseTree out{field.value_or(Field(2)), {}, {}};
  {
    TextCursor probe = in;
    probe.expect('(');
    if (probe.accept(')')) {
      in = probe;
      if (!in.at_end()) in.fail("trailing text after the tree");
      return out;
    }
  }
  auto parsed = parse_term(in, field, 0);
  if (!in.at_end()) in.fail("trailing text after the tree");
  std::vector<int> ids = parsed.ids;
  const bool any = std::any_of(ids.begin(), ids.end(), [](int i) { return i >= 0; });
  const bool all = std::all_of(ids.begin(), ids.end(), [](int i) { return i >= 0; });
  if (any && !all) throw InputError("either every Y leaf has an id or none has");
  if (!any)
    for (std::size_t j = 0; j < ids.size(); ++j) ids[j] = static_cast<int>(j);
  out.shape = with_leaf_ids(parsed.shape, ids);
  out.labels = std::move(parsed.labels);
  check_parse_tree(out);
  return out;
}

namespace {

// Splits off the `boundary` line; returns the ids (1-based as written).
std::pair<std::string, std::vector<long long>> split_boundary(const std::string& text) {
  std::istringstream in(text);
  std::string line, rest;
  std::optional<std::vector<long long>> ids;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kw;
    if ((ls >> kw) && kw == "boundary") {
      if (ids) throw InputError("more than one boundary line");
      ids.emplace();
      long long v = 0;
      while (ls >> v) ids->push_back(v);
      if (!ls.eof()) throw InputError("boundary line: expected element ids");
      continue;
    }
    rest += line + "\n";
  }
  if (!ids) throw InputError("missing 'boundary' line");
  return {rest, *ids};
}

std::vector<int> zero_based(const std::vector<long long>& ids, int n) {
  std::vector<int> out;
  for (long long v : ids) {
    if (v < 1 || v > n) throw InputError("boundary element " + std::to_string(v) + " outside 1.." + std::to_string(n));
    out.push_back(static_cast<int>(v - 1));
  }
  return out;
}

std::string boundary_line(const std::vector<int>& b) {
  std::string out = "boundary";
  for (int i : b) out += " " + std::to_string(i + 1);
  return out + "\n";
}

}  // namespace

std::string format_partitioned(const PartitionedExplicit& n) { return partitioned_spec(n); }

PartitionedExplicit parse_partitioned(const std::string& text) {
  TextCursor in(text);
  auto n = parse_partitioned_spec(in);
  if (!in.at_end()) in.fail("trailing text after the label");
  check_partitioned(n);
  return n;
}

BoundariedMatrix parse_boundaried_matrix(const std::string& text) {
  auto [rest, ids] = split_boundary(text);
  BoundariedMatrix a{parse_matrix(rest), {}};
  a.boundary = zero_based(ids, static_cast<int>(a.matrix.cols()));
  check_boundaried(a);
  return a;
}

std::string format_boundaried_matrix(const BoundariedMatrix& a) { return format_matrix(a.matrix) + boundary_line(a.boundary); }

BoundariedExplicit parse_boundaried_explicit(const std::string& text) {
  auto [rest, ids] = split_boundary(text);
  std::istringstream in(rest);
  BoundariedExplicit m{read_explicit(in), {}};
  m.boundary = zero_based(ids, m.matroid.size());
  check_boundaried(m);
  return m;
}

std::string format_boundaried_explicit(const BoundariedExplicit& m) {
  return format_explicit(m.matroid) + boundary_line(m.boundary);
}

}  // namespace mbw
