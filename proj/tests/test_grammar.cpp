#include <map>
#include <optional>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "mbw/errors.hpp"
#include "mbw/grammar.hpp"
#include "mbw/pipeline.hpp"

using namespace mbw;

namespace {

GfMatrix cols_of(int p, std::size_t rows, const std::vector<std::vector<int>>& cols) {
  std::vector<GfVector> v;
  for (const auto& c : cols) {
    GfVector g;
    for (int x : c) g.push_back(Field(p).reduce(x));
    v.push_back(g);
  }
  return GfMatrix::from_columns(Field(p), rows, v);
}

// Dependent sets of the internal columns modulo the identified boundary
// pairs, from brute-force ranks of the stacked vectors.
ExplicitMatroid quotient_oracle(const BoundariedMatrix& a1, const BoundariedMatrix& a2) {
  const Field f = a1.matrix.field();
  const std::size_t r1 = a1.matrix.rows(), dim = r1 + a2.matrix.rows();
  auto embed = [&](const BoundariedMatrix& a, int c, bool second) {
    GfVector v(dim, 0);
    for (std::size_t r = 0; r < a.matrix.rows(); ++r) v[(second ? r1 : 0) + r] = a.matrix(r, static_cast<std::size_t>(c));
    return v;
  };
  std::vector<GfVector> rel, cols;
  for (int j = 0; j < a1.t(); ++j) {
    auto v = embed(a1, a1.boundary[static_cast<std::size_t>(j)], false);
    auto w = embed(a2, a2.boundary[static_cast<std::size_t>(j)], true);
    for (std::size_t r = 0; r < dim; ++r) v[r] = f.sub(v[r], w[r]);
    rel.push_back(v);
  }
  for (int c : a1.internal()) cols.push_back(embed(a1, c, false));
  for (int c : a2.internal()) cols.push_back(embed(a2, c, true));
  const int n = static_cast<int>(cols.size());
  const int rk = rel.empty() ? 0 : fixtures::brute_rank(GfMatrix::from_columns(f, dim, rel));
  std::vector<bool> dep(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < dep.size(); ++mask) {
    auto v = rel;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1U) v.push_back(cols[static_cast<std::size_t>(i)]);
    dep[mask] = fixtures::brute_rank(GfMatrix::from_columns(f, dim, v)) < rk + std::popcount(mask);
  }
  return ExplicitMatroid::from_table(n, dep);
}

BoundariedMatrix random_boundaried(std::mt19937& rng, int p, int t, int k) {
  std::uniform_int_distribution<std::size_t> rows(static_cast<std::size_t>(std::max(t, 1)), static_cast<std::size_t>(t + 2));
  for (;;) {
    auto m = fixtures::random_matrix(rng, p, rows(rng), static_cast<std::size_t>(t + k), false);
    std::vector<int> order(static_cast<std::size_t>(t + k));
    for (int i = 0; i < t + k; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    BoundariedMatrix a{m, {order.begin(), order.begin() + t}};
    std::vector<std::size_t> b(a.boundary.begin(), a.boundary.end());
    if (rank(m.select_columns(b)) == b.size()) return a;
  }
}

CharacteristicLabel random_label(std::mt19937& rng, int p, std::array<int, 3> w) {
  const int n = w[0] + w[1] + w[2];
  std::uniform_int_distribution<std::size_t> rows(1, static_cast<std::size_t>(std::max(n, 1)));
  for (;;) {
    CharacteristicLabel lab{fixtures::random_matrix(rng, p, rows(rng), static_cast<std::size_t>(n)), w};
    bool ok = true;
    for (int part = 0; part < 3; ++part) {
      std::vector<std::size_t> cols;
      for (int j = 0; j < w[static_cast<std::size_t>(part)]; ++j) cols.push_back(lab.offset(part) + static_cast<std::size_t>(j));
      ok = ok && rank(lab.matrix.select_columns(cols)) == cols.size();
    }
    if (ok) return lab;
  }
}

BoundariedExplicit explicit_of(const BoundariedMatrix& a) { return {column_matroid(a.matrix), a.boundary}; }

PartitionedExplicit explicit_of(const CharacteristicLabel& n) { return {column_matroid(n.matrix), n.widths}; }

// Ground set relabelled by perm (new element i is old perm[i]).
ExplicitMatroid permuted(const ExplicitMatroid& m, const std::vector<int>& perm) {
  std::vector<bool> dep(m.table().size());
  for (std::size_t mask = 0; mask < dep.size(); ++mask) {
    ElementSet old;
    for (std::size_t i = 0; i < perm.size(); ++i)
      if (mask >> i & 1U) old.insert(perm[i]);
    dep[mask] = m.is_dependent(old);
  }
  return ExplicitMatroid::from_table(m.size(), dep);
}

ExplicitMatroid direct_sum(const ExplicitMatroid& a, const ExplicitMatroid& b) {
  std::vector<ElementSet> deps = a.minimal_dependents();
  for (ElementSet d : b.minimal_dependents()) deps.push_back(ElementSet(d.bits() << a.size()));
  return ExplicitMatroid(a.size() + b.size(), deps);
}

ExplicitMatroid deleted(const ExplicitMatroid& m, int e) {
  std::vector<int> keep;
  for (int i = 0; i < m.size(); ++i)
    if (i != e) keep.push_back(i);
  std::vector<bool> dep(std::size_t{1} << keep.size());
  for (std::size_t mask = 0; mask < dep.size(); ++mask) {
    ElementSet s;
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (mask >> i & 1U) s.insert(keep[i]);
    dep[mask] = m.is_dependent(s);
  }
  return ExplicitMatroid::from_table(static_cast<int>(keep.size()), dep);
}

// Random matroid-like boundaried explicit matroid with t boundary elements
// and k internals, from a random matrix.
BoundariedExplicit random_explicit(std::mt19937& rng, int t, int k) {
  return explicit_of(random_boundaried(rng, rng() % 2 ? 3 : 2, t, k));
}

PartitionedExplicit random_partitioned(std::mt19937& rng, std::array<int, 3> w) {
  return explicit_of(random_label(rng, rng() % 2 ? 3 : 2, w));
}

// Random abstract parse tree whose operator parts have width <= t.
ParseTree random_abstract_tree(std::mt19937& rng, int leaves, int t, int k) {
  std::uniform_int_distribution<int> width(0, t), internals(1, k);
  struct Sub {
    DecompositionTree shape;
    std::vector<ParseLabel> labels;
    int boundary;
  };
  auto make = [&](auto&& self, int n, int b) -> Sub {
    if (n == 1) return {DecompositionTree::leaf(0), {random_explicit(rng, b, internals(rng))}, b};
    const int left = 1 + static_cast<int>(rng() % static_cast<unsigned>(n - 1));
    auto l = self(self, left, width(rng));
    auto r = self(self, n - left, width(rng));
    Sub out{DecompositionTree::join(l.shape, r.shape), std::move(l.labels), b};
    out.labels.insert(out.labels.end(), r.labels.begin(), r.labels.end());
    out.labels.push_back(random_partitioned(rng, {l.boundary, r.boundary, b}));
    return out;
  };
  auto s = make(make, leaves, 0);
  return ParseTree{Field(2), s.shape, s.labels};
}

bool grammar_accepts(const Formula& phi, const ParseTree& t, const std::vector<ElementSet>& sets, int k, int tw) {
  auto alphabet = std::make_shared<TreeAlphabet>();
  auto expanded = expand_parse_tree(t);
  auto tree = labeled_from_expanded(expanded, *alphabet);
  auto a = compile(*translate_grammar(phi, k, tw), alphabet, free_vars(phi));
  return accepts(*a, tree, annotate_leaves(tree, sets));
}

}  // namespace

TEST_CASE("oplus_bar worked products over GF(3)") {
  BoundariedMatrix a1{GfMatrix::from_rows(Field(3), {{1, 0, 1}, {0, 1, 1}}), {0, 1}};
  BoundariedMatrix a2{GfMatrix::from_rows(Field(3), {{1, 0, 1, 0}, {0, 1, 1, 0}, {0, 1, 1, 1}}), {0, 1}};
  auto m = oplus_bar(a1, a2);
  CHECK(m == GfMatrix::from_rows(Field(3), {{1, 1, 0}, {1, 1, 1}, {0, 0, 2}}));
  auto printed = cols_of(3, 3, {{1, 1, 0}, {1, 1, 0}, {0, 1, -1}});
  CHECK(column_matroid(m) == column_matroid(printed));
  CHECK(column_matroid(m).is_dependent({0, 1}));

  BoundariedMatrix b2{GfMatrix::from_rows(Field(3), {{1, 0, 2, 0}, {0, 1, 1, 0}, {0, 1, 1, 1}}), {0, 1}};
  auto m2 = oplus_bar(a1, b2);
  CHECK_FALSE(column_matroid(m2).is_dependent({0, 1}));
  CHECK_FALSE(column_matroid(m) == column_matroid(m2));
}

TEST_CASE("oplus_bar matches the quotient oracle") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 150; ++trial) {
    const int p = trial % 2 ? 3 : 2, t = static_cast<int>(rng() % 3);
    auto a1 = random_boundaried(rng, p, t, 1 + static_cast<int>(rng() % 3));
    auto a2 = random_boundaried(rng, p, t, static_cast<int>(rng() % 3));
    CHECK(column_matroid(oplus_bar(a1, a2)) == quotient_oracle(a1, a2));
  }
  // a boundary-only factor changes nothing
  for (int trial = 0; trial < 40; ++trial) {
    const int p = trial % 2 ? 3 : 2, t = 1 + trial % 2;
    auto a2 = random_boundaried(rng, p, t, 3);
    std::vector<std::vector<int>> id(static_cast<std::size_t>(t), std::vector<int>(static_cast<std::size_t>(t), 0));
    for (int i = 0; i < t; ++i) id[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    BoundariedMatrix a1{GfMatrix::from_rows(Field(p), id), {}};
    for (int i = 0; i < t; ++i) a1.boundary.push_back(i);
    CHECK(column_matroid(oplus_bar(a1, a2)) == column_matroid(a2.internal_matrix()));
  }
  CHECK_THROWS_AS(oplus_bar(upsilon0(Field(2)), BoundariedMatrix{GfMatrix(Field(2), 1, 1), {}}), InputError);
}

TEST_CASE("odot does not depend on the gluing order") {
  std::mt19937 rng(8);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int p = trial % 2 ? 3 : 2;
    std::array<int, 3> w{static_cast<int>(rng() % 3), static_cast<int>(rng() % 3), static_cast<int>(rng() % 3)};
    auto n = random_label(rng, p, w);
    auto a1 = random_boundaried(rng, p, w[0], 1 + static_cast<int>(rng() % 2));
    auto a2 = random_boundaried(rng, p, w[1], 1 + static_cast<int>(rng() % 2));
    std::optional<BoundariedMatrix> x;
    try {
      x = odot(n, a1, a2);
    } catch (const InputError&) {
      CHECK_THROWS_AS(odot(n, a1, a2, true), InputError);
      continue;
    }
    auto y = odot(n, a1, a2, true);
    CHECK(column_matroid(x->matrix) == column_matroid(y.matrix));
    CHECK(x->boundary == y.boundary);
    ++compared;
  }
  CHECK(compared > 100);
}

TEST_CASE("the parse tree of the worked decomposition") {
  auto e = build_enhanced(fixtures::fig2_matrix(), parse_tree(fixtures::fig2_tree()), 1);
  auto t = parse_from_enhanced(e);
  CHECK(std::get<Upsilon>(t.label(0)) == Upsilon::Zero);
  CHECK(std::get<Upsilon>(t.label(1)) == Upsilon::One);

  // Intermediate boundaried matrices against the printed ones (boundary first).
  std::vector<BoundariedMatrix> at;
  for (int i = 0; i < t.shape.node_count(); ++i) {
    if (const auto* u = std::get_if<Upsilon>(&t.label(i))) {
      at.push_back(*u == Upsilon::Zero ? upsilon0(Field(2)) : upsilon1(Field(2)));
    } else {
      const auto& node = t.shape.node(i);
      at.push_back(odot(std::get<CharacteristicLabel>(t.label(i)), at[static_cast<std::size_t>(node.left)],
                        at[static_cast<std::size_t>(node.right)]));
    }
  }
  auto boundary_first = [](const BoundariedMatrix& a) {
    std::vector<std::size_t> order(a.boundary.begin(), a.boundary.end());
    for (int c : a.internal()) order.push_back(static_cast<std::size_t>(c));
    return column_matroid(a.matrix.select_columns(order));
  };
  const int s3 = 2, s1 = 4, s4 = 7, s2 = 9;
  CHECK(boundary_first(at[s3]) == column_matroid(GfMatrix::from_rows(Field(2), {{0, 1, 0}, {1, 0, 1}})));
  CHECK(boundary_first(at[s1]) ==
        column_matroid(GfMatrix::from_rows(Field(2), {{0, 1, 0, 0}, {0, 0, 1, 1}, {1, 0, 0, 1}})));
  CHECK(boundary_first(at[s4]) == column_matroid(GfMatrix::from_rows(Field(2), {{1, 1, 0}, {0, 1, 1}})));
  CHECK(boundary_first(at[s2]) == column_matroid(GfMatrix::from_rows(Field(2), {{1, 1, 0, 1}, {0, 1, 1, 0}})));
  auto ms = GfMatrix::from_rows(Field(2), {{1, 0, 0, 0, 0, 0}, {0, 1, 1, 0, 0, 0}, {0, 0, 1, 1, 0, 1}, {0, 0, 0, 1, 1, 0}});
  CHECK(column_matroid(at.back().internal_matrix()) == column_matroid(ms));

  CHECK(column_matroid(parsed_matrix(t)) == column_matroid(fixtures::fig2_matrix()));
  CHECK(enhanced_from_parse(t) == e);
  CHECK(parse_from_enhanced(enhanced_from_parse(t)).labels == t.labels);
}

TEST_CASE("parse trees from random enhanced trees parse the same matroid") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 120; ++trial) {
    const int p = trial % 2 ? 3 : 2;
    std::uniform_int_distribution<std::size_t> rows(1, 4), cols(2, 7);
    auto m = fixtures::random_matrix(rng, p, rows(rng), cols(rng));
    auto d = fixtures::random_tree(rng, static_cast<int>(m.cols()));
    auto e = build_enhanced(m, d, 4);
    auto t = parse_from_enhanced(e);
    CHECK(column_matroid(parsed_matrix(t)) == column_matroid(m));
    CHECK(enhanced_from_parse(t) == e);
    CHECK(parse_parse_tree(format_parse_tree(t)).labels == t.labels);
    CHECK(parse_parse_tree(format_parse_tree(t)).shape == t.shape);
  }
}

TEST_CASE("parse tree checks") {
  auto y1 = ParseTree{Field(2), DecompositionTree::leaf(0), {Upsilon::One}};
  CHECK(parse_boundaried(y1).t() == 1);
  CHECK(enhanced_from_parse(y1).label(0).is_leaf_one());
  CHECK(parse_from_enhanced(enhanced_from_parse(y1)).labels == y1.labels);
  CHECK_FALSE(is_dependent(enhanced_from_parse(y1), {0}));
  CHECK(column_matroid(parsed_matrix(ParseTree{Field(2), DecompositionTree::leaf(0), {Upsilon::Zero}})) ==
        ExplicitMatroid(1, {}));
  CHECK(parse_explicit(ParseTree{}).matroid.size() == 0);
  CHECK_THROWS_WITH_AS(parse_parse_tree("field 2\n(op [N: 1 x (1|1|1); 1 1 1] (Y0) (op [N: 1 x (1|1|0); 1 1] (Y1) (Y1)))"),
                       doctest::Contains("node 1: second part"), InputError);
  CHECK_THROWS_AS(parse_parse_tree("field 2\n(op [N: 1 x (1|1|0); 1 1] (Y1 2) (Y1))"), InputError);
  auto t = parse_parse_tree("field 3\n(op [N: 1 x (1|1|0); 1 2] (Y1 2) (Y1 1))");
  CHECK(format_parse_tree(t) == "field 3\n(op [N: 1 x (1|1|0); 1 2] (Y1 2) (Y1 1))\n");
  CHECK(column_matroid(parsed_matrix(t)).is_dependent({0, 1}));
}

TEST_CASE("connections against graphs") {
  // m1: triangle {a, b, p1} plus pendant c; m2: 4-cycle {d, e, f, p2}
  // vertices 1..4 in g1 with p1 = {1,2}; 5..8 in g2 with p2 = {5,6}
  std::vector<std::pair<int, int>> g1{{1, 3}, {2, 3}, {3, 4}, {1, 2}};
  std::vector<std::pair<int, int>> g2{{6, 7}, {7, 8}, {8, 5}, {5, 6}};
  BoundariedExplicit m1{to_explicit(graphic_matroid(g1)), {3}};
  BoundariedExplicit m2{to_explicit(graphic_matroid(g2)), {3}};
  auto relabel = [](std::vector<std::pair<int, int>> g, std::map<int, int> v) {
    for (auto& [a, b] : g) a = v.count(a) ? v[a] : a, b = v.count(b) ? v[b] : b;
    return g;
  };
  // parallel: identify 5 -> 1, 6 -> 2, one shared edge p
  auto par = g1;
  par.pop_back();
  for (auto e : relabel({{6, 7}, {7, 8}, {8, 5}}, {{5, 1}, {6, 2}})) par.push_back(e);
  par.emplace_back(1, 2);
  CHECK(parallel_connection(m1, m2) == to_explicit(graphic_matroid(par)));
  // series: identify 6 -> 2, drop p1 and p2, p joins 1 and 5
  auto ser = g1;
  ser.pop_back();
  for (auto e : relabel({{6, 7}, {7, 8}, {8, 5}}, {{6, 2}})) ser.push_back(e);
  ser.emplace_back(1, 5);
  CHECK(series_connection(m1, m2) == to_explicit(graphic_matroid(ser)));

  CHECK(oplus_s(m1, m2) == direct_sum(deleted(m1.matroid, 3), deleted(m2.matroid, 3)));
  CHECK_THROWS_AS(series_connection(m1, BoundariedExplicit{m2.matroid, {0, 1}}), InputError);
}

TEST_CASE("connections on random instances") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    auto a1 = random_boundaried(rng, 2, 1, 1 + static_cast<int>(rng() % 3));
    auto a2 = random_boundaried(rng, 2, 1, 1 + static_cast<int>(rng() % 3));
    auto m1 = explicit_of(a1), m2 = explicit_of(a2);
    CHECK(oplus_p(m1, m2) == column_matroid(oplus_bar(a1, a2)));
    CHECK(validate_axioms(series_connection(m1, m2)).ok());
    CHECK(validate_axioms(parallel_connection(m1, m2)).ok());
    CHECK(tilde_oplus(m1, m2) == oplus_p(m1, m2));
  }
}

TEST_CASE("pushouts") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 120; ++trial) {
    const int t = 1 + trial % 3;
    auto m1 = random_explicit(rng, t, 1 + static_cast<int>(rng() % 3));
    auto m2 = random_explicit(rng, t, static_cast<int>(rng() % 3));
    auto po = pushout(m1, m2);
    CHECK(po == pushout(m1, m2, t + 1));
    CHECK(po == pushout(m1, m2, 64));
    CHECK(validate_axioms(po).ok());
  }
  // a free boundary-only partner only relabels
  for (int trial = 0; trial < 40; ++trial) {
    const int t = 1 + trial % 3;
    auto m1 = random_explicit(rng, t, 3);
    BoundariedExplicit free{ExplicitMatroid(t, {}), {}};
    for (int i = 0; i < t; ++i) free.boundary.push_back(i);
    std::vector<int> perm = m1.internal();
    perm.insert(perm.end(), m1.boundary.begin(), m1.boundary.end());
    CHECK(pushout(m1, free) == permuted(m1.matroid, perm));
  }
  BoundariedExplicit big{ExplicitMatroid(9, {}), {0}};
  CHECK_THROWS_AS(pushout(big, big), LimitError);
}

TEST_CASE("boundary signatures") {
  // a triangle: x = {e} with boundary {p, q}
  BoundariedExplicit tri{ExplicitMatroid(3, {{0, 1, 2}}), {1, 2}};
  auto s = boundary_signature(tri, {0});
  CHECK(format_boundary_signature(s) == "{{1,2}}");
  CHECK(boundary_signature(tri, {}).none());
  CHECK(format_boundary_signature(boundary_signature(tri, {})) == "{}");
  BoundariedExplicit loop{ExplicitMatroid(2, {{0}}), {1}};
  CHECK(format_boundary_signature(boundary_signature(loop, {0})) == "{{},{1}}");
  CHECK_THROWS_AS(boundary_signature(tri, {1}), InputError);
}

TEST_CASE("composed signatures equal direct signatures") {
  std::mt19937 rng(29);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 1 + trial % 2;
    std::uniform_int_distribution<int> w(0, 1);
    std::array<int, 3> widths{w(rng), w(rng), w(rng)};
    auto n = random_partitioned(rng, widths);
    auto m1 = random_explicit(rng, widths[0], k), m2 = random_explicit(rng, widths[1], k);
    std::optional<BoundariedExplicit> composed;
    try {
      composed = odot(n, m1, m2);
    } catch (const InputError&) {
      continue;
    }
    for (std::uint32_t x1 = 0; x1 < (1U << k); ++x1)
      for (std::uint32_t x2 = 0; x2 < (1U << k); ++x2) {
        ElementSet a, b;
        const auto in1 = m1.internal(), in2 = m2.internal();
        for (int i = 0; i < k; ++i) {
          if (x1 >> i & 1U) a.insert(in1[static_cast<std::size_t>(i)]);
          if (x2 >> i & 1U) b.insert(in2[static_cast<std::size_t>(i)]);
        }
        const auto in = composed->internal();
        ElementSet both;
        for (int i = 0; i < 2 * k; ++i)
          if ((x1 | x2 << k) >> i & 1U) both.insert(in[static_cast<std::size_t>(i)]);
        auto direct = boundary_signature(*composed, both);
        CHECK(compose_signatures(boundary_signature(m1, a), boundary_signature(m2, b), n) == direct);
      }
    ++compared;
  }
  CHECK(compared >= 200);
}

TEST_CASE("signature dynamic program on abstract parse trees") {
  std::mt19937 rng(37);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto t = random_abstract_tree(rng, 2 + trial % 3, 1 + trial % 2, 2);
    std::optional<BoundariedExplicit> m;
    try {
      m = parse_explicit(t);
    } catch (const InputError&) {
      continue;
    }
    auto expanded = expand_parse_tree(t);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << m->matroid.size()); ++x) {
      CHECK(is_dependent_parse(t, ElementSet(x)) == m->matroid.is_dependent(ElementSet(x)));
      CHECK(is_dependent_expanded(expanded, ElementSet(x)) == m->matroid.is_dependent(ElementSet(x)));
    }
    CHECK(parse_parse_tree(format_parse_tree(t)).labels.size() == t.labels.size());
    CHECK(format_parse_tree(parse_parse_tree(format_parse_tree(t))) == format_parse_tree(t));
    ++checked;
  }
  CHECK(checked >= 40);
}

TEST_CASE("grammar translation") {
  // two parallel elements glued through a single boundary element
  BoundariedExplicit pair{ExplicitMatroid(2, {{0, 1}}), {1}};
  PartitionedExplicit glue{ExplicitMatroid(2, {{0, 1}}), {1, 1, 0}};
  ParseTree t{Field(2), DecompositionTree::join(DecompositionTree::leaf(0), DecompositionTree::leaf(1)),
              {pair, pair, glue}};
  REQUIRE(parse_explicit(t).matroid.is_dependent({0, 1}));
  auto indep = parse_msom("indep(X)", {"X"});
  CHECK(grammar_accepts(*indep, t, {ElementSet{}}, 2, 1));
  CHECK(grammar_accepts(*indep, t, {ElementSet{0}}, 2, 1));
  CHECK_FALSE(grammar_accepts(*indep, t, {ElementSet{0, 1}}, 2, 1));

  std::mt19937 rng(41);
  auto circuit = builtin("circuit");
  int checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    auto r = random_abstract_tree(rng, 2 + trial % 2, 1, 2);
    std::optional<BoundariedExplicit> m;
    try {
      m = parse_explicit(r);
    } catch (const InputError&) {
      continue;
    }
    const auto circuits = m->matroid.minimal_dependents();
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << m->matroid.size()); ++x) {
      const bool expected = std::find(circuits.begin(), circuits.end(), ElementSet(x)) != circuits.end();
      CHECK(grammar_accepts(*circuit, r, {ElementSet(x)}, 2, 1) == expected);
    }
    ++checked;
  }
  CHECK(checked >= 4);
  CHECK_THROWS_AS(GrammarDep(2, 6), LimitError);
}

TEST_CASE("boundaried text formats") {
  auto a = parse_boundaried_matrix("field 3\nrows 2 cols 3\n1 0 1\n0 1 1\nboundary 1 2\n");
  CHECK(a.boundary == std::vector<int>{0, 1});
  CHECK(parse_boundaried_matrix(format_boundaried_matrix(a)).matrix == a.matrix);
  CHECK_THROWS_AS(parse_boundaried_matrix("field 2\nrows 1 cols 2\n1 1\nboundary 1 2\n"), InputError);
  BoundariedExplicit m{ExplicitMatroid(3, {{0, 1, 2}}), {2}};
  auto back = parse_boundaried_explicit(format_boundaried_explicit(m));
  CHECK(back.matroid == m.matroid);
  CHECK(back.boundary == m.boundary);
}

TEST_CASE("small compositions") {
  // a lone Y1 is one element equal to the boundary vector
  auto y1 = parse_boundaried(ParseTree{Field(3), DecompositionTree::leaf(0), {Upsilon::One}});
  CHECK(y1.internal_matrix().column(0) == y1.matrix.column(static_cast<std::size_t>(y1.boundary[0])));

  // identity blocks add no relations
  std::mt19937 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const int p = trial % 2 ? 3 : 2;
    CharacteristicLabel id{GfMatrix::from_rows(Field(p), {{1, 0}, {0, 1}}), {1, 1, 0}};
    auto a1 = random_boundaried(rng, p, 1, 3), a2 = random_boundaried(rng, p, 1, 2);
    auto out = odot(id, a1, a2);
    CHECK(column_matroid(out.matrix) ==
          direct_sum(column_matroid(a1.internal_matrix()), column_matroid(a2.internal_matrix())));
  }

  // series with a parallel pair {p2, f}: contracting p gives m1 with p1 renamed f
  for (int trial = 0; trial < 30; ++trial) {
    auto m1 = random_explicit(rng, 1, 3);
    BoundariedExplicit pair{ExplicitMatroid(2, {{0, 1}}), {0}};
    auto s = series_connection(m1, pair);
    std::vector<int> perm = m1.internal();
    perm.push_back(m1.boundary[0]);
    auto renamed = permuted(m1.matroid, perm);
    for (std::uint64_t x = 0; x < 16; ++x) CHECK(s.is_dependent(ElementSet(x | 16)) == renamed.is_dependent(ElementSet(x)));
  }
}

TEST_CASE("trees with small leaves parse matroids of small branch-width") {
  std::mt19937 rng(47);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    auto t = random_abstract_tree(rng, 2 + trial % 3, 1, 2);
    std::optional<BoundariedExplicit> m;
    try {
      m = parse_explicit(t);
    } catch (const InputError&) {
      continue;
    }
    if (m->matroid.size() > 8) continue;
    CHECK(exact_decomposition(Matroid(m->matroid)).width <= 3);
    ++checked;
  }
  CHECK(checked >= 20);
}
