#include <algorithm>
#include <chrono>
#include <functional>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "mbw/errors.hpp"
#include "mbw/pipeline.hpp"

using namespace mbw;

namespace {

std::vector<GfMatrix> small_corpus(std::mt19937& rng, int count, int max_n, int max_width) {
  std::vector<GfMatrix> out;
  while (static_cast<int>(out.size()) < count) {
    const int p = out.size() % 2 ? 3 : 2;
    std::uniform_int_distribution<std::size_t> rows(1, 4), cols(1, static_cast<std::size_t>(max_n));
    auto m = fixtures::random_matrix(rng, p, rows(rng), cols(rng));
    if (exact_decomposition(Matroid(VectorMatroid(m))).width <= max_width) out.push_back(m);
  }
  return out;
}

std::vector<ElementSet> sorted(std::vector<ElementSet> v) {
  std::sort(v.begin(), v.end(), canonical_less);
  return v;
}

}  // namespace

TEST_CASE("signature index") {
  auto idx = signature_index(1, Field(2));
  REQUIRE(idx.size() == 4);
  CHECK_FALSE(idx[0].has_value());
  CHECK(idx[1] == GfVector{});
  CHECK(idx[2] == GfVector{0});
  CHECK(idx[3] == GfVector{1});
  CHECK(signature_index(2, Field(3)).size() == 1 + 1 + 3 + 9);
  CHECK_THROWS_AS(build_dep_formula(3, Field(5), "X"), LimitError);
}

TEST_CASE("materialized dep formula agrees with the signature automaton") {
  std::mt19937 rng(4);
  for (int p : {2, 3}) {
    auto alpha = std::make_shared<TreeAlphabet>();
    auto formula = build_dep_formula(1, Field(p), "X");
    CHECK(free_vars(*formula) == std::vector<std::string>{"X"});
    auto via_formula = compile(*formula, alpha, {"X"});
    auto direct = dependency_automaton(alpha, 1, Field(p));
    int trees = 0;
    for (int trial = 0; trees < (p == 2 ? 40 : 15) && trial < 2000; ++trial) {
      auto m = trees == 0 && p == 2 ? fixtures::fig2_matrix()
                                    : fixtures::random_matrix(rng, p, 1 + trial % 3, 1 + static_cast<std::size_t>(trial % 4));
      const Matroid mat{VectorMatroid(m)};
      auto d = trees == 0 && p == 2 ? parse_tree(fixtures::fig2_tree()) : exact_decomposition(mat).tree;
      if (width(mat, d) > 1) continue;
      ++trees;
      auto lt = labeled_from_enhanced(build_enhanced(m, d, 1), *alpha);
      for (std::uint64_t s = 0; s < (std::uint64_t{1} << m.cols()); ++s) {
        auto bits = annotate_leaves(lt, {ElementSet(s)});
        const bool dep = !is_independent(mat, ElementSet(s));
        CHECK(accepts(*direct, lt, bits) == dep);
        CHECK(accepts(*via_formula, lt, bits) == dep);
      }
    }
    CHECK(trees >= 15);
  }
}

TEST_CASE("translation shape") {
  auto phi = parse_msom("indep(X)", {"X"});
  auto tr = translate(*phi, 1, Field(2));
  REQUIRE(tr->op == Op::And);
  CHECK(tr->kids[0]->op == Op::Leaf);
  CHECK(tr->kids[1]->op == Op::Not);
  CHECK(tr->kids[1]->kids[0]->op == Op::Dep);
  for (const char* name : {"circuit", "connected", "a_circuit"}) {
    CHECK(relativized(*translate(*builtin(name), 2, Field(3))));
    auto materialized = translate(*builtin(name), 1, Field(2), {DepMode::Formula});
    std::function<bool(const Formula&)> has_dep = [&](const Formula& f) {
      if (f.op == Op::Dep || f.op == Op::Indep) return true;
      return std::any_of(f.kids.begin(), f.kids.end(), [&](const FormulaPtr& k) { return has_dep(*k); });
    };
    CHECK_FALSE(has_dep(*materialized));
  }
  CHECK_FALSE(relativized(*parse_formula("exists x label(x) = a", Dialect::Tree)));
  CHECK_THROWS_AS(translate(*parse_formula("exists x leaf(x)", Dialect::Tree), 1, Field(2)), InputError);
}

TEST_CASE("model checking the worked examples") {
  const Matroid a{VectorMatroid(fixtures::matrix_a())};
  CHECK(model_check(a, *parse_msom("exists X Circuit(X)"), 2));
  CHECK(model_check(a, *parse_msom("indep(X) | !indep(X)", {"X"}), 2, Assignment{{}, {{"X", ElementSet{0, 2}}}}));
  CHECK(model_check(a, *parse_msom("indep(X)", {"X"}), 2, Assignment{{}, {{"X", ElementSet{0, 1, 3}}}}));
  CHECK_FALSE(model_check(a, *parse_msom("indep(X)", {"X"}), 2, Assignment{{}, {{"X", ElementSet{0, 1, 2}}}}));

  const Matroid g{graphic_matroid(fixtures::fig1_edges())};
  auto conn = builtin("connected");
  CHECK(model_check(g, *conn, 2) == MsomEvaluator(g).eval(*conn, {}));
  CHECK(model_check(g, *conn, 2));

  CHECK_THROWS_AS(model_check(a, *parse_msom("indep(X)", {"X"}), 2), InputError);  // X unassigned
  CHECK_THROWS_AS(model_check(Matroid(ExplicitMatroid(2, {})), *builtin("connected"), 1), InputError);
  CHECK(model_check(g, *conn, 1));  // this graph has branch-width 1
  const Matroid k4{graphic_matroid({{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}})};
  CHECK(model_check(k4, *conn, 2));
  CHECK_THROWS_AS(model_check(k4, *conn, 1), LimitError);
}

TEST_CASE("translated builtins agree with direct evaluation") {
  std::mt19937 rng(99);
  ModelChecker ch2(Field(2), 2, {"A"});
  ModelChecker ch3(Field(3), 2, {"A"});
  for (const auto& m : small_corpus(rng, 40, 7, 2)) {
    auto& ch = m.field().p() == 2 ? ch2 : ch3;
    const int n = static_cast<int>(m.cols());
    const ElementSet colored{static_cast<int>(rng() % static_cast<unsigned>(n))};
    auto prepared = ch.prepare(m, {{"A", colored}});
    const Matroid mat{VectorMatroid(m)};
    MsomEvaluator oracle(mat, {{"A", colored}});
    CHECK(ch.check(prepared, *builtin("connected")) == oracle.eval(*builtin("connected"), {}));
    for (const char* name : {"circuit", "a_circuit"}) {
      auto phi = builtin(name);
      for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
        Assignment asg{{}, {{"X", ElementSet(s)}}};
        CHECK(ch.check(prepared, *phi, asg) == oracle.eval(*phi, asg));
      }
    }
    auto mixed = parse_msom("exists y (y in X & forall Z ((sub(Z, X) & mod(Z, 1, 2)) -> indep(Z) | A(y)))", {"X"});
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); s += 3) {
      Assignment asg{{}, {{"X", ElementSet(s)}}};
      CHECK(ch.check(prepared, *mixed, asg) == oracle.eval(*mixed, asg));
    }
  }
}

TEST_CASE("both dep paths give the same verdicts") {
  std::mt19937 rng(12);
  ModelChecker direct(Field(2), 1);
  ModelChecker materialized(Field(2), 1, {}, {DepMode::Formula});
  auto phi = builtin("circuit");
  for (const auto& m : small_corpus(rng, 8, 4, 1)) {
    if (m.field().p() != 2) continue;
    auto pd = direct.prepare(m);
    auto pm = materialized.prepare(m);
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << m.cols()); ++s) {
      Assignment asg{{}, {{"X", ElementSet(s)}}};
      CHECK(direct.check(pd, *phi, asg) == materialized.check(pm, *phi, asg));
    }
  }
}

TEST_CASE("enumeration returns exactly the solutions") {
  const Matroid a{VectorMatroid(fixtures::matrix_a())};
  ModelChecker ch(Field(2), 2, {"A"});
  auto pa = ch.prepare(fixtures::matrix_a());
  std::vector<ElementSet> got;
  ch.enumerate(pa, *builtin("circuit"), {"X"}, [&](const std::vector<ElementSet>& t) {
    got.push_back(t[0]);
    return true;
  });
  CHECK(got.size() == circuits(a).size());
  CHECK(sorted(got) == circuits(a));

  const Matroid x{VectorMatroid(fixtures::fig2_matrix())};
  for (int e = 0; e < 6; ++e) {
    auto px = ch.prepare(fixtures::fig2_matrix(), {{"A", ElementSet{e}}});
    std::vector<ElementSet> through, expect;
    ch.enumerate(px, *builtin("a_circuit"), {"X"}, [&](const std::vector<ElementSet>& t) {
      through.push_back(t[0]);
      return true;
    });
    for (const auto& c : circuits(x))
      if (c.contains(e)) expect.push_back(c);
    CHECK(sorted(through) == expect);
  }

  std::size_t none = ch.enumerate(pa, *parse_msom("indep(X) & !indep(X)", {"X"}), {"X"},
                                  [](const std::vector<ElementSet>&) { return true; });
  CHECK(none == 0);

  // pairs (x, Y): enumeration with an element variable, and early stop
  auto pairs = parse_msom("x in Y & indep(Y)", {"x", "Y"});
  std::vector<std::pair<ElementSet, ElementSet>> all;
  ch.enumerate(pa, *pairs, {"x", "Y"}, [&](const std::vector<ElementSet>& t) {
    all.emplace_back(t[0], t[1]);
    return true;
  });
  std::size_t expect = 0;
  for (std::uint64_t s = 0; s < 32; ++s)
    if (is_independent(a, ElementSet(s))) expect += static_cast<std::size_t>(std::popcount(s));
  CHECK(all.size() == expect);
  std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) {
    return std::make_pair(l.first.bits(), l.second.bits()) < std::make_pair(r.first.bits(), r.second.bits());
  });
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
  std::size_t taken = ch.enumerate(pa, *pairs, {"x", "Y"}, [&](const std::vector<ElementSet>&) { return false; });
  CHECK(taken == 1);
}

TEST_CASE("enumeration on random trees matches brute force") {
  std::mt19937 rng(77);
  auto alpha = std::make_shared<TreeAlphabet>();
  const int a = alpha->intern({"a", true, 0, nullptr});
  const int b = alpha->intern({"b", true, 0, nullptr});
  const int f = alpha->intern({"f", false, 0, nullptr});
  auto phi = parse_formula("sub(X, Y) & exists z (z in Y & label(z) = a) & mod(X, 1, 2)", Dialect::Tree, {"X", "Y"});
  auto dfa = determinize(compile(*phi, alpha, {"X", "Y"}));
  for (int trial = 0; trial < 12; ++trial) {
    LabeledTree t{fixtures::random_tree(rng, 1 + trial % 4), {}};
    for (int i = 0; i < t.node_count(); ++i) t.symbols.push_back(t.shape.is_leaf(i) ? (rng() % 2 ? a : b) : f);
    const int n = t.node_count();
    std::vector<std::pair<std::uint64_t, std::uint64_t>> got, expect;
    RunDag(*dfa, t).enumerate([&](const Annotation& ann) {
      std::uint64_t x = 0, y = 0;
      for (int i = 0; i < n; ++i) {
        x |= (ann[static_cast<std::size_t>(i)] & 1U) << i;
        y |= (ann[static_cast<std::size_t>(i)] >> 1 & 1U) << i;
      }
      got.emplace_back(x, y);
      return true;
    });
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x)
      for (std::uint64_t y = 0; y < (std::uint64_t{1} << n); ++y)
        if (brute_force_eval(t, *alpha, *phi, TreeAssignment{{}, {{"X", x}, {"Y", y}}})) expect.emplace_back(x, y);
    std::sort(got.begin(), got.end());
    CHECK(std::adjacent_find(got.begin(), got.end()) == got.end());
    CHECK(got == expect);
  }
}

TEST_CASE("spectra of simple automata") {
  auto alpha = std::make_shared<TreeAlphabet>();
  const int a = alpha->intern({"a", true, 0, nullptr});
  const int f = alpha->intern({"f", false, 0, nullptr});
  auto all = compile(*parse_formula("true", Dialect::Tree), alpha);
  auto s = spectrum(*all, {a, f}, 40);
  CHECK(s[0] == false);
  CHECK(std::all_of(s.begin() + 1, s.end(), [](bool v) { return v; }));
  CHECK(detect_period(s, 40) == std::make_pair(0, 1));

  auto single = compile(*parse_formula("forall x leaf(x)", Dialect::Tree), alpha);
  auto one = spectrum(*single, {a, f}, 40);
  CHECK(one[1]);
  CHECK(std::count(one.begin(), one.end(), true) == 1);
  CHECK(detect_period(one, 40) == std::make_pair(1, 1));

  // node count 2n - 1 divisible by 3 exactly when n = 2 mod 3
  auto thirds = compile(*parse_formula("exists X (forall x x in X) & mod(X, 0, 3)", Dialect::Tree), alpha);
  auto th = spectrum(*thirds, {a, f}, 50);
  for (int n = 1; n <= 50; ++n) CHECK(th[static_cast<std::size_t>(n)] == (n % 3 == 2));
  CHECK(detect_period(th, 50) == std::make_pair(0, 3));

  // the window does not change smaller answers
  auto longer = spectrum(*thirds, {a, f}, 130);
  CHECK(std::equal(th.begin(), th.end(), longer.begin()));

  CHECK(detect_period({false, true, false, true, true, true, true, true, true}, 8) == std::make_pair(2, 1));
  CHECK_FALSE(detect_period({false, true, false, false, true}, 4).has_value());
}

namespace {

// For each n <= n_max, whether some GF(2) matroid on n elements with
// branch-width <= 1 satisfies phi. Matroids range over standard forms
// [I_r | D] with nonzero columns, which covers every isomorphism class.
std::vector<bool> brute_spectrum(const Formula& phi, int n_max) {
  std::vector<bool> out(static_cast<std::size_t>(n_max) + 1, false);
  for (int n = 1; n <= n_max; ++n) {
    for (int r = 1; r <= n && !out[static_cast<std::size_t>(n)]; ++r) {
      const int cells = r * (n - r);
      for (std::uint64_t code = 0; code < (std::uint64_t{1} << cells); ++code) {
        GfMatrix m(Field(2), static_cast<std::size_t>(r), static_cast<std::size_t>(n));
        for (int i = 0; i < r; ++i) m(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) = 1;
        for (int k = 0; k < cells; ++k)
          m(static_cast<std::size_t>(k % r), static_cast<std::size_t>(r + k / r)) = static_cast<Elem>(code >> k & 1U);
        bool zero = false;
        for (std::size_t c = 0; c < m.cols(); ++c) zero |= m.column_is_zero(c);
        if (zero) continue;
        const Matroid mat{VectorMatroid(m)};
        if (exact_decomposition(mat).width > 1) continue;
        if (MsomEvaluator(mat).eval(phi, {})) {
          out[static_cast<std::size_t>(n)] = true;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("matroid spectra over width-1 GF(2) enhanced trees") {
  auto alpha = std::make_shared<TreeAlphabet>();
  auto labels = label_symbols(*alpha, 1, Field(2));
  CHECK(labels.size() > 2);
  for (int s : labels) {
    const auto* n = alpha->symbol(s).characteristic();
    REQUIRE(n);
    CHECK((alpha->symbol(s).leaf || n->well_formed()));
  }
  for (const char* text : {"true", "exists X (forall x x in X) & mod(X, 0, 3)",
                           "exists X (forall x x in X) & !indep(X)", "forall X indep(X)"}) {
    CAPTURE(text);
    auto phi = parse_msom(text);
    auto spec = matroid_spectrum(*phi, 1, Field(2), 30);
    auto brute = brute_spectrum(*phi, 6);
    for (int n = 1; n <= 6; ++n) CHECK(spec[static_cast<std::size_t>(n)] == brute[static_cast<std::size_t>(n)]);
    CHECK(detect_period(spec, 30).has_value());
  }
  auto trivial = matroid_spectrum(*parse_msom("true"), 1, Field(2), 30);
  CHECK(detect_period(trivial, 30) == std::make_pair(0, 1));
}
