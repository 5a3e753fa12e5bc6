#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "mbw/enhanced_tree.hpp"
#include "mbw/errors.hpp"

using namespace mbw;

namespace {

EnhancedTree fig3_tree() { return build_enhanced(fixtures::fig2_matrix(), parse_tree(fixtures::fig2_tree()), 1); }

GfMatrix from_cols(const std::vector<std::vector<int>>& cols) {
  std::vector<GfVector> v;
  for (const auto& c : cols) v.emplace_back(c.begin(), c.end());
  return GfMatrix::from_columns(Field(2), 4, v);
}

}  // namespace

TEST_CASE("enhanced tree of the worked decomposition") {
  auto tree = fig3_tree();
  const auto& d = tree.shape();
  // node order: 2 3 s3 1 s1 5 4 s4 6 s2 root
  const int s3 = 2, s1 = 4, s4 = 7, s2 = 9;
  for (int s : {s1, s2, s3, s4}) CHECK(tree.boundary_dim(s) == 1);
  CHECK(tree.boundary_dim(d.root()) == 0);
  CHECK(tree.label(0).is_leaf_zero());  // column 2 is a coloop
  CHECK(tree.label(1).is_leaf_one());

  auto b = boundary_subspaces(fixtures::fig2_matrix(), d);
  CHECK(b[s3].basis()[0] == GfVector{0, 0, 1, 0});
  for (int s : {s1, s2, s4}) CHECK(b[static_cast<std::size_t>(s)].basis()[0] == GfVector{1, 0, 0, 0});

  // the printed C_s, with the zero column of the trivial boundary at s3 dropped
  CHECK(tree.label(s3).matrix == rref(from_cols({{0, 0, 1, 0}, {0, 0, 1, 0}})).reduced);
  CHECK(tree.label(s4).matrix == rref(from_cols({{1, 1, 0, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}})).reduced);
  CHECK(tree.label(s1).matrix == rref(from_cols({{0, 0, 1, 0}, {1, 0, 1, 0}, {1, 0, 0, 0}})).reduced);
  CHECK(tree.label(s2).matrix == rref(from_cols({{1, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}})).reduced);

  CHECK(theta(tree.label(s3), std::nullopt, GfVector{1}, GfVector{1}));
  CHECK_FALSE(theta(tree.label(s3), std::nullopt, GfVector{1}, GfVector{0}));
}

TEST_CASE("theta") {
  auto tree = fig3_tree();
  for (const auto& lab : tree.labels()) {
    Signature zero3 = GfVector(static_cast<std::size_t>(lab.widths[2]), 0);
    CHECK(theta(lab, std::nullopt, std::nullopt, zero3));
  }
  const auto& s4 = tree.label(7);
  CHECK_FALSE(theta(s4, GfVector{1, 0}, std::nullopt, std::nullopt));  // length mismatch

  std::mt19937 rng(31);
  std::uniform_int_distribution<int> coin(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = trial % 2 ? 3 : 2;
    auto m = fixtures::random_matrix(rng, p, 3, 5, false);
    CharacteristicLabel lab{m, {2, 2, 1}};
    std::uniform_int_distribution<int> d(0, p - 1);
    auto draw = [&](int w) -> Signature {
      if (coin(rng) == 0) return std::nullopt;
      GfVector v(static_cast<std::size_t>(w));
      for (auto& x : v) x = static_cast<Elem>(d(rng));
      return v;
    };
    auto l1 = draw(2), l2 = draw(2), l3 = draw(1);
    GfVector coeffs(5, 0);
    if (l1) std::copy(l1->begin(), l1->end(), coeffs.begin());
    if (l2) std::copy(l2->begin(), l2->end(), coeffs.begin() + 2);
    if (l3) coeffs[4] = Field(p).neg((*l3)[0]);
    auto v = multiply(m, coeffs);
    CHECK(theta(lab, l1, l2, l3) == std::all_of(v.begin(), v.end(), [](Elem x) { return x == 0; }));
  }
}

TEST_CASE("dependency on the worked tree agrees with the rank oracle") {
  auto tree = fig3_tree();
  auto x = fixtures::fig2_matrix();
  for (std::uint64_t s = 0; s < 64; ++s) CHECK(is_dependent(tree, ElementSet(s)) == !fixtures::brute_independent(x, s));

  for (const auto& set : signatures(tree, {})) CHECK(set == SignatureSet{{std::nullopt, false}});
  // c1 + c3 = c6, while columns 1,2,3 are independent
  CHECK(signatures(tree, {0, 2, 5}).back().count({GfVector{}, true}) == 1);
  CHECK(signatures(tree, {0, 1, 2}).back().count({GfVector{}, true}) == 0);
}

TEST_CASE("dependency on matrix A under its exact decomposition") {
  auto a = fixtures::matrix_a();
  auto d = exact_decomposition(Matroid(VectorMatroid(a)));
  auto tree = build_enhanced(a, d.tree, d.width);
  for (std::uint64_t s = 0; s < 32; ++s) CHECK(is_dependent(tree, ElementSet(s)) == !fixtures::brute_independent(a, s));
}

TEST_CASE("signature DP on random matroids") {
  std::mt19937 rng(37);
  for (int trial = 0; trial < 60; ++trial) {
    const int p = trial % 2 ? 3 : 2;
    const std::size_t n = 4 + static_cast<std::size_t>(trial % 4);
    auto m = fixtures::random_matrix(rng, p, 2 + static_cast<std::size_t>(trial % 3), n);
    auto d = trial % 3 == 0 ? fixtures::random_tree(rng, static_cast<int>(n))
                            : exact_decomposition(Matroid(VectorMatroid(m))).tree;
    auto tree = build_enhanced(m, d, 3);
    for (const auto& lab : tree.labels()) {
      CHECK(rref(lab.matrix).reduced == lab.matrix);
      CHECK(lab.widths[0] <= 3);
      CHECK(lab.widths[2] <= 3);
    }
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
      auto sigs = signatures(tree, ElementSet(s));
      CHECK((sigs.back().count({GfVector{}, true}) == 1) == !fixtures::brute_independent(m, s));
      for (int i = 0; i < d.node_count(); ++i) {
        for (const auto& st : sigs[static_cast<std::size_t>(i)]) {
          if (!st.sig) continue;
          CHECK(st.sig->size() == static_cast<std::size_t>(tree.boundary_dim(i)));
          CHECK(st.support);
          for (int a = 2; a < p; ++a) {
            GfVector scaled = *st.sig;
            for (auto& c : scaled) c = Field(p).mul(c, static_cast<Elem>(a));
            CHECK(sigs[static_cast<std::size_t>(i)].count({scaled, true}) == 1);
          }
        }
      }
    }
  }
}

TEST_CASE("width bound and degenerate inputs") {
  auto x = fixtures::fig2_matrix();
  CHECK_THROWS_AS(build_enhanced(x, parse_tree("(node (node (node (leaf 1) (leaf 4)) (leaf 2)) "
                                               "(node (node (leaf 5) (leaf 3)) (leaf 6)))"),
                                 0),
                  LimitError);
  auto one = GfMatrix::from_rows(Field(3), {{1}});
  auto t = build_enhanced(one, DecompositionTree::leaf(0), 1);
  CHECK(t.label(0).is_leaf_zero());
  CHECK_FALSE(is_dependent(t, {0}));
  CHECK_FALSE(is_dependent(t, {}));
}

TEST_CASE("enhanced tree text format") {
  auto tree = fig3_tree();
  auto text = format_enhanced(tree);
  CHECK(text.rfind("field 2\n(node [N: 1 x (1|1|0); 1 1] (node [N: 2 x (1|1|1);", 0) == 0);
  CHECK(text.find("(leaf 2 [N: 0 x (0|0|0);])") != std::string::npos);
  CHECK(text.find("(leaf 3 [N: 1 x (0|0|1); 1])") != std::string::npos);
  auto back = parse_enhanced(text);
  CHECK(back == tree);
  CHECK(format_enhanced(back) == text);
  CHECK_NOTHROW(parse_enhanced("field 2\n(leaf 1 [N: 1 x (0|0|1); 1])"));  // a lone leaf may keep its boundary
  CHECK_THROWS_AS(parse_enhanced("field 2\n(node [N: 1 x (1|1|1); 1 1 1] (leaf 1 [N: 1 x (0|0|1); 1]) "
                                 "(leaf 2 [N: 1 x (0|0|1); 1]))"),
                  InputError);  // root boundary
  CHECK_THROWS_AS(parse_enhanced("field 2\n(node [N: 1 x (1|0|0); 1] (leaf 1 [N: 1 x (0|0|1); 1]) "
                                 "(leaf 2 [N: 1 x (0|0|1); 1]))"),
                  InputError);  // widths disagree with the children
}
