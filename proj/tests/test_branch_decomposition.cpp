#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "mbw/branch_decomposition.hpp"
#include "mbw/errors.hpp"

using namespace mbw;

namespace {

int width_by_subspaces(const VectorMatroid& v, const DecompositionTree& d) {
  int w = 0;
  for (ElementSet s : d.leaf_sets()) w = std::max(w, connectivity_by_subspaces(v, s));
  return w;
}

int brute_branch_width(const Matroid& m) {
  int best = 1 << 20;
  for (const auto& t : fixtures::all_trees(m.ground().bits())) best = std::min(best, width(m, t));
  return best;
}

}  // namespace

TEST_CASE("width of the printed decomposition") {
  Matroid x = VectorMatroid(fixtures::fig2_matrix());
  auto d = parse_tree(fixtures::fig2_tree());
  CHECK(width(x, d) == 1);
  CHECK(format_tree(d) == fixtures::fig2_tree());

  Matroid one = VectorMatroid(GfMatrix::from_rows(Field(2), {{1}}));
  CHECK(width(one, DecompositionTree::leaf(0)) == 0);

  CHECK_THROWS_AS(width(x, parse_tree("(node (leaf 1) (leaf 2))")), InputError);
  CHECK_THROWS_AS(width(x, parse_tree("(node (node (node (leaf 2) (leaf 3)) (leaf 1)) "
                                      "(node (node (leaf 5) (leaf 4)) (leaf 5)))")),
                  InputError);
}

TEST_CASE("width against subspace intersections on random inputs") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    VectorMatroid v(fixtures::random_matrix(rng, trial % 2 ? 3 : 2, 4, 7));
    Matroid m = v;
    auto d = fixtures::random_tree(rng, 7);
    const int w = width(m, d);
    CHECK(w == width_by_subspaces(v, d));
    int singles = 0;
    for (int e = 0; e < 7; ++e) singles = std::max(singles, connectivity(m, ElementSet::single(e)));
    CHECK(w >= singles);
    for (int i = 0; i < d.node_count(); ++i)
      if (!d.is_leaf(i)) CHECK(width(m, d.with_children_swapped(i)) == w);
  }
}

TEST_CASE("exact decomposition") {
  Matroid one = VectorMatroid(GfMatrix::from_rows(Field(2), {{1}}));
  CHECK(exact_decomposition(one).width == 0);

  Matroid x = VectorMatroid(fixtures::fig2_matrix());
  auto dx = exact_decomposition(x);
  CHECK(dx.width == 1);
  CHECK(width(x, dx.tree) == 1);

  Matroid a = VectorMatroid(fixtures::matrix_a());
  auto da = exact_decomposition(a);
  CHECK(da.width == brute_branch_width(a));
  CHECK(width(a, da.tree) == da.width);

  std::mt19937 rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    Matroid m = VectorMatroid(fixtures::random_matrix(rng, trial % 2 ? 3 : 2, 3 + trial % 2, 6));
    auto d = exact_decomposition(m);
    CHECK(d.width == brute_branch_width(m));
    CHECK(width(m, d.tree) == d.width);
    // deterministic
    CHECK(exact_decomposition(m).tree == d.tree);
  }

  Matroid big = VectorMatroid(GfMatrix::from_rows(Field(2), {std::vector<int>(11, 1)}));
  CHECK_THROWS_AS(exact_decomposition(big), LimitError);
}

TEST_CASE("greedy decomposition") {
  std::mt19937 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    Matroid m = VectorMatroid(fixtures::random_matrix(rng, 2, 4, 7));
    auto full = rank_of(m, m.ground());
    auto g = greedy_decomposition(m, full);
    REQUIRE(g);
    CHECK(width(m, g->tree) == g->width);
    CHECK(g->width >= exact_decomposition(m).width);
  }
  Matroid x = VectorMatroid(fixtures::fig2_matrix());
  auto gx = greedy_decomposition(x, 1);
  REQUIRE(gx);
  CHECK(width(x, gx->tree) <= 3);

  // two disjoint triangles
  Matroid sum = graphic_matroid({{1, 2}, {2, 3}, {1, 3}, {4, 5}, {5, 6}, {4, 6}});
  auto gs = greedy_decomposition(sum, 1);
  REQUIRE(gs);
  CHECK(gs->width == 1);
}

TEST_CASE("tree text format") {
  CHECK(format_tree(parse_tree("(leaf 3)")) == "(leaf 3)");
  CHECK(format_tree(parse_tree("  (node\n (leaf 1)(leaf 2) ) ")) == "(node (leaf 1) (leaf 2))");
  CHECK_THROWS_AS(parse_tree("(node (leaf 1))"), InputError);
  CHECK_THROWS_AS(parse_tree("(leaf 0)"), InputError);
  CHECK_THROWS_AS(parse_tree("(leaf 1) x"), InputError);
  try {
    parse_tree("(node (leaf 1)\n (lef 2))");
    FAIL("no error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
