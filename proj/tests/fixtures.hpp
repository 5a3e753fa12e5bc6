#pragma once

#include <algorithm>
#include <bit>
#include <random>
#include <utility>
#include <vector>

#include "mbw/branch_decomposition.hpp"
#include "mbw/gf.hpp"
#include "mbw/matroid.hpp"

namespace fixtures {

// Matrix A of the introductory example, over GF(2).
inline mbw::GfMatrix matrix_a() {
  return mbw::GfMatrix::from_rows(mbw::Field(2), {{1, 0, 1, 0, 1}, {1, 1, 0, 0, 1}, {0, 1, 1, 1, 1}});
}

// The 4-vertex graph of Fig. 1: e1={1,2}, e2={2,3}, e3={3,4}, e4={1,4}, e5={1,3}.
inline std::vector<std::pair<int, int>> fig1_edges() { return {{1, 2}, {2, 3}, {3, 4}, {1, 4}, {1, 3}}; }

inline mbw::GfMatrix fig1_matrix() {
  return mbw::GfMatrix::from_rows(mbw::Field(2),
                                  {{1, 0, 0, 1, 1}, {1, 1, 0, 0, 0}, {0, 1, 1, 0, 1}, {0, 0, 1, 1, 0}});
}

// Matrix X of Fig. 2, GF(2).
inline mbw::GfMatrix fig2_matrix() {
  return mbw::GfMatrix::from_rows(mbw::Field(2),
                                  {{1, 1, 0, 0, 1, 1}, {0, 1, 0, 1, 1, 0}, {1, 1, 1, 0, 0, 0}, {0, 1, 0, 0, 0, 0}});
}

inline const char* fig2_tree() {
  return "(node (node (node (leaf 2) (leaf 3)) (leaf 1)) (node (node (leaf 5) (leaf 4)) (leaf 6)))";
}

inline mbw::GfMatrix random_matrix(std::mt19937& rng, int p, std::size_t rows, std::size_t cols,
                                   bool nonzero_columns = true) {
  std::uniform_int_distribution<int> d(0, p - 1);
  mbw::GfMatrix m(mbw::Field(p), rows, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    do {
      for (std::size_t r = 0; r < rows; ++r) m(r, c) = static_cast<mbw::Elem>(d(rng));
    } while (nonzero_columns && rows > 0 && m.column_is_zero(c));
  }
  return m;
}

// No nontrivial combination of the chosen columns vanishes (exhaustive over coefficients).
inline bool brute_independent(const mbw::GfMatrix& m, std::uint64_t mask) {
  const int p = m.field().p();
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < m.cols(); ++i)
    if (mask >> i & 1U) cols.push_back(i);
  std::vector<int> c(cols.size(), 0);
  for (;;) {
    std::size_t i = 0;
    while (i < c.size() && ++c[i] == p) c[i++] = 0;
    if (i == c.size()) return true;
    bool zero = true;
    for (std::size_t r = 0; r < m.rows() && zero; ++r) {
      long s = 0;
      for (std::size_t j = 0; j < cols.size(); ++j) s += c[j] * m(r, cols[j]);
      zero = s % p == 0;
    }
    if (zero) return false;
  }
}

inline int brute_rank(const mbw::GfMatrix& m) {
  int best = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m.cols()); ++mask) {
    const int k = std::popcount(mask);
    if (k > best && brute_independent(m, mask)) best = k;
  }
  return best;
}

// Every decomposition tree with leaf set s (leaf order within a node fixed by
// putting the least element on the left).
inline std::vector<mbw::DecompositionTree> all_trees(std::uint64_t s) {
  std::vector<mbw::DecompositionTree> out;
  if (std::popcount(s) == 1) {
    out.push_back(mbw::DecompositionTree::leaf(std::countr_zero(s)));
    return out;
  }
  const std::uint64_t low = s & (~s + 1);
  const std::uint64_t rest = s & ~low;
  for (std::uint64_t sub = (rest - 1) & rest;; sub = (sub - 1) & rest) {
    const std::uint64_t a = low | sub;
    for (const auto& l : all_trees(a))
      for (const auto& r : all_trees(s & ~a)) out.push_back(mbw::DecompositionTree::join(l, r));
    if (sub == 0) break;
  }
  return out;
}

// A random full binary tree over elements 0..n-1.
inline mbw::DecompositionTree random_tree(std::mt19937& rng, int n) {
  std::vector<mbw::DecompositionTree> parts;
  for (int e = 0; e < n; ++e) parts.push_back(mbw::DecompositionTree::leaf(e));
  std::shuffle(parts.begin(), parts.end(), rng);
  while (parts.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1);
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j) continue;
    parts[i] = mbw::DecompositionTree::join(parts[i], parts[j]);
    parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(j));
  }
  return parts.front();
}

}  // namespace fixtures
