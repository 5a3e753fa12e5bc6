#include "mbw/branch_decomposition.hpp"

#include <limits>

#include "mbw/errors.hpp"
#include "mbw/text_cursor.hpp"

namespace mbw {

DecompositionTree DecompositionTree::leaf(int element) {
  DecompositionTree d;
  d.nodes_.push_back(Node{-1, -1, element});
  return d;
}

DecompositionTree DecompositionTree::join(const DecompositionTree& left, const DecompositionTree& right) {
  DecompositionTree d;
  d.nodes_ = left.nodes_;
  const int offset = static_cast<int>(left.nodes_.size());
  for (Node n : right.nodes_) {
    if (n.left >= 0) {
      n.left += offset;
      n.right += offset;
    }
    d.nodes_.push_back(n);
  }
  d.nodes_.push_back(Node{left.root(), offset + right.root(), -1});
  return d;
}

std::vector<ElementSet> DecompositionTree::leaf_sets() const {
  std::vector<ElementSet> sets(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    sets[i] = n.left < 0 ? ElementSet::single(n.element)
                         : sets[static_cast<std::size_t>(n.left)] | sets[static_cast<std::size_t>(n.right)];
  }
  return sets;
}

std::vector<int> DecompositionTree::leaf_of_element(int n) const {
  std::vector<int> out(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].left < 0 && nodes_[i].element >= 0 && nodes_[i].element < n)
      out[static_cast<std::size_t>(nodes_[i].element)] = static_cast<int>(i);
  return out;
}

DecompositionTree DecompositionTree::with_children_swapped(int i) const {
  // rebuild so that the children-before-parent order still holds
  auto rebuild = [&](auto&& self, int v) -> DecompositionTree {
    const Node& n = node(v);
    if (n.left < 0) return leaf(n.element);
    auto l = self(self, n.left);
    auto r = self(self, n.right);
    return v == i ? join(r, l) : join(l, r);
  };
  return rebuild(rebuild, root());
}

void check_labeling(const DecompositionTree& d, int n) {
  if (d.leaf_count() != n)
    throw InputError("decomposition has " + std::to_string(d.leaf_count()) + " leaves for " + std::to_string(n) +
                     " elements");
  ElementSet seen;
  for (const auto& node : d.nodes()) {
    if (node.left >= 0) continue;
    if (node.element < 0 || node.element >= n)
      throw InputError("leaf element " + std::to_string(node.element + 1) + " is out of range");
    if (seen.contains(node.element))
      throw InputError("element " + std::to_string(node.element + 1) + " labels two leaves");
    seen.insert(node.element);
  }
}

int width(const Matroid& m, const DecompositionTree& d) {
  check_labeling(d, m.size());
  int w = 0;
  for (ElementSet s : d.leaf_sets()) w = std::max(w, connectivity(m, s));
  return w;
}

Decomposition exact_decomposition(const Matroid& m, int bound) {
  const int n = m.size();
  if (n == 0) throw InputError("cannot decompose an empty ground set");
  if (n > bound) throw LimitError("exact decomposition limited to " + std::to_string(bound) + " elements");

  const std::size_t total = std::size_t{1} << n;
  const std::uint64_t full = total - 1;
  std::vector<int> rank(total);
  for (std::size_t s = 0; s < total; ++s) rank[s] = rank_of(m, ElementSet(s));
  auto kappa = [&](std::uint64_t s) { return rank[s] + rank[full & ~s] - rank[full]; };

  // best[s]: least width of a subtree with leaf set s (counting s's own edge);
  // split[s]: the chosen part containing the least element of s
  std::vector<int> best(total, std::numeric_limits<int>::max());
  std::vector<std::uint64_t> split(total, 0);
  for (std::uint64_t s = 1; s < total; ++s) {
    if (std::popcount(s) == 1) {
      best[s] = kappa(s);
      continue;
    }
    const std::uint64_t low = s & (~s + 1);
    const std::uint64_t rest = s & ~low;
    int choice = std::numeric_limits<int>::max();
    // parts containing `low`, enumerated as low | sub for proper subsets sub of rest
    for (std::uint64_t sub = (rest - 1) & rest;; sub = (sub - 1) & rest) {
      const std::uint64_t a = low | sub;
      const std::uint64_t b = s & ~a;
      const int w = std::max(best[a], best[b]);
      if (w < choice) {
        choice = w;
        split[s] = a;
      }
      if (sub == 0) break;
    }
    best[s] = std::max(choice, kappa(s));
  }

  auto build = [&](auto&& self, std::uint64_t s) -> DecompositionTree {
    if (std::popcount(s) == 1) return DecompositionTree::leaf(std::countr_zero(s));
    return DecompositionTree::join(self(self, split[s]), self(self, s & ~split[s]));
  };
  return Decomposition{build(build, full), best[full]};
}

std::optional<Decomposition> greedy_decomposition(const Matroid& m, int t) {
  const int n = m.size();
  if (n == 0) return std::nullopt;
  std::vector<DecompositionTree> parts;
  std::vector<ElementSet> sets;
  for (int e = 0; e < n; ++e) {
    parts.push_back(DecompositionTree::leaf(e));
    sets.push_back(ElementSet::single(e));
  }
  while (parts.size() > 1) {
    std::size_t bi = 0, bj = 1;
    int bk = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < parts.size(); ++i)
      for (std::size_t j = i + 1; j < parts.size(); ++j) {
        const int k = connectivity(m, sets[i] | sets[j]);
        if (k < bk) {
          bk = k;
          bi = i;
          bj = j;
        }
      }
    parts[bi] = DecompositionTree::join(parts[bi], parts[bj]);
    sets[bi] = sets[bi] | sets[bj];
    parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(bj));
    sets.erase(sets.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  const int w = width(m, parts.front());
  if (w > 3 * t) return std::nullopt;
  return Decomposition{parts.front(), w};
}

std::string format_tree(const DecompositionTree& d) {
  auto go = [&](auto&& self, int v) -> std::string {
    const auto& n = d.node(v);
    if (n.left < 0) return "(leaf " + std::to_string(n.element + 1) + ")";
    return "(node " + self(self, n.left) + " " + self(self, n.right) + ")";
  };
  return go(go, d.root());
}

namespace {

DecompositionTree parse_subtree(TextCursor& in, int depth) {
  if (depth > 4096) in.fail("tree too deep");
  in.expect('(');
  const std::string kind = in.word();
  DecompositionTree out;
  if (kind == "leaf") {
    const long long id = in.integer();
    if (id < 1 || id > ElementSet::kMaxElements) in.fail("leaf id out of range");
    out = DecompositionTree::leaf(static_cast<int>(id - 1));
  } else if (kind == "node") {
    auto l = parse_subtree(in, depth + 1);
    auto r = parse_subtree(in, depth + 1);
    out = DecompositionTree::join(l, r);
  } else {
    in.fail("expected 'node' or 'leaf'");
  }
  in.expect(')');
  return out;
}

}  // namespace

DecompositionTree parse_tree(const std::string& text) {
  TextCursor in(text);
  auto d = parse_subtree(in, 0);
  if (!in.at_end()) in.fail("trailing input after tree");
  return d;
}

}  // namespace mbw
