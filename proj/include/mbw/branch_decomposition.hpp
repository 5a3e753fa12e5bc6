#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mbw/element_set.hpp"
#include "mbw/matroid.hpp"

namespace mbw {

/// A full binary tree whose leaves carry ground-set elements. Nodes are stored
/// children-before-parent; the root is the last node.
class DecompositionTree {
 public:
  struct Node {
    int left = -1;
    int right = -1;
    int element = -1;  // leaves only, 0-based
    friend bool operator==(const Node&, const Node&) = default;
  };

  static DecompositionTree leaf(int element);
  static DecompositionTree join(const DecompositionTree& left, const DecompositionTree& right);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  int root() const { return static_cast<int>(nodes_.size()) - 1; }
  bool is_leaf(int i) const { return node(i).left < 0; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int leaf_count() const { return (node_count() + 1) / 2; }

  /// Elements below each node (the sets written l~(s)).
  std::vector<ElementSet> leaf_sets() const;
  /// Leaf node index of each element, -1 for elements not present.
  std::vector<int> leaf_of_element(int n) const;

  /// Swaps the children of node i.
  DecompositionTree with_children_swapped(int i) const;

  friend bool operator==(const DecompositionTree&, const DecompositionTree&) = default;

 private:
  std::vector<Node> nodes_;
};

/// Throws InputError unless the leaves are labeled bijectively by {0..n-1}.
void check_labeling(const DecompositionTree& d, int n);

/// max over nodes of kappa(l~(s)).
int width(const Matroid& m, const DecompositionTree& d);

struct Decomposition {
  DecompositionTree tree;
  int width;
};

/// A minimum-width decomposition by dynamic programming over element subsets.
/// Throws LimitError above `bound` elements, InputError on an empty ground set.
Decomposition exact_decomposition(const Matroid& m, int bound = 10);

/// Greedy pairwise merging of parts minimizing kappa of the union. Returns the
/// result when its width is at most 3t.
std::optional<Decomposition> greedy_decomposition(const Matroid& m, int t);

/// `(node L R)` / `(leaf <id>)` with 1-based ids.
std::string format_tree(const DecompositionTree& d);
DecompositionTree parse_tree(const std::string& text);

}  // namespace mbw
