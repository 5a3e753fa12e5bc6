#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mbw/branch_decomposition.hpp"
#include "mbw/enhanced_tree.hpp"

namespace mbw {

/// Extra data a tree symbol may carry (enhanced-tree label, grammar label).
struct SymbolPayload {
  virtual ~SymbolPayload() = default;
};

struct CharacteristicPayload : SymbolPayload {
  explicit CharacteristicPayload(CharacteristicLabel l) : label(std::move(l)) {}
  CharacteristicLabel label;
};

struct TreeSymbol {
  std::string name;  // unique within an alphabet
  bool leaf = false;
  std::uint32_t colors = 0;  // bit i set: the element carries color i
  std::shared_ptr<const SymbolPayload> payload;

  const CharacteristicLabel* characteristic() const {
    auto* p = dynamic_cast<const CharacteristicPayload*>(payload.get());
    return p ? &p->label : nullptr;
  }
};

/// A growing set of symbols, interned by name. Safe for concurrent use;
/// references returned by symbol() stay valid.
class TreeAlphabet {
 public:
  explicit TreeAlphabet(std::vector<std::string> colors = {}) : colors_(std::move(colors)) {}

  int intern(TreeSymbol s);
  const TreeSymbol& symbol(int id) const;
  int size() const;
  std::vector<int> ids() const;
  std::optional<int> find(const std::string& name) const;

  const std::vector<std::string>& colors() const { return colors_; }
  /// Bit index of a color, or -1.
  int color_bit(const std::string& color) const;

  /// The symbol for an enhanced-tree label at a leaf or internal node, with
  /// the given color mask.
  int characteristic(const CharacteristicLabel& label, bool leaf, std::uint32_t colors = 0);

 private:
  std::vector<std::string> colors_;
  mutable std::mutex mutex_;
  std::deque<TreeSymbol> symbols_;
  std::map<std::string, int> by_name_;
};

/// A full binary tree over alphabet symbols; leaves keep the element they
/// stand for (for trees of matroids) in the shape.
struct LabeledTree {
  DecompositionTree shape;
  std::vector<int> symbols;

  int node_count() const { return shape.node_count(); }
};

/// Per-node bit vectors over the free-variable tracks.
using Annotation = std::vector<std::uint64_t>;

/// Enhanced tree as a labeled tree; `colors` names element sets per color of
/// the alphabet.
LabeledTree labeled_from_enhanced(const EnhancedTree& t, TreeAlphabet& alphabet,
                                  const std::map<std::string, ElementSet>& colors = {});

/// Leaf bits for element sets: track i marks the leaves of sets[i].
Annotation annotate_leaves(const LabeledTree& t, const std::vector<ElementSet>& sets);

/// The element sets marked on each track (leaf nodes only).
std::vector<ElementSet> leaf_sets_of(const LabeledTree& t, const Annotation& a, int tracks);

}  // namespace mbw
