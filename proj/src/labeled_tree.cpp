#include "mbw/labeled_tree.hpp"

#include "mbw/errors.hpp"

namespace mbw {

int TreeAlphabet::intern(TreeSymbol s) {
  std::lock_guard lock(mutex_);
  auto it = by_name_.find(s.name);
  if (it != by_name_.end()) return it->second;
  const int id = static_cast<int>(symbols_.size());
  by_name_.emplace(s.name, id);
  symbols_.push_back(std::move(s));
  return id;
}

const TreeSymbol& TreeAlphabet::symbol(int id) const {
  std::lock_guard lock(mutex_);
  if (id < 0 || id >= static_cast<int>(symbols_.size())) throw InputError("unknown symbol id " + std::to_string(id));
  return symbols_[static_cast<std::size_t>(id)];
}

int TreeAlphabet::size() const {
  std::lock_guard lock(mutex_);
  return static_cast<int>(symbols_.size());
}

std::vector<int> TreeAlphabet::ids() const {
  std::vector<int> out(static_cast<std::size_t>(size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
  return out;
}

std::optional<int> TreeAlphabet::find(const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

int TreeAlphabet::color_bit(const std::string& color) const {
  for (std::size_t i = 0; i < colors_.size(); ++i)
    if (colors_[i] == color) return static_cast<int>(i);
  return -1;
}

int TreeAlphabet::characteristic(const CharacteristicLabel& label, bool leaf, std::uint32_t colors) {
  TreeSymbol s;
  s.name = (leaf ? "leaf " : "") + format_label(label);
  for (std::size_t i = 0; i < colors_.size(); ++i)
    if (colors >> i & 1U) s.name += " " + colors_[i];
  s.leaf = leaf;
  s.colors = colors;
  s.payload = std::make_shared<CharacteristicPayload>(label);
  return intern(std::move(s));
}

LabeledTree labeled_from_enhanced(const EnhancedTree& t, TreeAlphabet& alphabet,
                                  const std::map<std::string, ElementSet>& colors) {
  for (const auto& [name, set] : colors)
    if (alphabet.color_bit(name) < 0) throw InputError("color '" + name + "' is not in the alphabet");
  LabeledTree out{t.shape(), {}};
  for (int i = 0; i < t.shape().node_count(); ++i) {
    std::uint32_t mask = 0;
    if (t.shape().is_leaf(i)) {
      const int e = t.shape().node(i).element;
      for (const auto& [name, set] : colors)
        if (set.contains(e)) mask |= 1U << alphabet.color_bit(name);
    }
    out.symbols.push_back(alphabet.characteristic(t.label(i), t.shape().is_leaf(i), mask));
  }
  return out;
}

Annotation annotate_leaves(const LabeledTree& t, const std::vector<ElementSet>& sets) {
  Annotation a(static_cast<std::size_t>(t.node_count()), 0);
  for (int i = 0; i < t.node_count(); ++i) {
    if (!t.shape.is_leaf(i)) continue;
    const int e = t.shape.node(i).element;
    for (std::size_t k = 0; k < sets.size(); ++k)
      if (sets[k].contains(e)) a[static_cast<std::size_t>(i)] |= std::uint64_t{1} << k;
  }
  return a;
}

std::vector<ElementSet> leaf_sets_of(const LabeledTree& t, const Annotation& a, int tracks) {
  std::vector<ElementSet> out(static_cast<std::size_t>(tracks));
  for (int i = 0; i < t.node_count(); ++i) {
    if (!t.shape.is_leaf(i)) continue;
    for (int k = 0; k < tracks; ++k)
      if (a[static_cast<std::size_t>(i)] >> k & 1U) out[static_cast<std::size_t>(k)].insert(t.shape.node(i).element);
  }
  return out;
}

}  // namespace mbw
