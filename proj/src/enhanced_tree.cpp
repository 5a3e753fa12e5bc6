#include "mbw/enhanced_tree.hpp"

#include <map>
#include <sstream>

#include "mbw/errors.hpp"
#include "mbw/text_cursor.hpp"

namespace mbw {

CharacteristicLabel CharacteristicLabel::leaf_zero(const Field& f) { return {GfMatrix(f, 0, 0), {0, 0, 0}}; }

CharacteristicLabel CharacteristicLabel::leaf_one(const Field& f) {
  GfMatrix m(f, 1, 1);
  m(0, 0) = 1;
  return {m, {0, 0, 1}};
}

bool CharacteristicLabel::is_leaf_one() const {
  return widths == std::array<int, 3>{0, 0, 1} && matrix.rows() == 1 && matrix(0, 0) == 1;
}

std::size_t CharacteristicLabel::offset(int part) const {
  std::size_t o = 0;
  for (int i = 0; i < part; ++i) o += static_cast<std::size_t>(widths[static_cast<std::size_t>(i)]);
  return o;
}

GfVector CharacteristicLabel::column(int part, int j) const {
  return matrix.column(offset(part) + static_cast<std::size_t>(j));
}

bool CharacteristicLabel::well_formed() const {
  if (offset(3) != matrix.cols()) return false;
  if (rank(matrix) != matrix.rows()) return false;
  for (int part = 0; part < 3; ++part) {
    std::vector<std::size_t> cols;
    for (int j = 0; j < widths[static_cast<std::size_t>(part)]; ++j) cols.push_back(offset(part) + static_cast<std::size_t>(j));
    if (rank(matrix.select_columns(cols)) != cols.size()) return false;
  }
  return true;
}

bool operator<(const CharacteristicLabel& a, const CharacteristicLabel& b) {
  if (a.widths != b.widths) return a.widths < b.widths;
  if (a.matrix.rows() != b.matrix.rows()) return a.matrix.rows() < b.matrix.rows();
  auto x = a.matrix.entries(), y = b.matrix.entries();
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
}

std::string format_label(const CharacteristicLabel& n) {
  std::string out = "[N: " + std::to_string(n.matrix.rows()) + " x (" + std::to_string(n.widths[0]) + "|" +
                    std::to_string(n.widths[1]) + "|" + std::to_string(n.widths[2]) + ");";
  for (Elem e : n.matrix.entries()) out += " " + std::to_string(int(e));
  return out + "]";
}

std::string format_signature(const Signature& s) {
  if (!s) return "-";
  std::string out = "(";
  for (std::size_t i = 0; i < s->size(); ++i) out += (i ? "," : "") + std::to_string(int((*s)[i]));
  return out + ")";
}

namespace {

// Adds sum_j coeffs[j] * column(part, j) into acc.
void accumulate(const Field& f, const CharacteristicLabel& n, int part, const GfVector& coeffs, GfVector& acc) {
  const std::size_t off = n.offset(part);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] == 0) continue;
    for (std::size_t r = 0; r < n.matrix.rows(); ++r)
      acc[r] = f.add(acc[r], f.mul(coeffs[j], n.matrix(r, off + j)));
  }
}

bool length_ok(const Signature& s, int w) { return !s || s->size() == static_cast<std::size_t>(w); }

// All vectors of F^k in lexicographic order (k small).
std::vector<GfVector> all_tuples(const Field& f, int k) {
  std::vector<GfVector> out;
  GfVector v(static_cast<std::size_t>(k), 0);
  for (;;) {
    out.push_back(v);
    std::size_t i = 0;
    while (i < v.size() && ++v[i] == f.p()) v[i++] = 0;
    if (i == v.size()) return out;
  }
}

}  // namespace

bool theta(const CharacteristicLabel& n, const Signature& l1, const Signature& l2, const Signature& l3) {
  if (!length_ok(l1, n.widths[0]) || !length_ok(l2, n.widths[1]) || !length_ok(l3, n.widths[2])) return false;
  const Field& f = n.matrix.field();
  GfVector lhs(n.matrix.rows(), 0), rhs(n.matrix.rows(), 0);
  if (l1) accumulate(f, n, 0, *l1, lhs);
  if (l2) accumulate(f, n, 1, *l2, lhs);
  if (l3) accumulate(f, n, 2, *l3, rhs);
  return lhs == rhs;
}

EnhancedTree::EnhancedTree(Field field, DecompositionTree shape, std::vector<CharacteristicLabel> labels)
    : field_(field), shape_(std::move(shape)), labels_(std::move(labels)) {
  if (labels_.size() != static_cast<std::size_t>(shape_.node_count()))
    throw InputError("enhanced tree needs one label per node");
  for (int i = 0; i < shape_.node_count(); ++i) {
    const auto& lab = label(i);
    if (!(lab.matrix.field() == field_)) throw InputError("label field differs from tree field");
    if (shape_.is_leaf(i)) {
      if (!lab.is_leaf_zero() && !lab.is_leaf_one()) throw InputError("leaf labels must be (0) or (1)");
      continue;
    }
    if (!lab.well_formed()) throw InputError("malformed characteristic matrix " + format_label(lab));
    const auto& node = shape_.node(i);
    if (lab.widths[0] != boundary_dim(node.left) || lab.widths[1] != boundary_dim(node.right))
      throw InputError("part widths of " + format_label(lab) + " do not match its children");
  }
  // A lone leaf may keep its boundary: it is the tree of a lone Y1.
  if (!shape_.is_leaf(shape_.root()) && boundary_dim(shape_.root()) != 0)
    throw InputError("root label must have an empty third part");
}

int EnhancedTree::max_boundary_dim() const {
  int w = 0;
  for (const auto& l : labels_) w = std::max(w, l.widths[2]);
  return w;
}

std::vector<Subspace> boundary_subspaces(const GfMatrix& m, const DecompositionTree& d) {
  const int n = static_cast<int>(m.cols());
  check_labeling(d, n);
  const auto sets = d.leaf_sets();
  std::vector<Subspace> out;
  out.reserve(sets.size());
  for (ElementSet s : sets) {
    std::vector<GfVector> inside, outside;
    for (int e = 0; e < n; ++e) (s.contains(e) ? inside : outside).push_back(m.column(static_cast<std::size_t>(e)));
    out.push_back(intersect(Subspace::span(m.field(), m.rows(), inside), Subspace::span(m.field(), m.rows(), outside)));
  }
  return out;
}

EnhancedTree build_enhanced(const GfMatrix& m, const DecompositionTree& d, int t) {
  for (std::size_t c = 0; c < m.cols(); ++c)
    if (m.column_is_zero(c)) throw InputError("column " + std::to_string(c + 1) + " is zero (a loop)");
  const auto b = boundary_subspaces(m, d);
  const Field& f = m.field();
  std::vector<CharacteristicLabel> labels;
  for (int i = 0; i < d.node_count(); ++i) {
    const auto& bs = b[static_cast<std::size_t>(i)];
    if (static_cast<int>(bs.dim()) > t)
      throw LimitError("boundary of dimension " + std::to_string(bs.dim()) + " exceeds width bound " + std::to_string(t));
    if (d.is_leaf(i)) {
      labels.push_back(bs.dim() == 0 ? CharacteristicLabel::leaf_zero(f) : CharacteristicLabel::leaf_one(f));
      continue;
    }
    const auto& node = d.node(i);
    const auto& b1 = b[static_cast<std::size_t>(node.left)];
    const auto& b2 = b[static_cast<std::size_t>(node.right)];
    std::vector<GfVector> cols;
    for (const auto* part : {&b1, &b2, &bs}) cols.insert(cols.end(), part->basis().begin(), part->basis().end());
    auto reduced = rref(GfMatrix::from_columns(f, m.rows(), cols)).reduced;
    labels.push_back({reduced, {static_cast<int>(b1.dim()), static_cast<int>(b2.dim()), static_cast<int>(bs.dim())}});
  }
  return EnhancedTree(f, d, std::move(labels));
}

SignatureSet leaf_signatures(const CharacteristicLabel& n, bool in_x) {
  SignatureSet out{{std::nullopt, false}};
  if (in_x && n.is_leaf_one()) {
    const int p = n.matrix.field().p();
    for (int a = 1; a < p; ++a) out.insert({GfVector{static_cast<Elem>(a)}, true});
  }
  return out;
}

SignatureSet combine_signatures(const Field& f, const CharacteristicLabel& n, const SignatureSet& left,
                                const SignatureSet& right) {
  // N3 has independent columns, so each reachable vector has one preimage.
  std::map<GfVector, GfVector> preimage;
  for (const auto& l : all_tuples(f, n.widths[2])) {
    GfVector v(n.matrix.rows(), 0);
    accumulate(f, n, 2, l, v);
    preimage.emplace(std::move(v), l);
  }
  SignatureSet out;
  for (const auto& mu : left) {
    if (!length_ok(mu.sig, n.widths[0])) continue;
    for (const auto& ga : right) {
      if (!length_ok(ga.sig, n.widths[1])) continue;
      if (!mu.sig && !ga.sig) {
        out.insert({std::nullopt, mu.support || ga.support});
        continue;
      }
      GfVector v(n.matrix.rows(), 0);
      if (mu.sig) accumulate(f, n, 0, *mu.sig, v);
      if (ga.sig) accumulate(f, n, 1, *ga.sig, v);
      auto it = preimage.find(v);
      if (it != preimage.end()) out.insert({it->second, mu.support || ga.support});
    }
  }
  return out;
}

std::vector<SignatureSet> signatures(const EnhancedTree& tree, ElementSet x) {
  const auto& d = tree.shape();
  std::vector<SignatureSet> out(static_cast<std::size_t>(d.node_count()));
  for (int i = 0; i < d.node_count(); ++i) {
    const auto& node = d.node(i);
    out[static_cast<std::size_t>(i)] =
        d.is_leaf(i) ? leaf_signatures(tree.label(i), x.contains(node.element))
                     : combine_signatures(tree.field(), tree.label(i), out[static_cast<std::size_t>(node.left)],
                                          out[static_cast<std::size_t>(node.right)]);
  }
  return out;
}

bool is_dependent(const EnhancedTree& tree, ElementSet x) {
  const auto sigs = signatures(tree, x);
  return sigs.back().count({GfVector{}, true}) > 0;
}

std::string format_enhanced(const EnhancedTree& tree) {
  const auto& d = tree.shape();
  auto go = [&](auto&& self, int v) -> std::string {
    const auto& n = d.node(v);
    if (n.left < 0) return "(leaf " + std::to_string(n.element + 1) + " " + format_label(tree.label(v)) + ")";
    return "(node " + format_label(tree.label(v)) + " " + self(self, n.left) + " " + self(self, n.right) + ")";
  };
  return "field " + std::to_string(tree.field().p()) + "\n" + go(go, d.root()) + "\n";
}

CharacteristicLabel parse_label(TextCursor& in, const Field& f) {
  in.expect('[');
  in.expect_word("N");
  in.expect(':');
  const long long rows = in.integer();
  in.expect_word("x");
  in.expect('(');
  std::array<int, 3> w{};
  for (int i = 0; i < 3; ++i) {
    if (i) in.expect('|');
    const long long v = in.integer();
    if (v < 0 || v > 64) in.fail("part width out of range");
    w[static_cast<std::size_t>(i)] = static_cast<int>(v);
  }
  in.expect(')');
  in.expect(';');
  if (rows < 0 || rows > 64) in.fail("row count out of range");
  const std::size_t cols = static_cast<std::size_t>(w[0] + w[1] + w[2]);
  GfMatrix m(f, static_cast<std::size_t>(rows), cols);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const long long v = in.integer();
      if (v < 0 || v >= f.p()) in.fail("entry " + std::to_string(v) + " outside the field");
      m(r, c) = static_cast<Elem>(v);
    }
  in.expect(']');
  return {m, w};
}

namespace {

struct ParsedNode {
  DecompositionTree shape;
  std::vector<CharacteristicLabel> labels;
};

ParsedNode parse_enhanced_node(TextCursor& in, const Field& f, int depth) {
  if (depth > 4096) in.fail("tree too deep");
  in.expect('(');
  const std::string kind = in.word();
  ParsedNode out{DecompositionTree::leaf(0), {}};
  if (kind == "leaf") {
    const long long id = in.integer();
    if (id < 1 || id > ElementSet::kMaxElements) in.fail("leaf id out of range");
    out.shape = DecompositionTree::leaf(static_cast<int>(id - 1));
    out.labels.push_back(parse_label(in, f));
  } else if (kind == "node") {
    auto lab = parse_label(in, f);
    auto l = parse_enhanced_node(in, f, depth + 1);
    auto r = parse_enhanced_node(in, f, depth + 1);
    out.shape = DecompositionTree::join(l.shape, r.shape);
    out.labels = std::move(l.labels);
    out.labels.insert(out.labels.end(), r.labels.begin(), r.labels.end());
    out.labels.push_back(std::move(lab));
  } else {
    in.fail("expected 'node' or 'leaf'");
  }
  in.expect(')');
  return out;
}

}  // namespace

EnhancedTree parse_enhanced(const std::string& text) {
  TextCursor in(text);
  in.expect_word("field");
  Field f(static_cast<int>(in.integer()));
  auto parsed = parse_enhanced_node(in, f, 0);
  if (!in.at_end()) in.fail("trailing input after tree");
  check_labeling(parsed.shape, parsed.shape.leaf_count());
  return EnhancedTree(f, std::move(parsed.shape), std::move(parsed.labels));
}

}  // namespace mbw
