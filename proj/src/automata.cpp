#include "mbw/automata.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "mbw/errors.hpp"

namespace mbw {

namespace {

struct VecHash {
  std::size_t operator()(const std::vector<StateId>& v) const {
    std::size_t h = v.size();
    for (StateId x : v) h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

struct Key {
  StateId l, r;
  int symbol;
  std::uint64_t bits;
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::size_t h = std::hash<std::uint64_t>()((std::uint64_t{k.l} << 32) | k.r);
    h ^= std::hash<std::uint64_t>()((static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.symbol)) << 40) ^ k.bits) +
         0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

constexpr StateId kLeafMarker = 0xFFFFFFFFU;

/// Interns keys to dense ids; references to stored keys stay valid.
template <class K, class H = std::hash<K>>
class Interner {
 public:
  StateId intern(const K& k) {
    auto it = ids_.find(k);
    if (it != ids_.end()) return it->second;
    const auto id = static_cast<StateId>(keys_.size());
    keys_.push_back(k);
    ids_.emplace(k, id);
    return id;
  }
  const K& key(StateId id) const { return keys_[id]; }
  std::size_t size() const { return keys_.size(); }

 private:
  std::deque<K> keys_;
  std::unordered_map<K, StateId, H> ids_;
};

/// Singleton spans for deterministic automata.
class Singletons {
 public:
  std::span<const StateId> of(StateId q) {
    std::lock_guard lock(mutex_);
    while (ids_.size() <= q) ids_.push_back(static_cast<StateId>(ids_.size()));
    return {&ids_[q], 1};
  }

 private:
  std::mutex mutex_;
  std::deque<StateId> ids_;
};

bool bit(std::uint64_t bits, int track) { return (bits >> track) & 1U; }

// ------------------------------------------------------------------ atoms

/// Deterministic automaton with a small state space given by two functions.
class AtomAutomaton : public Automaton {
 public:
  AtomAutomaton(std::shared_ptr<TreeAlphabet> a, int tracks) : Automaton(std::move(a), tracks) {}
  bool deterministic() const override { return true; }
  std::span<const StateId> leaf(int symbol, std::uint64_t bits) override { return single_.of(on_leaf(symbol, bits)); }
  std::span<const StateId> step(StateId l, StateId r, int symbol, std::uint64_t bits) override {
    return single_.of(on_step(l, r, symbol, bits));
  }
  std::size_t state_count() const override { return states(); }

 protected:
  virtual StateId on_leaf(int symbol, std::uint64_t bits) = 0;
  virtual StateId on_step(StateId l, StateId r, int symbol, std::uint64_t bits) = 0;
  virtual std::size_t states() const = 0;

 private:
  Singletons single_;
};

class ConstAtom : public AtomAutomaton {
 public:
  ConstAtom(std::shared_ptr<TreeAlphabet> a, int tracks, bool value) : AtomAutomaton(std::move(a), tracks), value_(value) {}
  bool accepting(StateId) override { return value_; }
  bool dead(StateId) override { return !value_; }
  bool full(StateId) override { return value_; }

 protected:
  StateId on_leaf(int, std::uint64_t) override { return 0; }
  StateId on_step(StateId, StateId, int, std::uint64_t) override { return 0; }
  std::size_t states() const override { return 1; }

 private:
  bool value_;
};

// none / exactly one / more
class SingAtom : public AtomAutomaton {
 public:
  SingAtom(std::shared_ptr<TreeAlphabet> a, int tracks, int v) : AtomAutomaton(std::move(a), tracks), v_(v) {}
  bool accepting(StateId q) override { return q == 1; }
  bool dead(StateId q) override { return q == 2; }

 protected:
  StateId on_leaf(int, std::uint64_t bits) override { return bit(bits, v_); }
  StateId on_step(StateId l, StateId r, int, std::uint64_t bits) override {
    return std::min<StateId>(2, l + r + bit(bits, v_));
  }
  std::size_t states() const override { return 3; }

 private:
  int v_;
};

/// A condition checked at every node independently; state 1 once violated.
class NodewiseAtom : public AtomAutomaton {
 public:
  using Check = std::function<bool(int symbol, std::uint64_t bits, bool is_leaf)>;
  NodewiseAtom(std::shared_ptr<TreeAlphabet> a, int tracks, Check ok) : AtomAutomaton(std::move(a), tracks), ok_(std::move(ok)) {}
  bool accepting(StateId q) override { return q == 0; }
  bool dead(StateId q) override { return q == 1; }

 protected:
  StateId on_leaf(int symbol, std::uint64_t bits) override { return ok_(symbol, bits, true) ? 0 : 1; }
  StateId on_step(StateId l, StateId r, int symbol, std::uint64_t bits) override {
    return (l | r) != 0 || !ok_(symbol, bits, false) ? 1 : 0;
  }
  std::size_t states() const override { return 2; }

 private:
  Check ok_;
};

// 0: unmarked subtree, 1: marked only at the subtree root, 2: marked below a root
class RootAtom : public AtomAutomaton {
 public:
  RootAtom(std::shared_ptr<TreeAlphabet> a, int tracks, int v) : AtomAutomaton(std::move(a), tracks), v_(v) {}
  bool accepting(StateId q) override { return q != 2; }
  bool dead(StateId q) override { return q == 2; }

 protected:
  StateId on_leaf(int, std::uint64_t bits) override { return bit(bits, v_); }
  StateId on_step(StateId l, StateId r, int, std::uint64_t bits) override {
    if (l != 0 || r != 0) return 2;
    return bit(bits, v_);
  }
  std::size_t states() const override { return 3; }

 private:
  int v_;
};

// lchild(s,t) / rchild(s,t) for singleton tracks.
// 0: neither seen, 1: t at the subtree root, 2: satisfied, 3: violated
class ChildAtom : public AtomAutomaton {
 public:
  ChildAtom(std::shared_ptr<TreeAlphabet> a, int tracks, int s, int t, bool left)
      : AtomAutomaton(std::move(a), tracks), s_(s), t_(t), left_(left) {}
  bool accepting(StateId q) override { return q == 2; }
  bool dead(StateId q) override { return q == 3; }

 protected:
  StateId on_leaf(int, std::uint64_t bits) override {
    if (bit(bits, s_)) return 3;
    return bit(bits, t_) ? 1 : 0;
  }
  StateId on_step(StateId l, StateId r, int, std::uint64_t bits) override {
    const bool bs = bit(bits, s_), bt = bit(bits, t_);
    if (l == 3 || r == 3) return 3;
    if (l == 2 || r == 2) return bs || bt ? 3 : 2;
    if (bs) {
      if (bt) return 3;
      const bool ok = left_ ? (l == 1 && r == 0) : (r == 1 && l == 0);
      return ok ? 2 : 3;
    }
    if (l == 1 || r == 1) return 3;
    return bt ? 1 : 0;
  }
  std::size_t states() const override { return 4; }

 private:
  int s_, t_;
  bool left_;
};

class ModAtom : public AtomAutomaton {
 public:
  ModAtom(std::shared_ptr<TreeAlphabet> a, int tracks, int v, int rem, int q)
      : AtomAutomaton(std::move(a), tracks), v_(v), rem_(rem), q_(q) {}
  bool accepting(StateId s) override { return static_cast<int>(s) == rem_; }

 protected:
  StateId on_leaf(int, std::uint64_t bits) override { return bit(bits, v_) % static_cast<StateId>(q_); }
  StateId on_step(StateId l, StateId r, int, std::uint64_t bits) override {
    return (l + r + bit(bits, v_)) % static_cast<StateId>(q_);
  }
  std::size_t states() const override { return static_cast<std::size_t>(q_); }

 private:
  int v_, rem_, q_;
};

// --------------------------------------------------------- dependency DP

class EnhancedDepAutomaton : public Automaton {
 public:
  EnhancedDepAutomaton(std::shared_ptr<TreeAlphabet> a, int tracks, int track, Field f)
      : Automaton(std::move(a), tracks), track_(track), field_(f) {}
  bool deterministic() const override { return true; }

  std::span<const StateId> leaf(int symbol, std::uint64_t bits) override {
    const bool in_x = bit(bits, track_);
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find({kLeafMarker, in_x, symbol, 0});
      if (it != cache_.end()) return single_.of(it->second);
    }
    const auto& lab = label_of(symbol);
    auto sigs = leaf_signatures(lab, in_x);
    std::lock_guard lock(mutex_);
    const StateId q = states_.intern(sigs);
    cache_.emplace(Key{kLeafMarker, in_x, symbol, 0}, q);
    return single_.of(q);
  }

  std::span<const StateId> step(StateId l, StateId r, int symbol, std::uint64_t) override {
    const Key key{l, r, symbol, 0};
    const SignatureSet* left;
    const SignatureSet* right;
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return single_.of(it->second);
      left = &states_.key(l);
      right = &states_.key(r);
    }
    auto sigs = combine_signatures(field_, label_of(symbol), *left, *right);
    std::lock_guard lock(mutex_);
    const StateId q = states_.intern(sigs);
    cache_.emplace(key, q);
    return single_.of(q);
  }

  bool accepting(StateId q) override {
    std::lock_guard lock(mutex_);
    return states_.key(q).count({GfVector{}, true}) > 0;
  }

  std::size_t state_count() const override {
    std::lock_guard lock(mutex_);
    return states_.size();
  }

 private:
  const CharacteristicLabel& label_of(int symbol) {
    const auto& s = alphabet()->symbol(symbol);
    const auto* n = s.characteristic();
    if (!n) throw InputError("symbol '" + s.name + "' carries no characteristic matrix");
    if (!(n->matrix.field() == field_)) throw InputError("symbol '" + s.name + "' is over a different field");
    return *n;
  }

  struct SetHash {
    std::size_t operator()(const SignatureSet& s) const {
      std::size_t h = s.size();
      for (const auto& st : s) {
        std::size_t x = st.sig ? st.sig->size() + 1 : 0;
        if (st.sig)
          for (Elem e : *st.sig) x = x * 31 + e;
        h ^= x * 2 + st.support + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      }
      return h;
    }
  };

  int track_;
  Field field_;
  mutable std::mutex mutex_;
  Interner<SignatureSet, SetHash> states_;
  std::unordered_map<Key, StateId, KeyHash> cache_;
  Singletons single_;
};

// ------------------------------------------------------------ composites

class ProductAutomaton : public Automaton {
 public:
  enum class Mode { All, Any };
  ProductAutomaton(std::vector<AutomatonPtr> kids, Mode mode)
      : Automaton(kids.front()->alphabet(), kids.front()->tracks()), kids_(std::move(kids)), mode_(mode) {
    det_ = std::all_of(kids_.begin(), kids_.end(), [](const AutomatonPtr& k) { return k->deterministic(); });
  }
  bool deterministic() const override { return det_; }

  std::span<const StateId> leaf(int symbol, std::uint64_t bits) override {
    return transition(Key{kLeafMarker, 0, symbol, bits});
  }
  std::span<const StateId> step(StateId l, StateId r, int symbol, std::uint64_t bits) override {
    return transition(Key{l, r, symbol, bits});
  }

  bool accepting(StateId q) override {
    std::vector<StateId> tuple;
    {
      std::lock_guard lock(mutex_);
      tuple = states_.key(q);
    }
    for (std::size_t i = 0; i < kids_.size(); ++i) {
      const bool acc = kids_[i]->accepting(tuple[i]);
      if (mode_ == Mode::All && !acc) return false;
      if (mode_ == Mode::Any && acc) return true;
    }
    return mode_ == Mode::All;
  }

  bool dead(StateId q) override { return sink(q).first; }
  bool full(StateId q) override { return sink(q).second; }

  std::size_t state_count() const override {
    std::lock_guard lock(mutex_);
    return states_.size();
  }

 private:
  std::span<const StateId> transition(const Key& key) {
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    std::vector<std::span<const StateId>> parts;
    std::vector<StateId> lt, rt;
    if (key.l != kLeafMarker) {
      std::lock_guard lock(mutex_);
      lt = states_.key(key.l);
      rt = states_.key(key.r);
    }
    for (std::size_t i = 0; i < kids_.size(); ++i) {
      parts.push_back(key.l == kLeafMarker ? kids_[i]->leaf(key.symbol, key.bits)
                                           : kids_[i]->step(lt[i], rt[i], key.symbol, key.bits));
    }
    std::vector<std::vector<StateId>> tuples{{}};
    std::vector<std::vector<StateId>> live(parts.size());
    if (!det_) {
      // a dead component kills the tuple
      for (std::size_t i = 0; i < parts.size(); ++i) {
        for (StateId q : parts[i])
          if (!kids_[i]->dead(q)) live[i].push_back(q);
        parts[i] = live[i];
      }
    }
    for (const auto& p : parts) {
      std::vector<std::vector<StateId>> next;
      next.reserve(tuples.size() * p.size());
      for (const auto& t : tuples)
        for (StateId q : p) {
          next.push_back(t);
          next.back().push_back(q);
        }
      tuples = std::move(next);
    }
    std::lock_guard lock(mutex_);
    std::vector<StateId> out;
    for (const auto& t : tuples) out.push_back(states_.intern(t));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return cache_.emplace(key, std::move(out)).first->second;
  }

  // (dead, full), memoized per state
  std::pair<bool, bool> sink(StateId q) {
    std::vector<StateId> tuple;
    {
      std::lock_guard lock(mutex_);
      if (q < sinks_.size() && sinks_[q] >= 0) return {(sinks_[q] & 1) != 0, (sinks_[q] & 2) != 0};
      tuple = states_.key(q);
    }
    const std::pair<bool, bool> r = sink_of(tuple);
    std::lock_guard lock(mutex_);
    if (sinks_.size() <= q) sinks_.resize(q + 1, -1);
    sinks_[q] = static_cast<signed char>((r.first ? 1 : 0) | (r.second ? 2 : 0));
    return r;
  }

  std::pair<bool, bool> sink_of(const std::vector<StateId>& tuple) {
    bool any_dead = false, all_dead = true, any_full = false, all_full = true;
    for (std::size_t i = 0; i < kids_.size(); ++i) {
      const bool d = kids_[i]->dead(tuple[i]);
      const bool f = !d && kids_[i]->full(tuple[i]);
      any_dead |= d;
      all_dead &= d;
      any_full |= f;
      all_full &= f;
    }
    return mode_ == Mode::All ? std::make_pair(any_dead, all_full) : std::make_pair(all_dead, any_full);
  }

  std::vector<AutomatonPtr> kids_;
  Mode mode_;
  bool det_;
  mutable std::mutex mutex_;
  Interner<std::vector<StateId>, VecHash> states_;
  std::unordered_map<Key, std::vector<StateId>, KeyHash> cache_;
  std::vector<signed char> sinks_;
};

/// Disjoint union: runs every part side by side, accepting when one does.
/// Linear in the parts, unlike the product, and valid because every part is
/// complete.
class UnionAutomaton : public Automaton {
 public:
  explicit UnionAutomaton(std::vector<AutomatonPtr> kids)
      : Automaton(kids.front()->alphabet(), kids.front()->tracks()), kids_(std::move(kids)) {}
  bool deterministic() const override { return false; }

  std::span<const StateId> leaf(int symbol, std::uint64_t bits) override {
    return transition(Key{kLeafMarker, 0, symbol, bits});
  }
  std::span<const StateId> step(StateId l, StateId r, int symbol, std::uint64_t bits) override {
    return transition(Key{l, r, symbol, bits});
  }
  bool accepting(StateId q) override {
    std::pair<std::uint32_t, StateId> tagged;
    {
      std::lock_guard lock(mutex_);
      tagged = states_.key(q);
    }
    return kids_[tagged.first]->accepting(tagged.second);
  }
  bool dead(StateId q) override {
    auto t = tagged(q);
    return kids_[t.first]->dead(t.second);
  }
  bool full(StateId q) override {
    auto t = tagged(q);
    return kids_[t.first]->full(t.second);
  }
  std::size_t state_count() const override {
    std::lock_guard lock(mutex_);
    return states_.size();
  }

 private:
  struct PairHash {
    std::size_t operator()(const std::pair<std::uint32_t, StateId>& p) const {
      return std::hash<std::uint64_t>()((std::uint64_t{p.first} << 32) | p.second);
    }
  };

  std::pair<std::uint32_t, StateId> tagged(StateId q) {
    std::lock_guard lock(mutex_);
    return states_.key(q);
  }

  std::span<const StateId> transition(const Key& key) {
    std::vector<StateId> out;
    if (key.l == kLeafMarker) {
      {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
      }
      std::vector<std::pair<std::uint32_t, StateId>> tagged;
      for (std::uint32_t i = 0; i < kids_.size(); ++i)
        for (StateId q : kids_[i]->leaf(key.symbol, key.bits))
          if (!kids_[i]->dead(q)) tagged.emplace_back(i, q);
      std::lock_guard lock(mutex_);
      for (const auto& t : tagged) out.push_back(states_.intern(t));
    } else {
      std::pair<std::uint32_t, StateId> l, r;
      {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        l = states_.key(key.l);
        r = states_.key(key.r);
      }
      std::vector<std::pair<std::uint32_t, StateId>> tagged;
      // states of different parts never meet in a run
      if (l.first == r.first)
        for (StateId q : kids_[l.first]->step(l.second, r.second, key.symbol, key.bits))
          if (!kids_[l.first]->dead(q)) tagged.emplace_back(l.first, q);
      std::lock_guard lock(mutex_);
      for (const auto& t : tagged) out.push_back(states_.intern(t));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(out)).first->second;
  }

  std::vector<AutomatonPtr> kids_;
  mutable std::mutex mutex_;
  Interner<std::pair<std::uint32_t, StateId>, PairHash> states_;
  std::unordered_map<Key, std::vector<StateId>, KeyHash> cache_;
};

class ComplementAutomaton : public Automaton {
 public:
  explicit ComplementAutomaton(AutomatonPtr kid) : Automaton(kid->alphabet(), kid->tracks()), kid_(std::move(kid)) {}
  bool deterministic() const override { return true; }
  std::span<const StateId> leaf(int symbol, std::uint64_t bits) override { return kid_->leaf(symbol, bits); }
  std::span<const StateId> step(StateId l, StateId r, int symbol, std::uint64_t bits) override {
    return kid_->step(l, r, symbol, bits);
  }
  bool accepting(StateId q) override { return !kid_->accepting(q); }
  bool dead(StateId q) override { return kid_->full(q); }
  bool full(StateId q) override { return kid_->dead(q); }
  std::size_t state_count() const override { return kid_->state_count(); }

 private:
  AutomatonPtr kid_;
};

class SubsetAutomaton : public Automaton {
 public:
  SubsetAutomaton(AutomatonPtr kid, std::size_t limit, std::string what)
      : Automaton(kid->alphabet(), kid->tracks()), kid_(std::move(kid)), limit_(limit), what_(std::move(what)) {}
  bool deterministic() const override { return true; }

  std::span<const StateId> leaf(int symbol, std::uint64_t bits) override {
    const Key key{kLeafMarker, 0, symbol, bits};
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return single_.of(it->second);
    }
    auto s = kid_->leaf(symbol, bits);
    return single_.of(store(key, normalize(std::vector<StateId>(s.begin(), s.end()))));
  }

  std::span<const StateId> step(StateId l, StateId r, int symbol, std::uint64_t bits) override {
    const Key key{l, r, symbol, bits};
    std::vector<StateId> ls, rs;
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return single_.of(it->second);
      ls = states_.key(l);
      rs = states_.key(r);
    }
    std::vector<StateId> out;
    for (StateId p : ls)
      for (StateId q : rs) {
        auto s = kid_->step(p, q, symbol, bits);
        out.insert(out.end(), s.begin(), s.end());
      }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return single_.of(store(key, normalize(std::move(out))));
  }

  bool dead(StateId q) override { return members(q).empty(); }
  bool full(StateId q) override {
    auto m = members(q);
    return m.size() == 1 && kid_->full(m[0]);
  }

  bool accepting(StateId q) override {
    std::vector<StateId> set;
    {
      std::lock_guard lock(mutex_);
      auto it = accepting_.find(q);
      if (it != accepting_.end()) return it->second;
      set = states_.key(q);
    }
    const bool acc = std::any_of(set.begin(), set.end(), [&](StateId s) { return kid_->accepting(s); });
    std::lock_guard lock(mutex_);
    accepting_[q] = acc;
    return acc;
  }

  std::size_t state_count() const override {
    std::lock_guard lock(mutex_);
    return states_.size();
  }

 private:
  std::vector<StateId> members(StateId q) {
    std::lock_guard lock(mutex_);
    return states_.key(q);
  }

  // Without dead members; a full member stands for the whole set.
  std::vector<StateId> normalize(std::vector<StateId> set) {
    std::vector<StateId> out;
    for (StateId q : set) {
      if (kid_->dead(q)) continue;
      if (kid_->full(q)) return {q};
      out.push_back(q);
    }
    return out;
  }

  StateId store(const Key& key, std::vector<StateId> set) {
    std::lock_guard lock(mutex_);
    const StateId q = states_.intern(set);
    if (states_.size() > limit_)
      throw LimitError("state limit " + std::to_string(limit_) + " exceeded while determinizing " + what_);
    cache_.emplace(key, q);
    return q;
  }

  AutomatonPtr kid_;
  std::size_t limit_;
  std::string what_;
  mutable std::mutex mutex_;
  Interner<std::vector<StateId>, VecHash> states_;
  std::unordered_map<Key, StateId, KeyHash> cache_;
  std::unordered_map<StateId, bool> accepting_;
  Singletons single_;
};

/// Existential projection of the last k tracks.
class ProjectionAutomaton : public Automaton {
 public:
  ProjectionAutomaton(AutomatonPtr kid, int k)
      : Automaton(kid->alphabet(), kid->tracks() - k), kid_(std::move(kid)), k_(k) {}
  bool deterministic() const override { return false; }

  std::span<const StateId> leaf(int symbol, std::uint64_t bits) override {
    return transition(Key{kLeafMarker, 0, symbol, bits});
  }
  std::span<const StateId> step(StateId l, StateId r, int symbol, std::uint64_t bits) override {
    return transition(Key{l, r, symbol, bits});
  }
  bool accepting(StateId q) override { return kid_->accepting(q); }
  bool dead(StateId q) override { return kid_->dead(q); }
  bool full(StateId q) override { return kid_->full(q); }
  std::size_t state_count() const override { return kid_->state_count(); }

 private:
  std::span<const StateId> transition(const Key& key) {
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    std::vector<StateId> out;
    for (std::uint64_t e = 0; e < (std::uint64_t{1} << k_); ++e) {
      const std::uint64_t bits = key.bits | (e << tracks());
      auto s = key.l == kLeafMarker ? kid_->leaf(key.symbol, bits) : kid_->step(key.l, key.r, key.symbol, bits);
      for (StateId q : s)
        if (!kid_->dead(q)) out.push_back(q);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(out)).first->second;
  }

  AutomatonPtr kid_;
  int k_;
  std::mutex mutex_;
  std::unordered_map<Key, std::vector<StateId>, KeyHash> cache_;
};

// ------------------------------------------------------------ local forms

/// A quantifier-free condition on one node s: bits and symbol of s, whether
/// s is a leaf or the root, and conditions on its left and right child.
struct LocalExpr {
  enum Kind { Const, Not, And, Or, Implies, Bit, IsLeaf, IsRoot, Symbol, Child } kind = Const;
  bool value = false;         // Const; Child: value when s has no children
  int track = 0;              // Bit
  int pattern = 0;            // Child
  bool left = true;           // Child
  std::function<bool(int)> symbol;
  std::vector<LocalExpr> kids;
};

struct LocalNode {
  int symbol;
  std::uint64_t bits;
  bool leaf, root;
  std::uint64_t lmask, rmask;  // child pattern values of the children
};

bool eval_local(const LocalExpr& e, const LocalNode& n) {
  switch (e.kind) {
    case LocalExpr::Const: return e.value;
    case LocalExpr::Not: return !eval_local(e.kids[0], n);
    case LocalExpr::And:
      for (const auto& k : e.kids)
        if (!eval_local(k, n)) return false;
      return true;
    case LocalExpr::Or:
      for (const auto& k : e.kids)
        if (eval_local(k, n)) return true;
      return false;
    case LocalExpr::Implies: return !eval_local(e.kids[0], n) || eval_local(e.kids[1], n);
    case LocalExpr::Bit: return bit(n.bits, e.track);
    case LocalExpr::IsLeaf: return n.leaf;
    case LocalExpr::IsRoot: return n.root;
    case LocalExpr::Symbol: return e.symbol(n.symbol);
    case LocalExpr::Child:
      if (n.leaf) return e.value;
      return (e.left ? n.lmask : n.rmask) >> e.pattern & 1U;
  }
  return false;
}

/// A condition on a child: the side and what must hold there.
struct ChildPattern {
  bool left;
  LocalExpr at;
};

/// Forall s / exists s of a local condition, run deterministically. A state
/// records whether the condition already failed (forall) or held (exists)
/// strictly below, its value at the subtree root taken as root and as inner
/// node, and the child patterns at the subtree root.
class LocalAutomaton : public Automaton {
 public:
  LocalAutomaton(std::shared_ptr<TreeAlphabet> a, int tracks, bool forall, LocalExpr body,
                 std::vector<ChildPattern> patterns)
      : Automaton(std::move(a), tracks), forall_(forall), body_(std::move(body)), patterns_(std::move(patterns)) {}
  bool deterministic() const override { return true; }

  std::span<const StateId> leaf(int symbol, std::uint64_t bits) override {
    return single_.of(transition(Key{kLeafMarker, 0, symbol, bits}));
  }
  std::span<const StateId> step(StateId l, StateId r, int symbol, std::uint64_t bits) override {
    return single_.of(transition(Key{l, r, symbol, bits}));
  }
  bool accepting(StateId q) override {
    const auto c = code(q);
    return forall_ ? !(c & 1U) && (c >> 1 & 1U) : (c & 1U) || (c >> 1 & 1U);
  }
  bool dead(StateId q) override { return forall_ && (code(q) & 1U); }
  bool full(StateId q) override { return !forall_ && (code(q) & 1U); }
  std::size_t state_count() const override {
    std::lock_guard lock(mutex_);
    return states_.size();
  }

 private:
  std::uint64_t code(StateId q) const {
    std::lock_guard lock(mutex_);
    return states_.key(q);
  }

  StateId transition(const Key& key) {
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    const bool is_leaf = key.l == kLeafMarker;
    LocalNode n{key.symbol, key.bits, is_leaf, false, 0, 0};
    bool flag = false;
    if (!is_leaf) {
      const auto l = code(key.l), r = code(key.r);
      n.lmask = l >> 3;
      n.rmask = r >> 3;
      // the children are inner nodes now
      const bool lv = l >> 2 & 1U, rv = r >> 2 & 1U;
      flag = (l & 1U) || (r & 1U) || (forall_ ? !lv || !rv : lv || rv);
    }
    std::uint64_t c = flag ? 1U : 0U;
    n.root = true;
    if (eval_local(body_, n)) c |= 2U;
    n.root = false;
    if (eval_local(body_, n)) c |= 4U;
    for (std::size_t j = 0; j < patterns_.size(); ++j)
      if (eval_local(patterns_[j].at, n)) c |= std::uint64_t{1} << (3 + j);
    std::lock_guard lock(mutex_);
    const StateId q = states_.intern(c);
    cache_.emplace(key, q);
    return q;
  }

  bool forall_;
  LocalExpr body_;
  std::vector<ChildPattern> patterns_;
  mutable std::mutex mutex_;
  Interner<std::uint64_t> states_;
  std::unordered_map<Key, StateId, KeyHash> cache_;
  Singletons single_;
};

// ---------------------------------------------------------------- compile

std::string shorten(std::string s) {
  if (s.size() > 160) s = s.substr(0, 157) + "...";
  return s;
}

class Compiler {
 public:
  Compiler(std::shared_ptr<TreeAlphabet> a, CompileOptions o) : alpha_(std::move(a)), opt_(o) {}

  AutomatonPtr go(const Formula& f, std::vector<std::string>& layout, bool negated) {
    const int tracks = static_cast<int>(layout.size());
    switch (f.op) {
      case Op::True:
      case Op::False:
        return std::make_shared<ConstAtom>(alpha_, tracks, (f.op == Op::True) != negated);
      case Op::Not:
        return go(*f.kids[0], layout, !negated);
      case Op::And:
      case Op::Or: {
        std::vector<AutomatonPtr> kids;
        for (const auto& k : f.kids) kids.push_back(go(*k, layout, negated));
        if (kids.empty()) return std::make_shared<ConstAtom>(alpha_, tracks, (f.op == Op::And) != negated);
        const bool all = (f.op == Op::And) != negated;
        return product(std::move(kids), all);
      }
      case Op::Implies: {
        auto a = go(*f.kids[0], layout, !negated);
        auto b = go(*f.kids[1], layout, negated);
        return product({a, b}, negated);
      }
      case Op::Exists:
      case Op::Forall:
        return quantifier(f, layout, negated);
      default: {
        auto a = atom_automaton(f, layout);
        return negated ? std::make_shared<ComplementAutomaton>(a) : a;
      }
    }
  }

  AutomatonPtr product(std::vector<AutomatonPtr> kids, bool all) {
    if (kids.size() == 1) return kids.front();
    const bool det = std::all_of(kids.begin(), kids.end(), [](const AutomatonPtr& k) { return k->deterministic(); });
    if (!all && !det) return std::make_shared<UnionAutomaton>(std::move(kids));
    return std::make_shared<ProductAutomaton>(std::move(kids),
                                              all ? ProductAutomaton::Mode::All : ProductAutomaton::Mode::Any);
  }

  AutomatonPtr sing(int tracks, int track) { return std::make_shared<SingAtom>(alpha_, tracks, track); }

 private:
  int track(const std::string& v, const std::vector<std::string>& layout) const {
    for (int i = static_cast<int>(layout.size()) - 1; i >= 0; --i)
      if (layout[static_cast<std::size_t>(i)] == v) return i;
    throw InputError("variable '" + v + "' is not bound");
  }

  AutomatonPtr quantifier(const Formula& f, std::vector<std::string>& layout, bool negated) {
    const Op op = f.op;
    std::vector<std::string> vars;
    const Formula* body = &f;
    while (body->op == op) {
      vars.push_back(body->vars[0]);
      body = body->kids[0].get();
    }
    if (vars.size() == 1 && sort_of(vars[0]) == Sort::Element) {
      std::vector<ChildPattern> patterns;
      LocalExpr e;
      if (lower_local(*body, vars[0], layout, nullptr, e, &patterns)) {
        AutomatonPtr a = std::make_shared<LocalAutomaton>(alpha_, static_cast<int>(layout.size()), op == Op::Forall,
                                                          std::move(e), std::move(patterns));
        return negated ? std::make_shared<ComplementAutomaton>(a) : a;
      }
    }
    const bool body_negated = op == Op::Forall;
    const bool complement_result = (op == Op::Exists) == negated;
    const std::size_t base = layout.size();
    layout.insert(layout.end(), vars.begin(), vars.end());
    const int tracks = static_cast<int>(layout.size());
    std::vector<AutomatonPtr> parts{go(*body, layout, body_negated)};
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (sort_of(vars[i]) == Sort::Element) parts.push_back(sing(tracks, static_cast<int>(base + i)));
    layout.resize(base);
    AutomatonPtr inner = product(std::move(parts), true);
    AutomatonPtr projected = std::make_shared<ProjectionAutomaton>(inner, static_cast<int>(vars.size()));
    if (!complement_result) return projected;
    return std::make_shared<ComplementAutomaton>(
        std::make_shared<SubsetAutomaton>(projected, opt_.state_limit, shorten(unparse(f))));
  }

  // Lowers f as a condition on node v. Inside a child pattern `child` names
  // the child variable and only conditions on it are allowed.
  bool lower_local(const Formula& f, const std::string& v, const std::vector<std::string>& layout,
                   const std::string* child, LocalExpr& out, std::vector<ChildPattern>* patterns) {
    const std::string& self = child ? *child : v;
    auto kids = [&](LocalExpr::Kind kind) {
      out.kind = kind;
      out.kids.resize(f.kids.size());
      for (std::size_t i = 0; i < f.kids.size(); ++i)
        if (!lower_local(*f.kids[i], v, layout, child, out.kids[i], patterns)) return false;
      return true;
    };
    switch (f.op) {
      case Op::True:
      case Op::False:
        out.kind = LocalExpr::Const;
        out.value = f.op == Op::True;
        return true;
      case Op::Not: return kids(LocalExpr::Not);
      case Op::And: return kids(LocalExpr::And);
      case Op::Or: return kids(LocalExpr::Or);
      case Op::Implies: return kids(LocalExpr::Implies);
      case Op::In: {
        if (f.vars[0] != self || f.vars[1] == v || (child && f.vars[1] == *child)) return false;
        auto it = std::find(layout.rbegin(), layout.rend(), f.vars[1]);
        if (it == layout.rend()) return false;
        out.kind = LocalExpr::Bit;
        out.track = static_cast<int>(layout.rend() - it) - 1;
        return true;
      }
      case Op::Leaf:
        if (f.vars[0] != self) return false;
        out.kind = LocalExpr::IsLeaf;
        return true;
      case Op::Root:
        if (f.vars[0] != self) return false;
        if (child) {
          out.kind = LocalExpr::Const;
          out.value = false;
        } else {
          out.kind = LocalExpr::IsRoot;
        }
        return true;
      case Op::Label: {
        if (f.vars[0] != self) return false;
        auto pred = f.pred;
        auto memo = std::make_shared<SymbolMemo>();
        auto alpha = alpha_;
        out.kind = LocalExpr::Symbol;
        out.symbol = [pred, memo, alpha](int s) { return memo->get(s, [&] { return pred->holds(alpha->symbol(s)); }); };
        return true;
      }
      case Op::Color: {
        if (f.vars[0] != self) return false;
        const int c = alpha_->color_bit(f.name);
        auto alpha = alpha_;
        out.kind = LocalExpr::Symbol;
        out.symbol = [c, alpha](int s) { return c >= 0 && (alpha->symbol(s).colors >> c & 1U); };
        return true;
      }
      case Op::Exists:
      case Op::Forall:
        return !child && lower_child(f, v, layout, out, *patterns);
      default:
        return false;
    }
  }

  // exists w (lchild(v, w) & cond(w)) or forall w (lchild(v, w) -> cond(w)),
  // likewise for rchild.
  bool lower_child(const Formula& f, const std::string& v, const std::vector<std::string>& layout, LocalExpr& out,
                   std::vector<ChildPattern>& patterns) {
    const std::string& w = f.vars[0];
    if (sort_of(w) != Sort::Element || w == v) return false;
    const bool universal = f.op == Op::Forall;
    const Formula& body = *f.kids[0];
    auto is_edge = [&](const Formula& g) {
      return (g.op == Op::LChild || g.op == Op::RChild) && g.vars[0] == v && g.vars[1] == w;
    };
    const Formula* edge = nullptr;
    std::vector<const Formula*> rest;
    if (universal) {
      if (body.op != Op::Implies || !is_edge(*body.kids[0])) return false;
      edge = body.kids[0].get();
      rest.push_back(body.kids[1].get());
    } else if (is_edge(body)) {
      edge = &body;
    } else if (body.op == Op::And) {
      for (const auto& k : body.kids) {
        if (!edge && is_edge(*k)) edge = k.get();
        else rest.push_back(k.get());
      }
      if (!edge) return false;
    } else {
      return false;
    }
    ChildPattern p{edge->op == Op::LChild, {}};
    p.at.kind = LocalExpr::And;
    p.at.kids.resize(rest.size());
    for (std::size_t i = 0; i < rest.size(); ++i)
      if (!lower_local(*rest[i], v, layout, &w, p.at.kids[i], nullptr)) return false;
    if (patterns.size() >= 60) return false;
    out.kind = LocalExpr::Child;
    out.value = universal;
    out.left = p.left;
    out.pattern = static_cast<int>(patterns.size());
    patterns.push_back(std::move(p));
    return true;
  }

  AutomatonPtr atom_automaton(const Formula& f, const std::vector<std::string>& layout) {
    const int tracks = static_cast<int>(layout.size());
    auto tk = [&](std::size_t i) { return track(f.vars[i], layout); };
    switch (f.op) {
      case Op::In:
      case Op::Sub: {
        const int a = tk(0), b = tk(1);
        return nodewise([a, b](int, std::uint64_t bits, bool) { return !bit(bits, a) || bit(bits, b); }, tracks);
      }
      case Op::Eq: {
        const int a = tk(0), b = tk(1);
        return nodewise([a, b](int, std::uint64_t bits, bool) { return bit(bits, a) == bit(bits, b); }, tracks);
      }
      case Op::Leaf: {
        const int v = tk(0);
        return nodewise([v](int, std::uint64_t bits, bool leaf) { return leaf || !bit(bits, v); }, tracks);
      }
      case Op::Root:
        return std::make_shared<RootAtom>(alpha_, tracks, tk(0));
      case Op::Sing:
        return sing(tracks, tk(0));
      case Op::LChild:
      case Op::RChild:
        return std::make_shared<ChildAtom>(alpha_, tracks, tk(0), tk(1), f.op == Op::LChild);
      case Op::Mod:
        return std::make_shared<ModAtom>(alpha_, tracks, tk(0), f.a, f.q);
      case Op::Label: {
        const int v = tk(0);
        auto pred = f.pred;
        auto memo = std::make_shared<SymbolMemo>();
        auto alpha = alpha_;
        return nodewise(
            [v, pred, memo, alpha](int symbol, std::uint64_t bits, bool) {
              return !bit(bits, v) || memo->get(symbol, [&] { return pred->holds(alpha->symbol(symbol)); });
            },
            tracks);
      }
      case Op::Color: {
        const int v = tk(0);
        const int c = alpha_->color_bit(f.name);
        auto alpha = alpha_;
        return nodewise(
            [v, c, alpha](int symbol, std::uint64_t bits, bool) {
              return !bit(bits, v) || (c >= 0 && (alpha->symbol(symbol).colors >> c & 1U));
            },
            tracks);
      }
      case Op::Dep:
        if (!f.dep) throw InputError("dep(" + f.vars[0] + ") has no dependency automaton attached");
        return f.dep->automaton(alpha_, tracks, tk(0));
      case Op::Indep:
        throw InputError("indep() must be translated before compiling to a tree automaton");
      default:
        throw InputError("unexpected formula node");
    }
  }

  struct SymbolMemo {
    std::mutex mutex;
    std::vector<signed char> values;
    template <class F>
    bool get(int symbol, F compute) {
      {
        std::lock_guard lock(mutex);
        if (symbol < static_cast<int>(values.size()) && values[static_cast<std::size_t>(symbol)] >= 0)
          return values[static_cast<std::size_t>(symbol)] != 0;
      }
      const bool v = compute();
      std::lock_guard lock(mutex);
      if (symbol >= static_cast<int>(values.size())) values.resize(static_cast<std::size_t>(symbol) + 1, -1);
      values[static_cast<std::size_t>(symbol)] = v ? 1 : 0;
      return v;
    }
  };

  AutomatonPtr nodewise(NodewiseAtom::Check check, int tracks) {
    return std::make_shared<NodewiseAtom>(alpha_, tracks, std::move(check));
  }

  std::shared_ptr<TreeAlphabet> alpha_;
  CompileOptions opt_;
};

}  // namespace

// ------------------------------------------------------------- public API

EnhancedDep::EnhancedDep(int t, Field f) : t_(t), field_(f) {
  if (t < 0 || t > 3) throw LimitError("dependency automaton supports widths up to 3");
  long long count = 1;
  for (int i = 0; i < t; ++i) count *= f.p();
  if (count > 2197) throw LimitError("signature space p^t exceeds 2197");
}

std::string EnhancedDep::name() const {
  return "enhanced-dep(t=" + std::to_string(t_) + ",p=" + std::to_string(field_.p()) + ")";
}

AutomatonPtr EnhancedDep::automaton(std::shared_ptr<TreeAlphabet> alphabet, int tracks, int track) const {
  return std::make_shared<EnhancedDepAutomaton>(std::move(alphabet), tracks, track, field_);
}

AutomatonPtr dependency_automaton(std::shared_ptr<TreeAlphabet> alphabet, int t, Field f) {
  return EnhancedDep(t, f).automaton(std::move(alphabet), 1, 0);
}

AutomatonPtr compile_with_tracks(const Formula& f, std::shared_ptr<TreeAlphabet> alphabet,
                                 const std::vector<std::string>& tracks, CompileOptions options) {
  if (tracks.size() > 60) throw LimitError("too many free variables");
  for (const auto& v : free_vars(f))
    if (std::find(tracks.begin(), tracks.end(), v) == tracks.end())
      throw InputError("free variable '" + v + "' has no track");
  Compiler c(alphabet, options);
  std::vector<std::string> layout = tracks;
  std::vector<AutomatonPtr> parts{c.go(f, layout, false)};
  for (std::size_t i = 0; i < tracks.size(); ++i)
    if (sort_of(tracks[i]) == Sort::Element) parts.push_back(c.sing(static_cast<int>(tracks.size()), static_cast<int>(i)));
  return c.product(std::move(parts), true);
}

AutomatonPtr compile(const Formula& f, std::shared_ptr<TreeAlphabet> alphabet, const std::vector<std::string>& free,
                     CompileOptions options) {
  return compile_with_tracks(f, std::move(alphabet), free.empty() ? free_vars(f) : free, options);
}

AutomatonPtr determinize(AutomatonPtr a, std::size_t state_limit, std::string what) {
  if (a->deterministic()) return a;
  return std::make_shared<SubsetAutomaton>(std::move(a), state_limit, what.empty() ? "automaton" : what);
}

AutomatonPtr complement(AutomatonPtr a) {
  if (!a->deterministic()) throw InputError("complement needs a deterministic automaton");
  return std::make_shared<ComplementAutomaton>(std::move(a));
}

AutomatonPtr product(std::vector<AutomatonPtr> parts, bool all) {
  if (parts.empty()) throw InputError("product of no automata");
  for (const auto& a : parts)
    if (a->tracks() != parts.front()->tracks() || a->alphabet() != parts.front()->alphabet())
      throw InputError("product parts differ in alphabet or tracks");
  if (parts.size() == 1) return parts.front();
  return std::make_shared<ProductAutomaton>(std::move(parts),
                                            all ? ProductAutomaton::Mode::All : ProductAutomaton::Mode::Any);
}

std::vector<std::vector<StateId>> run_states(Automaton& a, const LabeledTree& t, const Annotation& bits) {
  const auto& d = t.shape;
  if (t.symbols.size() != static_cast<std::size_t>(d.node_count()) || bits.size() != t.symbols.size())
    throw InputError("tree, symbols and annotation sizes differ");
  std::vector<std::vector<StateId>> out(static_cast<std::size_t>(d.node_count()));
  for (int i = 0; i < d.node_count(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (d.is_leaf(i)) {
      auto s = a.leaf(t.symbols[ui], bits[ui]);
      out[ui].assign(s.begin(), s.end());
      continue;
    }
    const auto& node = d.node(i);
    std::vector<StateId> acc;
    for (StateId p : out[static_cast<std::size_t>(node.left)])
      for (StateId q : out[static_cast<std::size_t>(node.right)]) {
        auto s = a.step(p, q, t.symbols[ui], bits[ui]);
        acc.insert(acc.end(), s.begin(), s.end());
      }
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    out[ui] = std::move(acc);
  }
  return out;
}

bool accepts(Automaton& a, const LabeledTree& t, const Annotation& bits) {
  const auto states = run_states(a, t, bits);
  const auto& root = states.back();
  return std::any_of(root.begin(), root.end(), [&](StateId q) { return a.accepting(q); });
}

Annotation annotation_from(const LabeledTree& t, const std::vector<std::string>& tracks, const TreeAssignment& a) {
  Annotation out(static_cast<std::size_t>(t.node_count()), 0);
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    std::uint64_t mask = 0;
    if (sort_of(tracks[k]) == Sort::Element) {
      auto it = a.nodes.find(tracks[k]);
      if (it == a.nodes.end()) throw InputError("no value for '" + tracks[k] + "'");
      if (it->second < 0 || it->second >= t.node_count()) throw InputError("node value out of range");
      mask = std::uint64_t{1} << it->second;
    } else {
      auto it = a.sets.find(tracks[k]);
      if (it == a.sets.end()) throw InputError("no value for '" + tracks[k] + "'");
      mask = it->second;
    }
    for (int i = 0; i < t.node_count(); ++i)
      if (mask >> i & 1U) out[static_cast<std::size_t>(i)] |= std::uint64_t{1} << k;
  }
  return out;
}

// ------------------------------------------------------------ brute force

namespace {

struct BruteNode {
  Op op = Op::True;
  int s0 = -1, s1 = -1;
  bool e0 = false, e1 = false;  // slot holds a node index rather than a mask
  int a = 0, q = 1;
  const Formula* source = nullptr;
  std::vector<BruteNode> kids;
};

class BruteEval {
 public:
  BruteEval(const LabeledTree& t, const TreeAlphabet& alpha, int max_nodes)
      : t_(t), alpha_(alpha), n_(t.node_count()), max_nodes_(max_nodes) {}

  bool run(const BruteNode& c, std::vector<std::uint64_t>& s) {
    auto mask = [&](int slot, bool element) {
      const auto v = s[static_cast<std::size_t>(slot)];
      return element ? std::uint64_t{1} << v : v;
    };
    switch (c.op) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::In:
      case Op::Sub: return (mask(c.s0, c.e0) & ~mask(c.s1, c.e1)) == 0;
      case Op::Eq: return mask(c.s0, c.e0) == mask(c.s1, c.e1);
      case Op::Mod: return std::popcount(mask(c.s0, c.e0)) % c.q == c.a;
      case Op::Sing: return std::popcount(mask(c.s0, c.e0)) == 1;
      case Op::Leaf: return all_nodes(mask(c.s0, c.e0), [&](int i) { return t_.shape.is_leaf(i); });
      case Op::Root: return (mask(c.s0, c.e0) & ~(std::uint64_t{1} << t_.shape.root())) == 0;
      case Op::LChild:
      case Op::RChild: {
        const int sv = static_cast<int>(s[static_cast<std::size_t>(c.s0)]);
        const int tv = static_cast<int>(s[static_cast<std::size_t>(c.s1)]);
        const auto& node = t_.shape.node(sv);
        return !t_.shape.is_leaf(sv) && (c.op == Op::LChild ? node.left : node.right) == tv;
      }
      case Op::Label:
        return all_nodes(mask(c.s0, c.e0), [&](int i) {
          return c.source->pred->holds(alpha_.symbol(t_.symbols[static_cast<std::size_t>(i)]));
        });
      case Op::Color: {
        const int b = alpha_.color_bit(c.source->name);
        return all_nodes(mask(c.s0, c.e0), [&](int i) {
          return b >= 0 && (alpha_.symbol(t_.symbols[static_cast<std::size_t>(i)]).colors >> b & 1U);
        });
      }
      case Op::Dep: {
        const std::uint64_t m = mask(c.s0, c.e0);
        auto& memo = dep_memo_[c.source];
        auto it = memo.find(m);
        if (it != memo.end()) return it->second;
        if (!c.source->dep) throw InputError("dep() has no dependency automaton attached");
        auto aut = dep_aut_[c.source];
        if (!aut) aut = dep_aut_[c.source] = c.source->dep->automaton(alpha_ptr(), 1, 0);
        Annotation bits(static_cast<std::size_t>(n_), 0);
        for (int i = 0; i < n_; ++i) bits[static_cast<std::size_t>(i)] = m >> i & 1U;
        return memo[m] = accepts(*aut, t_, bits);
      }
      case Op::Not: return !run(c.kids[0], s);
      case Op::And:
        for (const auto& k : c.kids)
          if (!run(k, s)) return false;
        return true;
      case Op::Or:
        for (const auto& k : c.kids)
          if (run(k, s)) return true;
        return false;
      case Op::Implies: return !run(c.kids[0], s) || run(c.kids[1], s);
      case Op::Exists:
      case Op::Forall: {
        const bool ex = c.op == Op::Exists;
        std::uint64_t count = static_cast<std::uint64_t>(n_);
        if (!c.e0) {
          if (n_ > max_nodes_) throw LimitError("brute-force set quantifier over more than " + std::to_string(max_nodes_) + " nodes");
          count = std::uint64_t{1} << n_;
        }
        auto& slot = s[static_cast<std::size_t>(c.s0)];
        const auto saved = slot;
        bool result = !ex;
        for (std::uint64_t v = 0; v < count; ++v) {
          slot = v;
          if (run(c.kids[0], s) == ex) {
            result = ex;
            break;
          }
        }
        slot = saved;
        return result;
      }
      case Op::Indep:
        throw InputError("indep() is not a tree predicate");
    }
    return false;
  }

  void set_alpha_ptr(std::shared_ptr<TreeAlphabet> p) { alpha_holder_ = std::move(p); }

 private:
  template <class F>
  bool all_nodes(std::uint64_t m, F f) const {
    for (; m != 0; m &= m - 1)
      if (!f(std::countr_zero(m))) return false;
    return true;
  }

  // DepSpec automata need an owning pointer; the alphabet outlives this call.
  std::shared_ptr<TreeAlphabet> alpha_ptr() {
    if (!alpha_holder_)
      alpha_holder_ = std::shared_ptr<TreeAlphabet>(const_cast<TreeAlphabet*>(&alpha_), [](TreeAlphabet*) {});
    return alpha_holder_;
  }

  const LabeledTree& t_;
  const TreeAlphabet& alpha_;
  int n_;
  int max_nodes_;
  std::shared_ptr<TreeAlphabet> alpha_holder_;
  std::map<const Formula*, std::map<std::uint64_t, bool>> dep_memo_;
  std::map<const Formula*, AutomatonPtr> dep_aut_;
};

}  // namespace

bool brute_force_eval(const LabeledTree& t, const TreeAlphabet& alphabet, const Formula& f, const TreeAssignment& a,
                      int max_nodes) {
  if (t.node_count() > 64) throw LimitError("brute-force evaluation limited to 64 nodes");
  std::map<std::string, std::vector<int>> slot_of;
  std::vector<std::uint64_t> init;
  for (const auto& [name, v] : a.nodes) {
    if (v < 0 || v >= t.node_count()) throw InputError("node value of '" + name + "' out of range");
    slot_of[name].push_back(static_cast<int>(init.size()));
    init.push_back(static_cast<std::uint64_t>(v));
  }
  for (const auto& [name, v] : a.sets) {
    slot_of[name].push_back(static_cast<int>(init.size()));
    init.push_back(v);
  }
  auto slot = [&](const std::string& v) {
    auto it = slot_of.find(v);
    if (it == slot_of.end() || it->second.empty()) throw InputError("variable '" + v + "' has no value");
    return it->second.back();
  };
  std::function<BruteNode(const Formula&)> lower = [&](const Formula& g) {
    BruteNode c;
    c.op = g.op;
    c.a = g.a;
    c.q = g.q;
    c.source = &g;
    if (g.op == Op::Exists || g.op == Op::Forall) {
      c.s0 = static_cast<int>(init.size());
      c.e0 = sort_of(g.vars[0]) == Sort::Element;
      init.push_back(0);
      slot_of[g.vars[0]].push_back(c.s0);
      c.kids.push_back(lower(*g.kids[0]));
      slot_of[g.vars[0]].pop_back();
      return c;
    }
    if (!g.vars.empty()) {
      c.s0 = slot(g.vars[0]);
      c.e0 = sort_of(g.vars[0]) == Sort::Element;
    }
    if (g.vars.size() > 1) {
      c.s1 = slot(g.vars[1]);
      c.e1 = sort_of(g.vars[1]) == Sort::Element;
    }
    for (const auto& k : g.kids) c.kids.push_back(lower(*k));
    return c;
  };
  BruteNode root = lower(f);
  BruteEval ev(t, alphabet, max_nodes);
  return ev.run(root, init);
}

std::string export_automaton(Automaton& a, const std::vector<int>& symbols, std::size_t max_states) {
  if (!a.deterministic()) throw InputError("export needs a deterministic automaton");
  std::map<StateId, std::size_t> number;
  std::vector<StateId> order;
  auto name = [&](StateId q) {
    auto [it, fresh] = number.emplace(q, order.size());
    if (fresh) {
      order.push_back(q);
      if (order.size() > max_states) throw LimitError("automaton export exceeds " + std::to_string(max_states) + " states");
    }
    return it->second;
  };
  const std::uint64_t letters = std::uint64_t{1} << a.tracks();
  std::ostringstream body;
  std::vector<int> leaf_syms, inner_syms;
  for (int s : symbols) (a.alphabet()->symbol(s).leaf ? leaf_syms : inner_syms).push_back(s);
  for (int s : leaf_syms)
    for (std::uint64_t b = 0; b < letters; ++b)
      body << "leaf " << s << " " << b << " -> " << name(a.leaf(s, b)[0]) << "\n";
  std::set<std::tuple<std::size_t, std::size_t, int, std::uint64_t>> done;
  for (std::size_t known = 0; known != order.size();) {
    known = order.size();
    for (std::size_t i = 0; i < known; ++i)
      for (std::size_t j = 0; j < known; ++j)
        for (int s : inner_syms)
          for (std::uint64_t b = 0; b < letters; ++b) {
            if (!done.emplace(i, j, s, b).second) continue;
            body << "step " << i << " " << j << " " << s << " " << b << " -> "
                 << name(a.step(order[i], order[j], s, b)[0]) << "\n";
          }
  }
  std::ostringstream out;
  out << "tracks " << a.tracks() << "\nstates " << order.size() << "\naccepting";
  for (std::size_t i = 0; i < order.size(); ++i)
    if (a.accepting(order[i])) out << " " << i;
  out << "\nsymbols\n";
  for (int s : symbols) out << "  " << s << " " << (a.alphabet()->symbol(s).leaf ? "leaf " : "node ") << a.alphabet()->symbol(s).name << "\n";
  out << body.str();
  return out.str();
}

}  // namespace mbw
