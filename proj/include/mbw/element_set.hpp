#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace mbw {

/// A subset of a ground set {0, ..., n-1}, n <= 64. Elements are 0-based
/// here; every text format uses 1-based ids.
class ElementSet {
 public:
  static constexpr int kMaxElements = 64;

  constexpr ElementSet() = default;
  constexpr explicit ElementSet(std::uint64_t bits) : bits_(bits) {}
  ElementSet(std::initializer_list<int> elements) {
    for (int e : elements) insert(e);
  }

  static constexpr ElementSet full(int n) {
    return ElementSet(n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
  }
  static constexpr ElementSet single(int e) { return ElementSet(std::uint64_t{1} << e); }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool contains(int e) const { return (bits_ >> e) & 1U; }
  constexpr void insert(int e) { bits_ |= std::uint64_t{1} << e; }
  constexpr void erase(int e) { bits_ &= ~(std::uint64_t{1} << e); }
  constexpr bool subset_of(ElementSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr int min() const { return std::countr_zero(bits_); }

  std::vector<int> elements() const {
    std::vector<int> out;
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }

  friend constexpr ElementSet operator|(ElementSet a, ElementSet b) { return ElementSet(a.bits_ | b.bits_); }
  friend constexpr ElementSet operator&(ElementSet a, ElementSet b) { return ElementSet(a.bits_ & b.bits_); }
  friend constexpr ElementSet operator-(ElementSet a, ElementSet b) { return ElementSet(a.bits_ & ~b.bits_); }
  friend constexpr bool operator==(ElementSet, ElementSet) = default;

 private:
  std::uint64_t bits_ = 0;
};

/// Canonical order on sets: lexicographic on the sorted element lists.
inline bool canonical_less(ElementSet a, ElementSet b) {
  auto x = a.elements(), y = b.elements();
  return x < y;
}

/// "{1,2,4}" using 1-based ids.
std::string to_string(ElementSet s);

/// Parses "1,2,4" (1-based ids, commas or spaces). Throws InputError when an
/// id is outside [1, n].
ElementSet parse_element_list(const std::string& text, int n);

}  // namespace mbw
