#pragma once

// Bit-vector encoding of frame subsets. Bit i of a FocalSet stands for the
// i-th element of its frame in declaration order.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gertis {

class FrameSignature {
 public:
  // Throws InvalidKnowledgeBaseError on an empty or duplicated element list.
  FrameSignature(std::string frame_id, std::vector<std::string> element_names);

  const std::string& frame_id() const noexcept { return frame_id_; }
  const std::vector<std::string>& elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }

  // Bit position of an element, or npos.
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return index_of(name) != npos; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  friend bool operator==(const FrameSignature& a, const FrameSignature& b) {
    return a.frame_id_ == b.frame_id_ && a.elements_ == b.elements_;
  }

 private:
  std::string frame_id_;
  std::vector<std::string> elements_;
  std::unordered_map<std::string, std::size_t> index_;
};

class FocalSet {
 public:
  FocalSet() = default;

  static FocalSet empty(const FrameSignature& frame);
  static FocalSet full(const FrameSignature& frame);
  static FocalSet singleton(const FrameSignature& frame, std::size_t index);
  // Parses a decimal code. Throws InvalidQueryError when the text is not a
  // decimal number or has bits beyond the frame width.
  static FocalSet from_code(const FrameSignature& frame, std::string_view decimal);
  static FocalSet from_code(const FrameSignature& frame, std::uint64_t code);

  const std::string& frame_id() const noexcept { return frame_id_; }
  std::size_t width() const noexcept { return width_; }

  bool test(std::size_t index) const;
  void set(std::size_t index);
  void reset(std::size_t index);

  bool none() const noexcept;
  bool all() const noexcept;
  std::size_t count() const noexcept;

  // Canonical external name: the bits read as an unsigned integer.
  std::string code() const;
  // Only meaningful when width() <= 64.
  bool fits_u64() const noexcept;
  std::uint64_t code_u64() const;

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  // Ordered by frame, then width, then numeric code.
  friend std::strong_ordering operator<=>(const FocalSet& a, const FocalSet& b);
  friend bool operator==(const FocalSet& a, const FocalSet& b) = default;

 private:
  FocalSet(std::string frame_id, std::size_t width);
  void trim() noexcept;

  friend FocalSet intersect(const FocalSet&, const FocalSet&);
  friend FocalSet unite(const FocalSet&, const FocalSet&);
  friend FocalSet complement(const FocalSet&);
  friend bool is_subset(const FocalSet&, const FocalSet&);

  std::string frame_id_;
  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

// Unknown names throw UnknownElementError; duplicates are idempotent.
FocalSet encode(const FrameSignature& frame, std::span<const std::string> members);
FocalSet encode(const FrameSignature& frame, std::initializer_list<std::string_view> members);

// Element names in declaration order. Throws FrameMismatchError.
std::vector<std::string> decode(const FocalSet& set, const FrameSignature& frame);

// Binary operations throw FrameMismatchError on operands from different frames.
FocalSet intersect(const FocalSet& a, const FocalSet& b);
FocalSet unite(const FocalSet& a, const FocalSet& b);
FocalSet complement(const FocalSet& a);
bool is_subset(const FocalSet& a, const FocalSet& b);
inline bool is_empty(const FocalSet& a) { return a.none(); }
inline std::size_t cardinality(const FocalSet& a) { return a.count(); }

}  // namespace gertis
