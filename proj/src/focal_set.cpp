#include "gertis/focal_set.hpp"

#include <algorithm>
#include <bit>

#include "gertis/error.hpp"

namespace gertis {

namespace {

constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t width) { return (width + kWordBits - 1) / kWordBits; }

void require_same_frame(const FocalSet& a, const FocalSet& b) {
  if (a.frame_id() != b.frame_id() || a.width() != b.width()) {
    throw FrameMismatchError(a.frame_id(), b.frame_id());
  }
}

}  // namespace

FrameSignature::FrameSignature(std::string frame_id, std::vector<std::string> element_names)
    : frame_id_(std::move(frame_id)), elements_(std::move(element_names)) {
  if (elements_.empty()) {
    throw InvalidKnowledgeBaseError("frame '" + frame_id_ + "' has no elements");
  }
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (!index_.emplace(elements_[i], i).second) {
      throw InvalidKnowledgeBaseError("frame '" + frame_id_ + "' declares element '" +
                                      elements_[i] + "' twice");
    }
  }
}

std::size_t FrameSignature::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? npos : it->second;
}

FocalSet::FocalSet(std::string frame_id, std::size_t width)
    : frame_id_(std::move(frame_id)), width_(width), words_(word_count(width), 0) {}

FocalSet FocalSet::empty(const FrameSignature& frame) {
  return FocalSet(frame.frame_id(), frame.size());
}

FocalSet FocalSet::full(const FrameSignature& frame) {
  FocalSet s(frame.frame_id(), frame.size());
  std::fill(s.words_.begin(), s.words_.end(), ~std::uint64_t{0});
  s.trim();
  return s;
}

FocalSet FocalSet::singleton(const FrameSignature& frame, std::size_t index) {
  FocalSet s = empty(frame);
  s.set(index);
  return s;
}

FocalSet FocalSet::from_code(const FrameSignature& frame, std::uint64_t code) {
  FocalSet s = empty(frame);
  if (frame.size() < kWordBits && (code >> frame.size()) != 0) {
    throw InvalidQueryError("code " + std::to_string(code) + " exceeds the width of frame '" +
                            frame.frame_id() + "'");
  }
  s.words_[0] = code;
  return s;
}

FocalSet FocalSet::from_code(const FrameSignature& frame, std::string_view decimal) {
  if (decimal.empty()) throw InvalidQueryError("empty focal-set code");
  FocalSet s = empty(frame);
  // Multiply-accumulate into a scratch buffer one word wider than the frame so
  // overflow past the frame width is detectable.
  std::vector<std::uint64_t> acc(s.words_.size() + 1, 0);
  for (char c : decimal) {
    if (c < '0' || c > '9') throw InvalidQueryError("malformed focal-set code '" + std::string(decimal) + "'");
    unsigned __int128 carry = static_cast<unsigned>(c - '0');
    for (auto& w : acc) {
      unsigned __int128 v = static_cast<unsigned __int128>(w) * 10u + carry;
      w = static_cast<std::uint64_t>(v);
      carry = v >> 64;
    }
    if (carry != 0 || acc.back() != 0) {
      throw InvalidQueryError("code " + std::string(decimal) + " exceeds the width of frame '" +
                              frame.frame_id() + "'");
    }
  }
  std::copy(acc.begin(), acc.end() - 1, s.words_.begin());
  FocalSet trimmed = s;
  trimmed.trim();
  if (trimmed.words_ != s.words_) {
    throw InvalidQueryError("code " + std::string(decimal) + " exceeds the width of frame '" +
                            frame.frame_id() + "'");
  }
  return s;
}

bool FocalSet::test(std::size_t index) const {
  if (index >= width_) return false;
  return (words_[index / kWordBits] >> (index % kWordBits)) & 1u;
}

void FocalSet::set(std::size_t index) {
  if (index >= width_) throw InvalidQueryError("bit index out of range");
  words_[index / kWordBits] |= std::uint64_t{1} << (index % kWordBits);
}

void FocalSet::reset(std::size_t index) {
  if (index >= width_) throw InvalidQueryError("bit index out of range");
  words_[index / kWordBits] &= ~(std::uint64_t{1} << (index % kWordBits));
}

bool FocalSet::none() const noexcept {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

bool FocalSet::all() const noexcept { return count() == width_; }

std::size_t FocalSet::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool FocalSet::fits_u64() const noexcept {
  for (std::size_t i = 1; i < words_.size(); ++i) {
    if (words_[i] != 0) return false;
  }
  return true;
}

std::uint64_t FocalSet::code_u64() const {
  if (!fits_u64()) throw InvalidQueryError("focal-set code does not fit in 64 bits");
  return words_.empty() ? 0 : words_[0];
}

std::string FocalSet::code() const {
  std::vector<std::uint64_t> n = words_;
  auto nonzero = [&] {
    return std::any_of(n.begin(), n.end(), [](std::uint64_t w) { return w != 0; });
  };
  if (!nonzero()) return "0";
  constexpr std::uint64_t kChunk = 10'000'000'000'000'000'000ull;  // 10^19
  std::vector<std::uint64_t> chunks;
  while (nonzero()) {
    unsigned __int128 rem = 0;
    for (auto it = n.rbegin(); it != n.rend(); ++it) {
      unsigned __int128 cur = (rem << 64) | *it;
      *it = static_cast<std::uint64_t>(cur / kChunk);
      rem = cur % kChunk;
    }
    chunks.push_back(static_cast<std::uint64_t>(rem));
  }
  std::string out = std::to_string(chunks.back());
  for (auto it = chunks.rbegin() + 1; it != chunks.rend(); ++it) {
    std::string part = std::to_string(*it);
    out.append(19 - part.size(), '0');
    out += part;
  }
  return out;
}

void FocalSet::trim() noexcept {
  if (words_.empty()) return;
  std::size_t tail = width_ % kWordBits;
  if (tail != 0) words_.back() &= (std::uint64_t{1} << tail) - 1;
}

std::strong_ordering operator<=>(const FocalSet& a, const FocalSet& b) {
  if (auto c = a.frame_id_ <=> b.frame_id_; c != 0) return c;
  if (auto c = a.width_ <=> b.width_; c != 0) return c;
  for (std::size_t i = a.words_.size(); i-- > 0;) {
    if (auto c = a.words_[i] <=> b.words_[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

FocalSet encode(const FrameSignature& frame, std::span<const std::string> members) {
  FocalSet s = FocalSet::empty(frame);
  for (const auto& m : members) {
    auto i = frame.index_of(m);
    if (i == FrameSignature::npos) throw UnknownElementError(frame.frame_id(), m);
    s.set(i);
  }
  return s;
}

FocalSet encode(const FrameSignature& frame, std::initializer_list<std::string_view> members) {
  std::vector<std::string> names(members.begin(), members.end());
  return encode(frame, std::span<const std::string>(names));
}

std::vector<std::string> decode(const FocalSet& set, const FrameSignature& frame) {
  if (set.frame_id() != frame.frame_id() || set.width() != frame.size()) {
    throw FrameMismatchError(set.frame_id(), frame.frame_id());
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (set.test(i)) out.push_back(frame.elements()[i]);
  }
  return out;
}

FocalSet intersect(const FocalSet& a, const FocalSet& b) {
  require_same_frame(a, b);
  FocalSet r = a;
  for (std::size_t i = 0; i < r.words_.size(); ++i) r.words_[i] &= b.words_[i];
  return r;
}

FocalSet unite(const FocalSet& a, const FocalSet& b) {
  require_same_frame(a, b);
  FocalSet r = a;
  for (std::size_t i = 0; i < r.words_.size(); ++i) r.words_[i] |= b.words_[i];
  return r;
}

FocalSet complement(const FocalSet& a) {
  FocalSet r = a;
  for (auto& w : r.words_) w = ~w;
  r.trim();
  return r;
}

bool is_subset(const FocalSet& a, const FocalSet& b) {
  require_same_frame(a, b);
  for (std::size_t i = 0; i < a.words_.size(); ++i) {
    if ((a.words_[i] & ~b.words_[i]) != 0) return false;
  }
  return true;
}

}  // namespace gertis
