#ifndef RECOUNT_CHAR_CLASS_HPP
#define RECOUNT_CHAR_CLASS_HPP

#include <bitset>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

namespace recount {

// A predicate over the byte alphabet: a set of the 256 byte values.
class CharClass {
 public:
  CharClass() = default;

  static CharClass universal();
  static CharClass single(std::uint8_t byte);
  static CharClass range(std::uint8_t lo, std::uint8_t hi);
  static CharClass of(std::string_view bytes);

  bool contains(std::uint8_t byte) const { return bits_.test(byte); }
  void add(std::uint8_t byte) { bits_.set(byte); }
  void add_range(std::uint8_t lo, std::uint8_t hi);

  bool empty() const { return bits_.none(); }
  bool is_universal() const { return bits_.all(); }
  std::size_t size() const { return bits_.count(); }

  // Smallest member, if any.
  std::optional<std::uint8_t> min_byte() const;
  // The single member when size() == 1.
  std::optional<std::uint8_t> single_byte() const;

  CharClass complement() const { return CharClass(~bits_); }
  CharClass operator|(const CharClass& o) const { return CharClass(bits_ | o.bits_); }
  CharClass operator&(const CharClass& o) const { return CharClass(bits_ & o.bits_); }
  CharClass& operator|=(const CharClass& o) {
    bits_ |= o.bits_;
    return *this;
  }
  bool intersects(const CharClass& o) const { return (bits_ & o.bits_).any(); }

  bool operator==(const CharClass& o) const { return bits_ == o.bits_; }
  bool operator<(const CharClass& o) const;

  const std::bitset<256>& bits() const { return bits_; }
  std::size_t hash() const { return std::hash<std::bitset<256>>{}(bits_); }

  // Regex-dialect rendering: a literal, `.`, or a bracket expression.
  // parse_class_text() inverts it exactly.
  std::string to_string() const;

 private:
  explicit CharClass(const std::bitset<256>& b) : bits_(b) {}
  std::bitset<256> bits_;
};

// Parses one class written in the regex dialect (a literal, an escape, `.`,
// or a bracket expression) that spans the whole of `text`.
// Throws SyntaxError on malformed input.
CharClass parse_class_text(std::string_view text);

// Renders a byte for human-facing output: printable ASCII as-is, others as
// \xHH, backslash doubled.
std::string escape_bytes(std::string_view bytes);
// Inverse of escape_bytes (also accepts \n, \t, \r).
std::string unescape_bytes(std::string_view text);

}  // namespace recount

template <>
struct std::hash<recount::CharClass> {
  std::size_t operator()(const recount::CharClass& c) const noexcept { return c.hash(); }
};

#endif  // RECOUNT_CHAR_CLASS_HPP
