#include "recount/char_class.hpp"

#include <cctype>
#include <cstdio>

#include "recount/errors.hpp"
#include "recount/regex.hpp"

namespace recount {

CharClass CharClass::universal() {
  CharClass c;
  c.bits_.set();
  return c;
}

CharClass CharClass::single(std::uint8_t byte) {
  CharClass c;
  c.add(byte);
  return c;
}

CharClass CharClass::range(std::uint8_t lo, std::uint8_t hi) {
  CharClass c;
  c.add_range(lo, hi);
  return c;
}

CharClass CharClass::of(std::string_view bytes) {
  CharClass c;
  for (char ch : bytes) c.add(static_cast<std::uint8_t>(ch));
  return c;
}

void CharClass::add_range(std::uint8_t lo, std::uint8_t hi) {
  for (unsigned b = lo; b <= hi; ++b) bits_.set(b);
}

std::optional<std::uint8_t> CharClass::min_byte() const {
  for (unsigned b = 0; b < 256; ++b)
    if (bits_.test(b)) return static_cast<std::uint8_t>(b);
  return std::nullopt;
}

std::optional<std::uint8_t> CharClass::single_byte() const {
  if (bits_.count() != 1) return std::nullopt;
  return min_byte();
}

bool CharClass::operator<(const CharClass& o) const {
  for (int b = 0; b < 256; ++b) {
    if (bits_.test(b) != o.bits_.test(b)) return !bits_.test(b);
  }
  return false;
}

namespace {

bool is_printable(unsigned b) { return b >= 0x20 && b < 0x7f; }

bool is_regex_meta(unsigned b) {
  switch (b) {
    case '\\': case '.': case '[': case ']': case '(': case ')': case '|':
    case '*': case '+': case '?': case '{': case '}': case '^': case '$':
      return true;
    default:
      return false;
  }
}

void append_hex(std::string& out, unsigned b) {
  char buf[5];
  std::snprintf(buf, sizeof buf, "\\x%02x", b);
  out += buf;
}

void append_bracket_member(std::string& out, unsigned b) {
  if (!is_printable(b)) {
    append_hex(out, b);
  } else if (b == ']' || b == '\\' || b == '^' || b == '-' || b == '[') {
    out += '\\';
    out += static_cast<char>(b);
  } else {
    out += static_cast<char>(b);
  }
}

std::string bracket_body(const std::bitset<256>& bits) {
  std::string out;
  unsigned b = 0;
  while (b < 256) {
    if (!bits.test(b)) {
      ++b;
      continue;
    }
    unsigned e = b;
    while (e + 1 < 256 && bits.test(e + 1)) ++e;
    append_bracket_member(out, b);
    if (e >= b + 2) {
      out += '-';
      append_bracket_member(out, e);
    } else if (e == b + 1) {
      append_bracket_member(out, e);
    }
    b = e + 1;
  }
  return out;
}

}  // namespace

std::string CharClass::to_string() const {
  if (is_universal()) return ".";
  if (auto one = single_byte()) {
    unsigned b = *one;
    std::string out;
    if (!is_printable(b)) {
      append_hex(out, b);
    } else if (is_regex_meta(b)) {
      out += '\\';
      out += static_cast<char>(b);
    } else {
      out += static_cast<char>(b);
    }
    return out;
  }
  if (empty()) return "[^\\x00-\\xff]";
  std::string pos = bracket_body(bits_);
  std::string neg = bracket_body(~bits_);
  if (neg.size() < pos.size()) return "[^" + neg + "]";
  return "[" + pos + "]";
}

CharClass parse_class_text(std::string_view text) {
  RegexAst ast = parse_or_throw(text);
  const Node& root = *ast.root;
  if (root.kind != NodeKind::Class)
    throw SyntaxError("expected a single character class", 0);
  return root.cls;
}

std::string escape_bytes(std::string_view bytes) {
  std::string out;
  for (char ch : bytes) {
    unsigned b = static_cast<unsigned char>(ch);
    if (b == '\\') {
      out += "\\\\";
    } else if (is_printable(b)) {
      out += ch;
    } else {
      append_hex(out, b);
    }
  }
  return out;
}

std::string unescape_bytes(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\' || i + 1 == text.size()) {
      out += text[i];
      continue;
    }
    char e = text[++i];
    switch (e) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case 'x': {
        if (i + 2 >= text.size()) throw SyntaxError("truncated \\x escape", i);
        auto hex = std::string(text.substr(i + 1, 2));
        if (!std::isxdigit(static_cast<unsigned char>(hex[0])) ||
            !std::isxdigit(static_cast<unsigned char>(hex[1])))
          throw SyntaxError("bad \\x escape", i);
        out += static_cast<char>(std::stoi(hex, nullptr, 16));
        i += 2;
        break;
      }
      default: out += e; break;
    }
  }
  return out;
}

}  // namespace recount
