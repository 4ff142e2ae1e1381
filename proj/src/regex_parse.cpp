#include <cctype>
#include <string>

#include "recount/errors.hpp"
#include "recount/regex.hpp"

namespace recount {

namespace {

CharClass named_class(char c) {
  CharClass cls;
  switch (std::tolower(static_cast<unsigned char>(c))) {
    case 'd':
      cls.add_range('0', '9');
      break;
    case 'w':
      cls.add_range('0', '9');
      cls.add_range('a', 'z');
      cls.add_range('A', 'Z');
      cls.add('_');
      break;
    case 's':
      for (char ch : std::string_view(" \t\n\r\f\v")) cls.add(static_cast<std::uint8_t>(ch));
      break;
  }
  if (std::isupper(static_cast<unsigned char>(c))) cls = cls.complement();
  return cls;
}

std::optional<CharClass> posix_class(std::string_view name) {
  CharClass c;
  if (name == "alpha") {
    c.add_range('a', 'z');
    c.add_range('A', 'Z');
  } else if (name == "digit") {
    c.add_range('0', '9');
  } else if (name == "alnum") {
    c.add_range('a', 'z');
    c.add_range('A', 'Z');
    c.add_range('0', '9');
  } else if (name == "upper") {
    c.add_range('A', 'Z');
  } else if (name == "lower") {
    c.add_range('a', 'z');
  } else if (name == "space") {
    c = named_class('s');
  } else if (name == "blank") {
    c = CharClass::of(" \t");
  } else if (name == "punct") {
    for (unsigned b = 0x21; b < 0x7f; ++b)
      if (std::ispunct(static_cast<int>(b))) c.add(static_cast<std::uint8_t>(b));
  } else if (name == "print") {
    c.add_range(0x20, 0x7e);
  } else if (name == "graph") {
    c.add_range(0x21, 0x7e);
  } else if (name == "cntrl") {
    c.add_range(0x00, 0x1f);
    c.add(0x7f);
  } else if (name == "xdigit") {
    c.add_range('0', '9');
    c.add_range('a', 'f');
    c.add_range('A', 'F');
  } else if (name == "word") {
    c = named_class('w');
  } else {
    return std::nullopt;
  }
  return c;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ParseResult run() {
    ParseResult result;
    NodePtr root = parse_alternation();
    if (pos_ < text_.size()) throw SyntaxError("unbalanced ')'", pos_);
    result.diagnostics = std::move(diag_);
    result.notes = std::move(notes_);
    if (result.diagnostics.empty()) result.ast = RegexAst{root, next_id_};
    return result;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  bool lookahead(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

  void unsupported(std::string feature, std::size_t begin, std::size_t end) {
    diag_.unsupported.push_back({std::move(feature), begin, end});
  }

  NodePtr parse_alternation() {
    NodePtr node = parse_concatenation();
    while (!at_end() && peek() == '|') {
      ++pos_;
      node = make_alt(node, parse_concatenation());
    }
    return node;
  }

  NodePtr parse_concatenation() {
    NodePtr node;
    while (!at_end() && peek() != '|' && peek() != ')') {
      NodePtr piece = parse_repetition();
      if (!piece) continue;
      node = node ? make_concat(node, piece) : piece;
    }
    return node ? node : make_epsilon();
  }

  // Parses `{m}`, `{m,}` or `{m,n}` at pos_. Returns false (pos_ untouched)
  // when the brace does not start a valid quantifier.
  bool parse_braces(std::uint32_t& lo, std::optional<std::uint32_t>& hi) {
    std::size_t p = pos_ + 1;
    auto number = [&](std::uint64_t& out) {
      std::size_t start = p;
      out = 0;
      while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        out = out * 10 + static_cast<std::uint64_t>(text_[p] - '0');
        if (out > kMaxRepeatBound) throw SyntaxError("repetition bound too large", start);
        ++p;
      }
      return p > start;
    };
    std::uint64_t m = 0, n = 0;
    if (!number(m)) return false;
    bool open = false;
    bool has_n = false;
    if (p < text_.size() && text_[p] == ',') {
      ++p;
      has_n = number(n);
      open = !has_n;
    }
    if (p >= text_.size() || text_[p] != '}') return false;
    if (has_n && m > n) throw SyntaxError("repetition {m,n} with m > n", pos_);
    lo = static_cast<std::uint32_t>(m);
    if (open) {
      hi.reset();
    } else {
      hi = static_cast<std::uint32_t>(has_n ? n : m);
    }
    pos_ = p + 1;
    return true;
  }

  NodePtr parse_repetition() {
    std::size_t atom_begin = pos_;
    NodePtr node = parse_atom();
    if (!node) return nullptr;
    while (!at_end()) {
      char c = peek();
      if (c == '*') {
        ++pos_;
        node = make_star(node);
      } else if (c == '+') {
        ++pos_;
        node = make_concat(node, make_star(clone_with_fresh_ids(node, next_id_)));
      } else if (c == '?') {
        ++pos_;
        node = make_alt(node, make_epsilon());
      } else if (c == '{') {
        std::uint32_t lo = 0;
        std::optional<std::uint32_t> hi;
        if (!parse_braces(lo, hi)) break;
        if (hi) {
          node = make_repeat(node, lo, *hi, next_id_++);
        } else {
          notes_.push_back("open-ended repetition {" + std::to_string(lo) +
                           ",} rewritten as r{" + std::to_string(lo) + "}r*");
          NodePtr tail = make_star(clone_with_fresh_ids(node, next_id_));
          node = lo == 0 ? tail : make_concat(make_repeat(node, lo, lo, next_id_++), tail);
        }
      } else {
        break;
      }
      // Lazy (`?`) suffixes do not change the language; possessive ones do.
      if (!at_end() && peek() == '?') {
        ++pos_;
      } else if (!at_end() && peek() == '+') {
        unsupported("possessive-quantifier", atom_begin, pos_ + 1);
        ++pos_;
      }
    }
    return node;
  }

  NodePtr parse_group() {
    std::size_t begin = pos_;
    ++pos_;  // '('
    std::optional<std::string> reject;
    if (lookahead("?")) {
      if (lookahead("?:")) {
        pos_ += 2;
      } else if (lookahead("?=") || lookahead("?!")) {
        pos_ += 2;
        reject = "lookaround";
      } else if (lookahead("?<=") || lookahead("?<!")) {
        pos_ += 3;
        reject = "lookaround";
      } else if (lookahead("?P<") || lookahead("?<") || lookahead("?'")) {
        std::size_t close = text_.find_first_of(">'", pos_ + 2);
        if (close == std::string_view::npos) throw SyntaxError("unterminated group name", pos_);
        pos_ = close + 1;
      } else if (lookahead("?>")) {
        pos_ += 2;
        reject = "atomic-group";
      } else {
        std::size_t close = text_.find(')', pos_);
        if (close == std::string_view::npos) throw SyntaxError("unbalanced '('", begin);
        unsupported(lookahead("?#") ? "comment-group" : "inline-flags", begin, close + 1);
        pos_ = close + 1;
        return make_epsilon();
      }
    }
    NodePtr inner = parse_alternation();
    if (at_end() || peek() != ')') throw SyntaxError("unbalanced '('", begin);
    ++pos_;
    if (reject) {
      unsupported(*reject, begin, pos_);
      return make_epsilon();
    }
    return inner;
  }

  // Single-byte escape shared by atoms and bracket expressions. Returns the
  // class, or nullopt when the escape was recorded as unsupported.
  std::optional<CharClass> parse_escape(bool in_bracket) {
    std::size_t begin = pos_;
    ++pos_;  // '\'
    if (at_end()) throw SyntaxError("trailing backslash", begin);
    char c = text_[pos_++];
    switch (c) {
      case 'n': return CharClass::single('\n');
      case 't': return CharClass::single('\t');
      case 'r': return CharClass::single('\r');
      case 'f': return CharClass::single('\f');
      case 'v': return CharClass::single('\v');
      case 'a': return CharClass::single(0x07);
      case 'e': return CharClass::single(0x1b);
      case 'd': case 'D': case 'w': case 'W': case 's': case 'S':
        return named_class(c);
      case 'x': {
        unsigned value = 0;
        if (!at_end() && peek() == '{') {
          std::size_t close = text_.find('}', pos_);
          if (close == std::string_view::npos || close == pos_ + 1)
            throw SyntaxError("bad \\x{...} escape", begin);
          for (std::size_t i = pos_ + 1; i < close; ++i) {
            int h = hex_value(text_[i]);
            if (h < 0) throw SyntaxError("bad \\x{...} escape", begin);
            value = value * 16 + static_cast<unsigned>(h);
            if (value > 0xff) throw SyntaxError("\\x{...} escape beyond a byte", begin);
          }
          pos_ = close + 1;
        } else {
          if (pos_ + 2 > text_.size()) throw SyntaxError("truncated \\x escape", begin);
          int h1 = hex_value(text_[pos_]);
          int h2 = hex_value(text_[pos_ + 1]);
          if (h1 < 0 || h2 < 0) throw SyntaxError("bad \\x escape", begin);
          value = static_cast<unsigned>(h1 * 16 + h2);
          pos_ += 2;
        }
        return CharClass::single(static_cast<std::uint8_t>(value));
      }
      case '0': {
        unsigned value = 0;
        for (int i = 0; i < 2 && !at_end() && peek() >= '0' && peek() <= '7'; ++i)
          value = value * 8 + static_cast<unsigned>(text_[pos_++] - '0');
        return CharClass::single(static_cast<std::uint8_t>(value));
      }
      case 'c': {
        if (at_end()) throw SyntaxError("truncated \\c escape", begin);
        char x = text_[pos_++];
        return CharClass::single(static_cast<std::uint8_t>(std::toupper(static_cast<unsigned char>(x)) ^ 0x40));
      }
      case 'b':
        if (in_bracket) return CharClass::single(0x08);
        unsupported("anchor", begin, pos_);
        return std::nullopt;
      case 'B': case 'A': case 'z': case 'Z': case 'G':
        unsupported("anchor", begin, pos_);
        return std::nullopt;
      case 'k': case 'g':
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                             std::string_view("{}<>'-").find(peek()) != std::string_view::npos))
          ++pos_;
        unsupported("backreference", begin, pos_);
        return std::nullopt;
      case 'p': case 'P':
        if (!at_end() && peek() == '{') {
          std::size_t close = text_.find('}', pos_);
          pos_ = close == std::string_view::npos ? text_.size() : close + 1;
        } else if (!at_end()) {
          ++pos_;
        }
        unsupported("unicode-property", begin, pos_);
        return std::nullopt;
      default:
        break;
    }
    if (c >= '1' && c <= '9') {
      if (in_bracket) throw SyntaxError("backreference inside bracket expression", begin);
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      unsupported("backreference", begin, pos_);
      return std::nullopt;
    }
    if (std::isalnum(static_cast<unsigned char>(c)))
      throw SyntaxError(std::string("unknown escape \\") + c, begin);
    return CharClass::single(static_cast<std::uint8_t>(c));
  }

  CharClass parse_bracket() {
    std::size_t begin = pos_;
    ++pos_;  // '['
    bool negate = false;
    if (!at_end() && peek() == '^') {
      negate = true;
      ++pos_;
    }
    CharClass cls;
    bool first = true;
    for (;;) {
      if (at_end()) throw SyntaxError("unbalanced '['", begin);
      char c = peek();
      if (c == ']' && !first) {
        ++pos_;
        break;
      }
      first = false;
      if (c == '[' && lookahead("[:")) {
        std::size_t close = text_.find(":]", pos_ + 2);
        if (close != std::string_view::npos) {
          auto named = posix_class(text_.substr(pos_ + 2, close - pos_ - 2));
          if (!named) throw SyntaxError("unknown POSIX class", pos_);
          cls |= *named;
          pos_ = close + 2;
          continue;
        }
      }
      // One member: a byte or a multi-byte escape class.
      std::optional<std::uint8_t> lo;
      if (c == '\\') {
        auto member = parse_escape(true);
        if (!member) continue;
        if (member->size() != 1) {
          cls |= *member;
          continue;
        }
        lo = *member->single_byte();
      } else {
        lo = static_cast<std::uint8_t>(c);
        ++pos_;
      }
      if (!at_end() && peek() == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] != ']') {
        std::size_t range_at = pos_;
        ++pos_;
        std::uint8_t hi = 0;
        if (peek() == '\\') {
          auto member = parse_escape(true);
          if (!member || member->size() != 1) throw SyntaxError("bad range end", range_at);
          hi = *member->single_byte();
        } else {
          hi = static_cast<std::uint8_t>(peek());
          ++pos_;
        }
        if (hi < *lo) throw SyntaxError("reversed range in bracket expression", range_at);
        cls.add_range(*lo, hi);
      } else {
        cls.add(*lo);
      }
    }
    return negate ? cls.complement() : cls;
  }

  // Returns nullptr for a leading `^`; rejected features yield a placeholder
  // so that a following quantifier still parses.
  NodePtr parse_atom() {
    std::size_t begin = pos_;
    char c = peek();
    switch (c) {
      case '(':
        return parse_group();
      case ')':
        throw SyntaxError("unbalanced ')'", pos_);
      case '[':
        return make_class(parse_bracket());
      case '.':
        ++pos_;
        return make_class(CharClass::universal());
      case '*': case '+': case '?':
        throw SyntaxError("nothing to repeat", pos_);
      case '{': {
        std::uint32_t lo = 0;
        std::optional<std::uint32_t> hi;
        std::size_t save = pos_;
        if (parse_braces(lo, hi)) throw SyntaxError("nothing to repeat", save);
        ++pos_;
        return make_class(CharClass::single('{'));
      }
      case '^':
        ++pos_;
        // Patterns already match from the start of the stream.
        if (begin == 0) return nullptr;
        unsupported("anchor", begin, pos_);
        return make_epsilon();
      case '$':
        ++pos_;
        unsupported("anchor", begin, pos_);
        return make_epsilon();
      case '\\': {
        if (lookahead("\\Q")) {
          pos_ += 2;
          std::size_t close = text_.find("\\E", pos_);
          std::size_t stop = close == std::string_view::npos ? text_.size() : close;
          NodePtr node;
          for (; pos_ < stop; ++pos_) {
            NodePtr lit = make_class(CharClass::single(static_cast<std::uint8_t>(text_[pos_])));
            node = node ? make_concat(node, lit) : lit;
          }
          pos_ = close == std::string_view::npos ? text_.size() : close + 2;
          return node ? node : make_epsilon();
        }
        auto cls = parse_escape(false);
        if (!cls) return make_epsilon();
        return make_class(*cls);
      }
      default:
        ++pos_;
        return make_class(CharClass::single(static_cast<std::uint8_t>(c)));
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  InstanceId next_id_ = 0;
  ParseDiagnostics diag_;
  std::vector<std::string> notes_;
};

}  // namespace

ParseResult parse(std::string_view text) { return Parser(text).run(); }

RegexAst parse_or_throw(std::string_view text) {
  ParseResult r = parse(text);
  if (!r.ok()) {
    const auto& f = r.diagnostics.unsupported.front();
    throw SyntaxError("unsupported " + f.feature, f.begin);
  }
  return *r.ast;
}

std::string ParseDiagnostics::summary() const {
  std::string out;
  for (const auto& f : unsupported) {
    if (!out.empty()) out += ", ";
    out += f.feature;
  }
  return out;
}

}  // namespace recount
