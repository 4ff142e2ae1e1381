#include "oracle.hpp"

#include <functional>

namespace oracle {

using recount::NodeKind;
using recount::NodePtr;

namespace {

using Offsets = std::vector<bool>;

bool none(const Offsets& s) {
  for (bool b : s)
    if (b) return false;
  return true;
}

void unite(Offsets& into, const Offsets& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] = into[i] || from[i];
}

Offsets ends(const NodePtr& n, const Offsets& from, std::string_view s) {
  Offsets out(from.size(), false);
  switch (n->kind) {
    case NodeKind::Epsilon:
      return from;
    case NodeKind::Class:
      for (std::size_t i = 0; i < s.size(); ++i)
        if (from[i] && n->cls.contains(static_cast<std::uint8_t>(s[i]))) out[i + 1] = true;
      return out;
    case NodeKind::Concat:
      return ends(n->right, ends(n->left, from, s), s);
    case NodeKind::Alt:
      out = ends(n->left, from, s);
      unite(out, ends(n->right, from, s));
      return out;
    case NodeKind::Star: {
      out = from;
      Offsets frontier = from;
      while (!none(frontier)) {
        Offsets next = ends(n->left, frontier, s);
        Offsets fresh(from.size(), false);
        for (std::size_t i = 0; i < next.size(); ++i) fresh[i] = next[i] && !out[i];
        unite(out, fresh);
        frontier = fresh;
      }
      return out;
    }
    case NodeKind::Repeat: {
      Offsets cur = from;
      for (std::uint32_t k = 0; k < n->min; ++k) cur = ends(n->left, cur, s);
      out = cur;
      for (std::uint32_t k = n->min; k < n->max && !none(cur); ++k) {
        cur = ends(n->left, cur, s);
        unite(out, cur);
      }
      return out;
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint64_t> match_ends(const NodePtr& root, std::string_view input) {
  Offsets start(input.size() + 1, false);
  start[0] = true;
  Offsets e = ends(root, start, input);
  std::vector<std::uint64_t> out;
  for (std::size_t i = 1; i < e.size(); ++i)
    if (e[i]) out.push_back(i);
  return out;
}

bool accepts(const NodePtr& root, std::string_view input) {
  Offsets start(input.size() + 1, false);
  start[0] = true;
  return ends(root, start, input).back();
}

std::vector<recount::MatchEvent> events(const NodePtr& root, std::string_view input) {
  std::vector<recount::MatchEvent> out;
  for (auto e : match_ends(root, input)) out.push_back({e, 0});
  return out;
}

std::vector<std::string> all_strings(std::string_view alphabet, std::size_t max_len) {
  std::vector<std::string> out{""};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (char c : alphabet) out.push_back(out[i] + c);
    begin = end;
  }
  return out;
}

namespace {

class Generator {
 public:
  Generator(std::mt19937& rng, const GenOptions& o) : rng_(rng), o_(o) {}

  std::string run() {
    classes_ = 0;
    instances_ = 0;
    std::string body = expr(1 + pick(o_.max_classes), 0);
    if (chance(o_.leading_any)) body = ".*" + group(body);
    return body;
  }

 private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  static std::string group(const std::string& s) { return "(" + s + ")"; }

  std::string atom() {
    ++classes_;
    const std::string& a = o_.alphabet;
    switch (pick(8)) {
      case 0: return ".";
      case 1: return "[" + a.substr(0, 2) + "]";
      case 2: return "[^" + a.substr(0, 1) + "]";
      default: return std::string(1, a[pick(a.size())]);
    }
  }

  // An expression using at most `budget` class occurrences.
  std::string expr(std::size_t budget, int depth) {
    if (budget <= 1 || depth > 4) return quantified(atom(), depth);
    std::size_t left = 1 + pick(budget - 1);
    switch (pick(4)) {
      case 0:
        return group(expr(left, depth + 1)) + "|" + group(expr(budget - left, depth + 1));
      case 1:
        return quantified(group(expr(budget, depth + 1)), depth);
      default:
        return expr(left, depth + 1) + expr(budget - left, depth + 1);
    }
  }

  std::string quantified(const std::string& operand, int depth) {
    bool wrapped = operand.front() == '(';
    if (wrapped && !o_.allow_nested && operand.find('{') != std::string::npos) return operand;
    switch (pick(7)) {
      case 0:
      case 1:
      case 2:
        if (instances_ < o_.max_instances) {
          ++instances_;
          std::uint32_t hi = 2 + static_cast<std::uint32_t>(pick(o_.max_bound - 1));
          std::uint32_t lo = static_cast<std::uint32_t>(pick(hi + 1));
          if (chance(0.3)) return operand + "{" + std::to_string(hi) + "}";
          return operand + "{" + std::to_string(lo) + "," + std::to_string(hi) + "}";
        }
        return operand;
      case 3:
        return o_.allow_star && depth > 0 ? operand + "*" : operand;
      case 4:
        return operand + "?";
      default:
        return operand;
    }
  }

  std::mt19937& rng_;
  const GenOptions& o_;
  std::size_t classes_ = 0;
  std::size_t instances_ = 0;
};

}  // namespace

std::string random_regex(std::mt19937& rng, const GenOptions& opts) { return Generator(rng, opts).run(); }

std::string random_input(std::mt19937& rng, std::string_view alphabet, std::size_t max_len) {
  std::size_t len = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
  std::string s;
  for (std::size_t i = 0; i < len; ++i)
    s += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
  return s;
}

}  // namespace oracle
