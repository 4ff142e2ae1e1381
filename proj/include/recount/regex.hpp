#ifndef RECOUNT_REGEX_HPP
#define RECOUNT_REGEX_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "recount/char_class.hpp"

namespace recount {

using InstanceId = std::uint32_t;

enum class NodeKind { Epsilon, Class, Concat, Alt, Star, Repeat };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

// Immutable syntax tree node. Concat and Alt use `left`/`right`; Star and
// Repeat keep their operand in `left`.
struct Node {
  NodeKind kind = NodeKind::Epsilon;
  CharClass cls;
  NodePtr left;
  NodePtr right;
  std::uint32_t min = 0;
  std::uint32_t max = 0;
  InstanceId instance = 0;

  const NodePtr& child() const { return left; }
};

// Repetition bounds must stay below this.
inline constexpr std::uint32_t kMaxRepeatBound = std::numeric_limits<std::int32_t>::max();

NodePtr make_epsilon();
NodePtr make_class(const CharClass& cls);
NodePtr make_concat(NodePtr left, NodePtr right);
NodePtr make_alt(NodePtr left, NodePtr right);
NodePtr make_star(NodePtr child);
NodePtr make_repeat(NodePtr child, std::uint32_t min, std::uint32_t max, InstanceId id);

// A parsed pattern. Every Repeat node carries an instance id that is unique
// in the tree; ids below `next_instance` are in use or retired.
struct RegexAst {
  NodePtr root;
  InstanceId next_instance = 0;
};

struct UnsupportedFeature {
  std::string feature;  // "backreference", "lookaround", "anchor", ...
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Non-empty iff the pattern was rejected as non-regular or unsupported.
struct ParseDiagnostics {
  std::vector<UnsupportedFeature> unsupported;
  bool empty() const { return unsupported.empty(); }
  std::string summary() const;
};

struct ParseResult {
  std::optional<RegexAst> ast;
  ParseDiagnostics diagnostics;
  // Informational rewrites, e.g. open-ended `{m,}`.
  std::vector<std::string> notes;

  bool ok() const { return ast.has_value(); }
};

// Parses the POSIX-style dialect. Unsupported features are reported in the
// diagnostics; malformed syntax throws SyntaxError.
ParseResult parse(std::string_view text);

// Like parse(), but unsupported features also throw SyntaxError.
RegexAst parse_or_throw(std::string_view text);

// Renders a tree in the dialect parse() accepts; parse(to_string(n)) is
// structurally equal to n.
std::string to_string(const NodePtr& node);
inline std::string to_string(const RegexAst& ast) { return to_string(ast.root); }

// Structural equality ignoring instance ids.
bool structurally_equal(const NodePtr& a, const NodePtr& b);

bool nullable(const NodePtr& node);
bool contains_repeat(const NodePtr& node);

// Copies a subtree, giving every Repeat inside it a fresh id drawn from
// `next`. Repeat-free subtrees are shared, not copied.
NodePtr clone_with_fresh_ids(const NodePtr& node, InstanceId& next);
std::size_t node_count(const NodePtr& node);

// Unfolds repetitions with max < 2, merges class alternatives, and rewrites
// r{0,n} into (|r{1,n}). Idempotent and language-preserving.
RegexAst normalize(const RegexAst& ast);

struct InstanceInfo {
  InstanceId id = 0;
  std::uint32_t min = 0;
  std::uint32_t max = 0;
  std::string body;
  bool single_class = false;
  bool nested = false;        // contains another instance
};

// Repeat nodes in left-to-right source order.
std::vector<InstanceInfo> count_instances(const RegexAst& ast);

// Largest repetition upper bound, 0 without counting.
std::uint32_t max_repetition_bound(const RegexAst& ast);

inline constexpr std::size_t kDefaultNodeLimit = 10'000'000;
inline constexpr std::uint64_t kUnfoldAll = std::numeric_limits<std::uint64_t>::max();

// Replaces every Repeat whose max <= threshold with explicit
// concatenations and right-nested optionals. Throws SizeLimitError when the
// result would exceed node_limit nodes.
RegexAst unfold(const RegexAst& ast, std::uint64_t threshold,
                std::size_t node_limit = kDefaultNodeLimit);

// Unfolds exactly the listed instances.
RegexAst unfold_instances(const RegexAst& ast, const std::set<InstanceId>& ids,
                          std::size_t node_limit = kDefaultNodeLimit);

// Rewrites every Repeat except `keep` to a Star of its body.
RegexAst relax_except(const RegexAst& ast, InstanceId keep);

}  // namespace recount

#endif  // RECOUNT_REGEX_HPP
