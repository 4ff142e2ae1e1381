#ifndef RECOUNT_TESTS_ORACLE_HPP
#define RECOUNT_TESTS_ORACLE_HPP

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "recount/engine.hpp"
#include "recount/regex.hpp"

namespace oracle {

// End offsets e >= 1 such that input[0, e) is in the language, computed
// directly on the syntax tree by propagating sets of reachable offsets.
// Shares no code with the automata.
std::vector<std::uint64_t> match_ends(const recount::NodePtr& root, std::string_view input);

bool accepts(const recount::NodePtr& root, std::string_view input);

std::vector<recount::MatchEvent> events(const recount::NodePtr& root, std::string_view input);

// All strings over `alphabet` of length <= max_len.
std::vector<std::string> all_strings(std::string_view alphabet, std::size_t max_len);

struct GenOptions {
  std::size_t max_classes = 6;
  std::uint32_t max_bound = 8;
  std::size_t max_instances = 3;
  std::string alphabet = "abc";
  bool allow_star = true;
  bool allow_nested = true;
  double leading_any = 0.3;  // chance of a `.*` prefix
};

// Random pattern text in the supported dialect.
std::string random_regex(std::mt19937& rng, const GenOptions& opts);

std::string random_input(std::mt19937& rng, std::string_view alphabet, std::size_t max_len);

}  // namespace oracle

#endif  // RECOUNT_TESTS_ORACLE_HPP
