#ifndef RECOUNT_RULESET_HPP
#define RECOUNT_RULESET_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "recount/ambiguity.hpp"
#include "recount/regex.hpp"

namespace recount {

struct Rule {
  std::uint32_t id = 0;
  std::string regex;  // after wrapper stripping, in the toolkit dialect
  std::size_t line = 0;
  std::string flags;
  RegexAst ast;
};

struct RejectedRule {
  std::size_t line = 0;
  std::string text;
  std::string reason;
};

struct Ruleset {
  std::string name;
  std::vector<Rule> rules;
  std::vector<RejectedRule> rejected;
  std::size_t skipped = 0;  // rule lines carrying no pattern (e.g. Snort rules without pcre)

  std::size_t total() const { return rules.size() + rejected.size(); }
};

// One pattern per line, `#` comments and blank lines ignored. A line may be
// a bare pattern, a PCRE literal `/.../flags` (unanchored unless it starts
// with `^`, so it gets a `.*` prefix), or a Snort rule whose pcre options
// are extracted.
Ruleset parse_ruleset(std::string_view text, const std::string& name = "");
Ruleset load_ruleset(const std::string& path);

// Runs fn(0..n-1) on up to `jobs` threads.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

struct RuleStats {
  std::uint32_t id = 0;
  std::string regex;
  std::uint32_t mu = 0;
  std::size_t instances = 0;
  Verdict verdict = Verdict::Unambiguous;
  std::uint64_t pairs_created = 0;
  double micros = 0;  // mean over timed trials
  std::string error;  // analysis failure, e.g. a size limit
};

struct BenchOptions {
  AnalysisMode mode = AnalysisMode::Hybrid;
  std::uint64_t budget = kDefaultBudget;
  std::vector<std::uint64_t> thresholds{0, 8, 16, 32, 64, 128, 256};
  unsigned trials = 1;
  unsigned warmup = 0;
  unsigned jobs = 1;
};

struct BenchStats {
  std::string name;
  std::size_t total = 0;
  std::size_t supported = 0;
  std::size_t counting = 0;
  std::size_t ambiguous = 0;
  std::map<std::string, std::size_t> rejected_by_reason;
  std::vector<RuleStats> rules;
  std::map<std::uint64_t, std::size_t> node_counts;  // threshold -> IR nodes
};

BenchStats bench(const Ruleset& rs, const BenchOptions& opts = {});

std::string bench_csv_header();
std::string bench_csv_row(const BenchStats& s);
std::string bench_table(const std::vector<BenchStats>& all);
std::string node_count_csv(const std::vector<BenchStats>& all);

}  // namespace recount

#endif  // RECOUNT_RULESET_HPP
