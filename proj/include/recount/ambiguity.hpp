#ifndef RECOUNT_AMBIGUITY_HPP
#define RECOUNT_AMBIGUITY_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "recount/nca.hpp"
#include "recount/regex.hpp"

namespace recount {

inline constexpr std::uint64_t kDefaultBudget = 10'000'000;

enum class Verdict { Unambiguous, Ambiguous, Inconclusive };
enum class InconclusiveReason { None, Budget, Approx };
enum class AnalysisMode { Exact, Approx, Hybrid };

const char* verdict_name(Verdict v);
const char* mode_name(AnalysisMode m);
AnalysisMode mode_from_name(const std::string& name);

// Two tokens reached by the same input that disagree on the instance's
// counter: either on one state, or on two body states of the instance.
struct AmbiguityEvidence {
  StateId state = 0;
  Valuation first;
  StateId other_state = 0;
  Valuation second;
};

struct InstanceVerdict {
  InstanceId instance = 0;
  std::uint32_t min = 0;
  std::uint32_t max = 0;
  Verdict verdict = Verdict::Inconclusive;
  InconclusiveReason reason = InconclusiveReason::None;
  std::optional<std::string> witness;  // raw bytes
  std::optional<AmbiguityEvidence> evidence;
  std::uint64_t pairs_created = 0;
  std::uint64_t micros = 0;
};

struct AmbiguityReport {
  AnalysisMode mode = AnalysisMode::Exact;
  std::vector<InstanceVerdict> instances;
  std::uint64_t pairs_created = 0;
  std::uint64_t micros = 0;

  // Ambiguous if any instance is; otherwise Inconclusive if any instance is.
  Verdict verdict() const;
  const InstanceVerdict* find(InstanceId id) const;
};

struct ExactOptions {
  std::uint64_t budget = kDefaultBudget;
  // Decide only these instances (all when empty).
  std::set<InstanceId> only;
  bool symmetry_reduction = true;
};

// Breadth-first reachability in the product of the NCA with itself.
AmbiguityReport exact_ambiguity(const Nca& nca, const ExactOptions& opts);
inline AmbiguityReport exact_ambiguity(const Nca& nca, std::uint64_t budget = kDefaultBudget) {
  return exact_ambiguity(nca, ExactOptions{budget, {}, true});
}

enum class Degree { Yes, No, Inconclusive };

// Whether some input puts d tokens with pairwise distinct valuations on q.
Degree degree_at_least(const Nca& nca, StateId q, std::uint32_t d,
                       std::uint64_t budget = kDefaultBudget);

// Relaxes every other instance to a star and runs the exact analysis for
// `instance` alone. Never returns Ambiguous.
InstanceVerdict approximate_ambiguity(const RegexAst& ast, InstanceId instance,
                                      std::uint64_t budget = kDefaultBudget);

// Approximation per instance; falls back to the exact analysis of the
// remaining instances at the first inconclusive one.
AmbiguityReport hybrid_ambiguity(const RegexAst& ast, std::uint64_t budget = kDefaultBudget);

// Dispatches on mode. The AST is normalized first.
AmbiguityReport analyze(const RegexAst& ast, AnalysisMode mode,
                        std::uint64_t budget = kDefaultBudget);

struct WitnessCheck {
  bool confirmed = false;
  AmbiguityEvidence evidence;
};

// Runs the configuration semantics on the witness and looks for two tokens
// on one state with different valuations, or (when `instance` is given)
// two tokens disagreeing on that instance's counter.
WitnessCheck verify_witness(const Nca& nca, const std::string& witness,
                            std::optional<InstanceId> instance = std::nullopt);

// ((a{n1}|)...(a{nm}|)#b|a{T}#bb)b{2}: its last instance is ambiguous iff
// some subset of S sums to T.
RegexAst subset_sum_regex(const std::vector<std::uint32_t>& s, std::uint32_t t);

// {regex, mode, verdict, instances:[...]} as one line of JSON.
std::string report_to_json(const std::string& regex, const AmbiguityReport& report,
                           bool with_witness = true);
// Inverse of report_to_json (evidence is not serialized).
std::pair<std::string, AmbiguityReport> report_from_json(const std::string& line);

}  // namespace recount

#endif  // RECOUNT_AMBIGUITY_HPP
