#ifndef RECOUNT_ENGINE_HPP
#define RECOUNT_ENGINE_HPP

#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "recount/ambiguity.hpp"
#include "recount/nca.hpp"
#include "recount/regex.hpp"

namespace recount {

struct Token {
  StateId state = 0;
  Valuation values;

  auto operator<=>(const Token&) const = default;
  bool operator==(const Token&) const = default;
};

// Sorted, duplicate-free token set.
using Configuration = std::vector<Token>;

Configuration initial_configuration(const Nca& nca);
Configuration step(const Nca& nca, const Configuration& config, std::uint8_t byte);
bool accepting(const Nca& nca, const Configuration& config);
Configuration run(const Nca& nca, std::string_view input);

struct MatchEvent {
  std::uint64_t end_offset = 0;
  std::uint32_t rule_id = 0;

  bool operator==(const MatchEvent&) const = default;
};

enum class Backend { Reference, Optimized, UnfoldedNfa };

const char* backend_name(Backend b);
Backend backend_from_name(std::string_view name);

// A single left-to-right pass. feed() returns true when the prefix read so
// far matches.
class StreamMatcher {
 public:
  virtual ~StreamMatcher() = default;
  virtual void reset() = 0;
  virtual bool feed(std::uint8_t byte) = 0;
};

std::vector<MatchEvent> match_stream(StreamMatcher& m, std::string_view input,
                                     std::uint32_t rule_id = 0);

class ReferenceMatcher : public StreamMatcher {
 public:
  explicit ReferenceMatcher(Nca nca);
  void reset() override;
  bool feed(std::uint8_t byte) override;
  const Configuration& configuration() const { return config_; }
  const Nca& nca() const { return nca_; }

 private:
  Nca nca_;
  Configuration config_;
};

// Counting-free position automaton of the fully unfolded pattern, simulated
// with a bit set of active positions.
class NfaMatcher : public StreamMatcher {
 public:
  explicit NfaMatcher(const RegexAst& ast, std::size_t node_limit = kDefaultNodeLimit);
  void reset() override;
  bool feed(std::uint8_t byte) override;
  std::size_t state_count() const { return classes_.size(); }

 private:
  std::vector<CharClass> classes_;  // index 0 is the start position
  std::vector<std::vector<std::uint32_t>> follow_;
  std::vector<bool> final_;
  std::vector<std::uint64_t> active_;
  std::vector<std::uint64_t> next_;
};

// Fixed-length bit vector indexed 1..n: bit i set iff a token with counter
// value i is live on the repetition's body state.
class BitVectorCell {
 public:
  explicit BitVectorCell(std::uint32_t n = 1);

  std::uint32_t size() const { return n_; }
  bool test(std::uint32_t i) const;
  void set(std::uint32_t i);
  bool any() const;
  std::vector<std::uint32_t> members() const;
  std::string to_string() const;  // bit 1 first

  void reset();
  void set_first();
  // bits'[i+1] = bits[i] for i = 1..n-1, bits'[1] = 0; bit n is dropped.
  void shift();
  // OR of bits[m..n].
  bool disjunct(std::uint32_t m, std::uint32_t n) const;
  // Keeps only bits[m..n].
  void mask(std::uint32_t m, std::uint32_t n);
  BitVectorCell& operator|=(const BitVectorCell& o);
  bool operator==(const BitVectorCell&) const = default;

 private:
  std::uint32_t n_;
  std::vector<std::uint64_t> words_;
};

struct CounterCell {
  bool active = false;
  std::uint32_t value = 0;
  std::uint32_t min = 1;
  std::uint32_t max = 1;
};

struct CounterStep {
  CounterCell cell;
  bool en_fst = false;
  bool en_out = false;
};

// Counter module with pre/fst/lst inputs. The value restarts at 1 when pre
// was active last cycle and fst is active now, and increments when fst is
// active without pre; en_out = lst && min <= value <= max and
// en_fst = lst && value < max.
CounterStep counter_cell_step(const CounterCell& cell, bool pre_prev, bool fst_now, bool lst_now);

enum class CellKind { Counter, BitVector };

struct CellInfo {
  InstanceId instance = 0;
  CellKind kind = CellKind::Counter;
  std::uint32_t min = 0;
  std::uint32_t max = 0;
  std::size_t memory_bits = 0;
};

// Executes an NCA whose counting instances are all served by cells: one
// shared value for each unambiguous instance and a bit vector for each
// ambiguous single-class instance. Throws FallbackRequired for any other
// shape (inconclusive or ambiguous multi-state instances, nested counting).
class OptimizedMatcher : public StreamMatcher {
 public:
  OptimizedMatcher(Nca nca, const AmbiguityReport& report);
  void reset() override;
  bool feed(std::uint8_t byte) override;

  const std::vector<CellInfo>& cells() const { return cells_; }
  std::size_t memory_bits() const;
  // Live counter values of an instance (one value at most for a counter
  // cell); empty when no body state is active.
  std::vector<std::uint32_t> values_of(InstanceId instance) const;
  const BitVectorCell* bit_vector(InstanceId instance) const;
  std::uint32_t counter_value(InstanceId instance) const;
  bool state_active(StateId q) const { return active_[q]; }
  const Nca& nca() const { return nca_; }

 private:
  Nca nca_;
  std::vector<CellInfo> cells_;
  std::vector<int> cell_of_state_;  // -1 for pure states
  std::vector<bool> active_;
  std::vector<CounterCell> counters_;
  std::vector<BitVectorCell> vectors_;
  std::vector<std::size_t> storage_;  // cell -> index into counters_ or vectors_
};

struct MatchPlan {
  RegexAst ast;          // after normalization and any unfolding
  Nca nca;
  AmbiguityReport report;
  std::vector<InstanceId> unfolded;  // instances rewritten before optimization
};

// Normalizes, unfolds nested and unplaceable instances until every
// remaining instance gets a cell.
MatchPlan plan_optimized(const RegexAst& ast, std::uint64_t budget = kDefaultBudget,
                         std::size_t node_limit = kDefaultNodeLimit);

std::unique_ptr<StreamMatcher> make_matcher(const RegexAst& ast, Backend backend,
                                            std::uint64_t budget = kDefaultBudget,
                                            std::size_t node_limit = kDefaultNodeLimit);

std::vector<MatchEvent> match_stream(const RegexAst& ast, std::string_view input, Backend backend,
                                     std::uint32_t rule_id = 0);

}  // namespace recount

#endif  // RECOUNT_ENGINE_HPP
