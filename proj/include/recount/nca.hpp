#ifndef RECOUNT_NCA_HPP
#define RECOUNT_NCA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recount/char_class.hpp"
#include "recount/regex.hpp"

namespace recount {

using StateId = std::uint32_t;
using CounterId = std::uint32_t;

// One counter per surviving repetition instance.
struct Counter {
  InstanceId instance = 0;
  std::uint32_t min = 0;
  std::uint32_t max = 0;
};

enum class AtomKind { Lt, Eq, Between };

// Lt: x < hi.  Eq: x == hi (lo == hi).  Between: lo <= x <= hi.
// `slot` indexes the counter in the source state's counter list.
struct GuardAtom {
  AtomKind kind = AtomKind::Lt;
  CounterId counter = 0;
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;
  std::uint32_t slot = 0;

  bool holds(std::uint32_t value) const {
    switch (kind) {
      case AtomKind::Lt: return value < hi;
      case AtomKind::Eq: return value == hi;
      case AtomKind::Between: return lo <= value && value <= hi;
    }
    return false;
  }
  bool operator==(const GuardAtom&) const = default;
};

// Conjunction of atoms; empty means True.
struct Guard {
  std::vector<GuardAtom> atoms;

  bool holds(const std::vector<std::uint32_t>& values) const {
    for (const auto& a : atoms)
      if (!a.holds(values[a.slot])) return false;
    return true;
  }
  bool operator==(const Guard&) const = default;
};

enum class ActionKind { AssignConst, Copy, Increment };

// Sets one destination counter. For Copy/Increment, `src_slot` indexes the
// source counter in the source state's counter list.
struct Assignment {
  ActionKind kind = ActionKind::AssignConst;
  CounterId counter = 0;  // destination counter
  std::uint32_t value = 0;  // AssignConst
  CounterId from = 0;
  std::uint32_t src_slot = 0;
  bool operator==(const Assignment&) const = default;
};

// One assignment per counter of the destination state, in the same order.
struct Action {
  std::vector<Assignment> assigns;

  std::vector<std::uint32_t> apply(const std::vector<std::uint32_t>& src) const {
    std::vector<std::uint32_t> out;
    out.reserve(assigns.size());
    for (const auto& a : assigns) {
      switch (a.kind) {
        case ActionKind::AssignConst: out.push_back(a.value); break;
        case ActionKind::Copy: out.push_back(src[a.src_slot]); break;
        case ActionKind::Increment: out.push_back(src[a.src_slot] + 1); break;
      }
    }
    return out;
  }
  bool operator==(const Action&) const = default;
};

struct Transition {
  StateId src = 0;
  CharClass cls;
  Guard guard;
  StateId dst = 0;
  Action action;
};

struct State {
  CharClass cls;                   // predicate of every incoming transition
  std::vector<CounterId> counters;  // sorted, outermost instance first
  std::optional<Guard> final;       // accepting under this guard
};

using Valuation = std::vector<std::uint32_t>;

struct InitialToken {
  StateId state = 0;
  Valuation values;
};

// Homogeneous, epsilon-free counter automaton. Valuations are vectors
// aligned with State::counters.
struct Nca {
  std::vector<State> states;
  std::vector<Counter> counters;  // index = CounterId
  std::vector<Transition> transitions;
  std::vector<InitialToken> init;
  // Transition indices by source state.
  std::vector<std::vector<std::size_t>> out;

  std::size_t state_count() const { return states.size(); }
  std::optional<CounterId> counter_of_instance(InstanceId id) const;
  void index();
};

// Glushkov-style construction. States are the class occurrences plus an
// initial pure state 0; a leading `.*` becomes a self-loop on state 0.
Nca glushkov(const RegexAst& ast);

// Least n such that every increment of x is guarded by x < n. Throws
// StructuralError if x is absent or has an unguarded increment.
std::uint32_t bound_of(const Nca& nca, CounterId x);

// Checks homogeneity, non-empty classes, complete actions and guarded
// increments. Throws StructuralError.
void check_structure(const Nca& nca);

std::string guard_to_string(const Guard& g, const Nca& nca);
std::string action_to_string(const Action& a, const Nca& nca);

// Text table: states with counters and final guards, then transitions.
std::string dump_table(const Nca& nca);
// One `src -> dst [label="..."]` line per transition inside a digraph.
std::string dump_dot(const Nca& nca);

}  // namespace recount

#endif  // RECOUNT_NCA_HPP
