#ifndef RECOUNT_IR_HPP
#define RECOUNT_IR_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "recount/ambiguity.hpp"
#include "recount/char_class.hpp"
#include "recount/engine.hpp"
#include "recount/regex.hpp"

namespace recount {

inline constexpr int kIrVersion = 1;

enum class IrKind { HState, Counter, BitVector };

// Start-of-input behaviour. For counting modules this drives `pre` from a
// synthetic start signal (OnActivateIn = no such signal).
enum class Enable { OnActivateIn, OnStartOfData, Always };

const char* ir_kind_name(IrKind k);
const char* enable_name(Enable e);

struct IrNode {
  std::string id;
  IrKind kind = IrKind::HState;
  // hState
  CharClass cls;
  Enable enable = Enable::OnActivateIn;
  // counter and bitvector (a bitvector's size is max)
  std::uint32_t min = 0;
  std::uint32_t max = 0;
  InstanceId instance = 0;
  Enable pre_enable = Enable::OnActivateIn;
  // hState: report when active. Modules: report when en_out fires.
  bool report = false;

  bool operator==(const IrNode&) const = default;
};

struct IrPort {
  std::string node;
  std::string port;

  auto operator<=>(const IrPort&) const = default;
};

struct IrConnection {
  IrPort from;
  IrPort to;

  auto operator<=>(const IrConnection&) const = default;
};

struct Placement {
  InstanceId instance = 0;
  std::uint32_t min = 0;
  std::uint32_t max = 0;
  std::string kind;     // "counter", "bitvector" or "unfolded"
  std::string verdict;  // empty when unfolded before analysis
  std::string reason;   // why an instance was unfolded

  bool operator==(const Placement&) const = default;
};

struct IrMetadata {
  std::string regex;
  std::uint64_t unfold_threshold = 0;
  bool force_unfold = false;
  std::string analysis_mode = "hybrid";
  std::vector<Placement> placements;

  bool operator==(const IrMetadata&) const = default;
};

struct AutomatonIr {
  int version = kIrVersion;
  IrMetadata metadata;
  std::vector<IrNode> nodes;
  std::vector<IrConnection> connections;

  bool operator==(const AutomatonIr&) const = default;

  std::size_t count(IrKind k) const;
  const IrNode* find(std::string_view id) const;
};

struct CompileOptions {
  std::uint64_t unfold_threshold = 0;
  bool force_unfold = false;
  std::uint64_t budget = kDefaultBudget;
  std::size_t node_limit = kDefaultNodeLimit;
};

AutomatonIr compile(const RegexAst& ast, const CompileOptions& opts = {},
                    const std::string& source = "");
AutomatonIr compile(const std::string& regex, const CompileOptions& opts = {});

// Port vocabulary and kind compatibility, id uniqueness, bounds, and the
// one-fst/one-lst/one-body rule. Throws IrError naming the offending node or
// connection.
void validate(const AutomatonIr& ir);

std::string emit_json(const AutomatonIr& ir);
AutomatonIr load_json(std::string_view text);

// Per-node activity over one simulation: active cycles for an hState, cycles
// with fst or lst active for a counter, cycles with the body active for a
// bitvector.
struct ActivityTrace {
  std::uint64_t cycles = 0;
  std::map<std::string, std::uint64_t> activity;

  std::uint64_t total(const AutomatonIr& ir, IrKind k) const;
  bool empty() const;
};

struct SimulationResult {
  std::vector<MatchEvent> events;
  ActivityTrace trace;
};

SimulationResult simulate_ir(const AutomatonIr& ir, std::string_view input, std::uint32_t rule_id = 0);

}  // namespace recount

#endif  // RECOUNT_IR_HPP
