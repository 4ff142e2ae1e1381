#ifndef RECOUNT_COST_HPP
#define RECOUNT_COST_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "recount/ir.hpp"

namespace recount {

// Energies in fJ, delays in ps, areas in square micrometres.
struct CostParams {
  double bank_energy = 16780;
  double bank_delay = 325;
  double bank_area = 3919;
  double counter_energy = 288;
  double counter_delay = 101;
  double counter_area = 237;
  double bitvector_energy = 3340;
  double bitvector_delay = 71;
  double bitvector_area = 6382;
  std::uint32_t stes_per_pe = 512;
  std::uint32_t pes_per_bank = 128;
  std::uint32_t counters_per_pe = 8;
  std::uint32_t bitvector_capacity_bits = 2000;
  // One bank_area / bank_energy charge covers this many STEs.
  std::uint32_t stes_per_array = 256;
  std::uint32_t counter_width_bits = 17;

  bool operator==(const CostParams&) const = default;
};

// key = value lines; `#` starts a comment. Unknown keys and non-positive
// values are errors (std::invalid_argument).
CostParams parse_params(std::string_view text);
CostParams load_params(const std::string& path);
std::string params_to_text(const CostParams& p);

struct Allocation {
  std::uint64_t hstates = 0;
  std::uint64_t arrays = 0;
  std::uint64_t pes = 0;
  std::uint64_t banks = 0;
  std::uint64_t counters = 0;         // counter nodes
  std::uint64_t counter_modules = 0;  // physical counters, wide ones chained
  std::uint64_t bitvector_nodes = 0;
  std::uint64_t vectors = 0;          // physical bit vectors
  std::uint64_t bitvector_bits = 0;   // bits in use
  std::uint64_t wasted_bits = 0;
};

// First-fit: hStates fill PEs, counters fill PE slots, bit vector segments
// are packed by decreasing size; segments larger than one vector take
// whole vectors.
Allocation allocate(const AutomatonIr& ir, const CostParams& params = {});
Allocation allocate(std::uint64_t hstates, std::uint64_t counters,
                    const std::vector<std::uint32_t>& bitvector_sizes, const CostParams& params = {});

struct CostReport {
  CostParams params;
  Allocation allocation;
  std::uint64_t cycles = 0;
  double energy_per_byte = 0;  // fJ
  double total_area = 0;       // um^2
  double cycle_time = 0;       // ps
  std::map<std::string, double> energy_breakdown;  // "hstate", "counter", "bitvector"
  std::map<std::string, double> area_breakdown;
};

// Throws IrError when the trace was not produced on this IR.
CostReport estimate(const AutomatonIr& ir, const ActivityTrace& trace, const CostParams& params = {});

std::string report_to_json(const CostReport& r);
std::string report_to_table(const CostReport& r);

}  // namespace recount

#endif  // RECOUNT_COST_HPP
