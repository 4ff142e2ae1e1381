#include <map>

#include "recount/errors.hpp"
#include "recount/ir.hpp"

namespace recount {

std::uint64_t ActivityTrace::total(const AutomatonIr& ir, IrKind k) const {
  std::uint64_t sum = 0;
  for (const auto& n : ir.nodes) {
    if (n.kind != k) continue;
    auto it = activity.find(n.id);
    if (it != activity.end()) sum += it->second;
  }
  return sum;
}

bool ActivityTrace::empty() const {
  if (cycles != 0) return false;
  for (const auto& [id, n] : activity)
    if (n != 0) return false;
  return true;
}

namespace {

// Output signals are numbered per node: hState "o" is 0; modules use
// 0 for en_fst/en_body and 1 for en_out.
int port_slot(const std::string& port) { return port == "en_out" ? 1 : 0; }

bool start_signal(Enable e, std::uint64_t cycle) {
  return e == Enable::Always || (e == Enable::OnStartOfData && cycle == 0);
}

}  // namespace

SimulationResult simulate_ir(const AutomatonIr& ir, std::string_view input, std::uint32_t rule_id) {
  validate(ir);
  const std::size_t n = ir.nodes.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[ir.nodes[i].id] = i;

  // Signal id of (node, out-port) is 2 * node + slot.
  std::vector<std::vector<std::size_t>> activate(n), pre(n);
  std::vector<std::size_t> fst(n), lst(n);
  for (const auto& c : ir.connections) {
    std::size_t from = index.at(c.from.node);
    std::size_t to = index.at(c.to.node);
    std::size_t sig = 2 * from + port_slot(c.from.port);
    if (c.to.port == "i") activate[to].push_back(sig);
    else if (c.to.port == "pre") pre[to].push_back(sig);
    else if (c.to.port == "fst" || c.to.port == "body") fst[to] = sig;
    else if (c.to.port == "lst") lst[to] = sig;
  }

  std::vector<CounterCell> counters(n);
  std::vector<BitVectorCell> vectors(n);
  for (std::size_t i = 0; i < n; ++i) {
    const IrNode& node = ir.nodes[i];
    if (node.kind == IrKind::Counter) counters[i] = CounterCell{false, 0, node.min, node.max};
    if (node.kind == IrKind::BitVector) vectors[i] = BitVectorCell(node.max);
  }

  SimulationResult result;
  for (const auto& node : ir.nodes) result.trace.activity[node.id] = 0;
  std::vector<bool> prev(2 * n, false), cur(2 * n, false);
  auto any = [&prev](const std::vector<std::size_t>& sigs) {
    for (std::size_t s : sigs)
      if (prev[s]) return true;
    return false;
  };

  for (std::uint64_t t = 0; t < input.size(); ++t) {
    auto byte = static_cast<std::uint8_t>(input[t]);
    std::fill(cur.begin(), cur.end(), false);
    bool report = false;
    for (std::size_t i = 0; i < n; ++i) {
      const IrNode& node = ir.nodes[i];
      if (node.kind != IrKind::HState) continue;
      bool enabled = start_signal(node.enable, t) || any(activate[i]);
      if (!enabled || !node.cls.contains(byte)) continue;
      cur[2 * i] = true;
      ++result.trace.activity[node.id];
      report = report || node.report;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const IrNode& node = ir.nodes[i];
      if (node.kind == IrKind::HState) continue;
      bool pre_prev = start_signal(node.pre_enable, t) || any(pre[i]);
      bool en_loop = false, en_out = false;
      if (node.kind == IrKind::Counter) {
        bool f = cur[fst[i]], l = cur[lst[i]];
        CounterStep s = counter_cell_step(counters[i], pre_prev, f, l);
        counters[i] = s.cell;
        en_loop = s.en_fst;
        en_out = s.en_out;
        if (f || l) ++result.trace.activity[node.id];
      } else {
        BitVectorCell& v = vectors[i];
        if (cur[fst[i]]) {
          v.shift();
          if (pre_prev) v.set_first();
          ++result.trace.activity[node.id];
        } else {
          v.reset();
        }
        en_loop = node.max > 1 && v.disjunct(1, node.max - 1);
        en_out = v.disjunct(node.min, node.max);
      }
      cur[2 * i] = en_loop;
      cur[2 * i + 1] = en_out;
      report = report || (node.report && en_out);
    }
    if (report) result.events.push_back({t + 1, rule_id});
    prev.swap(cur);
    ++result.trace.cycles;
  }
  return result;
}

}  // namespace recount
