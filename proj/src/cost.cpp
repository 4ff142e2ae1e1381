#include "recount/cost.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "recount/errors.hpp"

namespace recount {

namespace {

struct Field {
  const char* key;
  double CostParams::*real;
  std::uint32_t CostParams::*count;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      {"bank_energy", &CostParams::bank_energy, nullptr},
      {"bank_delay", &CostParams::bank_delay, nullptr},
      {"bank_area", &CostParams::bank_area, nullptr},
      {"counter_energy", &CostParams::counter_energy, nullptr},
      {"counter_delay", &CostParams::counter_delay, nullptr},
      {"counter_area", &CostParams::counter_area, nullptr},
      {"bitvector_energy", &CostParams::bitvector_energy, nullptr},
      {"bitvector_delay", &CostParams::bitvector_delay, nullptr},
      {"bitvector_area", &CostParams::bitvector_area, nullptr},
      {"stes_per_pe", nullptr, &CostParams::stes_per_pe},
      {"pes_per_bank", nullptr, &CostParams::pes_per_bank},
      {"counters_per_pe", nullptr, &CostParams::counters_per_pe},
      {"bitvector_capacity_bits", nullptr, &CostParams::bitvector_capacity_bits},
      {"stes_per_array", nullptr, &CostParams::stes_per_array},
      {"counter_width_bits", nullptr, &CostParams::counter_width_bits},
  };
  return f;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace

CostParams parse_params(std::string_view text) {
  CostParams p;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    std::string where = "line " + std::to_string(lineno);
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key = value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return key == f.key; });
    if (it == fields().end()) throw std::invalid_argument(where + ": unknown key '" + key + "'");
    double v = 0;
    std::size_t used = 0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty()) throw std::invalid_argument(where + ": bad number '" + value + "'");
    if (!(v > 0)) throw std::invalid_argument(where + ": " + key + " must be positive");
    if (it->real) {
      p.*(it->real) = v;
    } else {
      if (v != std::floor(v) || v > 4294967295.0)
        throw std::invalid_argument(where + ": " + key + " must be a whole number");
      p.*(it->count) = static_cast<std::uint32_t>(v);
    }
  }
  return p;
}

CostParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_params(ss.str());
}

std::string params_to_text(const CostParams& p) {
  std::ostringstream out;
  for (const auto& f : fields()) {
    out << f.key << " = ";
    if (f.real) {
      out << p.*(f.real);
    } else {
      out << p.*(f.count);
    }
    out << '\n';
  }
  return out.str();
}

Allocation allocate(std::uint64_t hstates, std::uint64_t counters, const std::vector<std::uint32_t>& bitvector_sizes,
                    const CostParams& params) {
  Allocation a;
  a.hstates = hstates;
  a.counters = counters;
  a.arrays = std::max<std::uint64_t>(1, ceil_div(hstates, params.stes_per_array));
  a.pes = std::max<std::uint64_t>({1, ceil_div(hstates, params.stes_per_pe), ceil_div(counters, params.counters_per_pe)});
  a.banks = ceil_div(a.pes, params.pes_per_bank);
  a.bitvector_nodes = bitvector_sizes.size();

  std::vector<std::uint32_t> sizes = bitvector_sizes;
  std::sort(sizes.rbegin(), sizes.rend());
  std::vector<std::uint64_t> free_bits;  // per shared vector
  const std::uint64_t cap = params.bitvector_capacity_bits;
  for (std::uint32_t s : sizes) {
    a.bitvector_bits += s;
    if (s > cap) {
      a.vectors += ceil_div(s, cap);
      continue;
    }
    auto it = std::find_if(free_bits.begin(), free_bits.end(), [s](std::uint64_t f) { return f >= s; });
    if (it == free_bits.end()) {
      free_bits.push_back(cap - s);
    } else {
      *it -= s;
    }
  }
  a.vectors += free_bits.size();
  a.wasted_bits = a.vectors * cap - a.bitvector_bits;
  return a;
}

Allocation allocate(const AutomatonIr& ir, const CostParams& params) {
  std::vector<std::uint32_t> sizes;
  std::uint64_t modules = 0;
  for (const auto& n : ir.nodes) {
    if (n.kind == IrKind::BitVector) sizes.push_back(n.max);
    if (n.kind == IrKind::Counter)
      modules += ceil_div(std::max<std::uint64_t>(1, std::bit_width(n.max)), params.counter_width_bits);
  }
  Allocation a = allocate(ir.count(IrKind::HState), ir.count(IrKind::Counter), sizes, params);
  a.counter_modules = modules;
  return a;
}

CostReport estimate(const AutomatonIr& ir, const ActivityTrace& trace, const CostParams& params) {
  if (trace.activity.size() != ir.nodes.size())
    throw IrError("activity trace covers " + std::to_string(trace.activity.size()) + " nodes, IR has " +
                  std::to_string(ir.nodes.size()));
  for (const auto& n : ir.nodes)
    if (!trace.activity.count(n.id)) throw IrError("activity trace has no entry for node " + n.id);

  CostReport r;
  r.params = params;
  r.allocation = allocate(ir, params);
  r.cycles = trace.cycles;
  const Allocation& a = r.allocation;

  double per_byte = trace.cycles == 0 ? 0.0 : 1.0 / static_cast<double>(trace.cycles);
  r.energy_breakdown["hstate"] = static_cast<double>(a.arrays) * params.bank_energy;
  r.energy_breakdown["counter"] =
      static_cast<double>(trace.total(ir, IrKind::Counter)) * per_byte * params.counter_energy;
  r.energy_breakdown["bitvector"] =
      static_cast<double>(trace.total(ir, IrKind::BitVector)) * per_byte * params.bitvector_energy;
  r.area_breakdown["hstate"] = static_cast<double>(a.arrays) * params.bank_area;
  r.area_breakdown["counter"] = static_cast<double>(a.counter_modules) * params.counter_area;
  r.area_breakdown["bitvector"] = static_cast<double>(a.vectors) * params.bitvector_area;
  for (const auto& [k, v] : r.energy_breakdown) r.energy_per_byte += v;
  for (const auto& [k, v] : r.area_breakdown) r.total_area += v;

  r.cycle_time = params.bank_delay;
  if (a.counters > 0) r.cycle_time = std::max(r.cycle_time, params.counter_delay);
  if (a.vectors > 0) r.cycle_time = std::max(r.cycle_time, params.bitvector_delay);
  return r;
}

std::string report_to_json(const CostReport& r) {
  using nlohmann::json;
  json params;
  for (const auto& f : fields()) {
    if (f.real) {
      params[f.key] = r.params.*(f.real);
    } else {
      params[f.key] = r.params.*(f.count);
    }
  }
  const Allocation& a = r.allocation;
  json j{{"params", params},
         {"allocation",
          {{"hstates", a.hstates},
           {"arrays", a.arrays},
           {"pes", a.pes},
           {"banks", a.banks},
           {"counters", a.counters},
           {"counter_modules", a.counter_modules},
           {"bitvector_nodes", a.bitvector_nodes},
           {"vectors", a.vectors},
           {"bitvector_bits", a.bitvector_bits},
           {"wasted_bits", a.wasted_bits}}},
         {"cycles", r.cycles},
         {"energy_per_byte_fj", r.energy_per_byte},
         {"total_area_um2", r.total_area},
         {"cycle_time_ps", r.cycle_time},
         {"breakdown", {{"energy_fj", r.energy_breakdown}, {"area_um2", r.area_breakdown}}}};
  return j.dump(2) + "\n";
}

std::string report_to_table(const CostReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << std::left << std::setw(12) << "component" << std::right << std::setw(8) << "units" << std::setw(18)
      << "energy (fJ/B)" << std::setw(16) << "area (um2)" << '\n';
  const Allocation& a = r.allocation;
  const std::pair<const char*, std::uint64_t> rows[] = {
      {"hstate", a.arrays}, {"counter", a.counter_modules}, {"bitvector", a.vectors}};
  for (const auto& [name, units] : rows) {
    out << std::left << std::setw(12) << name << std::right << std::setw(8) << units << std::setw(18)
        << r.energy_breakdown.at(name) << std::setw(16) << r.area_breakdown.at(name) << '\n';
  }
  out << std::left << std::setw(12) << "total" << std::right << std::setw(8) << "" << std::setw(18)
      << r.energy_per_byte << std::setw(16) << r.total_area << '\n';
  out << "hstates " << a.hstates << ", PEs " << a.pes << ", banks " << a.banks << ", bit vector bits "
      << a.bitvector_bits << " (wasted " << a.wasted_bits << "), cycle time " << r.cycle_time << " ps\n";
  return out.str();
}

}  // namespace recount
