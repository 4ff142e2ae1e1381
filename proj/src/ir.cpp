#include "recount/ir.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <set>

#include <json.hpp>

#include "recount/errors.hpp"
#include "recount/nca.hpp"

namespace recount {

const char* ir_kind_name(IrKind k) {
  switch (k) {
    case IrKind::HState: return "hState";
    case IrKind::Counter: return "counter";
    case IrKind::BitVector: return "bitvector";
  }
  return "?";
}

const char* enable_name(Enable e) {
  switch (e) {
    case Enable::OnActivateIn: return "onActivateIn";
    case Enable::OnStartOfData: return "onStartOfData";
    case Enable::Always: return "always";
  }
  return "?";
}

std::size_t AutomatonIr::count(IrKind k) const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [k](const IrNode& n) { return n.kind == k; }));
}

const IrNode* AutomatonIr::find(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

namespace {

// Where a counting instance lives in the automaton.
struct Shape {
  StateId fst = 0;
  StateId lst = 0;
  std::vector<StateId> body;
};

bool has_counter(const State& s, CounterId c) {
  return std::find(s.counters.begin(), s.counters.end(), c) != s.counters.end();
}

bool guards_counter(const Guard& g, CounterId c) {
  for (const auto& a : g.atoms)
    if (a.counter == c) return true;
  return false;
}

// The module ports need one entry state, one exit state, and a body whose
// only edge back into the entry state is the guarded loop.
std::optional<std::string> module_shape(const Nca& nca, CounterId c, Shape& shape) {
  std::set<StateId> fst, lst;
  for (StateId q = 0; q < nca.state_count(); ++q) {
    if (!has_counter(nca.states[q], c)) continue;
    shape.body.push_back(q);
    const auto& f = nca.states[q].final;
    if (f && guards_counter(*f, c)) lst.insert(q);
  }
  for (const auto& t : nca.transitions) {
    bool in_src = has_counter(nca.states[t.src], c);
    bool in_dst = has_counter(nca.states[t.dst], c);
    if (in_dst && !in_src) fst.insert(t.dst);
    if (in_src && guards_counter(t.guard, c)) lst.insert(t.src);
  }
  if (fst.size() != 1) return "body has " + std::to_string(fst.size()) + " entry positions";
  if (lst.size() != 1) return "body has " + std::to_string(lst.size()) + " exit positions";
  shape.fst = *fst.begin();
  shape.lst = *lst.begin();
  for (StateId q : shape.body) {
    const auto& f = nca.states[q].final;
    if (f && q != shape.lst) return "accepting state inside the body";
  }
  for (const auto& t : nca.transitions) {
    bool in_src = has_counter(nca.states[t.src], c);
    bool in_dst = has_counter(nca.states[t.dst], c);
    if (in_dst && !in_src) {
      if (t.action.assigns.empty() || t.action.assigns.front().kind != ActionKind::AssignConst)
        return "entry without reset";
    } else if (in_src && in_dst) {
      bool loop = !t.guard.atoms.empty() && t.guard.atoms.front().kind == AtomKind::Lt;
      if (t.dst == shape.fst && !loop) return "unguarded edge back to the entry position";
      if (loop && (t.src != shape.lst || t.dst != shape.fst)) return "loop outside the exit position";
      if (!loop && !t.guard.atoms.empty()) return "guarded edge inside the body";
    } else if (in_src && !in_dst) {
      if (t.src != shape.lst || t.guard.atoms.empty() || t.guard.atoms.front().kind == AtomKind::Lt)
        return "exit without range check";
    }
  }
  return std::nullopt;
}

std::string hstate_id(StateId q) { return "h" + std::to_string(q); }

AutomatonIr build(const Nca& nca, const std::map<CounterId, IrKind>& modules) {
  AutomatonIr ir;
  bool sigma_loop = false;
  for (const auto& t : nca.transitions) sigma_loop = sigma_loop || (t.src == 0 && t.dst == 0);
  Enable start = sigma_loop ? Enable::Always : Enable::OnStartOfData;

  std::vector<IrNode> states(nca.state_count());
  for (StateId q = 1; q < nca.state_count(); ++q) {
    states[q].id = hstate_id(q);
    states[q].cls = nca.states[q].cls;
  }
  std::map<CounterId, IrNode> mods;
  std::set<IrConnection> conns;
  for (const auto& [c, kind] : modules) {
    Shape shape;
    module_shape(nca, c, shape);
    IrNode m;
    m.kind = kind;
    m.instance = nca.counters[c].instance;
    m.min = nca.counters[c].min;
    m.max = nca.counters[c].max;
    m.id = (kind == IrKind::Counter ? "c" : "v") + std::to_string(m.instance);
    if (kind == IrKind::Counter) {
      conns.insert(IrConnection{{hstate_id(shape.fst), "o"}, {m.id, "fst"}});
      conns.insert(IrConnection{{hstate_id(shape.lst), "o"}, {m.id, "lst"}});
    } else {
      conns.insert(IrConnection{{hstate_id(shape.fst), "o"}, {m.id, "body"}});
    }
    mods.emplace(c, std::move(m));
  }

  for (const auto& t : nca.transitions) {
    if (t.src == 0 && t.dst == 0) continue;
    bool entry = !nca.states[t.dst].counters.empty() && !t.action.assigns.empty() &&
                 t.action.assigns.front().kind == ActionKind::AssignConst &&
                 mods.count(t.action.assigns.front().counter);
    IrNode* target_mod = entry ? &mods.at(t.action.assigns.front().counter) : nullptr;
    if (t.src == 0) {
      states[t.dst].enable = start;
      if (target_mod) target_mod->pre_enable = start;
      continue;
    }
    IrPort driver{hstate_id(t.src), "o"};
    if (!t.guard.atoms.empty()) {
      const GuardAtom& a = t.guard.atoms.front();
      const IrNode& m = mods.at(a.counter);
      std::string port = "en_out";
      if (a.kind == AtomKind::Lt) port = m.kind == IrKind::Counter ? "en_fst" : "en_body";
      driver = {m.id, port};
    }
    conns.insert(IrConnection{driver, {hstate_id(t.dst), "i"}});
    if (target_mod) conns.insert(IrConnection{driver, {target_mod->id, "pre"}});
  }
  for (StateId q = 1; q < nca.state_count(); ++q) {
    const auto& f = nca.states[q].final;
    if (!f) continue;
    if (f->atoms.empty()) {
      states[q].report = true;
    } else {
      mods.at(f->atoms.front().counter).report = true;
    }
  }

  std::vector<IrNode> all(states.begin() + 1, states.end());
  std::vector<IrNode> by_instance;
  for (auto& [c, m] : mods) by_instance.push_back(m);
  std::sort(by_instance.begin(), by_instance.end(),
            [](const IrNode& a, const IrNode& b) { return a.instance < b.instance; });
  all.insert(all.end(), by_instance.begin(), by_instance.end());

  // Keep what the start signal can reach.
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& c : conns) succ[c.from.node].push_back(c.to.node);
  std::set<std::string> seen;
  std::deque<std::string> work;
  for (const auto& n : all) {
    Enable e = n.kind == IrKind::HState ? n.enable : n.pre_enable;
    if (e != Enable::OnActivateIn && seen.insert(n.id).second) work.push_back(n.id);
  }
  while (!work.empty()) {
    std::string id = work.front();
    work.pop_front();
    for (const auto& s : succ[id])
      if (seen.insert(s).second) work.push_back(s);
  }
  for (auto& n : all)
    if (seen.count(n.id)) ir.nodes.push_back(std::move(n));
  for (const auto& c : conns)
    if (seen.count(c.from.node) && seen.count(c.to.node)) ir.connections.push_back(c);
  return ir;
}

}  // namespace

AutomatonIr compile(const RegexAst& input, const CompileOptions& opts, const std::string& source) {
  std::vector<Placement> placements;
  auto mark = [&](const RegexAst& a, const std::set<InstanceId>& ids, const std::string& reason,
                  const AmbiguityReport* report) {
    for (const auto& info : count_instances(a)) {
      if (!ids.count(info.id)) continue;
      Placement p{info.id, info.min, info.max, "unfolded", "", reason};
      if (report)
        if (const auto* v = report->find(info.id)) p.verdict = verdict_name(v->verdict);
      placements.push_back(std::move(p));
    }
  };
  auto all_ids = [](const RegexAst& a, auto pred) {
    std::set<InstanceId> ids;
    for (const auto& info : count_instances(a))
      if (pred(info)) ids.insert(info.id);
    return ids;
  };

  RegexAst ast = normalize(input);
  if (opts.force_unfold) {
    mark(ast, all_ids(ast, [](const InstanceInfo&) { return true; }), "forced", nullptr);
    ast = unfold(ast, kUnfoldAll, opts.node_limit);
  } else {
    std::uint64_t k = opts.unfold_threshold;
    mark(ast, all_ids(ast, [k](const InstanceInfo& i) { return i.max <= k; }), "below threshold", nullptr);
    ast = unfold(ast, k, opts.node_limit);
  }
  for (;;) {
    auto nested = all_ids(ast, [](const InstanceInfo& i) { return i.nested; });
    if (nested.empty()) break;
    mark(ast, nested, "nested counting", nullptr);
    ast = unfold_instances(ast, nested, opts.node_limit);
  }

  Nca nca;
  AmbiguityReport report;
  std::map<CounterId, IrKind> modules;
  for (;;) {
    report = hybrid_ambiguity(ast, opts.budget);
    nca = glushkov(ast);
    modules.clear();
    std::map<std::string, std::set<InstanceId>> bad;
    for (const auto& info : count_instances(ast)) {
      const InstanceVerdict* v = report.find(info.id);
      auto c = nca.counter_of_instance(info.id);
      if (!c) continue;
      Shape shape;
      auto problem = module_shape(nca, *c, shape);
      if (v->verdict == Verdict::Inconclusive) {
        bad["inconclusive"].insert(info.id);
      } else if (problem) {
        bad["unsupported shape: " + *problem].insert(info.id);
      } else if (v->verdict == Verdict::Unambiguous) {
        modules[*c] = IrKind::Counter;
      } else if (shape.body.size() == 1) {
        modules[*c] = IrKind::BitVector;
      } else {
        bad["ambiguous multi-state body"].insert(info.id);
      }
    }
    if (bad.empty()) break;
    std::set<InstanceId> all;
    for (const auto& [reason, ids] : bad) {
      mark(ast, ids, reason, &report);
      all.insert(ids.begin(), ids.end());
    }
    ast = unfold_instances(ast, all, opts.node_limit);
  }

  AutomatonIr ir = build(nca, modules);
  for (const auto& [c, kind] : modules) {
    const Counter& k = nca.counters[c];
    placements.push_back({k.instance, k.min, k.max, kind == IrKind::Counter ? "counter" : "bitvector",
                          verdict_name(report.find(k.instance)->verdict), ""});
  }
  ir.metadata.regex = source;
  ir.metadata.unfold_threshold = opts.unfold_threshold;
  ir.metadata.force_unfold = opts.force_unfold;
  ir.metadata.placements = std::move(placements);
  validate(ir);
  return ir;
}

AutomatonIr compile(const std::string& regex, const CompileOptions& opts) {
  return compile(parse_or_throw(regex), opts, regex);
}

// ---------------------------------------------------------------------------
// Validation and JSON.

namespace {

bool has_out_port(IrKind k, const std::string& p) {
  switch (k) {
    case IrKind::HState: return p == "o";
    case IrKind::Counter: return p == "en_fst" || p == "en_out";
    case IrKind::BitVector: return p == "en_body" || p == "en_out";
  }
  return false;
}

bool has_in_port(IrKind k, const std::string& p) {
  switch (k) {
    case IrKind::HState: return p == "i";
    case IrKind::Counter: return p == "pre" || p == "fst" || p == "lst";
    case IrKind::BitVector: return p == "pre" || p == "body";
  }
  return false;
}

std::string describe(std::size_t i, const IrConnection& c) {
  return "connection " + std::to_string(i) + " (" + c.from.node + "." + c.from.port + " -> " + c.to.node +
         "." + c.to.port + ")";
}

}  // namespace

void validate(const AutomatonIr& ir) {
  if (ir.version != kIrVersion) throw IrError("unsupported IR version " + std::to_string(ir.version));
  std::map<std::string, const IrNode*> by_id;
  for (const auto& n : ir.nodes) {
    if (n.id.empty()) throw IrError("node with an empty id");
    if (!by_id.emplace(n.id, &n).second) throw IrError("duplicate node id '" + n.id + "'");
    if (n.kind == IrKind::HState) {
      if (n.cls.empty()) throw IrError("node " + n.id + ": empty symbol set");
    } else if (n.min < 1 || n.min > n.max) {
      throw IrError("node " + n.id + ": bad range {" + std::to_string(n.min) + "," + std::to_string(n.max) + "}");
    }
  }
  std::map<std::string, std::map<std::string, int>> sources;
  for (std::size_t i = 0; i < ir.connections.size(); ++i) {
    const IrConnection& c = ir.connections[i];
    auto from = by_id.find(c.from.node);
    auto to = by_id.find(c.to.node);
    if (from == by_id.end()) throw IrError(describe(i, c) + ": unknown node '" + c.from.node + "'");
    if (to == by_id.end()) throw IrError(describe(i, c) + ": unknown node '" + c.to.node + "'");
    IrKind fk = from->second->kind;
    IrKind tk = to->second->kind;
    if (!has_out_port(fk, c.from.port))
      throw IrError(describe(i, c) + ": " + ir_kind_name(fk) + " has no output port '" + c.from.port + "'");
    if (!has_in_port(tk, c.to.port))
      throw IrError(describe(i, c) + ": " + ir_kind_name(tk) + " has no input port '" + c.to.port + "'");
    ++sources[c.to.node][c.to.port];
  }
  for (const auto& n : ir.nodes) {
    std::vector<std::string> single;
    if (n.kind == IrKind::Counter) single = {"fst", "lst"};
    if (n.kind == IrKind::BitVector) single = {"body"};
    for (const auto& p : single) {
      int got = sources[n.id][p];
      if (got != 1)
        throw IrError("node " + n.id + ": port '" + p + "' needs exactly one source, has " + std::to_string(got));
    }
  }
}

namespace {

using nlohmann::json;

json port_json(const IrPort& p) { return json{{"node", p.node}, {"port", p.port}}; }

Enable enable_from(const std::string& s, const std::string& where) {
  for (Enable e : {Enable::OnActivateIn, Enable::OnStartOfData, Enable::Always})
    if (s == enable_name(e)) return e;
  if (s == "none") return Enable::OnActivateIn;
  throw IrError(where + ": unknown enable '" + s + "'");
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw IrError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw IrError(where + ": bad value for '" + key + "'");
  }
}

IrPort port_from(const json& j, const std::string& where) {
  return {field<std::string>(j, "node", where), field<std::string>(j, "port", where)};
}

}  // namespace

std::string emit_json(const AutomatonIr& ir) {
  json nodes = json::array();
  for (const auto& n : ir.nodes) {
    json attrs;
    if (n.kind == IrKind::HState) {
      attrs = {{"symbolSet", n.cls.to_string()}};
    } else {
      attrs = {{"min", n.min}, {"max", n.max}, {"instance", n.instance}, {"preEnable",
               n.pre_enable == Enable::OnActivateIn ? "none" : enable_name(n.pre_enable)}};
      if (n.kind == IrKind::BitVector) attrs["size"] = n.max;
    }
    json node{{"id", n.id}, {"type", ir_kind_name(n.kind)}, {"report", n.report}, {"attributes", attrs}};
    if (n.kind == IrKind::HState) node["enable"] = enable_name(n.enable);
    nodes.push_back(std::move(node));
  }
  json conns = json::array();
  for (const auto& c : ir.connections) conns.push_back({{"from", port_json(c.from)}, {"to", port_json(c.to)}});
  json placements = json::array();
  for (const auto& p : ir.metadata.placements)
    placements.push_back({{"instance", p.instance}, {"min", p.min}, {"max", p.max}, {"placement", p.kind},
                          {"verdict", p.verdict}, {"reason", p.reason}});
  json root{{"version", ir.version},
            {"metadata",
             {{"regex", ir.metadata.regex},
              {"unfoldThreshold", ir.metadata.unfold_threshold},
              {"forceUnfold", ir.metadata.force_unfold},
              {"analysisMode", ir.metadata.analysis_mode},
              {"placements", placements}}},
            {"nodes", nodes},
            {"connections", conns}};
  return root.dump(2) + "\n";
}

AutomatonIr load_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IrError(std::string("malformed JSON: ") + e.what());
  }
  AutomatonIr ir;
  ir.version = field<int>(root, "version", "IR");
  const json& meta = root.contains("metadata") ? root["metadata"] : json::object();
  ir.metadata.regex = meta.value("regex", "");
  ir.metadata.unfold_threshold = meta.value("unfoldThreshold", std::uint64_t{0});
  ir.metadata.force_unfold = meta.value("forceUnfold", false);
  ir.metadata.analysis_mode = meta.value("analysisMode", "hybrid");
  if (meta.contains("placements")) {
    for (const auto& p : meta["placements"]) {
      ir.metadata.placements.push_back({field<InstanceId>(p, "instance", "placement"),
                                        field<std::uint32_t>(p, "min", "placement"),
                                        field<std::uint32_t>(p, "max", "placement"),
                                        field<std::string>(p, "placement", "placement"),
                                        p.value("verdict", ""), p.value("reason", "")});
    }
  }
  if (!root.contains("nodes") || !root["nodes"].is_array()) throw IrError("IR: missing 'nodes' array");
  for (const auto& j : root["nodes"]) {
    IrNode n;
    n.id = field<std::string>(j, "id", "node");
    std::string where = "node " + n.id;
    std::string type = field<std::string>(j, "type", where);
    n.report = field<bool>(j, "report", where);
    const json attrs = j.contains("attributes") ? j["attributes"] : json::object();
    if (type == "hState") {
      n.kind = IrKind::HState;
      n.enable = enable_from(field<std::string>(j, "enable", where), where);
      std::string sym = field<std::string>(attrs, "symbolSet", where);
      try {
        n.cls = parse_class_text(sym);
      } catch (const SyntaxError& e) {
        throw IrError(where + ": bad symbolSet '" + sym + "': " + e.what());
      }
    } else if (type == "counter" || type == "bitvector") {
      n.kind = type == "counter" ? IrKind::Counter : IrKind::BitVector;
      n.min = field<std::uint32_t>(attrs, "min", where);
      n.max = field<std::uint32_t>(attrs, "max", where);
      n.instance = field<InstanceId>(attrs, "instance", where);
      n.pre_enable = enable_from(field<std::string>(attrs, "preEnable", where), where);
      if (n.kind == IrKind::BitVector && field<std::uint32_t>(attrs, "size", where) != n.max)
        throw IrError(where + ": bitvector size must equal max");
    } else {
      throw IrError(where + ": unknown node type '" + type + "'");
    }
    ir.nodes.push_back(std::move(n));
  }
  if (!root.contains("connections") || !root["connections"].is_array())
    throw IrError("IR: missing 'connections' array");
  for (const auto& j : root["connections"]) {
    if (!j.contains("from") || !j.contains("to")) throw IrError("connection: missing 'from' or 'to'");
    ir.connections.push_back({port_from(j["from"], "connection"), port_from(j["to"], "connection")});
  }
  validate(ir);
  return ir;
}

}  // namespace recount
