#include <algorithm>
#include <sstream>

#include "recount/errors.hpp"
#include "recount/nca.hpp"

namespace recount {

std::optional<CounterId> Nca::counter_of_instance(InstanceId id) const {
  for (CounterId c = 0; c < counters.size(); ++c)
    if (counters[c].instance == id) return c;
  return std::nullopt;
}

void Nca::index() {
  out.assign(states.size(), {});
  for (std::size_t i = 0; i < transitions.size(); ++i) out[transitions[i].src].push_back(i);
}

namespace {

struct FirstEntry {
  StateId pos;
  std::vector<CounterId> entered;  // instances inside the subexpression containing pos
};

struct LastEntry {
  StateId pos;
  std::vector<GuardAtom> exits;  // slots resolved when an edge is built
};

struct Info {
  bool nullable = false;
  std::vector<FirstEntry> first;
  std::vector<LastEntry> last;
};

std::uint32_t slot_of(const State& s, CounterId c) {
  auto it = std::find(s.counters.begin(), s.counters.end(), c);
  if (it == s.counters.end()) throw StructuralError("counter not carried by source state");
  return static_cast<std::uint32_t>(it - s.counters.begin());
}

class Builder {
 public:
  Nca build(const RegexAst& ast) {
    nca_.states.push_back(State{});  // initial pure state
    NodePtr root = ast.root;
    bool absorbed = false;
    if (auto rest = strip_leading_any(root); rest && *rest && !nullable(*rest)) {
      root = *rest;
      absorbed = true;
    }
    std::vector<CounterId> enclosing;
    Info info = visit(root, enclosing);

    if (absorbed) {
      nca_.states[0].cls = CharClass::universal();
      nca_.transitions.push_back({0, CharClass::universal(), {}, 0, {}});
    }
    add_edges({LastEntry{0, {}}}, info.first, std::nullopt);
    if (info.nullable) nca_.states[0].final = Guard{};
    for (const auto& l : info.last) nca_.states[l.pos].final = resolve(l.exits, l.pos);
    nca_.init.push_back({0, {}});
    dedupe();
    nca_.index();
    return std::move(nca_);
  }

 private:
  // For `.*r`, returns r. An engaged nullptr means the whole node was `.*`.
  static std::optional<NodePtr> strip_leading_any(const NodePtr& n) {
    if (n->kind == NodeKind::Star && n->child()->kind == NodeKind::Class &&
        n->child()->cls.is_universal())
      return NodePtr{};
    if (n->kind != NodeKind::Concat) return std::nullopt;
    auto rest = strip_leading_any(n->left);
    if (!rest) return std::nullopt;
    if (!*rest) return n->right;
    return make_concat(*rest, n->right);
  }

  Info visit(const NodePtr& n, std::vector<CounterId>& enclosing) {
    Info info;
    switch (n->kind) {
      case NodeKind::Epsilon:
        info.nullable = true;
        break;
      case NodeKind::Class: {
        StateId p = static_cast<StateId>(nca_.states.size());
        nca_.states.push_back(State{n->cls, enclosing, std::nullopt});
        info.first.push_back({p, {}});
        info.last.push_back({p, {}});
        break;
      }
      case NodeKind::Concat: {
        Info l = visit(n->left, enclosing);
        Info r = visit(n->right, enclosing);
        add_edges(l.last, r.first, std::nullopt);
        info.nullable = l.nullable && r.nullable;
        info.first = std::move(l.first);
        if (l.nullable) info.first.insert(info.first.end(), r.first.begin(), r.first.end());
        if (r.nullable) {
          info.last = std::move(l.last);
          info.last.insert(info.last.end(), r.last.begin(), r.last.end());
        } else {
          info.last = std::move(r.last);
        }
        break;
      }
      case NodeKind::Alt: {
        Info l = visit(n->left, enclosing);
        Info r = visit(n->right, enclosing);
        info.nullable = l.nullable || r.nullable;
        info.first = std::move(l.first);
        info.first.insert(info.first.end(), r.first.begin(), r.first.end());
        info.last = std::move(l.last);
        info.last.insert(info.last.end(), r.last.begin(), r.last.end());
        break;
      }
      case NodeKind::Star: {
        info = visit(n->left, enclosing);
        add_edges(info.last, info.first, std::nullopt);
        info.nullable = true;
        break;
      }
      case NodeKind::Repeat: {
        CounterId x = static_cast<CounterId>(nca_.counters.size());
        nca_.counters.push_back({n->instance, n->min, n->max});
        enclosing.push_back(x);
        info = visit(n->left, enclosing);
        enclosing.pop_back();
        add_edges(info.last, info.first, x);
        GuardAtom exit;
        exit.counter = x;
        exit.kind = n->min == n->max ? AtomKind::Eq : AtomKind::Between;
        exit.lo = n->min;
        exit.hi = n->max;
        for (auto& f : info.first) f.entered.push_back(x);
        for (auto& l : info.last) l.exits.push_back(exit);
        info.nullable = info.nullable || n->min == 0;
        break;
      }
    }
    return info;
  }

  Guard resolve(const std::vector<GuardAtom>& atoms, StateId src) const {
    Guard g;
    for (GuardAtom a : atoms) {
      a.slot = slot_of(nca_.states[src], a.counter);
      g.atoms.push_back(a);
    }
    std::sort(g.atoms.begin(), g.atoms.end(),
              [](const GuardAtom& a, const GuardAtom& b) { return a.counter < b.counter; });
    return g;
  }

  // Follow edges last x first. With `loop`, the edge re-enters the body of
  // that instance: guarded by loop < max and incrementing it.
  void add_edges(const std::vector<LastEntry>& lasts, const std::vector<FirstEntry>& firsts,
                 std::optional<CounterId> loop) {
    for (const auto& l : lasts) {
      for (const auto& f : firsts) {
        const State& dst = nca_.states[f.pos];
        if (dst.cls.empty()) continue;
        Transition t;
        t.src = l.pos;
        t.dst = f.pos;
        t.cls = dst.cls;
        std::vector<GuardAtom> atoms = l.exits;
        if (loop) {
          GuardAtom lt;
          lt.kind = AtomKind::Lt;
          lt.counter = *loop;
          lt.hi = nca_.counters[*loop].max;
          atoms.push_back(lt);
        }
        t.guard = resolve(atoms, l.pos);
        for (CounterId c : dst.counters) {
          Assignment a;
          a.counter = c;
          if (std::find(f.entered.begin(), f.entered.end(), c) != f.entered.end()) {
            a.kind = ActionKind::AssignConst;
            a.value = 1;
          } else {
            a.kind = loop && c == *loop ? ActionKind::Increment : ActionKind::Copy;
            a.from = c;
            a.src_slot = slot_of(nca_.states[l.pos], c);
          }
          t.action.assigns.push_back(a);
        }
        nca_.transitions.push_back(std::move(t));
      }
    }
  }

  void dedupe() {
    auto& ts = nca_.transitions;
    std::stable_sort(ts.begin(), ts.end(), [](const Transition& a, const Transition& b) {
      return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
    std::vector<Transition> kept;
    std::size_t group = 0;
    for (auto& t : ts) {
      if (!kept.empty() && (kept.back().src != t.src || kept.back().dst != t.dst)) group = kept.size();
      bool dup = false;
      for (std::size_t i = group; i < kept.size() && !dup; ++i)
        dup = kept[i].src == t.src && kept[i].dst == t.dst && kept[i].guard == t.guard &&
              kept[i].action == t.action;
      if (!dup) kept.push_back(std::move(t));
    }
    ts = std::move(kept);
  }

  Nca nca_;
};

}  // namespace

Nca glushkov(const RegexAst& ast) { return Builder().build(ast); }

std::uint32_t bound_of(const Nca& nca, CounterId x) {
  bool present = false;
  for (const auto& s : nca.states)
    present = present || std::find(s.counters.begin(), s.counters.end(), x) != s.counters.end();
  if (!present) throw StructuralError("counter " + std::to_string(x) + " does not occur");
  std::uint32_t bound = 0;
  std::uint32_t max_const = 0;
  for (const auto& t : nca.transitions) {
    for (const auto& a : t.action.assigns) {
      if (a.counter != x) continue;
      if (a.kind == ActionKind::AssignConst) max_const = std::max(max_const, a.value);
      if (a.kind != ActionKind::Increment) continue;
      std::optional<std::uint32_t> lt;
      for (const auto& g : t.guard.atoms)
        if (g.counter == a.from && g.kind == AtomKind::Lt) lt = g.hi;
      if (!lt) throw StructuralError("unguarded increment of counter " + std::to_string(x));
      bound = std::max(bound, *lt);
    }
  }
  for (const auto& i : nca.init)
    for (std::size_t k = 0; k < i.values.size(); ++k)
      if (nca.states[i.state].counters[k] == x) max_const = std::max(max_const, i.values[k]);
  if (max_const > bound) {
    if (bound > 0)
      throw StructuralError("counter " + std::to_string(x) + " assigned above its bound");
    bound = max_const;
  }
  return bound;
}

void check_structure(const Nca& nca) {
  std::vector<std::optional<CharClass>> incoming(nca.states.size());
  for (std::size_t i = 0; i < nca.transitions.size(); ++i) {
    const Transition& t = nca.transitions[i];
    std::string where = "transition " + std::to_string(i);
    if (t.src >= nca.states.size() || t.dst >= nca.states.size())
      throw StructuralError(where + ": state out of range");
    if (t.cls.empty()) throw StructuralError(where + ": empty class");
    if (incoming[t.dst] && !(*incoming[t.dst] == t.cls))
      throw StructuralError(where + ": state " + std::to_string(t.dst) + " is not homogeneous");
    incoming[t.dst] = t.cls;
    const State& src = nca.states[t.src];
    const State& dst = nca.states[t.dst];
    for (const auto& g : t.guard.atoms)
      if (g.slot >= src.counters.size() || src.counters[g.slot] != g.counter)
        throw StructuralError(where + ": guard on a counter the source does not carry");
    if (t.action.assigns.size() != dst.counters.size())
      throw StructuralError(where + ": action does not assign every destination counter");
    for (std::size_t k = 0; k < dst.counters.size(); ++k) {
      const Assignment& a = t.action.assigns[k];
      if (a.counter != dst.counters[k]) throw StructuralError(where + ": action order mismatch");
      if (a.kind == ActionKind::AssignConst) continue;
      if (a.src_slot >= src.counters.size() || src.counters[a.src_slot] != a.from)
        throw StructuralError(where + ": action reads a counter the source does not carry");
      if (a.kind == ActionKind::Increment) {
        bool guarded = std::any_of(t.guard.atoms.begin(), t.guard.atoms.end(), [&](const GuardAtom& g) {
          return g.counter == a.from && g.kind == AtomKind::Lt;
        });
        if (!guarded) throw StructuralError(where + ": unguarded increment");
      }
    }
  }
}

namespace {

std::string counter_name(CounterId c) { return "x" + std::to_string(c); }

}  // namespace

std::string guard_to_string(const Guard& g, const Nca&) {
  if (g.atoms.empty()) return "true";
  std::string out;
  for (const auto& a : g.atoms) {
    if (!out.empty()) out += " & ";
    std::string x = counter_name(a.counter);
    switch (a.kind) {
      case AtomKind::Lt: out += x + "<" + std::to_string(a.hi); break;
      case AtomKind::Eq: out += x + "=" + std::to_string(a.hi); break;
      case AtomKind::Between:
        out += std::to_string(a.lo) + "<=" + x + "<=" + std::to_string(a.hi);
        break;
    }
  }
  return out;
}

std::string action_to_string(const Action& a, const Nca&) {
  std::string out;
  for (const auto& s : a.assigns) {
    if (!out.empty()) out += ", ";
    std::string x = counter_name(s.counter);
    switch (s.kind) {
      case ActionKind::AssignConst: out += x + ":=" + std::to_string(s.value); break;
      case ActionKind::Copy:
        out += s.from == s.counter ? x + ":=" + x : x + ":=" + counter_name(s.from);
        break;
      case ActionKind::Increment:
        out += s.from == s.counter ? x + "++" : x + ":=" + counter_name(s.from) + "+1";
        break;
    }
  }
  return out;
}

std::string dump_table(const Nca& nca) {
  std::ostringstream os;
  os << "states " << nca.states.size() << ", counters " << nca.counters.size() << "\n";
  for (CounterId c = 0; c < nca.counters.size(); ++c)
    os << "  " << counter_name(c) << " instance " << nca.counters[c].instance << " {"
       << nca.counters[c].min << "," << nca.counters[c].max << "}\n";
  for (StateId q = 0; q < nca.states.size(); ++q) {
    const State& s = nca.states[q];
    os << "  q" << q << " " << (q == 0 && s.cls.empty() ? std::string("-") : s.cls.to_string());
    if (!s.counters.empty()) {
      os << " [";
      for (std::size_t k = 0; k < s.counters.size(); ++k)
        os << (k ? "," : "") << counter_name(s.counters[k]);
      os << "]";
    }
    if (s.final) os << " final(" << guard_to_string(*s.final, nca) << ")";
    os << "\n";
  }
  for (const auto& t : nca.transitions) {
    os << "  q" << t.src << " -" << t.cls.to_string() << "-> q" << t.dst << "  "
       << guard_to_string(t.guard, nca);
    if (!t.action.assigns.empty()) os << " / " << action_to_string(t.action, nca);
    os << "\n";
  }
  return os.str();
}

std::string dump_dot(const Nca& nca) {
  auto quote = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out;
  };
  std::ostringstream os;
  os << "digraph nca {\n";
  for (StateId q = 0; q < nca.states.size(); ++q)
    if (nca.states[q].final)
      os << "  q" << q << " [shape=doublecircle,xlabel=\""
         << quote(guard_to_string(*nca.states[q].final, nca)) << "\"]\n";
  for (const auto& t : nca.transitions) {
    std::string label = t.cls.to_string() + ", " + guard_to_string(t.guard, nca);
    if (!t.action.assigns.empty()) label += " / " + action_to_string(t.action, nca);
    os << "  q" << t.src << " -> q" << t.dst << " [label=\"" << quote(label) << "\"]\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace recount
