#include "recount/engine.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "recount/errors.hpp"

namespace recount {

Configuration initial_configuration(const Nca& nca) {
  Configuration c;
  for (const auto& t : nca.init) c.push_back({t.state, t.values});
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

Configuration step(const Nca& nca, const Configuration& config, std::uint8_t byte) {
  Configuration next;
  for (const Token& tok : config) {
    for (std::size_t ti : nca.out[tok.state]) {
      const Transition& t = nca.transitions[ti];
      if (!t.cls.contains(byte) || !t.guard.holds(tok.values)) continue;
      next.push_back({t.dst, t.action.apply(tok.values)});
    }
  }
  std::sort(next.begin(), next.end());
  next.erase(std::unique(next.begin(), next.end()), next.end());
  return next;
}

bool accepting(const Nca& nca, const Configuration& config) {
  for (const Token& tok : config) {
    const auto& f = nca.states[tok.state].final;
    if (f && f->holds(tok.values)) return true;
  }
  return false;
}

Configuration run(const Nca& nca, std::string_view input) {
  Configuration c = initial_configuration(nca);
  for (char ch : input) c = step(nca, c, static_cast<std::uint8_t>(ch));
  return c;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Reference: return "reference";
    case Backend::Optimized: return "optimized";
    case Backend::UnfoldedNfa: return "unfolded";
  }
  return "?";
}

Backend backend_from_name(std::string_view name) {
  if (name == "reference") return Backend::Reference;
  if (name == "optimized") return Backend::Optimized;
  if (name == "unfolded" || name == "nfa") return Backend::UnfoldedNfa;
  throw std::invalid_argument("unknown backend '" + std::string(name) + "'");
}

std::vector<MatchEvent> match_stream(StreamMatcher& m, std::string_view input, std::uint32_t rule_id) {
  std::vector<MatchEvent> events;
  m.reset();
  std::uint64_t offset = 0;
  for (char ch : input) {
    ++offset;
    if (m.feed(static_cast<std::uint8_t>(ch))) events.push_back({offset, rule_id});
  }
  return events;
}

ReferenceMatcher::ReferenceMatcher(Nca nca) : nca_(std::move(nca)) {
  if (nca_.out.size() != nca_.states.size()) nca_.index();
  reset();
}

void ReferenceMatcher::reset() { config_ = initial_configuration(nca_); }

bool ReferenceMatcher::feed(std::uint8_t byte) {
  config_ = step(nca_, config_, byte);
  return accepting(nca_, config_);
}

// ---------------------------------------------------------------------------
// Position automaton of the unfolded pattern.

namespace {

struct Positions {
  bool nullable = false;
  std::vector<std::uint32_t> first;
  std::vector<std::uint32_t> last;
};

class PositionBuilder {
 public:
  PositionBuilder(std::vector<CharClass>& classes, std::vector<std::vector<std::uint32_t>>& follow)
      : classes_(classes), follow_(follow) {}

  Positions visit(const NodePtr& n) {
    Positions r;
    switch (n->kind) {
      case NodeKind::Epsilon:
        r.nullable = true;
        break;
      case NodeKind::Class: {
        auto p = static_cast<std::uint32_t>(classes_.size());
        classes_.push_back(n->cls);
        follow_.emplace_back();
        r.first = r.last = {p};
        break;
      }
      case NodeKind::Concat: {
        Positions a = visit(n->left);
        Positions b = visit(n->right);
        link(a.last, b.first);
        r.nullable = a.nullable && b.nullable;
        r.first = a.first;
        if (a.nullable) r.first.insert(r.first.end(), b.first.begin(), b.first.end());
        r.last = b.last;
        if (b.nullable) r.last.insert(r.last.end(), a.last.begin(), a.last.end());
        break;
      }
      case NodeKind::Alt: {
        Positions a = visit(n->left);
        Positions b = visit(n->right);
        r.nullable = a.nullable || b.nullable;
        r.first = a.first;
        r.first.insert(r.first.end(), b.first.begin(), b.first.end());
        r.last = a.last;
        r.last.insert(r.last.end(), b.last.begin(), b.last.end());
        break;
      }
      case NodeKind::Star:
        r = visit(n->left);
        link(r.last, r.first);
        r.nullable = true;
        break;
      case NodeKind::Repeat:
        throw std::logic_error("position automaton needs a counting-free pattern");
    }
    return r;
  }

  void link(const std::vector<std::uint32_t>& from, const std::vector<std::uint32_t>& to) {
    for (auto p : from)
      for (auto q : to) follow_[p].push_back(q);
  }

 private:
  std::vector<CharClass>& classes_;
  std::vector<std::vector<std::uint32_t>>& follow_;
};

}  // namespace

NfaMatcher::NfaMatcher(const RegexAst& ast, std::size_t node_limit) {
  RegexAst flat = unfold(ast, kUnfoldAll, node_limit);
  classes_.push_back(CharClass());
  follow_.emplace_back();
  PositionBuilder b(classes_, follow_);
  Positions root = b.visit(flat.root);
  b.link({0}, root.first);
  final_.assign(classes_.size(), false);
  final_[0] = root.nullable;
  for (auto p : root.last) final_[p] = true;
  for (auto& f : follow_) {
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
  }
  active_.assign((classes_.size() + 63) / 64, 0);
  next_ = active_;
  reset();
}

void NfaMatcher::reset() {
  std::fill(active_.begin(), active_.end(), 0);
  active_[0] = 1;
}

bool NfaMatcher::feed(std::uint8_t byte) {
  std::fill(next_.begin(), next_.end(), 0);
  bool match = false;
  for (std::size_t w = 0; w < active_.size(); ++w) {
    for (std::uint64_t bits = active_[w]; bits; bits &= bits - 1) {
      std::size_t p = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
      for (auto q : follow_[p]) {
        if (!classes_[q].contains(byte)) continue;
        next_[q / 64] |= std::uint64_t{1} << (q % 64);
        match = match || final_[q];
      }
    }
  }
  active_.swap(next_);
  return match;
}

// ---------------------------------------------------------------------------
// Cells.

BitVectorCell::BitVectorCell(std::uint32_t n) : n_(n), words_((n + 63) / 64, 0) {}

bool BitVectorCell::test(std::uint32_t i) const {
  if (i < 1 || i > n_) return false;
  return (words_[(i - 1) / 64] >> ((i - 1) % 64)) & 1;
}

void BitVectorCell::set(std::uint32_t i) {
  if (i < 1 || i > n_) throw std::out_of_range("bit index outside 1..n");
  words_[(i - 1) / 64] |= std::uint64_t{1} << ((i - 1) % 64);
}

bool BitVectorCell::any() const {
  return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
}

std::vector<std::uint32_t> BitVectorCell::members() const {
  std::vector<std::uint32_t> out;
  for (std::size_t w = 0; w < words_.size(); ++w)
    for (std::uint64_t bits = words_[w]; bits; bits &= bits - 1)
      out.push_back(static_cast<std::uint32_t>(w * 64 + std::countr_zero(bits)) + 1);
  return out;
}

std::string BitVectorCell::to_string() const {
  std::string s;
  for (std::uint32_t i = 1; i <= n_; ++i) s += test(i) ? '1' : '0';
  return s;
}

void BitVectorCell::reset() { std::fill(words_.begin(), words_.end(), 0); }

void BitVectorCell::set_first() { set(1); }

void BitVectorCell::shift() {
  std::uint64_t carry = 0;
  for (auto& w : words_) {
    std::uint64_t out = w >> 63;
    w = (w << 1) | carry;
    carry = out;
  }
  mask(1, n_);
}

bool BitVectorCell::disjunct(std::uint32_t m, std::uint32_t n) const {
  n = std::min(n, n_);
  for (std::uint32_t i = std::max<std::uint32_t>(m, 1); i <= n; ++i)
    if (test(i)) return true;
  return false;
}

void BitVectorCell::mask(std::uint32_t m, std::uint32_t n) {
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t keep = 0;
    for (std::uint32_t b = 0; b < 64; ++b) {
      std::uint64_t i = w * 64 + b + 1;
      if (i >= m && i <= n && i <= n_) keep |= std::uint64_t{1} << b;
    }
    words_[w] &= keep;
  }
}

BitVectorCell& BitVectorCell::operator|=(const BitVectorCell& o) {
  for (std::size_t w = 0; w < words_.size() && w < o.words_.size(); ++w) words_[w] |= o.words_[w];
  return *this;
}

CounterStep counter_cell_step(const CounterCell& cell, bool pre_prev, bool fst_now, bool lst_now) {
  CounterStep r;
  r.cell = cell;
  if (fst_now) {
    r.cell.active = true;
    r.cell.value = pre_prev ? 1 : cell.value + 1;
  }
  if (lst_now) {
    std::uint32_t v = r.cell.value;
    r.en_out = v >= cell.min && v <= cell.max;
    r.en_fst = v < cell.max;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Optimized backend.

namespace {

// Range of values an atom accepts, as [lo, hi].
std::pair<std::uint32_t, std::uint32_t> atom_range(const GuardAtom& a) {
  switch (a.kind) {
    case AtomKind::Lt: return {1, a.hi == 0 ? 0 : a.hi - 1};
    case AtomKind::Eq: return {a.hi, a.hi};
    case AtomKind::Between: return {a.lo, a.hi};
  }
  return {1, 0};
}

}  // namespace

OptimizedMatcher::OptimizedMatcher(Nca nca, const AmbiguityReport& report) : nca_(std::move(nca)) {
  if (nca_.out.size() != nca_.states.size()) nca_.index();
  std::vector<int> cell_of_counter(nca_.counters.size(), -1);
  std::vector<std::size_t> body_states(nca_.counters.size(), 0);
  for (const auto& s : nca_.states) {
    if (s.counters.size() > 1) throw FallbackRequired("nested counting");
    for (CounterId c : s.counters) ++body_states[c];
  }
  for (CounterId c = 0; c < nca_.counters.size(); ++c) {
    const Counter& k = nca_.counters[c];
    const InstanceVerdict* v = report.find(k.instance);
    std::string which = "instance " + std::to_string(k.instance);
    if (!v) throw FallbackRequired(which + " has no verdict");
    CellInfo info;
    info.instance = k.instance;
    info.min = k.min;
    info.max = k.max;
    if (v->verdict == Verdict::Unambiguous) {
      info.kind = CellKind::Counter;
      info.memory_bits = static_cast<std::size_t>(std::bit_width(k.max));
      storage_.push_back(counters_.size());
      counters_.push_back(CounterCell{false, 0, k.min, k.max});
    } else if (v->verdict == Verdict::Ambiguous && body_states[c] == 1) {
      info.kind = CellKind::BitVector;
      info.memory_bits = k.max;
      storage_.push_back(vectors_.size());
      vectors_.emplace_back(k.max);
    } else if (v->verdict == Verdict::Ambiguous) {
      throw FallbackRequired(which + " is ambiguous with a multi-state body");
    } else {
      throw FallbackRequired(which + " is inconclusive");
    }
    cell_of_counter[c] = static_cast<int>(cells_.size());
    cells_.push_back(info);
  }
  cell_of_state_.assign(nca_.states.size(), -1);
  for (StateId q = 0; q < nca_.states.size(); ++q)
    if (!nca_.states[q].counters.empty()) cell_of_state_[q] = cell_of_counter[nca_.states[q].counters[0]];
  reset();
}

void OptimizedMatcher::reset() {
  active_.assign(nca_.states.size(), false);
  for (auto& c : counters_) {
    c.active = false;
    c.value = 0;
  }
  for (auto& v : vectors_) v.reset();
  for (const auto& t : nca_.init) {
    if (!t.values.empty()) throw FallbackRequired("initial state carries counters");
    active_[t.state] = true;
  }
}

std::size_t OptimizedMatcher::memory_bits() const {
  std::size_t bits = 0;
  for (const auto& c : cells_) bits += c.memory_bits;
  return bits;
}

bool OptimizedMatcher::feed(std::uint8_t byte) {
  std::vector<bool> next(nca_.states.size(), false);
  std::vector<std::optional<std::uint32_t>> value(counters_.size());
  std::vector<BitVectorCell> vec;
  vec.reserve(vectors_.size());
  for (const auto& v : vectors_) vec.emplace_back(v.size());

  auto offer = [&](std::size_t k, std::uint32_t v) {
    if (value[k] && *value[k] != v) throw std::logic_error("counter cell received two values");
    value[k] = v;
  };

  for (StateId q = 0; q < nca_.states.size(); ++q) {
    int cell = cell_of_state_[q];
    bool is_vec = cell >= 0 && cells_[cell].kind == CellKind::BitVector;
    if (is_vec ? !vectors_[storage_[cell]].any() : !active_[q]) continue;
    for (std::size_t ti : nca_.out[q]) {
      const Transition& t = nca_.transitions[ti];
      if (!t.cls.contains(byte)) continue;
      // Source values passing the guard: a scalar or a filtered vector.
      std::uint32_t v = 0;
      BitVectorCell filtered;
      if (cell >= 0 && !is_vec) {
        v = counters_[storage_[cell]].value;
        if (!t.guard.holds({v})) continue;
      } else if (is_vec) {
        filtered = vectors_[storage_[cell]];
        for (const auto& a : t.guard.atoms) {
          auto [lo, hi] = atom_range(a);
          filtered.mask(lo, hi);
        }
        if (!filtered.any()) continue;
      }
      int dcell = cell_of_state_[t.dst];
      next[t.dst] = true;
      if (dcell < 0) continue;
      const Assignment& a = t.action.assigns.front();
      std::size_t k = storage_[dcell];
      if (cells_[dcell].kind == CellKind::Counter) {
        if (a.kind == ActionKind::AssignConst) {
          offer(k, a.value);
        } else if (is_vec) {
          throw FallbackRequired("counter value read from a bit vector");
        } else {
          offer(k, a.kind == ActionKind::Increment ? v + 1 : v);
        }
      } else if (a.kind == ActionKind::AssignConst) {
        vec[k].set(a.value);
      } else if (!is_vec) {
        throw FallbackRequired("bit vector fed from a scalar counter");
      } else {
        if (a.kind == ActionKind::Increment) filtered.shift();
        vec[k] |= filtered;
      }
    }
  }

  active_.swap(next);
  for (std::size_t k = 0; k < counters_.size(); ++k) {
    counters_[k].active = value[k].has_value();
    if (value[k]) counters_[k].value = *value[k];
  }
  vectors_.swap(vec);

  for (StateId q = 0; q < nca_.states.size(); ++q) {
    const auto& f = nca_.states[q].final;
    if (!f || !active_[q]) continue;
    int cell = cell_of_state_[q];
    if (cell < 0) return true;
    if (cells_[cell].kind == CellKind::Counter) {
      if (f->holds({counters_[storage_[cell]].value})) return true;
    } else {
      BitVectorCell filtered = vectors_[storage_[cell]];
      for (const auto& a : f->atoms) {
        auto [lo, hi] = atom_range(a);
        filtered.mask(lo, hi);
      }
      if (filtered.any()) return true;
    }
  }
  return false;
}

std::vector<std::uint32_t> OptimizedMatcher::values_of(InstanceId instance) const {
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    if (cells_[c].instance != instance) continue;
    if (cells_[c].kind == CellKind::BitVector) return vectors_[storage_[c]].members();
    for (StateId q = 0; q < nca_.states.size(); ++q)
      if (cell_of_state_[q] == static_cast<int>(c) && active_[q]) return {counters_[storage_[c]].value};
    return {};
  }
  return {};
}

const BitVectorCell* OptimizedMatcher::bit_vector(InstanceId instance) const {
  for (std::size_t c = 0; c < cells_.size(); ++c)
    if (cells_[c].instance == instance && cells_[c].kind == CellKind::BitVector)
      return &vectors_[storage_[c]];
  return nullptr;
}

std::uint32_t OptimizedMatcher::counter_value(InstanceId instance) const {
  for (std::size_t c = 0; c < cells_.size(); ++c)
    if (cells_[c].instance == instance && cells_[c].kind == CellKind::Counter)
      return counters_[storage_[c]].value;
  throw std::invalid_argument("no counter cell for instance " + std::to_string(instance));
}

MatchPlan plan_optimized(const RegexAst& ast, std::uint64_t budget, std::size_t node_limit) {
  MatchPlan plan;
  plan.ast = normalize(ast);
  for (;;) {
    std::set<InstanceId> nested;
    for (const auto& i : count_instances(plan.ast))
      if (i.nested) nested.insert(i.id);
    if (nested.empty()) break;
    plan.ast = unfold_instances(plan.ast, nested, node_limit);
    plan.unfolded.insert(plan.unfolded.end(), nested.begin(), nested.end());
  }
  for (;;) {
    plan.report = hybrid_ambiguity(plan.ast, budget);
    std::set<InstanceId> bad;
    for (const auto& info : count_instances(plan.ast)) {
      const InstanceVerdict* v = plan.report.find(info.id);
      bool placeable = v->verdict == Verdict::Unambiguous ||
                       (v->verdict == Verdict::Ambiguous && info.single_class);
      if (!placeable) bad.insert(info.id);
    }
    if (bad.empty()) break;
    plan.ast = unfold_instances(plan.ast, bad, node_limit);
    plan.unfolded.insert(plan.unfolded.end(), bad.begin(), bad.end());
  }
  plan.nca = glushkov(plan.ast);
  return plan;
}

std::unique_ptr<StreamMatcher> make_matcher(const RegexAst& ast, Backend backend, std::uint64_t budget,
                                            std::size_t node_limit) {
  switch (backend) {
    case Backend::Reference:
      return std::make_unique<ReferenceMatcher>(glushkov(normalize(ast)));
    case Backend::UnfoldedNfa:
      return std::make_unique<NfaMatcher>(ast, node_limit);
    case Backend::Optimized: {
      MatchPlan plan = plan_optimized(ast, budget, node_limit);
      return std::make_unique<OptimizedMatcher>(std::move(plan.nca), plan.report);
    }
  }
  return nullptr;
}

std::vector<MatchEvent> match_stream(const RegexAst& ast, std::string_view input, Backend backend,
                                     std::uint32_t rule_id) {
  auto m = make_matcher(ast, backend);
  return match_stream(*m, input, rule_id);
}

}  // namespace recount
