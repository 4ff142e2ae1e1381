#include "recount/ambiguity.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "recount/engine.hpp"

namespace recount {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Unambiguous: return "unambiguous";
    case Verdict::Ambiguous: return "ambiguous";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

const char* mode_name(AnalysisMode m) {
  switch (m) {
    case AnalysisMode::Exact: return "exact";
    case AnalysisMode::Approx: return "approx";
    case AnalysisMode::Hybrid: return "hybrid";
  }
  return "?";
}

AnalysisMode mode_from_name(const std::string& name) {
  if (name == "exact") return AnalysisMode::Exact;
  if (name == "approx") return AnalysisMode::Approx;
  if (name == "hybrid") return AnalysisMode::Hybrid;
  throw std::invalid_argument("unknown analysis mode '" + name + "'");
}

Verdict AmbiguityReport::verdict() const {
  bool inconclusive = false;
  for (const auto& i : instances) {
    if (i.verdict == Verdict::Ambiguous) return Verdict::Ambiguous;
    inconclusive = inconclusive || i.verdict == Verdict::Inconclusive;
  }
  return inconclusive ? Verdict::Inconclusive : Verdict::Unambiguous;
}

const InstanceVerdict* AmbiguityReport::find(InstanceId id) const {
  for (const auto& i : instances)
    if (i.instance == id) return &i;
  return nullptr;
}

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t micros_since(Clock::time_point start) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count());
}

struct VecHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
    std::size_t h = v.size();
    for (auto x : v) h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

// Interned tokens with lazily computed successor lists.
class TokenTable {
 public:
  explicit TokenTable(const Nca& nca) : nca_(nca) {}

  std::uint32_t intern(StateId q, const Valuation& v) {
    std::vector<std::uint32_t> key;
    key.reserve(v.size() + 1);
    key.push_back(q);
    key.insert(key.end(), v.begin(), v.end());
    auto [it, fresh] = ids_.try_emplace(std::move(key), static_cast<std::uint32_t>(tokens_.size()));
    if (fresh) {
      tokens_.push_back({q, v});
      succ_.emplace_back();
      expanded_.push_back(false);
    }
    return it->second;
  }

  const Token& operator[](std::uint32_t id) const { return tokens_[id]; }

  struct Succ {
    StateId dst;
    std::uint32_t token;
  };

  const std::vector<Succ>& successors(std::uint32_t id) {
    if (!expanded_[id]) {
      std::vector<Succ> out;
      // Copies: intern() may grow tokens_.
      StateId q = tokens_[id].state;
      Valuation v = tokens_[id].values;
      for (std::size_t ti : nca_.out[q]) {
        const Transition& t = nca_.transitions[ti];
        if (!t.guard.holds(v)) continue;
        Valuation nv = t.action.apply(v);
        std::uint32_t nid = intern(t.dst, nv);
        out.push_back({t.dst, nid});
      }
      succ_[id] = std::move(out);
      expanded_[id] = true;
    }
    return succ_[id];
  }

  bool less(std::uint32_t a, std::uint32_t b) const { return tokens_[a] < tokens_[b]; }

 private:
  const Nca& nca_;
  std::vector<Token> tokens_;
  std::vector<std::vector<Succ>> succ_;
  std::vector<bool> expanded_;
  std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VecHash> ids_;
};

// Counters on which two tokens disagree, restricted to counters both
// states carry.
template <typename F>
void for_each_disagreement(const Nca& nca, const Token& a, const Token& b, F&& f) {
  const auto& ca = nca.states[a.state].counters;
  const auto& cb = nca.states[b.state].counters;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    for (std::size_t j = 0; j < cb.size(); ++j) {
      if (ca[i] == cb[j] && a.values[i] != b.values[j]) f(ca[i]);
    }
  }
}

}  // namespace

AmbiguityReport exact_ambiguity(const Nca& nca, const ExactOptions& opts) {
  auto start = Clock::now();
  AmbiguityReport report;
  report.mode = AnalysisMode::Exact;

  // Instances in scope, indexed by counter.
  std::vector<int> slot_of_counter(nca.counters.size(), -1);
  for (CounterId c = 0; c < nca.counters.size(); ++c) {
    InstanceId id = nca.counters[c].instance;
    if (!opts.only.empty() && !opts.only.count(id)) continue;
    slot_of_counter[c] = static_cast<int>(report.instances.size());
    InstanceVerdict v;
    v.instance = id;
    v.min = nca.counters[c].min;
    v.max = nca.counters[c].max;
    report.instances.push_back(v);
  }
  std::size_t undecided = report.instances.size();
  if (undecided == 0) {
    report.micros = micros_since(start);
    return report;
  }

  TokenTable tokens(nca);
  struct PairRec {
    std::uint32_t a, b;
    std::uint32_t parent;
    std::uint8_t byte;
  };
  std::vector<PairRec> pairs;
  std::unordered_set<std::uint64_t> seen;
  std::deque<std::uint32_t> queue;
  constexpr std::uint32_t kNoParent = UINT32_MAX;

  auto witness_of = [&](std::uint32_t p) {
    std::string w;
    for (; pairs[p].parent != kNoParent; p = pairs[p].parent) w += static_cast<char>(pairs[p].byte);
    std::reverse(w.begin(), w.end());
    return w;
  };

  auto examine = [&](std::uint32_t p) {
    const Token& ta = tokens[pairs[p].a];
    const Token& tb = tokens[pairs[p].b];
    for_each_disagreement(nca, ta, tb, [&](CounterId c) {
      int s = slot_of_counter[c];
      if (s < 0) return;
      InstanceVerdict& v = report.instances[s];
      if (v.verdict != Verdict::Inconclusive) return;
      v.verdict = Verdict::Ambiguous;
      v.witness = witness_of(p);
      v.evidence = AmbiguityEvidence{ta.state, ta.values, tb.state, tb.values};
      v.pairs_created = pairs.size();
      v.micros = micros_since(start);
      --undecided;
    });
  };

  bool out_of_budget = false;
  auto add_pair = [&](std::uint32_t a, std::uint32_t b, std::uint32_t parent, std::uint8_t byte) {
    if (opts.symmetry_reduction && tokens.less(b, a)) std::swap(a, b);
    std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
    if (!seen.insert(key).second) return;
    if (pairs.size() >= opts.budget) {
      out_of_budget = true;
      return;
    }
    auto id = static_cast<std::uint32_t>(pairs.size());
    pairs.push_back({a, b, parent, byte});
    queue.push_back(id);
    examine(id);
  };

  std::vector<std::uint32_t> init;
  for (const auto& t : nca.init) init.push_back(tokens.intern(t.state, t.values));
  for (std::size_t i = 0; i < init.size(); ++i)
    for (std::size_t j = opts.symmetry_reduction ? i : 0; j < init.size(); ++j)
      add_pair(init[i], init[j], kNoParent, 0);

  while (!queue.empty() && undecided > 0 && !out_of_budget) {
    std::uint32_t p = queue.front();
    queue.pop_front();
    std::uint32_t a = pairs[p].a;
    std::uint32_t b = pairs[p].b;
    // successors() may reallocate its storage; copy before nesting calls.
    auto sa = tokens.successors(a);
    auto sb = tokens.successors(b);
    for (const auto& x : sa) {
      for (const auto& y : sb) {
        const CharClass& ca = nca.states[x.dst].cls;
        const CharClass& cb = nca.states[y.dst].cls;
        if (!ca.intersects(cb)) continue;
        add_pair(x.token, y.token, p, *(ca & cb).min_byte());
        if (undecided == 0 || out_of_budget) break;
      }
      if (undecided == 0 || out_of_budget) break;
    }
  }

  for (auto& v : report.instances) {
    if (v.verdict != Verdict::Inconclusive) continue;
    if (out_of_budget) {
      v.reason = InconclusiveReason::Budget;
    } else {
      v.verdict = Verdict::Unambiguous;
    }
    v.pairs_created = pairs.size();
    v.micros = micros_since(start);
  }
  report.pairs_created = pairs.size();
  report.micros = micros_since(start);
  return report;
}

namespace {

// Representative byte of each class of bytes no state class distinguishes.
std::vector<std::uint8_t> minterm_bytes(const Nca& nca) {
  std::vector<CharClass> classes;
  for (const auto& s : nca.states)
    if (std::find(classes.begin(), classes.end(), s.cls) == classes.end()) classes.push_back(s.cls);
  std::map<std::vector<bool>, std::uint8_t> reps;
  for (unsigned b = 0; b < 256; ++b) {
    std::vector<bool> sig;
    for (const auto& c : classes) sig.push_back(c.contains(static_cast<std::uint8_t>(b)));
    reps.try_emplace(sig, static_cast<std::uint8_t>(b));
  }
  std::vector<std::uint8_t> out;
  for (const auto& [sig, b] : reps) out.push_back(b);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Degree degree_at_least(const Nca& nca, StateId q, std::uint32_t d, std::uint64_t budget) {
  if (d < 2) throw std::invalid_argument("degree_at_least needs d >= 2");
  TokenTable tokens(nca);
  auto canonical = [&](std::vector<std::uint32_t>& t) {
    std::sort(t.begin(), t.end(), [&](std::uint32_t a, std::uint32_t b) { return tokens.less(a, b); });
  };
  auto witnesses = [&](const std::vector<std::uint32_t>& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (tokens[t[i]].state != q) return false;
      if (i > 0 && t[i] == t[i - 1]) return false;  // sorted, so duplicates are adjacent
    }
    return true;
  };

  std::set<std::vector<std::uint32_t>> seen;
  std::deque<std::vector<std::uint32_t>> queue;
  std::uint64_t created = 0;
  bool exhausted = false;
  auto add = [&](std::vector<std::uint32_t> t) {
    canonical(t);
    if (seen.count(t)) return false;
    if (created >= budget) {
      exhausted = true;
      return false;
    }
    ++created;
    bool yes = witnesses(t);
    seen.insert(t);
    queue.push_back(std::move(t));
    return yes;
  };

  std::vector<std::uint32_t> init;
  for (const auto& t : nca.init) init.push_back(tokens.intern(t.state, t.values));
  // Every multiset of d initial tokens.
  std::vector<std::size_t> idx(d, 0);
  for (;;) {
    std::vector<std::uint32_t> t;
    for (auto i : idx) t.push_back(init[i]);
    if (add(t)) return Degree::Yes;
    std::size_t k = d;
    while (k > 0 && idx[k - 1] + 1 == init.size()) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t j = k; j < d; ++j) idx[j] = idx[k - 1];
  }

  std::vector<std::uint8_t> bytes = minterm_bytes(nca);
  while (!queue.empty() && !exhausted) {
    std::vector<std::uint32_t> cur = std::move(queue.front());
    queue.pop_front();
    for (std::uint8_t byte : bytes) {
      std::vector<std::vector<std::uint32_t>> choices(d);
      bool dead = false;
      for (std::uint32_t i = 0; i < d && !dead; ++i) {
        auto succ = tokens.successors(cur[i]);
        for (const auto& s : succ)
          if (nca.states[s.dst].cls.contains(byte)) choices[i].push_back(s.token);
        dead = choices[i].empty();
      }
      if (dead) continue;
      std::vector<std::size_t> pick(d, 0);
      for (;;) {
        std::vector<std::uint32_t> t(d);
        for (std::uint32_t i = 0; i < d; ++i) t[i] = choices[i][pick[i]];
        if (add(std::move(t))) return Degree::Yes;
        if (exhausted) break;
        std::uint32_t i = 0;
        while (i < d && ++pick[i] == choices[i].size()) pick[i++] = 0;
        if (i == d) break;
      }
      if (exhausted) break;
    }
  }
  return exhausted ? Degree::Inconclusive : Degree::No;
}

InstanceVerdict approximate_ambiguity(const RegexAst& ast, InstanceId instance, std::uint64_t budget) {
  auto start = Clock::now();
  RegexAst relaxed = relax_except(ast, instance);
  Nca nca = glushkov(relaxed);
  if (!nca.counter_of_instance(instance))
    throw std::invalid_argument("instance " + std::to_string(instance) + " does not occur");
  AmbiguityReport r = exact_ambiguity(nca, ExactOptions{budget, {instance}, true});
  InstanceVerdict v = r.instances.front();
  if (v.verdict != Verdict::Unambiguous) {
    if (v.verdict == Verdict::Ambiguous) v.reason = InconclusiveReason::Approx;
    v.verdict = Verdict::Inconclusive;
    v.witness.reset();
    v.evidence.reset();
  }
  v.pairs_created = r.pairs_created;
  v.micros = micros_since(start);
  return v;
}

AmbiguityReport hybrid_ambiguity(const RegexAst& ast, std::uint64_t budget) {
  auto start = Clock::now();
  AmbiguityReport report;
  report.mode = AnalysisMode::Hybrid;
  std::vector<InstanceInfo> infos = count_instances(ast);
  std::set<InstanceId> remaining;
  for (const auto& i : infos) remaining.insert(i.id);

  std::vector<InstanceVerdict> proven;
  bool fallback = false;
  for (const auto& info : infos) {
    InstanceVerdict v = approximate_ambiguity(ast, info.id, budget);
    report.pairs_created += v.pairs_created;
    if (v.verdict != Verdict::Unambiguous) {
      fallback = true;
      break;
    }
    remaining.erase(info.id);
    proven.push_back(v);
  }

  std::vector<InstanceVerdict> decided = proven;
  if (fallback) {
    AmbiguityReport exact = exact_ambiguity(glushkov(ast), ExactOptions{budget, remaining, true});
    report.pairs_created += exact.pairs_created;
    decided.insert(decided.end(), exact.instances.begin(), exact.instances.end());
  }
  for (const auto& info : infos) {
    auto it = std::find_if(decided.begin(), decided.end(),
                           [&](const InstanceVerdict& v) { return v.instance == info.id; });
    report.instances.push_back(*it);
  }
  report.micros = micros_since(start);
  return report;
}

AmbiguityReport analyze(const RegexAst& ast, AnalysisMode mode, std::uint64_t budget) {
  RegexAst norm = normalize(ast);
  switch (mode) {
    case AnalysisMode::Exact:
      return exact_ambiguity(glushkov(norm), budget);
    case AnalysisMode::Hybrid:
      return hybrid_ambiguity(norm, budget);
    case AnalysisMode::Approx: {
      auto start = Clock::now();
      AmbiguityReport report;
      report.mode = AnalysisMode::Approx;
      for (const auto& info : count_instances(norm)) {
        report.instances.push_back(approximate_ambiguity(norm, info.id, budget));
        report.pairs_created += report.instances.back().pairs_created;
      }
      report.micros = micros_since(start);
      return report;
    }
  }
  return {};
}

WitnessCheck verify_witness(const Nca& nca, const std::string& witness,
                            std::optional<InstanceId> instance) {
  Configuration config = run(nca, witness);
  std::optional<CounterId> x;
  if (instance) {
    x = nca.counter_of_instance(*instance);
    if (!x) return {};
  }
  for (std::size_t i = 0; i < config.size(); ++i) {
    for (std::size_t j = i + 1; j < config.size(); ++j) {
      const Token& a = config[i];
      const Token& b = config[j];
      bool hit = false;
      if (!x) {
        hit = a.state == b.state;
      } else {
        for_each_disagreement(nca, a, b, [&](CounterId c) { hit = hit || c == *x; });
      }
      if (hit) return {true, AmbiguityEvidence{a.state, a.values, b.state, b.values}};
    }
  }
  return {};
}

RegexAst subset_sum_regex(const std::vector<std::uint32_t>& s, std::uint32_t t) {
  if (t == 0) throw std::invalid_argument("subset_sum_regex needs T >= 1");
  std::string text = "(";
  for (std::uint32_t n : s) {
    if (n == 0) throw std::invalid_argument("subset_sum_regex needs members >= 1");
    text += "(a{" + std::to_string(n) + "}|)";
  }
  text += "#b|a{" + std::to_string(t) + "}#bb)b{2}";
  return parse_or_throw(text);
}

std::string report_to_json(const std::string& regex, const AmbiguityReport& report, bool with_witness) {
  nlohmann::json j;
  j["regex"] = regex;
  j["mode"] = mode_name(report.mode);
  j["verdict"] = verdict_name(report.verdict());
  j["pairs_created"] = report.pairs_created;
  j["micros"] = report.micros;
  j["instances"] = nlohmann::json::array();
  for (const auto& i : report.instances) {
    nlohmann::json e;
    e["id"] = i.instance;
    e["min"] = i.min;
    e["max"] = i.max;
    e["verdict"] = verdict_name(i.verdict);
    if (i.reason == InconclusiveReason::Budget) e["reason"] = "budget";
    if (i.reason == InconclusiveReason::Approx) e["reason"] = "approx";
    if (with_witness && i.witness) e["witness"] = escape_bytes(*i.witness);
    e["pairs_created"] = i.pairs_created;
    e["micros"] = i.micros;
    j["instances"].push_back(std::move(e));
  }
  return j.dump();
}

std::pair<std::string, AmbiguityReport> report_from_json(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  AmbiguityReport report;
  report.mode = mode_from_name(j.at("mode").get<std::string>());
  report.pairs_created = j.value("pairs_created", std::uint64_t{0});
  report.micros = j.value("micros", std::uint64_t{0});
  for (const auto& e : j.at("instances")) {
    InstanceVerdict v;
    v.instance = e.at("id").get<InstanceId>();
    v.min = e.at("min").get<std::uint32_t>();
    v.max = e.at("max").get<std::uint32_t>();
    std::string verdict = e.at("verdict").get<std::string>();
    if (verdict == "unambiguous") {
      v.verdict = Verdict::Unambiguous;
    } else if (verdict == "ambiguous") {
      v.verdict = Verdict::Ambiguous;
    } else if (verdict == "inconclusive") {
      v.verdict = Verdict::Inconclusive;
    } else {
      throw std::invalid_argument("unknown verdict '" + verdict + "'");
    }
    std::string reason = e.value("reason", std::string());
    if (reason == "budget") v.reason = InconclusiveReason::Budget;
    if (reason == "approx") v.reason = InconclusiveReason::Approx;
    if (e.contains("witness")) v.witness = unescape_bytes(e.at("witness").get<std::string>());
    v.pairs_created = e.value("pairs_created", std::uint64_t{0});
    v.micros = e.value("micros", std::uint64_t{0});
    report.instances.push_back(std::move(v));
  }
  return {j.at("regex").get<std::string>(), std::move(report)};
}

}  // namespace recount
