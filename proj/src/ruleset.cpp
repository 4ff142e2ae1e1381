#include "recount/ruleset.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "recount/errors.hpp"
#include "recount/ir.hpp"

namespace recount {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Snort buffer and position modifiers do not change the language matched.
constexpr std::string_view kNoOpFlags = "sRUIPHDMCKSYBOG";

bool is_snort_rule(const std::string& line) {
  for (const char* action : {"alert ", "log ", "pass ", "drop ", "reject ", "sdrop "})
    if (line.rfind(action, 0) == 0) return true;
  return false;
}

std::vector<std::string> pcre_options(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = line.find("pcre:\"", pos)) != std::string::npos) {
    pos += 6;
    std::string value;
    bool closed = false;
    for (; pos < line.size(); ++pos) {
      char c = line[pos];
      if (c == '\\' && pos + 1 < line.size() && line[pos + 1] == '"') {
        value += '"';
        ++pos;
      } else if (c == '"') {
        closed = true;
        break;
      } else {
        value += c;
      }
    }
    if (closed) out.push_back(value);
  }
  return out;
}

struct Unwrapped {
  std::string pattern;
  std::string flags;
  std::string error;
};

// `/pattern/flags` -> dialect pattern.
Unwrapped unwrap_pcre(const std::string& text) {
  Unwrapped u;
  std::size_t close = text.rfind('/');
  if (text.size() < 2 || text[0] != '/' || close == 0) {
    u.error = "malformed PCRE literal";
    return u;
  }
  std::string body = text.substr(1, close - 1);
  u.flags = text.substr(close + 1);
  if (u.flags.size() > 0 && u.flags[0] == '!') u.flags.erase(0, 1);  // negated Snort match
  bool anchored = !body.empty() && body[0] == '^';
  for (char f : u.flags) {
    if (kNoOpFlags.find(f) != std::string_view::npos) continue;
    if (f == 'm' && !anchored) continue;
    u.error = std::string("flag '") + f + "'";
    return u;
  }
  u.pattern = anchored ? body.substr(1) : ".*" + body;
  return u;
}

}  // namespace

Ruleset parse_ruleset(std::string_view text, const std::string& name) {
  Ruleset rs;
  rs.name = name;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  std::uint32_t next_id = 0;

  auto add = [&](const std::string& pattern, const std::string& flags, const std::string& original) {
    try {
      ParseResult r = parse(pattern);
      if (!r.ok()) {
        rs.rejected.push_back({lineno, original, r.diagnostics.summary()});
        return;
      }
      rs.rules.push_back({next_id++, pattern, lineno, flags, *r.ast});
    } catch (const SyntaxError& e) {
      rs.rejected.push_back({lineno, original, std::string("syntax: ") + e.what()});
    }
  };

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (is_snort_rule(line)) {
      auto opts = pcre_options(line);
      if (opts.empty()) ++rs.skipped;
      for (const auto& o : opts) {
        Unwrapped u = unwrap_pcre(o);
        if (!u.error.empty()) {
          rs.rejected.push_back({lineno, o, u.error});
        } else {
          add(u.pattern, u.flags, o);
        }
      }
    } else if (line[0] == '/') {
      Unwrapped u = unwrap_pcre(line);
      if (!u.error.empty()) {
        rs.rejected.push_back({lineno, line, u.error});
      } else {
        add(u.pattern, u.flags, line);
      }
    } else {
      add(line, "", line);
    }
  }
  return rs;
}

Ruleset load_ruleset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string name = path;
  auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  auto dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return parse_ruleset(ss.str(), name);
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  unsigned count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  for (unsigned t = 0; t < count; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

BenchStats bench(const Ruleset& rs, const BenchOptions& opts) {
  BenchStats s;
  s.name = rs.name;
  s.total = rs.total();
  s.supported = rs.rules.size();
  for (const auto& r : rs.rejected) {
    std::string reason = r.reason;
    auto space = reason.find_first_of(" :");
    if (reason.rfind("flag", 0) != 0 && space != std::string::npos) reason.resize(space);
    ++s.rejected_by_reason[reason];
  }
  s.rules.resize(rs.rules.size());
  std::vector<std::vector<std::size_t>> nodes(rs.rules.size(), std::vector<std::size_t>(opts.thresholds.size(), 0));

  parallel_for(rs.rules.size(), opts.jobs, [&](std::size_t i) {
    const Rule& rule = rs.rules[i];
    RuleStats& st = s.rules[i];
    st.id = rule.id;
    st.regex = rule.regex;
    try {
      RegexAst norm = normalize(rule.ast);
      st.mu = max_repetition_bound(norm);
      st.instances = count_instances(norm).size();
      double total = 0;
      unsigned timed = 0;
      for (unsigned t = 0; t < opts.warmup + std::max(1u, opts.trials); ++t) {
        auto start = std::chrono::steady_clock::now();
        AmbiguityReport rep = analyze(norm, opts.mode, opts.budget);
        auto us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
        st.verdict = rep.verdict();
        st.pairs_created = rep.pairs_created;
        if (t >= opts.warmup) {
          total += us;
          ++timed;
        }
      }
      st.micros = total / timed;
      for (std::size_t k = 0; k < opts.thresholds.size(); ++k)
        nodes[i][k] = compile(norm, CompileOptions{opts.thresholds[k], false, opts.budget}).nodes.size();
    } catch (const std::exception& e) {
      st.error = e.what();
    }
  });

  for (std::size_t i = 0; i < s.rules.size(); ++i) {
    const RuleStats& st = s.rules[i];
    if (st.instances > 0) ++s.counting;
    if (st.instances > 0 && st.verdict == Verdict::Ambiguous) ++s.ambiguous;
    for (std::size_t k = 0; k < opts.thresholds.size(); ++k) s.node_counts[opts.thresholds[k]] += nodes[i][k];
  }
  return s;
}

std::string bench_csv_header() { return "benchmark,total,supported,counting,c-ambiguous\n"; }

std::string bench_csv_row(const BenchStats& s) {
  std::ostringstream out;
  out << s.name << ',' << s.total << ',' << s.supported << ',' << s.counting << ',' << s.ambiguous << '\n';
  return out.str();
}

std::string bench_table(const std::vector<BenchStats>& all) {
  std::size_t width = 9;
  for (const auto& s : all) width = std::max(width, s.name.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "benchmark" << std::right << std::setw(10) << "total"
      << std::setw(11) << "supported" << std::setw(10) << "counting" << std::setw(13) << "c-ambiguous" << '\n';
  for (const auto& s : all) {
    out << std::left << std::setw(static_cast<int>(width)) << s.name << std::right << std::setw(10) << s.total
        << std::setw(11) << s.supported << std::setw(10) << s.counting << std::setw(13) << s.ambiguous << '\n';
  }
  return out.str();
}

std::string node_count_csv(const std::vector<BenchStats>& all) {
  std::ostringstream out;
  out << "benchmark,threshold,nodes\n";
  for (const auto& s : all)
    for (const auto& [k, n] : s.node_counts) out << s.name << ',' << k << ',' << n << '\n';
  return out.str();
}

}  // namespace recount
