#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "recount/engine.hpp"
#include "recount/errors.hpp"

using namespace recount;

namespace {

RegexAst norm(const std::string& text) { return normalize(parse_or_throw(text)); }

std::vector<std::uint64_t> ends(const std::vector<MatchEvent>& ev) {
  std::vector<std::uint64_t> out;
  for (const auto& e : ev) out.push_back(e.end_offset);
  return out;
}

std::vector<std::uint64_t> ends_of(const std::string& re, const std::string& in, Backend b) {
  return ends(match_stream(parse_or_throw(re), in, b));
}

constexpr Backend kAll[] = {Backend::Reference, Backend::Optimized, Backend::UnfoldedNfa};

}  // namespace

TEST_CASE("step") {
  Nca nca = glushkov(norm(".*.{2}"));
  Configuration c = step(nca, initial_configuration(nca), 'a');
  CHECK(c == Configuration{Token{0, {}}, Token{1, {1}}});
  CHECK(step(nca, Configuration{}, 'a').empty());

  // .*a(b(cd){2,3}e){4}f: 'd' is q4 and 'e' is q5; x counts the outer loop.
  Nca two = glushkov(norm(".*a(b(cd){2,3}e){4}f"));
  REQUIRE(two.states[4].counters.size() == 2);
  Configuration at_d{Token{4, {1, 3}}};
  CHECK(step(two, at_d, 'c').empty());
  Configuration moved = step(two, at_d, 'e');
  REQUIRE(moved.size() == 1);
  CHECK(moved[0].state == 5);
  CHECK(moved[0].values == Valuation{1});
  // Below the inner minimum 'e' is refused, 'c' continues.
  Configuration low{Token{4, {1, 1}}};
  CHECK(step(two, low, 'e').empty());
  CHECK(step(two, low, 'c') == Configuration{Token{3, {1, 2}}});
}

TEST_CASE("match_stream examples") {
  for (Backend b : kAll) {
    CAPTURE(backend_name(b));
    CHECK(ends_of("a(bc){1,3}d", "abcbcd", b) == std::vector<std::uint64_t>{6});
    CHECK(ends_of("a", "", b).empty());
    CHECK(ends_of(".*w(xy){1,2}z", "wxyxyz", b) == std::vector<std::uint64_t>{6});
    CHECK(ends_of(".*w(xy){1,2}z", "wxyxyxyz", b).empty());
    CHECK(ends_of(".*a{2}", "aaa", b) == std::vector<std::uint64_t>{2, 3});
  }
  auto ev = match_stream(parse_or_throw("ab"), "abab", Backend::Reference, 7);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0] == MatchEvent{2, 7});
}

TEST_CASE("backend names") {
  for (Backend b : kAll) CHECK(backend_from_name(backend_name(b)) == b);
  CHECK_THROWS_AS(backend_from_name("fast"), std::invalid_argument);
}

TEST_CASE("bit vector operations") {
  BitVectorCell v(3);
  v.set(1);
  v.set(3);
  CHECK(v.to_string() == "101");
  v.shift();
  CHECK(v.to_string() == "010");

  BitVectorCell z(5);
  CHECK_FALSE(z.disjunct(1, 5));

  BitVectorCell w(3);
  w.set(2);
  w.reset();
  w.set_first();
  CHECK(w.to_string() == "100");
  CHECK(w.disjunct(1, 3));
  CHECK_FALSE(w.disjunct(2, 3));

  BitVectorCell big(130);
  big.set(64);
  big.set(130);
  big.shift();
  CHECK(big.members() == std::vector<std::uint32_t>{65});
  big.set(1);
  big.mask(2, 130);
  CHECK(big.members() == std::vector<std::uint32_t>{65});
}

TEST_CASE("shift agrees with token semantics of .*a{3}") {
  Nca nca = glushkov(norm(".*a{3}"));
  // Tokens at 1 and 3 on the body state, then a byte that only increments.
  Configuration c{Token{1, {1}}, Token{1, {3}}};
  Configuration next = step(nca, c, 'a');
  BitVectorCell v(3);
  v.set(1);
  v.set(3);
  v.shift();
  std::vector<std::uint32_t> values;
  for (const auto& t : next) values.push_back(t.values[0]);
  CHECK(values == v.members());
}

TEST_CASE("counter_cell_step") {
  CounterCell idle{false, 0, 1, 3};
  CounterStep s = counter_cell_step(idle, false, false, false);
  CHECK_FALSE(s.en_fst);
  CHECK_FALSE(s.en_out);
  CHECK(s.cell.value == idle.value);
  CHECK(s.cell.active == idle.active);

  // a(bc){m,3}d on "abcd": 'b' arrives right after 'a' (pre), 'c' is lst.
  for (std::uint32_t m : {1u, 2u}) {
    CounterCell c{false, 0, m, 3};
    c = counter_cell_step(c, false, false, false).cell;  // 'a'
    c = counter_cell_step(c, true, true, false).cell;    // 'b'
    CHECK(c.value == 1);
    CounterStep at_c = counter_cell_step(c, false, false, true);
    CHECK(at_c.cell.value == 1);
    CHECK(at_c.en_fst);
    CHECK(at_c.en_out == (m == 1));
    CHECK(ends_of("a(bc){" + std::to_string(m) + ",3}d", "abcd", Backend::Reference).empty() == (m != 1));
  }

  // Re-entry is disabled once the value reaches the bound.
  CounterCell full{true, 3, 1, 3};
  CounterStep top = counter_cell_step(full, false, false, true);
  CHECK_FALSE(top.en_fst);
  CHECK(top.en_out);
  CounterStep inc = counter_cell_step(CounterCell{true, 2, 1, 3}, false, true, false);
  CHECK(inc.cell.value == 3);
}

TEST_CASE("unfolded NFA size") {
  CHECK(NfaMatcher(parse_or_throw("a{3}")).state_count() == 4);
  for (std::uint32_t n : {10u, 100u, 1000u})
    CHECK(NfaMatcher(parse_or_throw("(ab){" + std::to_string(n) + "}")).state_count() == 2 * n + 1);
}

TEST_CASE("optimized backend cells and memory") {
  MatchPlan amb = plan_optimized(parse_or_throw(".*a{1000}"));
  OptimizedMatcher m(amb.nca, amb.report);
  REQUIRE(m.cells().size() == 1);
  CHECK(m.cells()[0].kind == CellKind::BitVector);
  CHECK(m.memory_bits() == 1000);

  MatchPlan un = plan_optimized(parse_or_throw("a{1000}"));
  OptimizedMatcher u(un.nca, un.report);
  REQUIRE(u.cells().size() == 1);
  CHECK(u.cells()[0].kind == CellKind::Counter);
  CHECK(u.memory_bits() == 10);

  for (std::uint32_t n : {16u, 256u, 4096u}) {
    MatchPlan p = plan_optimized(parse_or_throw("ab{" + std::to_string(n) + "}c"));
    CHECK(OptimizedMatcher(p.nca, p.report).memory_bits() <= 13);
  }

  // Nested counting is refused when handed an NCA directly.
  RegexAst nested = norm("a(b{2}c){3}");
  CHECK_THROWS_AS(OptimizedMatcher(glushkov(nested), exact_ambiguity(glushkov(nested))), FallbackRequired);
  MatchPlan fixed = plan_optimized(parse_or_throw("a(b{2}c){3}"));
  CHECK_FALSE(fixed.unfolded.empty());
  // Ambiguous multi-state bodies are unfolded by the planner.
  MatchPlan multi = plan_optimized(parse_or_throw(".*(ab){3}"));
  RegexAst raw = norm(".*(ab){3}");
  CHECK_THROWS_AS(OptimizedMatcher(glushkov(raw), exact_ambiguity(glushkov(raw))), FallbackRequired);
  CHECK(multi.unfolded.size() == 1);
}

TEST_CASE("backend equivalence on random cases") {
  std::mt19937 rng(7);
  oracle::GenOptions g;
  int optimized_runs = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string text = oracle::random_regex(rng, g);
    std::string input = oracle::random_input(rng, "abc", 64);
    CAPTURE(text);
    CAPTURE(input);
    RegexAst ast = parse_or_throw(text);
    auto want = oracle::events(ast.root, input);
    CHECK(match_stream(ast, input, Backend::Reference) == want);
    CHECK(match_stream(ast, input, Backend::UnfoldedNfa) == want);
    std::vector<MatchEvent> got;
    try {
      got = match_stream(ast, input, Backend::Optimized);
      ++optimized_runs;
    } catch (const FallbackRequired&) {
      got = want;
    }
    CHECK(got == want);
  }
  CHECK(optimized_runs == 1000);
}

TEST_CASE("bit vector adequacy") {
  std::mt19937 rng(11);
  for (const char* text : {".*a{4}", ".*[ab]{2,5}c", ".*b[ab]{1,6}", "(a|b)*a[ab]{3,5}b", ".*c{3}a{2,4}"}) {
    CAPTURE(text);
    MatchPlan p = plan_optimized(parse_or_throw(text));
    OptimizedMatcher opt(p.nca, p.report);
    ReferenceMatcher ref(p.nca);
    bool saw_vector = false;
    for (int t = 0; t < 50; ++t) {
      std::string input = oracle::random_input(rng, "abc", 40);
      opt.reset();
      ref.reset();
      for (char ch : input) {
        CHECK(opt.feed(ch) == ref.feed(ch));
        for (const auto& cell : opt.cells()) {
          if (cell.kind != CellKind::BitVector) continue;
          saw_vector = true;
          CounterId x = *p.nca.counter_of_instance(cell.instance);
          std::vector<std::uint32_t> want;
          for (const auto& tok : ref.configuration())
            if (!p.nca.states[tok.state].counters.empty() && p.nca.states[tok.state].counters[0] == x)
              want.push_back(tok.values[0]);
          std::sort(want.begin(), want.end());
          REQUIRE(opt.bit_vector(cell.instance)->members() == want);
        }
      }
    }
    CHECK(saw_vector);
  }
}

TEST_CASE("counter adequacy") {
  std::mt19937 rng(12);
  for (const char* text : {"a(bc){1,3}d", ".*ab{3,6}c", ".*a(bc){2,4}d", "a{3}.*b{2}c", ".*c(a|b){5}c"}) {
    CAPTURE(text);
    MatchPlan p = plan_optimized(parse_or_throw(text));
    OptimizedMatcher opt(p.nca, p.report);
    ReferenceMatcher ref(p.nca);
    for (int t = 0; t < 50; ++t) {
      std::string input = oracle::random_input(rng, "abcd", 40);
      opt.reset();
      ref.reset();
      for (char ch : input) {
        CHECK(opt.feed(ch) == ref.feed(ch));
        for (const auto& cell : opt.cells()) {
          if (cell.kind != CellKind::Counter) continue;
          CounterId x = *p.nca.counter_of_instance(cell.instance);
          std::vector<std::uint32_t> seen;
          for (const auto& tok : ref.configuration()) {
            const auto& cs = p.nca.states[tok.state].counters;
            if (cs.empty() || cs[0] != x) continue;
            REQUIRE(std::count_if(ref.configuration().begin(), ref.configuration().end(),
                                  [&](const Token& o) { return o.state == tok.state; }) == 1);
            seen.push_back(tok.values[0]);
          }
          if (seen.empty()) {
            CHECK(opt.values_of(cell.instance).empty());
          } else {
            for (auto v : seen) REQUIRE(v == opt.counter_value(cell.instance));
          }
        }
      }
    }
  }
}

TEST_CASE("configuration size is bounded on counting-free automata") {
  std::mt19937 rng(13);
  oracle::GenOptions g;
  g.max_instances = 0;
  for (int i = 0; i < 200; ++i) {
    Nca nca = glushkov(norm(oracle::random_regex(rng, g)));
    ReferenceMatcher m(nca);
    for (char ch : oracle::random_input(rng, "abc", 64)) {
      m.feed(ch);
      REQUIRE(m.configuration().size() <= nca.state_count());
    }
  }
}
