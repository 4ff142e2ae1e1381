#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "recount/ambiguity.hpp"
#include "recount/engine.hpp"

using namespace recount;

namespace {

RegexAst norm(const std::string& text) { return normalize(parse_or_throw(text)); }

// .*([^ab][ab]{n}|[^bc][bc]{n}): both bodies overlap on b, and each entry
// symbol can occur while the other repetition is running.
std::string two_branch(std::uint32_t n) {
  return ".*([^ab][ab]{" + std::to_string(n) + "}|[^bc][bc]{" + std::to_string(n) + "})";
}

// Brute-force subset sum.
bool has_subset_sum(const std::vector<std::uint32_t>& s, std::uint32_t t) {
  for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (mask & (1u << i)) sum += s[i];
    if (sum == t) return true;
  }
  return false;
}

// Two tokens anywhere in the configuration that disagree on counter x.
bool disagreement(const Nca& nca, const Configuration& c, CounterId x) {
  std::optional<std::uint32_t> seen;
  for (const auto& tok : c) {
    const auto& cs = nca.states[tok.state].counters;
    for (std::size_t k = 0; k < cs.size(); ++k) {
      if (cs[k] != x) continue;
      if (seen && *seen != tok.values[k]) return true;
      seen = tok.values[k];
    }
  }
  return false;
}

}  // namespace

TEST_CASE("Sigma* sigma{2} is ambiguous with the pair (q,1),(q,2)") {
  for (const char* text : {".*a{2}", ".*.{2}"}) {
    CAPTURE(text);
    Nca nca = glushkov(norm(text));
    AmbiguityReport r = exact_ambiguity(nca);
    REQUIRE(r.instances.size() == 1);
    const InstanceVerdict& v = r.instances[0];
    CHECK(v.verdict == Verdict::Ambiguous);
    REQUIRE(v.evidence);
    CHECK(v.evidence->state == 1);
    CHECK(v.evidence->other_state == 1);
    CHECK(v.evidence->first == Valuation{1});
    CHECK(v.evidence->second == Valuation{2});
    REQUIRE(v.witness);
    CHECK(v.witness->size() == 2);
  }
  CHECK(*exact_ambiguity(glushkov(norm(".*a{2}"))).instances[0].witness == "aa");
}

TEST_CASE("anchored a{3} is unambiguous") {
  Nca nca = glushkov(norm("a{3}"));
  CHECK(exact_ambiguity(nca).instances[0].verdict == Verdict::Unambiguous);
  // Brute force: no input of length <= 6 puts two tokens on a state.
  for (const auto& w : oracle::all_strings("ab", 6)) {
    Configuration c = run(nca, w);
    for (std::size_t i = 1; i < c.size(); ++i) REQUIRE(c[i].state != c[i - 1].state);
  }
}

TEST_CASE("sigma1{m} Sigma* sigma2{n}: first unambiguous, second ambiguous") {
  AmbiguityReport r = exact_ambiguity(glushkov(norm("a{3}.*b{4}")));
  REQUIRE(r.instances.size() == 2);
  CHECK(r.instances[0].verdict == Verdict::Unambiguous);
  CHECK(r.instances[1].verdict == Verdict::Ambiguous);
  CHECK(r.verdict() == Verdict::Ambiguous);
}

TEST_CASE("two-branch pattern is unambiguous in every mode") {
  RegexAst ast = norm(two_branch(20));
  for (AnalysisMode m : {AnalysisMode::Exact, AnalysisMode::Approx, AnalysisMode::Hybrid}) {
    AmbiguityReport r = analyze(ast, m);
    CHECK(r.verdict() == Verdict::Unambiguous);
    CHECK(r.instances.size() == 2);
  }
}

TEST_CASE("approximation explores linearly many pairs") {
  std::vector<double> approx, exact;
  for (std::uint32_t n : {100u, 200u, 400u}) {
    RegexAst ast = norm(two_branch(n));
    auto inst = count_instances(ast);
    InstanceVerdict v = approximate_ambiguity(ast, inst[0].id);
    CHECK(v.verdict == Verdict::Unambiguous);
    approx.push_back(static_cast<double>(v.pairs_created));
    exact.push_back(static_cast<double>(exact_ambiguity(glushkov(ast)).pairs_created));
  }
  // Doubling n roughly doubles the approximate count but quadruples the exact one.
  CHECK(approx[2] / approx[0] < 5.0);
  CHECK(exact[2] / exact[0] > 10.0);
}

TEST_CASE("approximation cannot certify an ambiguous instance") {
  RegexAst ast = norm(".*a{2}");
  InstanceVerdict v = approximate_ambiguity(ast, count_instances(ast)[0].id);
  CHECK(v.verdict == Verdict::Inconclusive);
  CHECK(v.reason == InconclusiveReason::Approx);
  CHECK_FALSE(v.witness);
}

TEST_CASE("anchored a{5}b{7}: approximation agrees with exact") {
  RegexAst ast = norm("a{5}b{7}");
  auto inst = count_instances(ast);
  CHECK(approximate_ambiguity(ast, inst[0].id).verdict == Verdict::Unambiguous);
  CHECK(exact_ambiguity(glushkov(ast)).instances[0].verdict == Verdict::Unambiguous);
}

TEST_CASE("hybrid") {
  RegexAst big = norm(two_branch(1000));
  AmbiguityReport h = hybrid_ambiguity(big);
  CHECK(h.verdict() == Verdict::Unambiguous);
  CHECK(h.pairs_created <= 20 * 1000);

  RegexAst amb = norm(".*[ab]b{8}");
  AmbiguityReport r = hybrid_ambiguity(amb);
  REQUIRE(r.instances.size() == 1);
  CHECK(r.instances[0].verdict == Verdict::Ambiguous);
  REQUIRE(r.instances[0].witness);
  CHECK(verify_witness(glushkov(amb), *r.instances[0].witness).confirmed);

  AmbiguityReport none = hybrid_ambiguity(norm("abc"));
  CHECK(none.instances.empty());
  CHECK(none.pairs_created == 0);
  CHECK(none.verdict() == Verdict::Unambiguous);
}

TEST_CASE("hybrid explores fewer pairs than exact on the two-branch family") {
  for (std::uint32_t n : {10u, 50u, 200u}) {
    RegexAst ast = norm(two_branch(n));
    CHECK(hybrid_ambiguity(ast).pairs_created <= exact_ambiguity(glushkov(ast)).pairs_created);
  }
}

// With several small instances the summed approximate runs can exceed one
// exact run over the whole product.
TEST_CASE("hybrid can exceed exact on small multi-instance patterns") {
  RegexAst ast = norm("b{8}a{3,7}");
  AmbiguityReport h = hybrid_ambiguity(ast);
  CHECK(h.verdict() == Verdict::Unambiguous);
  CHECK(h.pairs_created > exact_ambiguity(glushkov(ast)).pairs_created);
}

TEST_CASE("budget exhaustion is reported in-band") {
  Nca nca = glushkov(norm(two_branch(50)));
  AmbiguityReport r = exact_ambiguity(nca, 100);
  CHECK(r.pairs_created <= 100);
  for (const auto& v : r.instances) {
    CHECK(v.verdict == Verdict::Inconclusive);
    CHECK(v.reason == InconclusiveReason::Budget);
  }
  CHECK(r.verdict() == Verdict::Inconclusive);
}

TEST_CASE("verify_witness") {
  Nca nca = glushkov(norm(".*.{2}"));
  WitnessCheck ok = verify_witness(nca, "aa");
  CHECK(ok.confirmed);
  CHECK(ok.evidence.state == 1);
  CHECK(ok.evidence.first == Valuation{1});
  CHECK(ok.evidence.second == Valuation{2});
  CHECK_FALSE(verify_witness(nca, "").confirmed);
  CHECK_FALSE(verify_witness(nca, "a").confirmed);
}

TEST_CASE("subset-sum reduction") {
  auto rightmost = [](const std::vector<std::uint32_t>& s, std::uint32_t t) {
    RegexAst ast = normalize(subset_sum_regex(s, t));
    auto inst = count_instances(ast);
    AmbiguityReport r = exact_ambiguity(glushkov(ast), ExactOptions{kDefaultBudget, {inst.back().id}, true});
    return r.instances.front();
  };
  CHECK(to_string(subset_sum_regex({2, 3}, 5)) == "((a{2}|)(a{3}|)#b|a{5}#bb)b{2}");
  CHECK(rightmost({2, 3}, 5).verdict == Verdict::Ambiguous);
  CHECK(rightmost({2, 3}, 4).verdict == Verdict::Unambiguous);
  CHECK(rightmost({1}, 1).verdict == Verdict::Ambiguous);
  CHECK(rightmost({}, 3).verdict == Verdict::Unambiguous);

  InstanceVerdict v = rightmost({2, 3}, 5);
  REQUIRE(v.witness);
  Nca nca = glushkov(normalize(subset_sum_regex({2, 3}, 5)));
  CHECK(verify_witness(nca, *v.witness, v.instance).confirmed);
  CHECK(has_subset_sum({2, 3}, 5));
  CHECK_FALSE(has_subset_sum({2, 3}, 4));
}

TEST_CASE("degree_at_least") {
  Nca nca = glushkov(norm(".*a{2}"));
  CHECK(degree_at_least(nca, 1, 2) == Degree::Yes);
  // Three tokens need three distinct values, but the bound is 2.
  bool three = false;
  for (const auto& w : oracle::all_strings("ab", 5)) {
    Configuration c = run(nca, w);
    std::size_t on = 0;
    for (const auto& t : c) on += t.state == 1;
    three = three || on >= 3;
  }
  CHECK((degree_at_least(nca, 1, 3) == Degree::Yes) == three);
  CHECK(degree_at_least(nca, 1, 3) == Degree::No);

  Nca wide = glushkov(norm(".*a{3}"));
  CHECK(degree_at_least(wide, 1, 3) == Degree::Yes);
  CHECK(degree_at_least(wide, 1, 4) == Degree::No);

  Nca pure = glushkov(norm(".*ab*c"));
  for (StateId q = 0; q < pure.state_count(); ++q) CHECK(degree_at_least(pure, q, 2) == Degree::No);
}

TEST_CASE("report JSON round-trip") {
  AmbiguityReport r = analyze(parse_or_throw(".*a{2}b{3}"), AnalysisMode::Exact);
  std::string line = report_to_json(".*a{2}b{3}", r);
  CHECK(line.find("\"verdict\":\"ambiguous\"") != std::string::npos);
  auto [regex, back] = report_from_json(line);
  CHECK(regex == ".*a{2}b{3}");
  REQUIRE(back.instances.size() == r.instances.size());
  for (std::size_t i = 0; i < r.instances.size(); ++i) {
    CHECK(back.instances[i].instance == r.instances[i].instance);
    CHECK(back.instances[i].verdict == r.instances[i].verdict);
    CHECK(back.instances[i].witness == r.instances[i].witness);
  }
  CHECK(back.verdict() == r.verdict());
}

TEST_CASE("properties on a random corpus") {
  std::mt19937 rng(99);
  oracle::GenOptions g;
  g.max_bound = 8;
  for (int i = 0; i < 300; ++i) {
    std::string text = oracle::random_regex(rng, g);
    CAPTURE(text);
    RegexAst ast = norm(text);
    Nca nca = glushkov(ast);
    AmbiguityReport exact = exact_ambiguity(nca);
    AmbiguityReport plain = exact_ambiguity(nca, ExactOptions{kDefaultBudget, {}, false});
    AmbiguityReport hybrid = hybrid_ambiguity(ast);
    REQUIRE(exact.instances.size() == plain.instances.size());

    bool approx_only = exact.instances.size() == 1;
    for (std::size_t k = 0; k < exact.instances.size(); ++k) {
      const InstanceVerdict& e = exact.instances[k];
      CHECK(plain.instances[k].verdict == e.verdict);
      InstanceVerdict a = approximate_ambiguity(ast, e.instance);
      approx_only = approx_only && a.verdict == Verdict::Unambiguous;
      if (exact.instances.size() == 1) CHECK(a.pairs_created == e.pairs_created);
      if (a.verdict == Verdict::Unambiguous) CHECK(e.verdict == Verdict::Unambiguous);
      CHECK(hybrid.instances[k].verdict == e.verdict);

      if (e.verdict == Verdict::Ambiguous) {
        REQUIRE(e.witness);
        CHECK(verify_witness(nca, *e.witness, e.instance).confirmed);
        // No shorter input exhibits the ambiguity.
        if (e.witness->size() <= 6) {
          for (const auto& w : oracle::all_strings("abcd", e.witness->size() - (e.witness->empty() ? 0 : 1)))
            if (w.size() < e.witness->size()) REQUIRE_FALSE(verify_witness(nca, w, e.instance).confirmed);
        }
      }
      if (e.verdict == Verdict::Unambiguous) {
        CounterId x = *nca.counter_of_instance(e.instance);
        for (int t = 0; t < 200; ++t) {
          std::string input = oracle::random_input(rng, "abcd", 24);
          Configuration c = initial_configuration(nca);
          for (char ch : input) {
            c = step(nca, c, static_cast<std::uint8_t>(ch));
            REQUIRE_FALSE(disagreement(nca, c, x));
          }
        }
      }
    }
    if (approx_only) CHECK(hybrid.pairs_created <= exact.pairs_created);
  }
}
