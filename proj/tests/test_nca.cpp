#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "oracle.hpp"
#include "recount/engine.hpp"
#include "recount/errors.hpp"
#include "recount/nca.hpp"

using namespace recount;

namespace {

Nca build(const char* text) { return glushkov(normalize(parse_or_throw(text))); }

const Transition* find_edge(const Nca& nca, StateId src, StateId dst) {
  for (const auto& t : nca.transitions)
    if (t.src == src && t.dst == dst) return &t;
  return nullptr;
}

std::vector<const Transition*> edges(const Nca& nca, StateId src, StateId dst) {
  std::vector<const Transition*> out;
  for (const auto& t : nca.transitions)
    if (t.src == src && t.dst == dst) out.push_back(&t);
  return out;
}

bool nca_accepts(const Nca& nca, std::string_view s) { return accepting(nca, run(nca, s)); }

}  // namespace

TEST_CASE("single literal") {
  Nca nca = build("a");
  REQUIRE(nca.state_count() == 2);
  CHECK_FALSE(nca.states[0].final);
  REQUIRE(nca.states[1].final);
  CHECK(nca.states[1].final->atoms.empty());
  CHECK(nca.counters.empty());
  check_structure(nca);
}

TEST_CASE(".*ab{n}: three states, counter on the last") {
  Nca nca = build(".*ab{7}");
  REQUIRE(nca.state_count() == 3);
  CHECK(nca.states[0].cls.is_universal());
  REQUIRE(find_edge(nca, 0, 0));
  CHECK(nca.states[1].counters.empty());
  REQUIRE(nca.states[2].counters.size() == 1);
  const Transition* loop = find_edge(nca, 2, 2);
  REQUIRE(loop);
  REQUIRE(loop->guard.atoms.size() == 1);
  CHECK(loop->guard.atoms[0].kind == AtomKind::Lt);
  CHECK(loop->guard.atoms[0].hi == 7);
  CHECK(loop->action.assigns[0].kind == ActionKind::Increment);
  const Transition* enter = find_edge(nca, 1, 2);
  REQUIRE(enter);
  CHECK(enter->action.assigns[0].kind == ActionKind::AssignConst);
  CHECK(enter->action.assigns[0].value == 1);
  REQUIRE(nca.states[2].final);
  REQUIRE(nca.states[2].final->atoms.size() == 1);
  CHECK(nca.states[2].final->atoms[0].kind == AtomKind::Eq);
  CHECK(nca.states[2].final->atoms[0].hi == 7);
  check_structure(nca);
}

TEST_CASE(".*w(xy){m,n}z: five states with the counter on the body") {
  Nca nca = build(".*w(xy){2,4}z");
  REQUIRE(nca.state_count() == 5);
  CHECK(nca.states[1].counters.empty());
  CHECK(nca.states[2].counters.size() == 1);
  CHECK(nca.states[3].counters.size() == 1);
  CHECK(nca.states[4].counters.empty());
  const Transition* exit = find_edge(nca, 3, 4);
  REQUIRE(exit);
  REQUIRE(exit->guard.atoms.size() == 1);
  CHECK(exit->guard.atoms[0].kind == AtomKind::Between);
  CHECK(exit->guard.atoms[0].lo == 2);
  CHECK(exit->guard.atoms[0].hi == 4);
  const Transition* again = find_edge(nca, 3, 2);
  REQUIRE(again);
  CHECK(again->guard.atoms[0].kind == AtomKind::Lt);
  CHECK(again->action.assigns[0].kind == ActionKind::Increment);
}

TEST_CASE("a{m}.*b{n}: four states") {
  Nca nca = build("a{3}.*b{4}");
  CHECK(nca.state_count() == 4);
  CHECK(nca.counters.size() == 2);
}

TEST_CASE("two nested counters") {
  // .*s1(s2(s3s4){m,n}s5){k}s6 with k = 5, m = 2, n = 3.
  RegexAst ast = normalize(parse_or_throw(".*a(b(cd){2,3}e){5}f"));
  Nca nca = glushkov(ast);
  REQUIRE(nca.state_count() == 7);
  auto inst = count_instances(ast);  // outer first
  CounterId x = *nca.counter_of_instance(inst[0].id);
  CounterId y = *nca.counter_of_instance(inst[1].id);
  CHECK(nca.counters[x].max == 5);
  CHECK(nca.counters[y].max == 3);
  CHECK(nca.states[2].counters == std::vector<CounterId>{x});
  CHECK(nca.states[3].counters == std::vector<CounterId>{x, y});
  CHECK(nca.states[4].counters == std::vector<CounterId>{x, y});
  CHECK(nca.states[5].counters == std::vector<CounterId>{x});
  CHECK(nca.states[6].counters.empty());

  // e -> b repeats the outer body: x < k, x++.
  const Transition* outer = find_edge(nca, 5, 2);
  REQUIRE(outer);
  REQUIRE(outer->guard.atoms.size() == 1);
  CHECK(outer->guard.atoms[0].counter == x);
  CHECK(outer->guard.atoms[0].kind == AtomKind::Lt);
  CHECK(outer->guard.atoms[0].hi == 5);
  CHECK(outer->action.assigns[0].kind == ActionKind::Increment);
  // b -> c enters the inner body: x copied, y := 1.
  const Transition* enter = find_edge(nca, 2, 3);
  REQUIRE(enter);
  CHECK(enter->action.assigns[0].kind == ActionKind::Copy);
  CHECK(enter->action.assigns[1].kind == ActionKind::AssignConst);
  CHECK(enter->action.assigns[1].value == 1);
  // d -> c: y < n, y++, x copied.
  const Transition* inner = find_edge(nca, 4, 3);
  REQUIRE(inner);
  CHECK(inner->action.assigns[0].kind == ActionKind::Copy);
  CHECK(inner->action.assigns[1].kind == ActionKind::Increment);
  // d -> e leaves the inner body: m <= y <= n.
  const Transition* leave = find_edge(nca, 4, 5);
  REQUIRE(leave);
  REQUIRE(leave->guard.atoms.size() == 1);
  CHECK(leave->guard.atoms[0].kind == AtomKind::Between);
  // e -> f exits the outer body with x = k.
  const Transition* done = find_edge(nca, 5, 6);
  REQUIRE(done);
  CHECK(done->guard.atoms[0].kind == AtomKind::Eq);
  CHECK(done->guard.atoms[0].hi == 5);
  check_structure(nca);

  CHECK(bound_of(nca, x) == 5);
  CHECK(bound_of(nca, y) == 3);
}

TEST_CASE("bound_of errors") {
  Nca pure = build("a");
  CHECK_THROWS_AS(bound_of(pure, 0), StructuralError);

  Nca broken = build("a{3}");
  for (auto& t : broken.transitions)
    if (t.src == t.dst) t.guard.atoms.clear();
  CHECK_THROWS_AS(bound_of(broken, 0), StructuralError);
  CHECK_THROWS_AS(check_structure(broken), StructuralError);
}

TEST_CASE("duplicate follow edges with different actions are kept") {
  // a -> a inside the body (copy) and around the repeat (increment).
  Nca nca = build("(a*b?){2,4}");
  bool copy = false, inc = false;
  for (const auto* t : edges(nca, 1, 1)) {
    copy = copy || t->action.assigns[0].kind == ActionKind::Copy;
    inc = inc || t->action.assigns[0].kind == ActionKind::Increment;
  }
  CHECK(copy);
  CHECK(inc);
}

TEST_CASE("language equivalence against the syntax-tree oracle") {
  std::mt19937 rng(2024);
  oracle::GenOptions g;
  g.max_classes = 5;
  g.max_bound = 6;
  g.alphabet = "ab";
  auto words = oracle::all_strings("ab", 10);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 120; ++i) {
    std::string text = oracle::random_regex(rng, g);
    CAPTURE(text);
    RegexAst ast = normalize(parse_or_throw(text));
    Nca nca = glushkov(ast);
    check_structure(nca);
    for (CounterId x = 0; x < nca.counters.size(); ++x) CHECK(bound_of(nca, x) == nca.counters[x].max);
    for (const auto& w : words) {
      CAPTURE(w);
      REQUIRE(nca_accepts(nca, w) == oracle::accepts(ast.root, w));
    }
    for (int k = 0; k < 500; ++k) {
      std::string w;
      int len = std::uniform_int_distribution<int>(0, 12)(rng);
      for (int j = 0; j < len; ++j) w += static_cast<char>(byte(rng));
      REQUIRE(nca_accepts(nca, w) == oracle::accepts(ast.root, w));
    }
  }
}

TEST_CASE("counting-free patterns have one state per class occurrence plus one") {
  std::mt19937 rng(5);
  oracle::GenOptions g;
  g.max_instances = 0;
  g.leading_any = 0;
  for (int i = 0; i < 300; ++i) {
    std::string text = oracle::random_regex(rng, g);
    CAPTURE(text);
    RegexAst ast = normalize(parse_or_throw(text));
    std::size_t classes = 0;
    std::function<void(const NodePtr&)> scan = [&](const NodePtr& n) {
      if (!n) return;
      classes += n->kind == NodeKind::Class;
      scan(n->left);
      scan(n->right);
    };
    scan(ast.root);
    Nca nca = glushkov(ast);
    // A leading `.*` on a non-nullable rest becomes the initial self-loop.
    bool absorbed = !nca.transitions.empty() && nca.transitions.front().src == 0 &&
                    nca.transitions.front().dst == 0;
    CHECK(nca.state_count() == classes + (absorbed ? 0 : 1));
  }
}

TEST_CASE("debug dumps") {
  Nca nca = build("a(bc){1,3}d");
  std::string table = dump_table(nca);
  CHECK(table.find("x0 instance 0 {1,3}") != std::string::npos);
  CHECK(table.find("1<=x0<=3") != std::string::npos);
  std::string dot = dump_dot(nca);
  CHECK(dot.rfind("digraph nca {", 0) == 0);
  CHECK(dot.find("q3 -> q2") != std::string::npos);
}
