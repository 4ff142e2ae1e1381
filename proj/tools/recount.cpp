// recount: counter-ambiguity analysis, matching, IR compilation and cost
// estimation for regexes with bounded repetition.

#include <pthread.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "recount/ambiguity.hpp"
#include "recount/cost.hpp"
#include "recount/engine.hpp"
#include "recount/errors.hpp"
#include "recount/ir.hpp"
#include "recount/ruleset.hpp"

using namespace recount;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kLimit = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path) {
  std::stringstream ss;
  if (path == "-") {
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

void print_events(const std::vector<MatchEvent>& events, const std::string& format) {
  if (format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : events) arr.push_back({{"rule", e.rule_id}, {"end", e.end_offset}});
    std::cout << arr.dump() << '\n';
    return;
  }
  for (const auto& e : events) std::cout << e.rule_id << '\t' << e.end_offset << '\n';
}

// Rejected rules go to stderr; they are data, not failures.
void report_rejected(const Ruleset& rs) {
  for (const auto& r : rs.rejected)
    std::cerr << rs.name << ':' << r.line << ": rejected (" << r.reason << "): " << r.text << '\n';
}

std::vector<std::string> expand_paths(const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file()) files.push_back(e.path().string());
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else if (fs::exists(p)) {
      out.push_back(p);
    } else {
      throw IoError("no such file or directory: " + p);
    }
  }
  return out;
}

struct Options {
  // analyze
  std::string regex;
  std::string ruleset;
  std::string mode = "hybrid";
  bool witness = false;
  std::uint64_t budget = kDefaultBudget;
  unsigned jobs = 1;
  // match / simulate / cost
  std::string input = "-";
  std::string backend = "reference";
  std::string format = "tsv";
  std::string cost_format = "json";
  std::uint32_t rule_id = 0;
  // compile
  std::uint64_t threshold = 0;
  bool force_unfold = false;
  std::string out;
  std::string ir_path;
  std::string trace_out;
  std::string params;
  // bench
  std::vector<std::string> rulesets;
  std::vector<std::uint64_t> thresholds{0, 8, 16, 32, 64, 128, 256};
  unsigned trials = 1;
  unsigned warmup = 0;
  bool csv = false;
};

int cmd_analyze(const Options& o) {
  AnalysisMode mode = mode_from_name(o.mode);
  Ruleset rs;
  if (!o.ruleset.empty()) {
    rs = parse_ruleset(read_input(o.ruleset), o.ruleset);
    report_rejected(rs);
  } else {
    rs.rules.push_back({0, o.regex, 0, "", parse_or_throw(o.regex)});
  }
  std::vector<std::string> lines(rs.rules.size());
  parallel_for(rs.rules.size(), o.jobs, [&](std::size_t i) {
    AmbiguityReport r = analyze(rs.rules[i].ast, mode, o.budget);
    lines[i] = report_to_json(rs.rules[i].regex, r, o.witness);
  });
  for (const auto& l : lines) std::cout << l << '\n';
  return kOk;
}

int cmd_match(const Options& o) {
  RegexAst ast = parse_or_throw(o.regex);
  std::string input = read_input(o.input);
  Backend b = backend_from_name(o.backend);
  std::vector<MatchEvent> events;
  try {
    events = match_stream(ast, input, b, o.rule_id);
  } catch (const FallbackRequired& e) {
    std::cerr << "optimized backend unavailable (" << e.what() << "); using reference\n";
    events = match_stream(ast, input, Backend::Reference, o.rule_id);
  }
  print_events(events, o.format);
  return kOk;
}

int cmd_compile(const Options& o) {
  CompileOptions opts{o.threshold, o.force_unfold, o.budget};
  AutomatonIr ir = compile(o.regex, opts);
  for (const auto& p : ir.metadata.placements)
    if (!p.reason.empty() && p.reason != "below threshold" && p.reason != "forced")
      std::cerr << "instance " << p.instance << " {" << p.min << ',' << p.max << "} unfolded: " << p.reason << '\n';
  write_output(o.out, emit_json(ir));
  return kOk;
}

nlohmann::json trace_json(const ActivityTrace& t) {
  return {{"cycles", t.cycles}, {"activity", t.activity}};
}

int cmd_simulate(const Options& o) {
  AutomatonIr ir = load_json(read_input(o.ir_path));
  SimulationResult r = simulate_ir(ir, read_input(o.input), o.rule_id);
  print_events(r.events, o.format);
  if (!o.trace_out.empty()) write_output(o.trace_out, trace_json(r.trace).dump(2) + "\n");
  return kOk;
}

int cmd_cost(const Options& o) {
  CostParams params = o.params.empty() ? CostParams{} : parse_params(read_input(o.params));
  AutomatonIr ir = load_json(read_input(o.ir_path));
  SimulationResult r = simulate_ir(ir, read_input(o.input));
  CostReport report = estimate(ir, r.trace, params);
  std::cout << (o.cost_format == "table" ? report_to_table(report) : report_to_json(report));
  return kOk;
}

int cmd_bench(const Options& o) {
  BenchOptions opts;
  opts.mode = mode_from_name(o.mode);
  opts.budget = o.budget;
  opts.thresholds = o.thresholds;
  opts.trials = o.trials;
  opts.warmup = o.warmup;
  opts.jobs = o.jobs;
  std::vector<BenchStats> all;
  for (const auto& path : expand_paths(o.rulesets)) {
    Ruleset rs = load_ruleset(path);
    report_rejected(rs);
    BenchStats s = bench(rs, opts);
    for (const auto& r : s.rules)
      if (!r.error.empty()) std::cerr << rs.name << ": rule " << r.id << ": " << r.error << '\n';
    all.push_back(std::move(s));
  }
  if (o.csv) {
    std::cout << bench_csv_header();
    for (const auto& s : all) std::cout << bench_csv_row(s);
    std::cout << '\n' << node_count_csv(all);
  } else {
    std::cout << bench_table(all) << '\n';
    for (const auto& s : all) {
      std::cout << s.name << " nodes by unfolding threshold:";
      for (const auto& [k, n] : s.node_counts) std::cout << ' ' << k << '=' << n;
      std::cout << '\n';
      for (const auto& [reason, n] : s.rejected_by_reason) std::cout << "  rejected (" << reason << "): " << n << '\n';
    }
  }
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Counter-ambiguity analysis and matching for regexes with bounded repetition"};
  app.require_subcommand(1);
  Options o;

  auto* analyze = app.add_subcommand("analyze", "Decide counter-ambiguity per repetition instance (JSON lines)");
  auto* src = analyze->add_option("regex", o.regex, "Pattern");
  analyze->add_option("--ruleset", o.ruleset, "Ruleset file ('-' for stdin)")->excludes(src);
  analyze->add_option("--mode", o.mode, "exact, approx or hybrid")->check(CLI::IsMember({"exact", "approx", "hybrid"}));
  analyze->add_flag("--witness", o.witness, "Include witness strings");
  analyze->add_option("--budget", o.budget, "Token-pair budget per analysis");
  analyze->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* match = app.add_subcommand("match", "Report every matching prefix end");
  match->add_option("regex", o.regex, "Pattern")->required();
  match->add_option("input", o.input, "Input file ('-' for stdin)");
  match->add_option("--backend", o.backend)->check(CLI::IsMember({"reference", "optimized", "unfolded"}));
  match->add_option("--format", o.format)->check(CLI::IsMember({"tsv", "json"}));
  match->add_option("--rule-id", o.rule_id);

  auto* compile_cmd = app.add_subcommand("compile", "Compile to the automaton IR (JSON)");
  compile_cmd->add_option("regex", o.regex, "Pattern")->required();
  compile_cmd->add_option("--threshold", o.threshold, "Unfold repetitions with max <= threshold");
  compile_cmd->add_flag("--force-unfold", o.force_unfold, "Unfold every repetition");
  compile_cmd->add_option("--budget", o.budget);
  compile_cmd->add_option("--out", o.out, "Output file (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Run an IR file over an input");
  simulate->add_option("ir", o.ir_path, "IR JSON file")->required();
  simulate->add_option("input", o.input, "Input file ('-' for stdin)");
  simulate->add_option("--format", o.format)->check(CLI::IsMember({"tsv", "json"}));
  simulate->add_option("--trace", o.trace_out, "Write the activity trace as JSON");
  simulate->add_option("--rule-id", o.rule_id);

  auto* cost = app.add_subcommand("cost", "Estimate energy and area of an IR on an input");
  cost->add_option("ir", o.ir_path, "IR JSON file")->required();
  cost->add_option("input", o.input, "Input file ('-' for stdin)");
  cost->add_option("--params", o.params, "key = value parameter file");
  cost->add_option("--format", o.cost_format)->check(CLI::IsMember({"json", "table"}));

  auto* bench_cmd = app.add_subcommand("bench", "Ruleset statistics and node counts per threshold");
  bench_cmd->add_option("rulesets", o.rulesets, "Ruleset files or directories")->required();
  bench_cmd->add_option("--mode", o.mode)->check(CLI::IsMember({"exact", "approx", "hybrid"}));
  bench_cmd->add_option("--budget", o.budget);
  bench_cmd->add_option("--threshold", o.thresholds, "Unfolding thresholds")->delimiter(',');
  bench_cmd->add_option("--trials", o.trials)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--warmup", o.warmup);
  bench_cmd->add_option("--jobs", o.jobs)->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--csv", o.csv, "CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (analyze->parsed() && o.regex.empty() && o.ruleset.empty()) {
    std::cerr << "analyze: give a regex or --ruleset\n";
    return kUsage;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(o);
    if (match->parsed()) return cmd_match(o);
    if (compile_cmd->parsed()) return cmd_compile(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (cost->parsed()) return cmd_cost(o);
    if (bench_cmd->parsed()) return cmd_bench(o);
  } catch (const SyntaxError& e) {
    std::cerr << "syntax error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const IrError& e) {
    std::cerr << "invalid IR: " << e.what() << '\n';
    return kIo;
  } catch (const SizeLimitError& e) {
    std::cerr << "limit: " << e.what() << '\n';
    return kLimit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}

struct Args {
  int argc;
  char** argv;
  int code;
};

}  // namespace

int main(int argc, char** argv) {
  // Parsing and unfolding recurse on the pattern tree; give them room.
  Args args{argc, argv, 0};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, 512u << 20);
  pthread_t th;
  auto body = [](void* p) -> void* {
    auto* a = static_cast<Args*>(p);
    a->code = run(a->argc, a->argv);
    return nullptr;
  };
  if (pthread_create(&th, &attr, body, &args) != 0) return run(argc, argv);
  pthread_join(th, nullptr);
  pthread_attr_destroy(&attr);
  return args.code;
}
