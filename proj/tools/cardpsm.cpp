// cardpsm: compile, verify, simulate and compare single-shuffle card protocols.

#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cardpsm.hpp"

namespace {

using namespace cardpsm;

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

struct FunctionArgs {
  std::string builtin;
  std::size_t n = 0;
  std::string table;

  bool given() const { return !builtin.empty() || !table.empty(); }

  FunctionSpec spec() const {
    if (!builtin.empty() && !table.empty()) throw Error(ErrorCode::invalid_argument, "give --builtin or --table, not both");
    if (!builtin.empty()) {
      if (n == 0) throw Error(ErrorCode::invalid_argument, "--builtin needs --n");
      return builtin_function(builtin, n);
    }
    const auto bits = parse_bits(table);
    std::size_t arity = 0;
    while ((std::size_t{1} << arity) < bits.size()) ++arity;
    if (n != 0 && n != arity) throw Error(ErrorCode::arity_mismatch, "--table length does not match --n");
    return make_function(arity, bits);
  }

  std::string name() const { return builtin.empty() ? "f=" + table : builtin + "_" + std::to_string(n); }

  void add_to(CLI::App& cmd) {
    cmd.add_option("--builtin", builtin, "named function")->check(CLI::IsMember({"and", "xor", "eq", "maj"}));
    cmd.add_option("--n", n, "arity of the builtin");
    cmd.add_option("--table", table, "truth table bits in lexicographic input order");
  }
};

// ---------------------------------------------------------------------------
// compile

struct CompileArgs {
  FunctionArgs function;
  std::string psm_path;
  std::string route;
  std::uint32_t modulus = 0;
  std::string out;
};

std::variant<PsmProtocol, AdditivePsm> load_psm(const std::string& path) {
  auto file = load_file(path);
  if (auto* p = std::get_if<PsmProtocol>(&file.body)) return *p;
  if (auto* a = std::get_if<AdditivePsm>(&file.body)) return *a;
  throw Error(ErrorCode::incompatible_route, "'" + path + "' is a " + file.kind() + " file, not a PSM");
}

/// Additive source for the fig4 route, or the general PSM for the thm routes.
std::variant<PsmProtocol, AdditivePsm> psm_source(const CompileArgs& args, bool want_additive) {
  if (!args.psm_path.empty()) return load_psm(args.psm_path);
  const auto f = args.function.spec();
  if (args.function.builtin == "and") {
    return and_additive_psm(f.n, args.modulus ? args.modulus : least_prime_above(f.n));
  }
  if (want_additive) throw Error(ErrorCode::incompatible_route, "fig4 needs an additive PSM; only builtin 'and' has one");
  return indicator_sum_psm(f, args.modulus ? args.modulus : least_prime_above(f.n));
}

CompiledArtifact compile(const CompileArgs& args) {
  if (args.psm_path.empty() && !args.function.given()) {
    throw Error(ErrorCode::invalid_argument, "compile needs --psm or a function (--builtin/--table)");
  }
  CompiledArtifact art;
  if (args.route == "fig5") {
    if (!args.psm_path.empty()) throw Error(ErrorCode::incompatible_route, "fig5 compiles a function, not a PSM");
    art = and_to_general(args.function.spec(), additive_and_factory(args.modulus));
  } else if (args.route == "fig4") {
    auto src = psm_source(args, true);
    const auto* a = std::get_if<AdditivePsm>(&src);
    if (!a) throw Error(ErrorCode::incompatible_route, "fig4 needs an additive PSM");
    art = additive_to_full_open(*a);
  } else {
    auto src = psm_source(args, false);
    const PsmProtocol p = std::holds_alternative<AdditivePsm>(src) ? to_general(std::get<AdditivePsm>(src))
                                                                   : std::get<PsmProtocol>(src);
    if (args.route == "thm1") art = psm_to_full_open(p);
    else if (args.route == "thm2") art = psm_to_static_open(p);
    else art = psm_to_adaptive(p);
  }
  if (args.function.given()) {
    const auto f = args.function.spec();
    art.provenance.function = args.function.name();
    art.provenance.function_table = table_string(f);
  }
  return art;
}

int cmd_compile(const CompileArgs& args) {
  const auto art = compile(args);
  if (!args.out.empty()) save_file(args.out, ProtocolFile{art});
  std::cout << "cards: " << card_count(art.protocol) << ", shuffles: " << tally(art.protocol.shuffle).str() << "\n";
  return exit_pass;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string path;
  FunctionArgs function;
  int tier = 2;
  std::uint64_t seed = 1;
  std::size_t cap = default_support_cap;
  std::size_t jobs = 1;
  bool allow_statistical = false;
};

struct LoadedProtocol {
  SingleShuffleProtocol protocol;
  std::optional<CompiledArtifact> artifact;
};

LoadedProtocol load_protocol(const std::string& path) {
  auto file = load_file(path);
  if (auto* a = std::get_if<CompiledArtifact>(&file.body)) return {a->protocol, *a};
  if (auto* p = std::get_if<SingleShuffleProtocol>(&file.body)) return {*p, std::nullopt};
  throw Error(ErrorCode::invalid_argument, "'" + path + "' is a PSM file; compile it first");
}

FunctionSpec target_function(const LoadedProtocol& loaded, const FunctionArgs& args) {
  if (args.given()) return args.spec();
  if (loaded.artifact && !loaded.artifact->provenance.function_table.empty()) {
    const auto bits = parse_bits(loaded.artifact->provenance.function_table);
    return make_function(loaded.protocol.n, bits);
  }
  throw Error(ErrorCode::invalid_argument, "no function recorded in the file; pass --builtin or --table");
}

int cmd_verify(const VerifyArgs& args) {
  const auto loaded = load_protocol(args.path);
  const auto f = target_function(loaded, args.function);
  VerifyPolicy policy;
  policy.max_tier = args.tier;
  policy.seed = args.seed;
  policy.cap = args.cap;
  policy.jobs = std::max<std::size_t>(1, args.jobs);

  std::vector<VerificationReport> reports{check_correctness(loaded.protocol, f, policy),
                                          check_privacy(loaded.protocol, f, policy)};
  if (loaded.artifact) reports.push_back(check_count_formulas(*loaded.artifact));

  bool ok = true;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    if (k) std::cout << "\n";
    std::cout << reports[k].text();
    if (!reports[k].passed() || (reports[k].statistical && !args.allow_statistical)) ok = false;
  }
  for (const auto& r : reports) {
    if (r.statistical && !args.allow_statistical) {
      std::cerr << "note: statistical pass only; add --allow-statistical to accept it\n";
      break;
    }
  }
  std::set<std::string> guidance;
  for (const auto& r : reports) {
    for (const auto& note : r.notes) {
      if (note.rfind("SupportTooLarge", 0) == 0) guidance.insert(note);
    }
  }
  for (const auto& note : guidance) std::cerr << note << "\n";
  std::cout << "\nresult: " << (ok ? "pass" : "fail") << "\n";
  return ok ? exit_pass : exit_fail;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string path;
  std::string input;
  std::uint64_t seed = 1;
};

std::string board_row(const std::vector<std::optional<Suit>>& board) {
  std::string row;
  for (const auto& s : board) row += s ? to_char(*s) : '?';
  return row;
}

int cmd_simulate(const SimulateArgs& args) {
  const auto loaded = load_protocol(args.path);
  const auto& p = loaded.protocol;
  const auto x = parse_bits(args.input);
  const auto start = initial_suits(p, x);
  const std::size_t degree = p.degree();

  std::cout << "input: " << bits_to_string(x) << "\n";
  std::cout << "cards: " << degree << "\n";
  std::cout << "initial layout:\n";
  std::size_t offset = 0;
  for (std::size_t i = 0; i < p.n; ++i) {
    const auto& t = p.input_tables[i][x[i]];
    std::cout << "  party " << i + 1 << " (x" << i + 1 << "=" << int(x[i]) << "): " << t.str() << "  @" << offset
              << "\n";
    offset += t.size();
  }
  if (!p.helper.empty()) std::cout << "  helper: " << p.helper.str() << "  @" << offset << "\n";
  std::cout << "face down: " << std::string(degree, '?') << "\n";

  Rng rng(args.seed);
  const auto outcome = sample(p.shuffle, rng);
  const auto result = run(p, x, outcome);
  std::cout << "shuffled (seed " << args.seed << "): " << std::string(degree, '?') << "\n";
  std::cout << "reveal (" << opening_name(p.reveal) << "):\n";
  RevealTranscript so_far;
  for (std::size_t k = 0; k < result.transcript.events.size(); ++k) {
    const auto& e = result.transcript.events[k];
    so_far.events.push_back(e);
    std::cout << "  " << k + 1 << ". position " << e.position << " -> " << to_char(e.suit) << "\n";
  }
  std::cout << "table: " << board_row(so_far.board(degree)) << "\n";
  std::cout << "output: " << int(result.output) << "\n";
  return exit_pass;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::vector<std::string>& paths) {
  struct Row {
    std::string function, opening, shuffle, cards;
  };
  std::vector<Row> rows;
  for (const auto& path : paths) {
    const auto loaded = load_protocol(path);
    Row r;
    r.opening = opening_name(loaded.protocol.reveal);
    r.cards = std::to_string(card_count(loaded.protocol));
    r.shuffle = tally(loaded.protocol.shuffle).str();
    if (loaded.artifact) {
      const auto& prov = loaded.artifact->provenance;
      r.function = !prov.function.empty() ? prov.function
                   : !prov.function_table.empty() ? "f=" + prov.function_table
                                                  : "?";
      if (!prov.predicted_tally.empty()) r.shuffle = prov.predicted_tally;
    } else {
      r.function = "?";
    }
    rows.push_back(std::move(r));
  }
  std::cout << "| Function | Opening | Shuffle | #cards |\n";
  std::cout << "|---|---|---|---|\n";
  for (const auto& r : rows) {
    std::cout << "| " << r.function << " | " << r.opening << " | " << r.shuffle << " | " << r.cards << " |\n";
  }
  return exit_pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-shuffle card protocols from PSM"};
  app.require_subcommand(1);

  CompileArgs compile_args;
  auto* compile_cmd = app.add_subcommand("compile", "compile a PSM or function into a card protocol");
  compile_args.function.add_to(*compile_cmd);
  compile_cmd->add_option("--psm", compile_args.psm_path, "PSM file (general or additive)");
  compile_cmd->add_option("--route", compile_args.route, "compiler route")
      ->required()
      ->check(CLI::IsMember({"thm1", "thm2", "thm3", "fig4", "fig5"}));
  compile_cmd->add_option("--modulus", compile_args.modulus, "prime modulus (default: least prime > n)");
  compile_cmd->add_option("--out", compile_args.out, "artifact path");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "check correctness, privacy and card counts");
  verify_cmd->add_option("artifact", verify_args.path)->required();
  verify_args.function.add_to(*verify_cmd);
  verify_cmd->add_option("--tier", verify_args.tier, "highest tier to use")->check(CLI::Range(1, 3));
  verify_cmd->add_option("--seed", verify_args.seed, "seed for tier 3 sampling");
  verify_cmd->add_option("--cap", verify_args.cap, "largest support enumerated exactly");
  verify_cmd->add_option("--jobs", verify_args.jobs, "worker threads");
  verify_cmd->add_flag("--allow-statistical", verify_args.allow_statistical, "accept tier 3 passes");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "run one execution and print the trace");
  sim_cmd->add_option("artifact", sim_args.path)->required();
  sim_cmd->add_option("--input", sim_args.input, "input bits, e.g. 11")->required();
  sim_cmd->add_option("--seed", sim_args.seed, "seed for the shuffle outcome");

  std::vector<std::string> report_paths;
  auto* report_cmd = app.add_subcommand("report", "compare compiled artifacts");
  report_cmd->add_option("artifacts", report_paths);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_pass : exit_usage;
  }

  try {
    if (*compile_cmd) return cmd_compile(compile_args);
    if (*verify_cmd) return cmd_verify(verify_args);
    if (*sim_cmd) return cmd_simulate(sim_args);
    return cmd_report(report_paths);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
}
