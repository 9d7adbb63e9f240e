#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "cardpsm/mutants.hpp"
#include "cardpsm/serialize.hpp"

using namespace cardpsm;
namespace fs = std::filesystem;

namespace {

struct Result {
  int exit = -1;
  std::string out;
};

// Runs the CLI with the given arguments. stderr is folded into the output
// when `merge` is set.
Result cli(const std::string& args, bool merge = false) {
  std::string cmd = std::string(CARDPSM_CLI) + " " + args + (merge ? " 2>&1" : " 2>/dev/null");
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (auto n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

bool has(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

std::string last_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  return last;
}

class Cli : public testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(fs::path(testing::TempDir()) / "cardpsm_cli");
    fs::create_directories(*dir_);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }
  static std::string path(const std::string& name) { return (*dir_ / name).string(); }

  static fs::path* dir_;
};

fs::path* Cli::dir_ = nullptr;

}  // namespace

TEST_F(Cli, CompileAdditiveAnd) {
  const auto r = cli("compile --builtin and --n 2 --route fig4 --out " + path("fig4.json"));
  EXPECT_EQ(r.exit, 0);
  EXPECT_EQ(r.out, "cards: 6, shuffles: PSh×2\n");
  EXPECT_EQ(std::get<CompiledArtifact>(load_file(path("fig4.json")).body).provenance.function, "and_2");
}

TEST_F(Cli, CompileEveryRoute) {
  EXPECT_EQ(cli("compile --builtin and --n 2 --route thm1 --out " + path("t1.json")).out,
            "cards: 48, shuffles: PSh×1 & CS×1\n");
  EXPECT_TRUE(has(cli("compile --builtin and --n 2 --route thm2 --out " + path("t2.json")).out, "cards: 48"));
  EXPECT_EQ(cli("compile --builtin and --n 2 --route thm3 --out " + path("t3.json")).out, "cards: 72, shuffles: RC×1\n");
  EXPECT_EQ(cli("compile --builtin maj --n 3 --route fig5 --out " + path("maj.json")).out,
            "cards: 60, shuffles: PSh×12 & PSc×1\n");
}

TEST_F(Cli, CompileRejectsCompositeModulus) {
  const auto r = cli("compile --builtin and --n 2 --route fig4 --modulus 4", true);
  EXPECT_EQ(r.exit, 2);
  EXPECT_TRUE(has(r.out, "NotPrime")) << r.out;
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("compile --builtin and --n 2 --route riffle").exit, 2);
  EXPECT_EQ(cli("").exit, 2);
  EXPECT_EQ(cli("verify " + path("missing.json")).exit, 2);
}

TEST_F(Cli, VerifyPassesAdditiveAnd) {
  cli("compile --builtin and --n 2 --route fig4 --out " + path("v.json"));
  const auto r = cli("verify " + path("v.json"));
  EXPECT_EQ(r.exit, 0) << r.out;
  EXPECT_TRUE(has(r.out, "tier: 1"));
  EXPECT_EQ(last_line(r.out), "result: pass");
}

TEST_F(Cli, VerifyRejectsMutantWithCounterexample) {
  save_file(path("mutant.json"), {mutants::corrupted_coset()});
  const auto r = cli("verify " + path("mutant.json") + " --builtin and --n 2");
  EXPECT_EQ(r.exit, 1);
  EXPECT_TRUE(has(r.out, "counterexample: ")) << r.out;
  EXPECT_EQ(last_line(r.out), "result: fail");
}

TEST_F(Cli, OversizedAtTierOneSuggestsTierThree) {
  cli("compile --builtin and --n 2 --route thm1 --out " + path("big.json"));
  const auto r = cli("verify " + path("big.json") + " --tier 1", true);
  EXPECT_EQ(r.exit, 1);
  EXPECT_TRUE(has(r.out, "SupportTooLarge")) << r.out;
  EXPECT_TRUE(has(r.out, "--tier 3"));
}

TEST_F(Cli, SimulateAdditiveAnd) {
  cli("compile --builtin and --n 2 --route fig4 --out " + path("s.json"));
  const auto r = cli("simulate " + path("s.json") + " --input 11 --seed 7");
  EXPECT_EQ(r.exit, 0);
  EXPECT_TRUE(has(r.out, "input: 11\ncards: 6\n"));
  EXPECT_TRUE(has(r.out, "face down: ??????\n"));
  EXPECT_EQ(last_line(r.out), "output: 1");
  EXPECT_EQ(cli("simulate " + path("s.json") + " --input 11 --seed 7").out, r.out);
  EXPECT_EQ(last_line(cli("simulate " + path("s.json") + " --input 01 --seed 3").out), "output: 0");
}

TEST_F(Cli, SimulateIdentityShuffleShowsHandLayout) {
  SingleShuffleProtocol p;
  p.n = 2;
  p.input_tables = {{SuitString::parse("ch"), SuitString::parse("hc")}, {SuitString::parse("ch"), SuitString::parse("hc")}};
  p.helper = SuitString::parse("hc");
  p.shuffle = identity_shuffle(6);
  p.reveal = RevealFull{};
  p.output = OutputMap{PsmDecode{FixedPositions{{0, 1, 2, 3}}, DecodeTable{{{"00", 0}, {"01", 0}, {"10", 0}, {"11", 1}}}}};
  save_file(path("hand.json"), {p});
  const auto r = cli("simulate " + path("hand.json") + " --input 10");
  EXPECT_EQ(r.exit, 0);
  EXPECT_TRUE(has(r.out, "  party 1 (x1=1): hc  @0\n  party 2 (x2=0): ch  @2\n  helper: hc  @4\n")) << r.out;
  EXPECT_TRUE(has(r.out, "  1. position 0 -> h\n  2. position 1 -> c\n"));
  EXPECT_TRUE(has(r.out, "table: hcchhc\n"));
  EXPECT_EQ(last_line(r.out), "output: 0");
}

TEST_F(Cli, SimulateAdaptiveStopsEarly) {
  cli("compile --builtin and --n 2 --route thm3 --out " + path("ad.json"));
  const auto r = cli("simulate " + path("ad.json") + " --input 11 --seed 5");
  EXPECT_EQ(r.exit, 0);
  EXPECT_TRUE(has(r.out, "reveal (adaptive-open)")) << r.out;
  EXPECT_TRUE(has(r.out, "  1. position 0 -> "));
  EXPECT_FALSE(has(r.out, "  72. position"));  // never opens the whole row
  EXPECT_EQ(last_line(r.out), "output: 1");
}

TEST_F(Cli, ReportTable) {
  cli("compile --builtin and --n 2 --route fig4 --out " + path("r1.json"));
  cli("compile --builtin and --n 2 --route thm1 --out " + path("r2.json"));
  cli("compile --builtin and --n 2 --route thm3 --out " + path("r3.json"));
  cli("compile --builtin maj --n 3 --route fig5 --out " + path("r4.json"));
  const auto r = cli("report " + path("r1.json") + " " + path("r2.json") + " " + path("r3.json") + " " +
                     path("r4.json"));
  EXPECT_EQ(r.exit, 0);
  EXPECT_TRUE(has(r.out, "| Function | Opening | Shuffle | #cards |\n|---|---|---|---|\n"));
  EXPECT_TRUE(has(r.out, "| 6 |\n"));
  EXPECT_TRUE(has(r.out, "| 48 |\n"));
  EXPECT_TRUE(has(r.out, "| 72 |\n"));
  EXPECT_TRUE(has(r.out, "full-open | PSh×12 & PSc×1 | 60 |")) << r.out;
  EXPECT_EQ(cli("report").out, "| Function | Opening | Shuffle | #cards |\n|---|---|---|---|\n");
}

TEST_F(Cli, MalformedFileReportsPosition) {
  write_text(path("bad.json"), "{\n  \"format_version\": 1,\n  \"kind\": ]\n}\n");
  const auto r = cli("verify " + path("bad.json"), true);
  EXPECT_EQ(r.exit, 2);
  EXPECT_TRUE(has(r.out, "line 3, column 11")) << r.out;
}
