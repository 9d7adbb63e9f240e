#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

namespace cardpsm {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Outcome of one check. A Tier-3 pass is statistical and never a proof.
struct VerificationReport {
  std::string check;
  Verdict verdict = Verdict::pass;
  int tier = 1;
  bool statistical = false;
  std::vector<std::string> counterexamples;
  std::map<std::string, std::string> metrics;
  std::vector<std::string> notes;
  std::chrono::microseconds runtime{0};

  bool passed() const noexcept { return verdict == Verdict::pass; }

  void fail(std::string counterexample) {
    verdict = Verdict::fail;
    counterexamples.push_back(std::move(counterexample));
  }

  /// Deterministic text form; runtime is omitted unless asked for.
  std::string text(bool with_runtime = false) const {
    std::string out;
    out += "check: " + check + "\n";
    out += "verdict: " + std::string(to_string(verdict)) + (statistical ? " (statistical)" : "") + "\n";
    out += "tier: " + std::to_string(tier) + "\n";
    for (const auto& [k, v] : metrics) out += "metric " + k + ": " + v + "\n";
    for (const auto& n : notes) out += "note: " + n + "\n";
    for (const auto& c : counterexamples) out += "counterexample: " + c + "\n";
    if (with_runtime) out += "runtime_us: " + std::to_string(runtime.count()) + "\n";
    return out;
  }
};

/// Caps how many counterexamples a report lists; the rest are only counted.
inline constexpr std::size_t max_listed_counterexamples = 8;

}  // namespace cardpsm
