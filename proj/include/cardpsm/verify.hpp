#pragma once

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "function.hpp"
#include "protocol.hpp"
#include "random.hpp"
#include "report.hpp"
#include "shuffle.hpp"
#include "transform.hpp"

namespace cardpsm {

struct VerifyPolicy {
  int max_tier = 2;
  std::optional<int> force_tier;  // run exactly this tier (cross-validation)
  std::size_t cap = default_support_cap;
  std::size_t orbit_samples = 32;
  std::size_t samples = 100'000;
  double tv_threshold = 0.01;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

// ---------------------------------------------------------------------------
// Canonical states

/// Revealed data with the symmetrized region replaced by an order-free summary.
struct CanonicalState {
  RevealTranscript fixed_events;
  std::vector<std::string> region_summaries;  // sorted

  friend bool operator==(const CanonicalState&, const CanonicalState&) = default;
  friend auto operator<=>(const CanonicalState&, const CanonicalState&) = default;

  std::string str() const {
    std::string out = fixed_events.str() + " |";
    for (const auto& s : region_summaries) out += " " + s;
    return out;
  }
};

using CanonicalDistribution = std::map<CanonicalState, Rational>;

/// Trailing uniform symmetrizer of a shuffle tree and everything before it.
struct Symmetrizer {
  enum class Kind { none, complete, scramble };
  Kind kind = Kind::none;
  PileSpec piles;  // singleton piles for a complete shuffle
  std::vector<Shuffle> prefix;

  std::vector<Position> region() const { return piles.positions(); }
};

inline Symmetrizer analyze(const Shuffle& s) {
  Symmetrizer out;
  out.prefix = flatten(s);
  if (out.prefix.empty()) return out;
  const auto& last = out.prefix.back().node();
  if (const auto* c = std::get_if<Complete>(&last)) {
    out.kind = Symmetrizer::Kind::complete;
    out.piles = PileSpec::singletons(c->region);
    out.prefix.pop_back();
  } else if (const auto* ps = std::get_if<PileScramble>(&last)) {
    out.kind = Symmetrizer::Kind::scramble;
    out.piles = ps->piles;
    out.prefix.pop_back();
  }
  return out;
}

inline Shuffle prefix_shuffle(const Symmetrizer& sym, std::size_t degree) {
  if (sym.prefix.empty()) return identity_shuffle(degree);
  return compose(sym.prefix);
}

/// Canonical form of a fully opened table.
inline CanonicalState canonicalize(const SuitString& table, const Symmetrizer& sym) {
  CanonicalState st;
  std::vector<bool> in_region(table.size(), false);
  for (Position p : sym.region()) in_region[p] = true;
  for (Position p = 0; p < table.size(); ++p) {
    if (!in_region[p]) st.fixed_events.events.push_back({p, table[p]});
  }
  if (sym.kind == Symmetrizer::Kind::complete) {
    std::string suits;
    for (Position p : sym.region()) suits.push_back(to_char(table[p]));
    std::sort(suits.begin(), suits.end());
    st.region_summaries.push_back(std::move(suits));
  } else if (sym.kind == Symmetrizer::Kind::scramble) {
    for (const auto& pile : sym.piles.piles) {
      std::string content;
      for (Position p : pile) content.push_back(to_char(table[p]));
      st.region_summaries.push_back(std::move(content));
    }
    std::sort(st.region_summaries.begin(), st.region_summaries.end());
  }
  return st;
}

/// Canonical image of a raw full-open distribution.
inline CanonicalDistribution canonicalize(const StateDistribution& raw, const Symmetrizer& sym, std::size_t degree) {
  CanonicalDistribution out;
  for (const auto& [t, pr] : raw.entries) {
    const auto board = t.board(degree);
    SuitString table;
    for (const auto& s : board) {
      if (!s) throw Error(ErrorCode::invalid_argument, "canonical form needs a fully opened transcript");
      table.push_back(*s);
    }
    out[canonicalize(table, sym)] += pr;
  }
  return out;
}

/// Raw full-open distribution implied by a canonical one: the summarized
/// region is uniform over the distinct arrangements of its multiset.
inline StateDistribution reconstruct_raw(const CanonicalDistribution& canonical, const Symmetrizer& sym,
                                         std::size_t degree) {
  StateDistribution out;
  for (const auto& [st, pr] : canonical) {
    std::vector<std::optional<Suit>> base(degree);
    for (const auto& e : st.fixed_events.events) base.at(e.position) = e.suit;
    std::vector<std::string> items;
    if (sym.kind == Symmetrizer::Kind::complete) {
      for (char ch : st.region_summaries.at(0)) items.emplace_back(1, ch);
    } else if (sym.kind == Symmetrizer::Kind::scramble) {
      items = st.region_summaries;
    }
    std::sort(items.begin(), items.end());
    std::vector<std::vector<std::string>> arrangements;
    do {
      arrangements.push_back(items);
    } while (std::next_permutation(items.begin(), items.end()));
    const Rational share = pr / Rational(arrangements.size());
    for (const auto& arr : arrangements) {
      auto board = base;
      for (std::size_t j = 0; j < arr.size(); ++j) {
        const auto& pile = sym.piles.piles.at(j);
        for (std::size_t k = 0; k < pile.size(); ++k) board[pile[k]] = arr[j][k] == 'h' ? Suit::heart : Suit::club;
      }
      RevealTranscript t;
      for (Position p = 0; p < degree; ++p) {
        if (!board[p]) throw Error(ErrorCode::invalid_argument, "canonical state leaves a position empty");
        t.events.push_back({p, *board[p]});
      }
      out.entries[t] += share;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Helpers

namespace detail {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads; results are
/// stored by index so the schedule never affects the output.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += jobs) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::string perm_text(const Permutation& p) {
  std::string out = "[";
  for (std::size_t i = 0; i < p.degree(); ++i) out += (i ? " " : "") + std::to_string(p(static_cast<Position>(i)));
  return out + "]";
}

inline std::string output_text(const SingleShuffleProtocol& p, const RevealTranscript& t) {
  try {
    return std::to_string(evaluate(p.output, t, p.degree()));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::output_undefined) throw;
    return "undefined";
  }
}

template <typename Key>
std::string distinguishing(const std::map<Key, Rational>& a, const std::map<Key, Rational>& b,
                           const std::function<std::string(const Key&)>& show) {
  for (const auto* d : {&a, &b}) {
    for (const auto& [k, pr] : *d) {
      const Rational pa = a.count(k) ? a.at(k) : Rational(0);
      const Rational pb = b.count(k) ? b.at(k) : Rational(0);
      if (pa != pb) return "'" + show(k) + "' has " + to_string(pa) + " vs " + to_string(pb);
    }
  }
  return "";
}

/// Same-output pairs (representative, other) in lexicographic order.
inline std::vector<std::pair<std::size_t, std::size_t>> privacy_pairs(const FunctionSpec& f) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::uint8_t v = 0; v < 2; ++v) {
    std::optional<std::size_t> rep;
    for (std::size_t idx = 0; idx < f.input_count(); ++idx) {
      if (f(idx) != v) continue;
      if (!rep) rep = idx;
      else out.emplace_back(*rep, idx);
    }
  }
  return out;
}

inline void add_common_metrics(VerificationReport& r, const SingleShuffleProtocol& p) {
  r.metrics["cards"] = std::to_string(card_count(p));
  r.metrics["shuffle"] = tally(p.shuffle).str();
  r.metrics["opening"] = opening_name(p.reveal);
}

inline void check_arity(const SingleShuffleProtocol& p, const FunctionSpec& f) {
  if (p.n != f.n) {
    throw Error(ErrorCode::arity_mismatch, "protocol has " + std::to_string(p.n) + " parties, function arity " +
                                               std::to_string(f.n));
  }
}

struct Recorder {
  VerificationReport& report;
  std::size_t count = 0;
  void operator()(std::string text) {
    ++count;
    if (report.counterexamples.size() < max_listed_counterexamples) report.fail(std::move(text));
    else report.verdict = Verdict::fail;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Tier 1: exhaustive enumeration

inline VerificationReport correctness_tier1(const SingleShuffleProtocol& p, const FunctionSpec& f,
                                            const VerifyPolicy& policy) {
  VerificationReport r;
  r.check = "correctness";
  r.tier = 1;
  const auto dist = support(p.shuffle, policy.cap);
  std::vector<std::vector<std::string>> found(f.input_count());
  detail::parallel_for(f.input_count(), policy.jobs, [&](std::size_t idx) {
    const Bits x = input_bits(idx, f.n);
    const auto start = initial_suits(p, x);
    for (const auto& [perm, pr] : dist.outcomes) {
      const auto got = detail::output_text(p, reveal(p.reveal, apply(perm, start)));
      if (got != std::to_string(f(idx))) {
        found[idx].push_back("x=" + bits_to_string(x) + " outcome=" + detail::perm_text(perm) + " output=" + got +
                             " expected=" + std::to_string(f(idx)));
      }
    }
  });
  detail::Recorder record{r};
  for (auto& list : found) {
    for (auto& c : list) record(std::move(c));
  }
  r.metrics["support"] = std::to_string(dist.size());
  r.metrics["runs"] = std::to_string(dist.size() * f.input_count());
  r.metrics["violations"] = std::to_string(record.count);
  return r;
}

inline VerificationReport privacy_tier1(const SingleShuffleProtocol& p, const FunctionSpec& f,
                                        const VerifyPolicy& policy) {
  VerificationReport r;
  r.check = "privacy";
  r.tier = 1;
  const auto dist = support(p.shuffle, policy.cap);
  std::vector<StateDistribution> states(f.input_count());
  detail::parallel_for(f.input_count(), policy.jobs,
                       [&](std::size_t idx) { states[idx] = enumerate_states(p, input_bits(idx, f.n), dist); });
  detail::Recorder record{r};
  const auto pairs = detail::privacy_pairs(f);
  for (const auto& [a, b] : pairs) {
    if (states[a] == states[b]) continue;
    record("x=" + bits_to_string(input_bits(a, f.n)) + " vs x'=" + bits_to_string(input_bits(b, f.n)) +
           ": transcript " +
           detail::distinguishing<RevealTranscript>(states[a].entries, states[b].entries,
                                                    [](const RevealTranscript& t) { return t.str(); }));
  }
  r.metrics["support"] = std::to_string(dist.size());
  r.metrics["pairs"] = std::to_string(pairs.size());
  std::size_t distinct = 0;
  for (const auto& s : states) distinct = std::max(distinct, s.entries.size());
  r.metrics["max_states"] = std::to_string(distinct);
  return r;
}

// ---------------------------------------------------------------------------
// Tier 2: canonical and factored enumeration

namespace detail {

/// The output map provably ignores how the symmetrizer arranges its region.
inline bool output_invariant(const SingleShuffleProtocol& p, const Symmetrizer& sym) {
  if (sym.kind == Symmetrizer::Kind::none) return true;
  if (const auto reads = read_positions(p.output)) {
    const auto region = sym.region();
    const std::set<Position> in(region.begin(), region.end());
    return std::none_of(reads->begin(), reads->end(), [&](Position q) { return in.count(q) > 0; });
  }
  if (const auto* bu = std::get_if<BlockUnique>(&p.output.rule)) {
    return sym.kind == Symmetrizer::Kind::scramble &&
           sym.piles == PileSpec::contiguous(0, bu->blocks, bu->block_size) && p.degree() == bu->blocks * bu->block_size;
  }
  return false;
}

/// Factored view: leading deterministic rearrangement, then independent
/// sub-shuffles each confined to one scramble pile.
struct Factored {
  Permutation lead;
  std::vector<std::vector<Shuffle>> per_pile;
};

inline std::optional<Factored> factor(const Symmetrizer& sym, std::size_t degree) {
  if (sym.kind != Symmetrizer::Kind::scramble) return std::nullopt;
  Factored out;
  out.lead = Permutation::identity(degree);
  out.per_pile.resize(sym.piles.count());
  std::vector<std::size_t> owner(degree, SIZE_MAX);
  for (std::size_t j = 0; j < sym.piles.count(); ++j) {
    for (Position q : sym.piles.piles[j]) owner[q] = j;
  }
  std::size_t k = 0;
  for (; k < sym.prefix.size(); ++k) {
    const auto* d = std::get_if<Deterministic>(&sym.prefix[k].node());
    if (!d) break;
    out.lead = then(out.lead, d->perm);
  }
  for (; k < sym.prefix.size(); ++k) {
    const auto touched = touched_positions(sym.prefix[k]);
    if (touched.empty()) continue;
    const std::size_t j = owner[touched.front()];
    if (j == SIZE_MAX) return std::nullopt;
    for (Position q : touched) {
      if (owner[q] != j) return std::nullopt;
    }
    out.per_pile[j].push_back(sym.prefix[k]);
  }
  return out;
}

inline bool full_open(const SingleShuffleProtocol& p) { return std::holds_alternative<RevealFull>(p.reveal); }

}  // namespace detail

/// Tier 2 applies to full-open protocols whose prefix (before a trailing
/// complete shuffle or pile-scramble) is enumerable, either whole or per pile.
inline std::string tier2_mode(const SingleShuffleProtocol& p, std::size_t cap) {
  const auto sym = analyze(p.shuffle);
  if (sym.kind != Symmetrizer::Kind::none && !detail::full_open(p)) return "";
  if (estimated_support_size(prefix_shuffle(sym, p.degree())) <= cap) return "canonical";
  if (const auto fac = detail::factor(sym, p.degree())) {
    for (const auto& parts : fac->per_pile) {
      if (!parts.empty() && estimated_support_size(compose(parts)) > cap) return "";
    }
    return "factored";
  }
  return "";
}

/// Canonical distribution of the opened table on input x (canonical mode).
inline CanonicalDistribution canonical_states(const SingleShuffleProtocol& p, const Bits& x,
                                              const OutcomeDistribution& prefix_support, const Symmetrizer& sym) {
  CanonicalDistribution out;
  const auto start = initial_suits(p, x);
  for (const auto& [perm, pr] : prefix_support.outcomes) {
    const auto table = apply(perm, start);
    if (sym.kind == Symmetrizer::Kind::none) {
      // no symmetrizer: the canonical state is the raw transcript
      out[CanonicalState{reveal(p.reveal, table), {}}] += pr;
    } else {
      out[canonicalize(table, sym)] += pr;
    }
  }
  return out;
}

inline VerificationReport correctness_tier2(const SingleShuffleProtocol& p, const FunctionSpec& f,
                                            const VerifyPolicy& policy) {
  VerificationReport r;
  r.check = "correctness";
  r.tier = 2;
  const auto mode = tier2_mode(p, policy.cap);
  if (mode.empty()) {
    r.verdict = Verdict::inconclusive;
    r.notes.push_back("tier 2 does not apply to this shuffle structure");
    return r;
  }
  const auto sym = analyze(p.shuffle);
  const std::size_t degree = p.degree();
  r.metrics["mode"] = mode;
  detail::Recorder record{r};

  if (mode == "factored") {
    const auto* bu = std::get_if<BlockUnique>(&p.output.rule);
    if (!bu || !detail::output_invariant(p, sym)) {
      r.verdict = Verdict::inconclusive;
      r.notes.push_back("factored correctness needs a per-block output rule aligned with the scrambled piles");
      return r;
    }
    const auto fac = *detail::factor(sym, degree);
    std::vector<OutcomeDistribution> pile_support;
    std::size_t total = 0;
    for (const auto& parts : fac.per_pile) {
      pile_support.push_back(parts.empty() ? support(identity_shuffle(degree)) : support(compose(parts), policy.cap));
      total += pile_support.back().size();
    }
    std::vector<std::vector<std::string>> found(f.input_count());
    detail::parallel_for(f.input_count(), policy.jobs, [&](std::size_t idx) {
      const Bits x = input_bits(idx, f.n);
      const auto start = apply(fac.lead, initial_suits(p, x));
      // reachable inner outputs of each block
      std::vector<std::set<std::string>> reach(bu->blocks);
      for (std::size_t j = 0; j < bu->blocks; ++j) {
        for (const auto& [perm, pr] : pile_support[j].outcomes) {
          const auto table = apply(perm, start);
          RevealTranscript t;
          for (std::size_t k = 0; k < bu->block_size; ++k) {
            t.events.push_back({static_cast<Position>(k), table[j * bu->block_size + k]});
          }
          try {
            reach[j].insert(std::to_string(evaluate(*bu->inner, t, bu->block_size)));
          } catch (const Error& e) {
            if (e.code() != ErrorCode::output_undefined) throw;
            reach[j].insert("undefined");
          }
        }
      }
      // every combination of block outputs must give f(x)
      std::vector<std::vector<std::string>> combos{{}};
      for (const auto& set : reach) {
        std::vector<std::vector<std::string>> next;
        for (const auto& c : combos) {
          for (const auto& v : set) {
            next.push_back(c);
            next.back().push_back(v);
          }
        }
        combos = std::move(next);
      }
      for (const auto& c : combos) {
        std::string got;
        std::size_t ones = 0;
        for (const auto& v : c) {
          if (v == "undefined") got = "undefined";
          ones += v == "1";
        }
        if (got.empty()) got = ones == 1 ? "1" : "0";
        if (got != std::to_string(f(idx))) {
          std::string blocks;
          for (const auto& v : c) blocks += (blocks.empty() ? "" : ",") + v;
          found[idx].push_back("x=" + bits_to_string(x) + " block outputs (" + blocks + ") give " + got +
                               " expected=" + std::to_string(f(idx)));
        }
      }
    });
    for (auto& list : found) {
      for (auto& c : list) record(std::move(c));
    }
    r.metrics["pile_outcomes"] = std::to_string(total);
    r.metrics["violations"] = std::to_string(record.count);
    r.notes.push_back("exact: per-block outputs combined over every reachable combination");
    return r;
  }

  const auto prefix_support = support(prefix_shuffle(sym, degree), policy.cap);
  const bool invariant = detail::output_invariant(p, sym);
  std::vector<std::vector<std::string>> found(f.input_count());
  detail::parallel_for(f.input_count(), policy.jobs, [&](std::size_t idx) {
    const Bits x = input_bits(idx, f.n);
    const auto start = initial_suits(p, x);
    Rng rng(policy.seed * 0x9e3779b97f4a7c15ull + idx);
    std::size_t k = 0;
    for (const auto& [perm, pr] : prefix_support.outcomes) {
      const auto table = apply(perm, start);
      std::vector<Permutation> members{Permutation::identity(degree)};
      if (!invariant && sym.kind != Symmetrizer::Kind::none) {
        const Shuffle orbit = sym.kind == Symmetrizer::Kind::complete ? complete(sym.region(), degree)
                                                                      : pile_scramble(sym.piles, degree);
        for (std::size_t s = 0; s < policy.orbit_samples; ++s) members.push_back(sample(orbit, rng));
      }
      for (const auto& g : members) {
        const auto got = detail::output_text(p, reveal(p.reveal, apply(g, table)));
        if (got != std::to_string(f(idx))) {
          found[idx].push_back("x=" + bits_to_string(x) + " prefix outcome #" + std::to_string(k) + " " +
                               detail::perm_text(then(perm, g)) + " output=" + got +
                               " expected=" + std::to_string(f(idx)));
          break;
        }
      }
      ++k;
    }
  });
  for (auto& list : found) {
    for (auto& c : list) record(std::move(c));
  }
  r.metrics["prefix_support"] = std::to_string(prefix_support.size());
  r.metrics["violations"] = std::to_string(record.count);
  if (invariant) {
    r.notes.push_back("exact: output map ignores the arrangement of the symmetrized region");
  } else {
    r.notes.push_back("output constancy over each orbit sampled with " + std::to_string(policy.orbit_samples) +
                      " members per outcome");
  }
  return r;
}

inline VerificationReport privacy_tier2(const SingleShuffleProtocol& p, const FunctionSpec& f,
                                        const VerifyPolicy& policy) {
  VerificationReport r;
  r.check = "privacy";
  r.tier = 2;
  const auto mode = tier2_mode(p, policy.cap);
  if (mode.empty()) {
    r.verdict = Verdict::inconclusive;
    r.notes.push_back("tier 2 does not apply to this shuffle structure");
    return r;
  }
  const auto sym = analyze(p.shuffle);
  const std::size_t degree = p.degree();
  r.metrics["mode"] = mode;
  const auto pairs = detail::privacy_pairs(f);
  r.metrics["pairs"] = std::to_string(pairs.size());
  detail::Recorder record{r};

  if (mode == "factored") {
    using PileDist = std::map<std::string, Rational>;
    const auto fac = *detail::factor(sym, degree);
    std::vector<OutcomeDistribution> pile_support;
    for (const auto& parts : fac.per_pile) {
      pile_support.push_back(parts.empty() ? support(identity_shuffle(degree)) : support(compose(parts), policy.cap));
    }
    std::vector<Position> outside;
    {
      std::vector<bool> in(degree, false);
      for (Position q : sym.region()) in[q] = true;
      for (Position q = 0; q < degree; ++q) {
        if (!in[q]) outside.push_back(q);
      }
    }
    // per input: fixed cards outside the piles, and the sorted list of per-pile content distributions
    std::vector<std::pair<std::string, std::vector<PileDist>>> views(f.input_count());
    detail::parallel_for(f.input_count(), policy.jobs, [&](std::size_t idx) {
      const auto start = apply(fac.lead, initial_suits(p, input_bits(idx, f.n)));
      std::string fixed;
      for (Position q : outside) fixed += std::to_string(q) + to_char(start[q]) + " ";
      std::vector<PileDist> piles;
      for (std::size_t j = 0; j < sym.piles.count(); ++j) {
        PileDist d;
        for (const auto& [perm, pr] : pile_support[j].outcomes) {
          const auto table = apply(perm, start);
          std::string content;
          for (Position q : sym.piles.piles[j]) content.push_back(to_char(table[q]));
          d[content] += pr;
        }
        piles.push_back(std::move(d));
      }
      std::sort(piles.begin(), piles.end());
      views[idx] = {std::move(fixed), std::move(piles)};
    });
    bool undecided = false;
    for (const auto& [a, b] : pairs) {
      if (views[a] == views[b]) continue;
      if (views[a].first != views[b].first) {
        record("x=" + bits_to_string(input_bits(a, f.n)) + " vs x'=" + bits_to_string(input_bits(b, f.n)) +
               ": cards outside the scrambled piles differ ('" + views[a].first + "' vs '" + views[b].first + "')");
      } else {
        undecided = true;
        r.notes.push_back("x=" + bits_to_string(input_bits(a, f.n)) + " vs x'=" + bits_to_string(input_bits(b, f.n)) +
                          ": per-pile distributions differ as multisets; factored mode cannot decide");
      }
    }
    if (r.verdict == Verdict::pass && undecided) r.verdict = Verdict::inconclusive;
    if (r.verdict == Verdict::pass) {
      r.notes.push_back("exact: per-pile content distributions agree as multisets for every same-output pair");
    }
    return r;
  }

  const auto prefix_support = support(prefix_shuffle(sym, degree), policy.cap);
  std::vector<CanonicalDistribution> states(f.input_count());
  detail::parallel_for(f.input_count(), policy.jobs, [&](std::size_t idx) {
    states[idx] = canonical_states(p, input_bits(idx, f.n), prefix_support, sym);
  });
  for (const auto& [a, b] : pairs) {
    if (states[a] == states[b]) continue;
    record("x=" + bits_to_string(input_bits(a, f.n)) + " vs x'=" + bits_to_string(input_bits(b, f.n)) +
           ": canonical state " +
           detail::distinguishing<CanonicalState>(states[a], states[b], [](const CanonicalState& s) { return s.str(); }));
  }
  r.metrics["prefix_support"] = std::to_string(prefix_support.size());
  std::size_t distinct = 0;
  for (const auto& s : states) distinct = std::max(distinct, s.size());
  r.metrics["max_states"] = std::to_string(distinct);
  return r;
}

// ---------------------------------------------------------------------------
// Tier 3: sampling

/// Half the L1 distance between the two empirical histograms.
inline Rational tv_distance_estimate(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::invalid_argument, "sample sets differ in size");
  if (a.size() < 1000) throw Error(ErrorCode::too_few_samples, "need at least 1000 samples, got " + std::to_string(a.size()));
  std::map<std::string, std::int64_t> diff;
  for (const auto& s : a) ++diff[s];
  for (const auto& s : b) --diff[s];
  std::int64_t l1 = 0;
  for (const auto& [k, v] : diff) l1 += v < 0 ? -v : v;
  return Rational(l1, 2 * static_cast<std::int64_t>(a.size()));
}

namespace detail {

struct SampleRun {
  std::vector<std::string> keys;
  std::vector<std::string> wrong;
};

/// Samples are keyed by canonical state when the protocol ends in a
/// symmetrizer and opens everything, else by the raw transcript.
inline SampleRun sample_runs(const SingleShuffleProtocol& p, const FunctionSpec& f, std::size_t idx,
                             const VerifyPolicy& policy) {
  SampleRun out;
  const auto sym = analyze(p.shuffle);
  const bool canonical = sym.kind != Symmetrizer::Kind::none && full_open(p);
  const Bits x = input_bits(idx, f.n);
  const auto start = initial_suits(p, x);
  Rng rng(policy.seed * 0x9e3779b97f4a7c15ull + 0x51ed27ull * (idx + 1));
  out.keys.reserve(policy.samples);
  for (std::size_t s = 0; s < policy.samples; ++s) {
    const auto perm = sample(p.shuffle, rng);
    const auto table = apply(perm, start);
    const auto t = reveal(p.reveal, table);
    const auto got = output_text(p, t);
    if (got != std::to_string(f(idx)) && out.wrong.size() < max_listed_counterexamples) {
      out.wrong.push_back("x=" + bits_to_string(x) + " sampled outcome " + perm_text(perm) + " output=" + got +
                          " expected=" + std::to_string(f(idx)));
    }
    out.keys.push_back(canonical ? canonicalize(table, sym).str() : t.str());
  }
  return out;
}

}  // namespace detail

inline std::pair<VerificationReport, VerificationReport> tier3(const SingleShuffleProtocol& p, const FunctionSpec& f,
                                                               const VerifyPolicy& policy) {
  VerificationReport c, v;
  c.check = "correctness";
  v.check = "privacy";
  c.tier = v.tier = 3;
  std::vector<detail::SampleRun> runs(f.input_count());
  detail::parallel_for(f.input_count(), policy.jobs,
                       [&](std::size_t idx) { runs[idx] = detail::sample_runs(p, f, idx, policy); });
  detail::Recorder rc{c};
  for (auto& run : runs) {
    for (auto& w : run.wrong) rc(std::move(w));
  }
  if (c.verdict == Verdict::pass) c.statistical = true;
  c.metrics["samples_per_input"] = std::to_string(policy.samples);

  detail::Recorder rv{v};
  Rational worst = 0;
  for (const auto& [a, b] : detail::privacy_pairs(f)) {
    const auto tv = tv_distance_estimate(runs[a].keys, runs[b].keys);
    worst = std::max(worst, tv);
    if (tv.convert_to<double>() >= policy.tv_threshold) {
      rv("x=" + bits_to_string(input_bits(a, f.n)) + " vs x'=" + bits_to_string(input_bits(b, f.n)) +
         ": estimated total variation " + to_string(tv));
    }
  }
  v.statistical = true;
  v.metrics["samples_per_input"] = std::to_string(policy.samples);
  v.metrics["max_tv"] = to_string(worst);
  v.notes.push_back("statistical: sampled with seed " + std::to_string(policy.seed) + ", not a proof");
  c.notes.push_back("statistical: sampled with seed " + std::to_string(policy.seed) + ", not a proof");
  return {c, v};
}

// ---------------------------------------------------------------------------
// Dispatch

namespace detail {

inline int pick_tier(const SingleShuffleProtocol& p, const VerifyPolicy& policy, std::string& why) {
  if (policy.force_tier) return *policy.force_tier;
  const auto estimate = estimated_support_size(p.shuffle);
  if (policy.max_tier >= 1 && estimate <= policy.cap) return 1;
  if (policy.max_tier >= 2 && !tier2_mode(p, policy.cap).empty()) return 2;
  if (policy.max_tier >= 3) return 3;
  why = "SupportTooLarge: estimated support " + estimate.str() + " exceeds cap " + std::to_string(policy.cap) +
        " and no exact structure applies; rerun with --tier 3 for a statistical check or raise --cap";
  return 0;
}

template <typename Body>
VerificationReport timed(Body body) {
  const auto t0 = std::chrono::steady_clock::now();
  VerificationReport r = body();
  r.runtime = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0);
  return r;
}

}  // namespace detail

inline VerificationReport check_correctness(const SingleShuffleProtocol& p, const FunctionSpec& f,
                                            const VerifyPolicy& policy = {}) {
  detail::check_arity(p, f);
  return detail::timed([&] {
    std::string why;
    VerificationReport r;
    switch (detail::pick_tier(p, policy, why)) {
      case 1: r = correctness_tier1(p, f, policy); break;
      case 2: r = correctness_tier2(p, f, policy); break;
      case 3: r = tier3(p, f, policy).first; break;
      default:
        r.check = "correctness";
        r.tier = 0;
        r.verdict = Verdict::inconclusive;
        r.notes.push_back(why);
    }
    detail::add_common_metrics(r, p);
    return r;
  });
}

inline VerificationReport check_privacy(const SingleShuffleProtocol& p, const FunctionSpec& f,
                                        const VerifyPolicy& policy = {}) {
  detail::check_arity(p, f);
  return detail::timed([&] {
    std::string why;
    VerificationReport r;
    switch (detail::pick_tier(p, policy, why)) {
      case 1: r = privacy_tier1(p, f, policy); break;
      case 2: r = privacy_tier2(p, f, policy); break;
      case 3: r = tier3(p, f, policy).second; break;
      default:
        r.check = "privacy";
        r.tier = 0;
        r.verdict = Verdict::inconclusive;
        r.notes.push_back(why);
    }
    detail::add_common_metrics(r, p);
    return r;
  });
}

// ---------------------------------------------------------------------------
// Card-count formulas

namespace detail {

inline BigInt complexity_value(const Provenance& prov, const std::string& key) {
  auto it = prov.source_complexity.find(key);
  if (it == prov.source_complexity.end()) {
    throw Error(ErrorCode::invalid_argument, "provenance lacks source complexity '" + key + "'");
  }
  return BigInt(it->second);
}

}  // namespace detail

/// Measured card count against the provenance prediction and the bound of
/// the compiling route.
inline VerificationReport check_count_formulas(const CompiledArtifact& a) {
  VerificationReport r;
  r.check = "counts";
  r.tier = 1;
  const auto& prov = a.provenance;
  const std::size_t measured = card_count(a.protocol);
  const std::string measured_tally = tally(a.protocol.shuffle).str();
  r.metrics["cards"] = std::to_string(measured);
  r.metrics["predicted_cards"] = std::to_string(prov.predicted_cards);
  r.metrics["shuffle"] = measured_tally;
  r.metrics["predicted_shuffle"] = prov.predicted_tally;
  if (measured != prov.predicted_cards) {
    r.fail("card count " + std::to_string(measured) + " differs from predicted " + std::to_string(prov.predicted_cards));
  }
  if (measured_tally != prov.predicted_tally) {
    r.fail("shuffle tally " + measured_tally + " differs from predicted " + prov.predicted_tally);
  }
  const BigInt cards = measured;
  auto require = [&](bool ok, const std::string& relation) {
    r.metrics["bound"] = relation;
    if (!ok) r.fail("bound violated: " + relation);
  };
  const auto& route = prov.route;
  if (route == "thm1" || route == "thm2" || route == "thm3") {
    const auto c = detail::complexity_value(prov, "c");
    const auto rbits = static_cast<std::size_t>(detail::complexity_value(prov, "r"));
    BigInt bound = c * pow2(rbits + 1);
    std::string rel = "cards <= c*2^(r+1)";
    if (route == "thm3") {
      bound += pow2(rbits + 2);
      rel += " + 2^(r+2)";
    }
    require(cards <= bound, std::to_string(measured) + " <= " + bound.str() + " (" + rel + ")");
    if (prov.source_complexity.count("uniform") && prov.source_complexity.at("uniform") == "1") {
      // communication-reduced sources satisfy c <= (r+1)n, giving this bound
      const BigInt line = pow2(rbits + 1) * BigInt(rbits + 1) * BigInt(a.protocol.n);
      r.metrics["rand_bound"] = line.str();
      if (c > BigInt(rbits + 1) * BigInt(a.protocol.n)) {
        r.notes.push_back("source has c > (r+1)n; reduce communication first to meet 2^(r+1)(r+1)n");
      }
    }
  } else if (route == "fig4") {
    const auto m = detail::complexity_value(prov, "m");
    const auto n = detail::complexity_value(prov, "n");
    require(cards == m * n, std::to_string(measured) + " == " + BigInt(m * n).str() + " (cards == m*n)");
  } else if (route == "fig5") {
    const auto N = detail::complexity_value(prov, "N");
    const auto l0 = detail::complexity_value(prov, "l0");
    require(cards == N * l0, std::to_string(measured) + " == " + BigInt(N * l0).str() + " (cards == N*l0)");
  } else {
    r.fail("unknown route '" + route + "'");
  }
  return r;
}

}  // namespace cardpsm
