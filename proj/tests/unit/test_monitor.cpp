#include "doctest.h"

#include <random>
#include <thread>

#include "ecgppg/error.hpp"
#include "ecgppg/monitor.hpp"
#include "ecgppg/policy_io.hpp"
#include "ecgppg/trace_io.hpp"
#include "oracles.hpp"

using namespace ecgppg;
using testutil::TempDir;
using testutil::write_text;
using L = EventLabel;
using V = Verdict;

namespace {

TimedTrace trace(std::vector<TimedEvent> ev) { return TimedTrace(std::move(ev)); }

std::string verdict_string(const std::vector<V>& v) {
  std::string s;
  for (V x : v) s += to_char(x);
  return s;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

std::vector<TimedEvent> random_trace(std::mt19937_64& rng, L start, L end) {
  const std::vector<L> labels{L::EcgP, L::EcgQ, L::EcgR, L::EcgT, L::PpgOnset, L::PpgSystolic, L::PpgDiastolic};
  std::uniform_int_distribution<int> len(0, 50);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(labels.size()) - 1);
  std::uniform_int_distribution<int> coin(0, 3);
  std::uniform_int_distribution<int> gap(0, 300);
  std::vector<TimedEvent> out;
  double t = 0.0;
  int starts = 0;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    // bias toward the policy's own symbols, integer ms so ties occur
    L l = coin(rng) == 0 ? labels[pick(rng)] : (coin(rng) < 2 ? start : end);
    if (l == start && ++starts > 5) l = end;
    t += gap(rng);
    out.push_back({l, t});
  }
  return out;
}

}  // namespace

TEST_CASE("example traces give (T, T, T)") {
  const auto ecg_p = build_interval_policy(L::EcgP, L::EcgR, 210.0);
  const auto ppg_p = build_interval_policy(L::PpgOnset, L::PpgSystolic, 210.0);
  const auto ecg = trace({{L::EcgP, 728}, {L::EcgR, 888}});
  const auto ppg = trace({{L::PpgOnset, 1416}, {L::PpgSystolic, 1568}});
  const auto c = run_parallel(ecg_p, ecg, ppg_p, ppg);
  REQUIRE(c.cycles.size() == 1);
  CHECK(c.cycles[0].ecg == V::Satisfied);
  CHECK(c.cycles[0].ppg == V::Satisfied);
  CHECK(c.cycles[0].composed == V::Satisfied);
  CHECK(agreement_rate(c) == 1.0);
}

TEST_CASE("systolic moved to 1650 ms gives (T, F, F)") {
  const auto ecg_p = build_interval_policy(L::EcgP, L::EcgR, 210.0);
  const auto ppg_p = build_interval_policy(L::PpgOnset, L::PpgSystolic, 210.0);
  const auto c = run_parallel(ecg_p, trace({{L::EcgP, 728}, {L::EcgR, 888}}), ppg_p,
                              trace({{L::PpgOnset, 1416}, {L::PpgSystolic, 1650}}));
  REQUIRE(c.cycles.size() == 1);
  CHECK(c.cycles[0].ecg == V::Satisfied);
  CHECK(c.cycles[0].ppg == V::Violated);
  CHECK(c.cycles[0].composed == V::Violated);
  CHECK(agreement_rate(c) == 0.0);
}

TEST_CASE("bound is inclusive") {
  const auto p = build_interval_policy(L::EcgP, L::EcgR, 210.0);
  CHECK(verdict_string(run_monitor(p, trace({{L::EcgP, 100}, {L::EcgR, 310}}))) == "T");
  CHECK(verdict_string(run_monitor(p, trace({{L::EcgP, 100}, {L::EcgR, 310.001}}))) == "F");
}

TEST_CASE("repeated start re-arms, stray end is ignored, sink re-arms") {
  const auto p = build_interval_policy(L::EcgP, L::EcgR, 100.0);
  // r without p; p p r uses the second p; violation then recovery
  const auto tr = trace({{L::EcgR, 0},
                         {L::EcgP, 10},
                         {L::EcgP, 200},
                         {L::EcgR, 250},
                         {L::EcgP, 300},
                         {L::EcgR, 500},
                         {L::EcgR, 510},
                         {L::EcgT, 520},
                         {L::EcgP, 600},
                         {L::EcgR, 650}});
  CHECK(verdict_string(run_monitor(p, tr)) == "TFT");
}

TEST_CASE("monitor matches the brute-force scan on random traces") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> bound(1.0, 400.0);
  const std::vector<std::pair<L, L>> pairs{{L::EcgP, L::EcgR}, {L::PpgOnset, L::PpgSystolic},
                                           {L::EcgR, L::EcgP}, {L::PpgSystolic, L::PpgOnset}};
  for (int k = 0; k < 1000; ++k) {
    const auto [s, e] = pairs[static_cast<std::size_t>(k) % pairs.size()];
    const double b = std::floor(bound(rng));
    const auto ev = random_trace(rng, s, e);
    const auto want = oracle::interval_scan(ev, s, e, b);
    const auto got = run_monitor(build_interval_policy(s, e, b), TimedTrace(ev));
    REQUIRE(got == want);
  }
}

TEST_CASE("verdicts are invariant to a common time shift") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 200; ++k) {
    const auto ev = random_trace(rng, L::EcgP, L::EcgR);
    auto shifted = ev;
    for (auto& e : shifted) e.time_ms += 12345.0;
    const auto p = build_interval_policy(L::EcgP, L::EcgR, 150.0);
    CHECK(run_monitor(p, TimedTrace(ev)) == run_monitor(p, TimedTrace(shifted)));
  }
}

TEST_CASE("raising the bound never turns T into F") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 200; ++k) {
    const auto ev = random_trace(rng, L::PpgOnset, L::PpgSystolic);
    const auto lo = run_monitor(build_interval_policy(L::PpgOnset, L::PpgSystolic, 100.0), TimedTrace(ev));
    const auto hi = run_monitor(build_interval_policy(L::PpgOnset, L::PpgSystolic, 180.0), TimedTrace(ev));
    REQUIRE(lo.size() == hi.size());
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (lo[i] == V::Satisfied) CHECK(hi[i] == V::Satisfied);
  }
}

TEST_CASE("online monitor rejects time going backwards") {
  Monitor m(build_interval_policy(L::EcgP, L::EcgR, 210.0));
  m.feed({L::EcgP, 100});
  CHECK(code_of([&] { m.feed({L::EcgR, 50}); }) == ErrorCode::TimeRegression);
  m.reset();
  CHECK(m.state().location == m.automaton().initial);
  CHECK_FALSE(m.feed({L::EcgP, 0}).has_value());
}

TEST_CASE("events outside the alphabet let time pass") {
  Monitor m(build_interval_policy(L::EcgP, L::EcgR, 210.0));
  m.feed({L::EcgP, 0});
  CHECK_FALSE(m.feed({L::EcgQ, 150}).has_value());
  CHECK(m.state().clock_value(0) == doctest::Approx(150.0));
  CHECK(m.feed({L::EcgR, 200}) == V::Satisfied);
}

TEST_CASE("overlapping guards are reported as non-deterministic") {
  TimedAutomaton a;
  a.locations = {"a", "b", "sink"};
  a.initial = 0;
  a.sink = 2;
  a.accepting = {1};
  a.clocks = {"x"};
  a.alphabet = {L::EcgR};
  a.transitions = {{0, L::EcgR, {{0, CompareOp::LessEqual, 10}}, {}, 1},
                   {0, L::EcgR, {{0, CompareOp::GreaterEqual, 5}}, {}, 0}};
  a.validate();
  Monitor m(a);
  CHECK(code_of([&] { m.feed({L::EcgR, 7}); }) == ErrorCode::NonDeterministic);
}

TEST_CASE("automaton validation") {
  CHECK(code_of([] { build_interval_policy(L::EcgP, L::EcgP, 10); }) == ErrorCode::BadPolicy);
  CHECK(code_of([] { build_interval_policy(L::EcgP, L::EcgR, 0); }) == ErrorCode::BadPolicy);
  auto a = build_interval_policy(L::EcgP, L::EcgR, 10);
  a.transitions.push_back({a.sink, L::EcgP, {}, {}, a.initial});
  CHECK(code_of([&] { a.validate(); }) == ErrorCode::BadPolicy);
  auto b = build_interval_policy(L::EcgP, L::EcgR, 10);
  b.transitions.push_back({0, L::EcgT, {}, {}, 0});
  CHECK(code_of([&] { b.validate(); }) == ErrorCode::BadPolicy);
}

TEST_CASE("composition and rates") {
  const std::vector<V> e{V::Satisfied, V::Satisfied, V::Violated, V::Violated};
  const std::vector<V> p{V::Satisfied, V::Violated, V::Violated, V::Satisfied};
  const auto c = compose(e, p);
  CHECK(c.cycles[0].composed == V::Satisfied);
  CHECK(c.cycles[1].composed == V::Violated);
  CHECK(c.cycles[2].composed == V::Violated);
  CHECK(agreement_rate(c) == doctest::Approx(0.5));
  CHECK(composed_true_rate(c) == doctest::Approx(0.25));
  try {
    compose(e, std::vector<V>{V::Satisfied});
    FAIL("no throw");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::LengthMismatch);
  }
  CHECK(code_of([] { agreement_rate(ComposedVerdicts{}); }) == ErrorCode::EmptyVerdicts);
  CHECK(code_of([] { composed_true_rate(ComposedVerdicts{}); }) == ErrorCode::EmptyVerdicts);
}

TEST_CASE("parallel run equals sequential runs") {
  std::mt19937_64 rng(3);
  const auto pe = build_interval_policy(L::EcgP, L::EcgR, 150.0);
  const auto pp = build_interval_policy(L::PpgOnset, L::PpgSystolic, 150.0);
  for (int k = 0; k < 50; ++k) {
    // same number of start/end pairs on both sides
    std::vector<TimedEvent> ecg, ppg;
    double t = 0.0;
    std::uniform_real_distribution<double> d(50.0, 250.0);
    for (int i = 0; i < 10; ++i) {
      ecg.push_back({L::EcgP, t});
      ecg.push_back({L::EcgR, t + d(rng)});
      ppg.push_back({L::PpgOnset, t + 600});
      ppg.push_back({L::PpgSystolic, t + 600 + d(rng)});
      t += 800.0;
    }
    const auto c = run_parallel(pe, TimedTrace(ecg), pp, TimedTrace(ppg));
    const auto ve = run_monitor(pe, TimedTrace(ecg));
    const auto vp = run_monitor(pp, TimedTrace(ppg));
    const auto want = compose(ve, vp);
    REQUIRE(c.cycles.size() == want.cycles.size());
    for (std::size_t i = 0; i < c.cycles.size(); ++i) {
      CHECK(c.cycles[i].ecg == want.cycles[i].ecg);
      CHECK(c.cycles[i].ppg == want.cycles[i].ppg);
      CHECK(c.cycles[i].composed == want.cycles[i].composed);
    }
  }
}

TEST_CASE("verdict joiner pairs verdicts across threads") {
  VerdictJoiner j(4);
  const std::vector<V> e{V::Satisfied, V::Violated, V::Satisfied, V::Satisfied, V::Violated, V::Satisfied};
  const std::vector<V> p{V::Satisfied, V::Satisfied, V::Violated, V::Satisfied};
  std::thread te([&] {
    for (V v : e) j.push(VerdictJoiner::Side::Ecg, v);
    j.close(VerdictJoiner::Side::Ecg);
  });
  std::thread tp([&] {
    for (V v : p) j.push(VerdictJoiner::Side::Ppg, v);
    j.close(VerdictJoiner::Side::Ppg);
  });
  std::vector<CycleVerdict> got;
  while (auto c = j.pop()) got.push_back(*c);
  te.join();
  tp.join();
  REQUIRE(got.size() == 4);
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].ecg == e[i]);
    CHECK(got[i].ppg == p[i]);
    CHECK((got[i].composed == V::Satisfied) == (e[i] == V::Satisfied && p[i] == V::Satisfied));
  }
  CHECK(j.unmatched() == 2);
}

TEST_CASE("hand-written automaton JSON behaves like the template") {
  const auto tmpl = build_interval_policy(L::PpgOnset, L::PpgSystolic, 210.0, "systole");
  const auto j = automaton_to_json(tmpl);
  const auto back = policy_from_json(j);
  CHECK(back.locations == tmpl.locations);
  CHECK(back.transitions.size() == tmpl.transitions.size());
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const auto ev = random_trace(rng, L::PpgOnset, L::PpgSystolic);
    CHECK(run_monitor(back, TimedTrace(ev)) == run_monitor(tmpl, TimedTrace(ev)));
  }

  const auto from_template = policy_from_json(
      nlohmann::json{{"name", "pr"}, {"start_event", "p"}, {"end_event", "r"}, {"bound_ms", 210}});
  CHECK(from_template.name == "pr");
  CHECK(code_of([] { policy_from_json(nlohmann::json{{"start_event", "p"}}); }) == ErrorCode::BadPolicy);
  CHECK(code_of([] {
          policy_from_json(nlohmann::json{{"start_event", "z"}, {"end_event", "r"}, {"bound_ms", 1}});
        }) == ErrorCode::BadPolicy);
  CHECK(code_of([] { policy_from_json(nlohmann::json::array()); }) == ErrorCode::BadPolicy);
}

TEST_CASE("trace CSV read errors carry the line number") {
  TempDir dir;
  write_text(dir / "ok.csv", "label,time_ms\n# comment\np,728\nr,888\n");
  CHECK(read_trace_csv(dir / "ok.csv").size() == 2);
  write_text(dir / "back.csv", "label,time_ms\np,728\nr,888\nP,800\n");
  try {
    read_trace_csv(dir / "back.csv");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TimeRegression);
    REQUIRE(e.index());
    CHECK(*e.index() == 4);
  }
  write_text(dir / "lab.csv", "label,time_ms\nx,1\n");
  CHECK(code_of([&] { read_trace_csv(dir / "lab.csv"); }) == ErrorCode::BadTrace);
  write_text(dir / "hdr.csv", "event,time\np,1\n");
  CHECK(code_of([&] { read_trace_csv(dir / "hdr.csv"); }) == ErrorCode::BadTrace);
  write_text(dir / "neg.csv", "label,time_ms\np,-4\n");
  CHECK(code_of([&] { read_trace_csv(dir / "neg.csv"); }) == ErrorCode::BadTrace);
  CHECK(code_of([&] { read_trace_csv(dir / "none.csv"); }) == ErrorCode::MissingFile);
}

TEST_CASE("trace and verdict CSV round trip") {
  TempDir dir;
  const auto t = trace({{L::PpgOnset, 1416.25}, {L::PpgSystolic, 1568}});
  write_trace_csv(dir / "t.csv", t);
  CHECK(read_trace_csv(dir / "t.csv").events() == t.events());
  const auto c = compose(std::vector<V>{V::Satisfied}, std::vector<V>{V::Violated});
  write_verdicts_csv(dir / "v.csv", c, VerdictSummary{0.0, 0.0});
  CHECK(testutil::read_text(dir / "v.csv") ==
        "cycle_index,ecg_verdict,ppg_verdict,composed\n0,T,F,F\n"
        "# agreement_rate=0.000000\n# composed_true_rate=0.000000\n# dropped_cycles=0\n");
}
