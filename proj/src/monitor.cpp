#include "ecgppg/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "ecgppg/error.hpp"

namespace ecgppg {

bool ClockConstraint::holds(double v) const {
  switch (op) {
    case CompareOp::Less: return v < bound_ms;
    case CompareOp::LessEqual: return v <= bound_ms;
    case CompareOp::Equal: return v == bound_ms;
    case CompareOp::GreaterEqual: return v >= bound_ms;
    case CompareOp::Greater: return v > bound_ms;
  }
  return false;
}

bool TimedAutomaton::is_accepting(LocationId l) const {
  return std::find(accepting.begin(), accepting.end(), l) != accepting.end();
}

bool TimedAutomaton::in_alphabet(EventLabel e) const {
  return std::find(alphabet.begin(), alphabet.end(), e) != alphabet.end();
}

void TimedAutomaton::validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::BadPolicy, (name.empty() ? "automaton" : name) + ": " + why);
  };
  const std::size_t nl = locations.size();
  if (nl == 0) fail("no locations");
  if (initial >= nl || sink >= nl) fail("initial or sink location out of range");
  if (initial == sink) fail("initial location cannot be the sink");
  for (LocationId l : accepting) {
    if (l >= nl) fail("accepting location out of range");
    if (l == sink) fail("sink cannot be accepting");
  }
  if (rearm_event && !in_alphabet(*rearm_event)) fail("re-arm event not in alphabet");
  for (const Transition& t : transitions) {
    if (t.source >= nl || t.target >= nl) fail("transition location out of range");
    if (t.source == sink) fail("sink has outgoing transitions");
    if (!in_alphabet(t.event)) fail(std::string("symbol '") + to_char(t.event) + "' not in alphabet");
    for (const ClockConstraint& g : t.guard) {
      if (g.clock >= clocks.size()) fail("guard clock out of range");
      if (!(g.bound_ms >= 0.0) || !std::isfinite(g.bound_ms)) fail("guard constant must be >= 0");
    }
    for (ClockId c : t.resets)
      if (c >= clocks.size()) fail("reset clock out of range");
  }
}

TimedAutomaton build_interval_policy(EventLabel start, EventLabel end, double bound_ms,
                                     std::string name) {
  if (start == end) throw Error(ErrorCode::BadPolicy, "start and end events must differ");
  if (!(bound_ms > 0.0) || !std::isfinite(bound_ms))
    throw Error(ErrorCode::BadPolicy, "bound must be positive");
  enum : LocationId { Idle, Armed, Accepted, Violation };
  constexpr ClockId x = 0;

  TimedAutomaton a;
  a.name = name.empty() ? std::string{to_char(start), '-', '>', to_char(end)} : std::move(name);
  a.locations = {"idle", "armed", "accepted", "violation"};
  a.initial = Idle;
  a.sink = Violation;
  a.accepting = {Accepted};
  a.clocks = {"x"};
  a.alphabet = {start, end};
  a.rearm_event = start;
  a.transitions = {
      {Idle, start, {}, {x}, Armed},
      {Idle, end, {}, {}, Idle},
      {Armed, start, {}, {x}, Armed},
      {Armed, end, {{x, CompareOp::LessEqual, bound_ms}}, {}, Accepted},
      {Armed, end, {{x, CompareOp::Greater, bound_ms}}, {}, Violation},
      {Accepted, start, {}, {x}, Armed},
      {Accepted, end, {}, {}, Idle},
  };
  a.validate();
  return a;
}

MonitorState initial_state(const TimedAutomaton& a) {
  MonitorState s;
  s.location = a.initial;
  s.reset_time_ms.assign(a.clocks.size(), 0.0);
  return s;
}

StepResult step(const TimedAutomaton& a, const MonitorState& s, const TimedEvent& e) {
  if (e.time_ms < s.last_time_ms) {
    throw Error(ErrorCode::TimeRegression, "event at " + std::to_string(e.time_ms) +
                                               " ms precedes " + std::to_string(s.last_time_ms) + " ms");
  }
  StepResult r{s, std::nullopt};
  MonitorState& next = r.state;
  next.last_time_ms = e.time_ms;

  if (next.location == a.sink) {
    if (!a.rearm_event || e.label != *a.rearm_event) return r;
    next.location = a.initial;
    std::fill(next.reset_time_ms.begin(), next.reset_time_ms.end(), e.time_ms);
  }
  if (!a.in_alphabet(e.label)) return r;

  const Transition* fired = nullptr;
  for (const Transition& t : a.transitions) {
    if (t.source != next.location || t.event != e.label) continue;
    const bool enabled = std::all_of(t.guard.begin(), t.guard.end(), [&](const ClockConstraint& g) {
      return g.holds(next.clock_value(g.clock));
    });
    if (!enabled) continue;
    if (fired) {
      throw Error(ErrorCode::NonDeterministic,
                  a.name + ": two transitions enabled from '" + a.locations[next.location] + "'");
    }
    fired = &t;
  }

  if (!fired) {
    next.location = a.sink;
    r.verdict = Verdict::Violated;
    return r;
  }
  for (ClockId c : fired->resets) next.reset_time_ms[c] = e.time_ms;
  next.location = fired->target;
  if (next.location == a.sink) {
    r.verdict = Verdict::Violated;
  } else if (a.is_accepting(next.location)) {
    r.verdict = Verdict::Satisfied;
  }
  return r;
}

Monitor::Monitor(TimedAutomaton automaton) : automaton_(std::move(automaton)) {
  automaton_.validate();
  state_ = initial_state(automaton_);
}

std::optional<Verdict> Monitor::feed(const TimedEvent& e) {
  StepResult r = step(automaton_, state_, e);
  state_ = std::move(r.state);
  return r.verdict;
}

void Monitor::reset() { state_ = initial_state(automaton_); }

std::vector<Verdict> run_monitor(const TimedAutomaton& a, const TimedTrace& trace) {
  Monitor m(a);
  std::vector<Verdict> out;
  for (const TimedEvent& e : trace)
    if (auto v = m.feed(e)) out.push_back(*v);
  return out;
}

ComposedVerdicts compose(std::span<const Verdict> ecg, std::span<const Verdict> ppg) {
  if (ecg.size() != ppg.size()) {
    const std::size_t diff = ecg.size() > ppg.size() ? ecg.size() - ppg.size() : ppg.size() - ecg.size();
    throw Error(ErrorCode::LengthMismatch,
                "ECG has " + std::to_string(ecg.size()) + " verdicts, PPG has " +
                    std::to_string(ppg.size()) + "; " + std::to_string(diff) +
                    " cycle(s) would be dropped",
                diff);
  }
  ComposedVerdicts c;
  c.cycles.reserve(ecg.size());
  for (std::size_t i = 0; i < ecg.size(); ++i) {
    const bool both = ecg[i] == Verdict::Satisfied && ppg[i] == Verdict::Satisfied;
    c.cycles.push_back({ecg[i], ppg[i], both ? Verdict::Satisfied : Verdict::Violated});
  }
  return c;
}

double agreement_rate(const ComposedVerdicts& c) {
  if (c.cycles.empty()) throw Error(ErrorCode::EmptyVerdicts, "no composed verdicts");
  const auto agree = std::count_if(c.cycles.begin(), c.cycles.end(),
                                   [](const CycleVerdict& v) { return v.ecg == v.ppg; });
  return static_cast<double>(agree) / static_cast<double>(c.cycles.size());
}

double composed_true_rate(const ComposedVerdicts& c) {
  if (c.cycles.empty()) throw Error(ErrorCode::EmptyVerdicts, "no composed verdicts");
  const auto ok = std::count_if(c.cycles.begin(), c.cycles.end(), [](const CycleVerdict& v) {
    return v.composed == Verdict::Satisfied;
  });
  return static_cast<double>(ok) / static_cast<double>(c.cycles.size());
}

ComposedVerdicts run_parallel(const TimedAutomaton& ecg_policy, const TimedTrace& ecg_trace,
                              const TimedAutomaton& ppg_policy, const TimedTrace& ppg_trace) {
  auto ecg = std::async(std::launch::async, [&] { return run_monitor(ecg_policy, ecg_trace); });
  auto ppg = std::async(std::launch::async, [&] { return run_monitor(ppg_policy, ppg_trace); });
  const auto ecg_v = ecg.get();
  const auto ppg_v = ppg.get();
  return compose(ecg_v, ppg_v);
}

VerdictJoiner::VerdictJoiner(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

void VerdictJoiner::push(Side side, Verdict v) {
  std::unique_lock lock(mutex_);
  const bool& other_closed = side == Side::Ecg ? ppg_closed_ : ecg_closed_;
  changed_.wait(lock, [&] { return queue(side).size() < capacity_ || other_closed; });
  queue(side).push_back(v);
  changed_.notify_all();
}

void VerdictJoiner::close(Side side) {
  std::lock_guard lock(mutex_);
  (side == Side::Ecg ? ecg_closed_ : ppg_closed_) = true;
  changed_.notify_all();
}

std::optional<CycleVerdict> VerdictJoiner::pop() {
  std::unique_lock lock(mutex_);
  changed_.wait(lock, [&] {
    return (!ecg_.empty() && !ppg_.empty()) || (ecg_.empty() && ecg_closed_) ||
           (ppg_.empty() && ppg_closed_);
  });
  if (ecg_.empty() || ppg_.empty()) return std::nullopt;
  const Verdict e = ecg_.front();
  const Verdict p = ppg_.front();
  ecg_.pop_front();
  ppg_.pop_front();
  changed_.notify_all();
  const bool both = e == Verdict::Satisfied && p == Verdict::Satisfied;
  return CycleVerdict{e, p, both ? Verdict::Satisfied : Verdict::Violated};
}

std::size_t VerdictJoiner::unmatched() const {
  std::lock_guard lock(mutex_);
  return ecg_.size() + ppg_.size();
}

}  // namespace ecgppg
