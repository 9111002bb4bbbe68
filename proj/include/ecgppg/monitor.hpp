#ifndef ECGPPG_MONITOR_HPP
#define ECGPPG_MONITOR_HPP

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecgppg/events.hpp"

namespace ecgppg {

using LocationId = std::size_t;
using ClockId = std::size_t;

enum class CompareOp { Less, LessEqual, Equal, GreaterEqual, Greater };

struct ClockConstraint {
  ClockId clock;
  CompareOp op;
  double bound_ms;

  bool holds(double value_ms) const;
};

struct Transition {
  LocationId source;
  EventLabel event;
  std::vector<ClockConstraint> guard;  // conjunction; empty = true
  std::vector<ClockId> resets;
  LocationId target;
};

/// Deterministic timed automaton with a violation sink.
///
/// Events outside `alphabet` let time pass without moving the automaton.
/// An alphabet event with no enabled transition moves to the sink. From the
/// sink, `rearm_event` restarts the automaton at `initial` (all clocks zero)
/// and is then processed from there; everything else is ignored.
struct TimedAutomaton {
  std::string name;
  std::vector<std::string> locations;
  LocationId initial = 0;
  LocationId sink = 0;
  std::vector<LocationId> accepting;
  std::vector<std::string> clocks;
  std::vector<EventLabel> alphabet;
  std::optional<EventLabel> rearm_event;
  std::vector<Transition> transitions;

  /// Throws BadPolicy when indices are out of range, the sink has outgoing
  /// transitions, a guard constant is negative, or a transition uses a symbol
  /// outside the alphabet.
  void validate() const;

  bool is_accepting(LocationId l) const;
  bool in_alphabet(EventLabel e) const;
};

/// Start/end interval template: a verdict per (start, next end) pair, T when
/// the end arrives within `bound_ms` of the start. A repeated start re-arms
/// the clock; an end with no open start is ignored.
/// Throws BadPolicy when start == end or bound_ms <= 0.
TimedAutomaton build_interval_policy(EventLabel start_event, EventLabel end_event,
                                     double bound_ms, std::string name = {});

enum class Verdict : std::uint8_t { Violated, Satisfied };

inline char to_char(Verdict v) { return v == Verdict::Satisfied ? 'T' : 'F'; }

/// Clocks are kept as the time of their last reset, so a clock's value is
/// always the exact difference between two event timestamps.
struct MonitorState {
  LocationId location = 0;
  std::vector<double> reset_time_ms;
  double last_time_ms = 0.0;

  double clock_value(ClockId c) const { return last_time_ms - reset_time_ms[c]; }
};

MonitorState initial_state(const TimedAutomaton& a);

struct StepResult {
  MonitorState state;
  std::optional<Verdict> verdict;
};

/// One monitor step. Emits Satisfied when a transition enters an accepting
/// location and Violated when the automaton enters the sink.
/// Throws TimeRegression when `e` is earlier than the previous event.
StepResult step(const TimedAutomaton& a, const MonitorState& s, const TimedEvent& e);

/// Stateful online monitor over a validated automaton.
class Monitor {
 public:
  explicit Monitor(TimedAutomaton automaton);

  std::optional<Verdict> feed(const TimedEvent& e);
  const MonitorState& state() const noexcept { return state_; }
  const TimedAutomaton& automaton() const noexcept { return automaton_; }
  void reset();

 private:
  TimedAutomaton automaton_;
  MonitorState state_;
};

/// One verdict per completed policy cycle, in order.
std::vector<Verdict> run_monitor(const TimedAutomaton& a, const TimedTrace& trace);

struct CycleVerdict {
  Verdict ecg;
  Verdict ppg;
  Verdict composed;
};

struct ComposedVerdicts {
  std::vector<CycleVerdict> cycles;
  // Cycles left out upstream because one signal could not complete them.
  std::size_t dropped_cycles = 0;
};

/// composed[i] = ecg[i] AND ppg[i]. Throws LengthMismatch when the sequences
/// are not cycle-aligned.
ComposedVerdicts compose(std::span<const Verdict> ecg, std::span<const Verdict> ppg);

/// Fraction of cycles whose two monitor verdicts are equal. Throws EmptyVerdicts.
double agreement_rate(const ComposedVerdicts& c);
/// Fraction of cycles whose composed verdict is Satisfied. Throws EmptyVerdicts.
double composed_true_rate(const ComposedVerdicts& c);

/// Runs the two monitors on separate threads and composes their verdicts.
ComposedVerdicts run_parallel(const TimedAutomaton& ecg_policy, const TimedTrace& ecg_trace,
                              const TimedAutomaton& ppg_policy, const TimedTrace& ppg_trace);

/// Bounded join point for online monitoring: each side pushes verdicts as it
/// produces them, a consumer pops composed verdicts in cycle order. A side
/// blocks once it is `capacity` verdicts ahead of the other.
class VerdictJoiner {
 public:
  enum class Side { Ecg, Ppg };

  explicit VerdictJoiner(std::size_t capacity);

  void push(Side side, Verdict v);
  /// Marks a side finished; pending verdicts of the other side beyond its
  /// length will never be composed.
  void close(Side side);
  /// Blocks until a composed verdict is ready; nullopt once no further cycle
  /// can complete.
  std::optional<CycleVerdict> pop();
  /// Verdicts left unmatched after both sides closed.
  std::size_t unmatched() const;

 private:
  std::deque<Verdict>& queue(Side side) { return side == Side::Ecg ? ecg_ : ppg_; }

  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable changed_;
  std::deque<Verdict> ecg_, ppg_;
  bool ecg_closed_ = false, ppg_closed_ = false;
};

}  // namespace ecgppg

#endif  // ECGPPG_MONITOR_HPP
