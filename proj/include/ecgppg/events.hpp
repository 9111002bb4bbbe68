#ifndef ECGPPG_EVENTS_HPP
#define ECGPPG_EVENTS_HPP

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "ecgppg/delineate.hpp"

namespace ecgppg {

/// Event alphabet shared by traces and monitors. ECG events are lower case,
/// PPG events upper case: F = onset, P = systolic peak, D = diastolic peak.
enum class EventLabel : char {
  EcgP = 'p',
  EcgQ = 'q',
  EcgR = 'r',
  EcgT = 't',
  PpgOnset = 'F',
  PpgSystolic = 'P',
  PpgDiastolic = 'D',
};

char to_char(EventLabel label);
/// nullopt for characters outside the alphabet.
std::optional<EventLabel> label_from_char(char c);
std::optional<EventLabel> label_from_string(std::string_view s);

struct TimedEvent {
  EventLabel label;
  double time_ms;

  friend bool operator==(const TimedEvent&, const TimedEvent&) = default;
};

/// Events in non-decreasing time order.
class TimedTrace {
 public:
  TimedTrace() = default;
  /// Throws BadTrace on a negative/non-finite time, TimeRegression (with the
  /// offending position) when times decrease.
  explicit TimedTrace(std::vector<TimedEvent> events);

  const std::vector<TimedEvent>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  auto begin() const noexcept { return events_.begin(); }
  auto end() const noexcept { return events_.end(); }

 private:
  std::vector<TimedEvent> events_;
};

/// time_ms = 1000 * sample / fs; output sorted by time, ties kept in cycle
/// then anatomical order.
TimedTrace to_timed_trace(const EcgEvents& events, double fs_hz);
TimedTrace to_timed_trace(const PpgEvents& events, double fs_hz);

struct EcgIntervals {
  std::optional<double> pr_ms, qr_ms, rp_ms, rt_ms, qt_ms, rr_ms;
};

struct PpgIntervals {
  std::optional<double> systole_ms, diastole_ms, peak_to_peak_ms, pulse_interval_ms, delta_t_ms;
};

/// One ECG beat (anchored on R) and the PPG pulse paired with it, if any.
struct CardiacCycle {
  std::optional<double> p_ms, q_ms;
  double r_ms = 0.0;
  std::optional<double> t_ms;

  std::optional<std::size_t> ppg_pulse;  // index into the PPG pulse sequence
  std::optional<double> onset_ms, systolic_ms, diastolic_ms;

  EcgIntervals ecg_intervals;
  PpgIntervals ppg_intervals;

  bool paired() const noexcept { return ppg_pulse.has_value(); }
  std::optional<double> lag_ms() const {
    if (!systolic_ms) return std::nullopt;
    return *systolic_ms - r_ms;
  }
};

struct CycleSeries {
  std::vector<CardiacCycle> cycles;
  double fs_hz = 0.0;
  // Cycles with more than one free PPG peak in the lag window.
  std::size_t ambiguous_pairings = 0;
  std::size_t unpaired_cycles = 0;
};

struct LagWindow {
  double lo_ms = 200.0;
  double hi_ms = 1200.0;
};

/// Pairs each R peak with the free PPG systolic peak of smallest lag inside
/// [lo, hi]. A PPG peak is used at most once. Throws BadLagWindow unless
/// 0 <= lo < hi.
CycleSeries pair_cycles(const EcgEvents& ecg, const PpgEvents& ppg, double fs_hz,
                        LagWindow window = {});

/// Fills the interval records. Intervals that reach into the next beat need
/// the next ECG cycle (ECG side) or the immediately following PPG pulse
/// (PPG side); otherwise they stay absent. Non-positive values are dropped.
CycleSeries compute_intervals(CycleSeries series);

/// cycle_index,event_label,sample_index,time_ms
void write_events_csv(const std::filesystem::path& path, const EcgEvents& events, double fs_hz);
void write_events_csv(const std::filesystem::path& path, const PpgEvents& events, double fs_hz);

/// One row per cycle, one column per interval, empty cell when absent.
void write_intervals_csv(const std::filesystem::path& path, const CycleSeries& series);

}  // namespace ecgppg

#endif  // ECGPPG_EVENTS_HPP
