#include "ecgppg/events.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <tuple>

#include "ecgppg/error.hpp"

namespace ecgppg {

namespace {

double to_ms(SampleIndex i, double fs) { return 1000.0 * static_cast<double>(i) / fs; }

std::optional<double> to_ms(const MaybeIndex& i, double fs) {
  if (!i) return std::nullopt;
  return to_ms(*i, fs);
}

struct Stamped {
  TimedEvent event;
  std::size_t cycle;
  int order;
};

TimedTrace sorted_trace(std::vector<Stamped> items) {
  std::stable_sort(items.begin(), items.end(), [](const Stamped& a, const Stamped& b) {
    return std::tie(a.event.time_ms, a.cycle, a.order) <
           std::tie(b.event.time_ms, b.cycle, b.order);
  });
  std::vector<TimedEvent> events;
  events.reserve(items.size());
  for (const auto& s : items) events.push_back(s.event);
  return TimedTrace(std::move(events));
}

std::optional<double> positive_diff(std::optional<double> later, std::optional<double> earlier) {
  if (!later || !earlier) return std::nullopt;
  const double d = *later - *earlier;
  if (!(d > 0.0)) return std::nullopt;
  return d;
}

struct EventRow {
  std::size_t cycle;
  char label;
  SampleIndex sample;
};

void write_event_rows(const std::filesystem::path& path, std::vector<EventRow> rows, double fs) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "cycle_index,event_label,sample_index,time_ms\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows)
    out << r.cycle << ',' << r.label << ',' << r.sample << ',' << to_ms(r.sample, fs) << '\n';
}

}  // namespace

char to_char(EventLabel label) { return static_cast<char>(label); }

std::optional<EventLabel> label_from_char(char c) {
  switch (c) {
    case 'p': return EventLabel::EcgP;
    case 'q': return EventLabel::EcgQ;
    case 'r': return EventLabel::EcgR;
    case 't': return EventLabel::EcgT;
    case 'F': return EventLabel::PpgOnset;
    case 'P': return EventLabel::PpgSystolic;
    case 'D': return EventLabel::PpgDiastolic;
    default: return std::nullopt;
  }
}

std::optional<EventLabel> label_from_string(std::string_view s) {
  if (s.size() != 1) return std::nullopt;
  return label_from_char(s.front());
}

TimedTrace::TimedTrace(std::vector<TimedEvent> events) : events_(std::move(events)) {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const double t = events_[i].time_ms;
    if (!std::isfinite(t) || t < 0.0) {
      throw Error(ErrorCode::BadTrace, "event " + std::to_string(i) + " has an invalid time", i);
    }
    if (i > 0 && t < events_[i - 1].time_ms) {
      throw Error(ErrorCode::TimeRegression,
                  "event " + std::to_string(i) + " is earlier than its predecessor", i);
    }
  }
}

TimedTrace to_timed_trace(const EcgEvents& ev, double fs) {
  std::vector<Stamped> items;
  for (std::size_t i = 0; i < ev.cycles(); ++i) {
    if (ev.p_peaks[i]) items.push_back({{EventLabel::EcgP, to_ms(*ev.p_peaks[i], fs)}, i, 0});
    if (ev.q_peaks[i]) items.push_back({{EventLabel::EcgQ, to_ms(*ev.q_peaks[i], fs)}, i, 1});
    items.push_back({{EventLabel::EcgR, to_ms(ev.r_peaks[i], fs)}, i, 2});
    if (ev.t_peaks[i]) items.push_back({{EventLabel::EcgT, to_ms(*ev.t_peaks[i], fs)}, i, 3});
  }
  return sorted_trace(std::move(items));
}

TimedTrace to_timed_trace(const PpgEvents& ev, double fs) {
  std::vector<Stamped> items;
  for (std::size_t i = 0; i < ev.pulses(); ++i) {
    if (ev.onsets[i]) items.push_back({{EventLabel::PpgOnset, to_ms(*ev.onsets[i], fs)}, i, 0});
    items.push_back({{EventLabel::PpgSystolic, to_ms(ev.systolic_peaks[i], fs)}, i, 1});
    if (ev.diastolic_peaks[i])
      items.push_back({{EventLabel::PpgDiastolic, to_ms(*ev.diastolic_peaks[i], fs)}, i, 2});
  }
  return sorted_trace(std::move(items));
}

CycleSeries pair_cycles(const EcgEvents& ecg, const PpgEvents& ppg, double fs, LagWindow window) {
  if (!(window.lo_ms >= 0.0) || !(window.lo_ms < window.hi_ms)) {
    throw Error(ErrorCode::BadLagWindow, "lag window requires 0 <= lo < hi");
  }
  CycleSeries series;
  series.fs_hz = fs;
  std::vector<bool> used(ppg.pulses(), false);
  std::size_t first_free = 0;

  for (std::size_t i = 0; i < ecg.cycles(); ++i) {
    CardiacCycle c;
    c.p_ms = to_ms(ecg.p_peaks[i], fs);
    c.q_ms = to_ms(ecg.q_peaks[i], fs);
    c.r_ms = to_ms(ecg.r_peaks[i], fs);
    c.t_ms = to_ms(ecg.t_peaks[i], fs);

    std::optional<std::size_t> chosen;
    std::size_t free_in_window = 0;
    // Systolic peaks are ascending, so the first free one in the window has
    // the smallest lag.
    while (first_free < ppg.pulses() && to_ms(ppg.systolic_peaks[first_free], fs) - c.r_ms < window.lo_ms)
      ++first_free;
    for (std::size_t j = first_free; j < ppg.pulses(); ++j) {
      const double lag = to_ms(ppg.systolic_peaks[j], fs) - c.r_ms;
      if (lag > window.hi_ms) break;
      if (used[j] || !(lag > 0.0)) continue;
      ++free_in_window;
      if (!chosen) chosen = j;
    }
    if (free_in_window > 1) ++series.ambiguous_pairings;
    if (chosen) {
      used[*chosen] = true;
      c.ppg_pulse = *chosen;
      c.onset_ms = to_ms(ppg.onsets[*chosen], fs);
      c.systolic_ms = to_ms(ppg.systolic_peaks[*chosen], fs);
      c.diastolic_ms = to_ms(ppg.diastolic_peaks[*chosen], fs);
    } else {
      ++series.unpaired_cycles;
    }
    series.cycles.push_back(c);
  }
  return series;
}

CycleSeries compute_intervals(CycleSeries series) {
  auto& cs = series.cycles;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    CardiacCycle& c = cs[i];
    const CardiacCycle* next = i + 1 < cs.size() ? &cs[i + 1] : nullptr;

    EcgIntervals& e = c.ecg_intervals;
    e = {};
    e.pr_ms = positive_diff(c.r_ms, c.p_ms);
    e.qr_ms = positive_diff(c.r_ms, c.q_ms);
    e.rt_ms = positive_diff(c.t_ms, c.r_ms);
    e.qt_ms = positive_diff(c.t_ms, c.q_ms);
    if (next) {
      e.rr_ms = positive_diff(next->r_ms, c.r_ms);
      e.rp_ms = positive_diff(next->p_ms, c.r_ms);
    }

    PpgIntervals& p = c.ppg_intervals;
    p = {};
    if (!c.paired()) continue;
    p.systole_ms = positive_diff(c.systolic_ms, c.onset_ms);
    p.delta_t_ms = positive_diff(c.diastolic_ms, c.systolic_ms);
    if (next && next->ppg_pulse && *next->ppg_pulse == *c.ppg_pulse + 1) {
      p.diastole_ms = positive_diff(next->onset_ms, c.systolic_ms);
      p.peak_to_peak_ms = positive_diff(next->systolic_ms, c.systolic_ms);
      p.pulse_interval_ms = positive_diff(next->onset_ms, c.onset_ms);
    }
  }
  return series;
}

void write_events_csv(const std::filesystem::path& path, const EcgEvents& ev, double fs) {
  std::vector<EventRow> rows;
  for (std::size_t i = 0; i < ev.cycles(); ++i) {
    if (ev.p_peaks[i]) rows.push_back({i, 'p', *ev.p_peaks[i]});
    if (ev.q_peaks[i]) rows.push_back({i, 'q', *ev.q_peaks[i]});
    rows.push_back({i, 'r', ev.r_peaks[i]});
    if (ev.t_peaks[i]) rows.push_back({i, 't', *ev.t_peaks[i]});
  }
  write_event_rows(path, std::move(rows), fs);
}

void write_events_csv(const std::filesystem::path& path, const PpgEvents& ev, double fs) {
  std::vector<EventRow> rows;
  for (std::size_t i = 0; i < ev.pulses(); ++i) {
    if (ev.onsets[i]) rows.push_back({i, 'F', *ev.onsets[i]});
    rows.push_back({i, 'P', ev.systolic_peaks[i]});
    if (ev.diastolic_peaks[i]) rows.push_back({i, 'D', *ev.diastolic_peaks[i]});
  }
  write_event_rows(path, std::move(rows), fs);
}

void write_intervals_csv(const std::filesystem::path& path, const CycleSeries& series) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "cycle_index,r_ms,pr_ms,qr_ms,rp_ms,rt_ms,qt_ms,rr_ms,"
         "systole_ms,diastole_ms,peak_to_peak_ms,pulse_interval_ms,delta_t_ms\n";
  auto cell = [&](const std::optional<double>& v) {
    out << ',';
    if (v) out << *v;
  };
  for (std::size_t i = 0; i < series.cycles.size(); ++i) {
    const auto& c = series.cycles[i];
    out << i << ',' << c.r_ms;
    const auto& e = c.ecg_intervals;
    const auto& p = c.ppg_intervals;
    for (const auto* v : {&e.pr_ms, &e.qr_ms, &e.rp_ms, &e.rt_ms, &e.qt_ms, &e.rr_ms,
                          &p.systole_ms, &p.diastole_ms, &p.peak_to_peak_ms,
                          &p.pulse_interval_ms, &p.delta_t_ms})
      cell(*v);
    out << '\n';
  }
}

}  // namespace ecgppg
