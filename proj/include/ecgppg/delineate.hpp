#ifndef ECGPPG_DELINEATE_HPP
#define ECGPPG_DELINEATE_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "ecgppg/ingest.hpp"

namespace ecgppg {

using SampleIndex = std::size_t;
using MaybeIndex = std::optional<SampleIndex>;

/// ECG fiducials. `p_peaks`, `q_peaks` and `t_peaks` are aligned with
/// `r_peaks`; an absent entry means the event was not found for that cycle.
struct EcgEvents {
  std::vector<SampleIndex> r_peaks;
  std::vector<MaybeIndex> p_peaks;
  std::vector<MaybeIndex> q_peaks;
  std::vector<MaybeIndex> t_peaks;

  std::size_t cycles() const noexcept { return r_peaks.size(); }
  /// True when the per-cycle ordering p < q < r < t holds for present events
  /// and r_peaks are strictly ascending.
  bool well_formed() const;
};

/// PPG fiducials, one entry per detected pulse. Systolic peaks anchor the
/// pulses; onsets and diastolic peaks are aligned with them.
struct PpgEvents {
  std::vector<MaybeIndex> onsets;
  std::vector<SampleIndex> systolic_peaks;
  std::vector<MaybeIndex> diastolic_peaks;

  std::size_t pulses() const noexcept { return systolic_peaks.size(); }
  bool well_formed() const;
};

/// Zero-phase Butterworth band-pass (4th-order low and high sections, run
/// forward and backward). Requires 0 < lo < hi < fs/2.
Waveform bandpass(const Waveform& w, double lo_hz, double hi_hz);

/// Zero-phase 4th-order Butterworth low-pass. Requires 0 < hi < fs/2.
Waveform lowpass(const Waveform& w, double hi_hz);

struct PanTompkinsConfig {
  double band_lo_hz = 5.0;
  double band_hi_hz = 15.0;
  double integration_window_ms = 150.0;
  double refractory_ms = 200.0;
  // Peaks closer than this to the previous QRS are checked for T-wave slope.
  double t_wave_check_ms = 360.0;
  // Missed-beat search-back triggers after this multiple of the mean RR.
  double searchback_rr_factor = 1.66;
};

/// Pan-Tompkins QRS detection. R is placed on the largest band-passed
/// deflection near each integrated-energy peak, then refined onto the input
/// waveform's maximum. Within a refractory period only the larger peak is
/// kept. Throws SignalTooShort for records under 2 s.
std::vector<SampleIndex> detect_r_peaks(const Waveform& ecg,
                                        const PanTompkinsConfig& cfg = {});

/// Search windows relative to R, in milliseconds.
struct EcgWindows {
  double q_before_ms = 80.0;   // Q in [R - q_before, R)
  double p_before_ms = 300.0;  // P in [R - p_before, R - q_before)
  double t_after_min_ms = 80.0;  // T in (R + t_after_min, R + t_after_max]
  double t_after_max_ms = 400.0;
};

/// P = maximum in the P window, Q = minimum in the Q window, T = maximum in
/// the T window. A window that reaches outside the record yields an absent
/// event; windows are shortened so they never cross a neighbouring R.
EcgEvents delineate_ecg(const Waveform& ecg, const std::vector<SampleIndex>& r_peaks,
                        const EcgWindows& windows = {});

struct PpgDetectorConfig {
  double smoothing_sigma_ms = 20.0;
  // Candidate systolic peaks need this much prominence relative to the
  // 5th-95th percentile range of the smoothed signal.
  double min_prominence_fraction = 0.3;
  double diastolic_prominence_fraction = 0.01;
  double min_peak_distance_ms = 300.0;
  // Radius used to move smoothed extrema onto the refinement signal.
  double refine_ms = 60.0;
  // Smoothing of the refinement signal; 0 refines onto the input samples.
  double refine_sigma_ms = 8.0;
  // Last step: move onto the input's extremum within this many samples.
  std::size_t snap_samples = 1;
};

/// Systolic peak = prominent local maximum per pulse; onset = minimum between
/// the previous systolic peak (or record start) and this one; diastolic peak =
/// largest local maximum between the systolic peak and the next onset.
/// A rate hint (beats/min) tightens the minimum peak spacing to half a beat.
/// Throws SignalTooShort for records under 2 s.
PpgEvents detect_ppg_events(const Waveform& ppg,
                            std::optional<double> expected_rate_hint = std::nullopt,
                            const PpgDetectorConfig& cfg = {});

}  // namespace ecgppg

#endif  // ECGPPG_DELINEATE_HPP
