#ifndef ECGPPG_SYNTH_HPP
#define ECGPPG_SYNTH_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"
#include "ecgppg/events.hpp"
#include "ecgppg/ingest.hpp"

namespace ecgppg::synth {

/// Parameters of a synthetic recording. Per-cycle durations are drawn from
/// normal distributions truncated at three standard deviations.
struct SynthSpec {
  std::size_t n_cycles = 100;
  double rr_mean_ms = 800.0;
  double rr_jitter_ms = 40.0;
  double pr_mean_ms = 160.0;
  double pr_jitter_ms = 15.0;
  double qr_mean_ms = 40.0;
  double qr_jitter_ms = 4.0;
  double rt_mean_ms = 280.0;
  double rt_jitter_ms = 15.0;
  double pat_ms = 650.0;
  // Independent per-event jitter added to each PPG event time.
  double pat_jitter_ms = 0.0;
  double delta_t_ms = 250.0;
  double lead_in_ms = 400.0;
  double fs = 125.0;
  double noise_sigma = 0.05;
  std::uint64_t seed = 1;

  /// Throws BadSpec naming the offending field.
  void validate() const;
};

struct CycleTruth {
  double p_ms, q_ms, r_ms, t_ms;
  double onset_ms, systolic_ms, diastolic_ms;
};

struct GroundTruth {
  std::vector<CycleTruth> cycles;
  std::vector<double> rr_draws_ms;  // r[i+1] - r[i]
  double pat_ms = 0.0;              // effective lag after any sample quantization
};

struct EventStreams {
  TimedTrace ecg;
  TimedTrace ppg;
  GroundTruth truth;
};

/// ECG traces (p, q, r, t) and PPG traces (F, P, D). PPG onset follows the
/// P peak and the systolic peak follows R, both by pat_ms plus jitter; the
/// diastolic peak trails the systolic peak by delta_t_ms. Times are not
/// quantized. Deterministic for a fixed seed.
EventStreams gen_event_streams(const SynthSpec& spec);

struct SynthRecord {
  SyncedRecord record;
  GroundTruth truth;
};

/// Waveforms sampled at spec.fs with every event on the sample grid.
/// ECG is a sum of Gaussian bumps (P, Q, R, S, T); PPG is a piecewise
/// smooth pulse (steep upstroke, dicrotic notch, accelerating run-off) whose
/// extrema sit exactly on onset, systolic and diastolic events.
/// Requires fs >= 100.
SynthRecord gen_waveforms(const SynthSpec& spec);

/// Fully paired cycles built straight from ground truth, intervals filled.
CycleSeries truth_to_cycles(const GroundTruth& truth, double fs_hz);

nlohmann::json truth_to_json(const GroundTruth& truth, const SynthSpec& spec);
nlohmann::json spec_to_json(const SynthSpec& spec);

}  // namespace ecgppg::synth

#endif  // ECGPPG_SYNTH_HPP
