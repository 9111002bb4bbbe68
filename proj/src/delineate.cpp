#include "ecgppg/delineate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "ecgppg/error.hpp"
#include "ecgppg/filter.hpp"

namespace ecgppg {

namespace {

constexpr int kFilterOrder = 4;

std::size_t ms_to_samples(double ms, double fs) {
  return static_cast<std::size_t>(std::lround(ms * fs / 1000.0));
}

void require_duration(const Waveform& w, const char* what) {
  if (w.duration_ms() < 2000.0) {
    throw Error(ErrorCode::SignalTooShort,
                std::string(what) + " record shorter than 2 s");
  }
}

// Index of the maximum in [lo, hi]; ties resolve to the first occurrence.
std::size_t argmax(std::span<const double> x, std::size_t lo, std::size_t hi) {
  std::size_t best = lo;
  for (std::size_t i = lo + 1; i <= hi; ++i)
    if (x[i] > x[best]) best = i;
  return best;
}

std::size_t argmin_first(std::span<const double> x, std::size_t lo, std::size_t hi) {
  std::size_t best = lo;
  for (std::size_t i = lo + 1; i <= hi; ++i)
    if (x[i] < x[best]) best = i;
  return best;
}

// Ties resolve to the last occurrence: the foot of a rise, not its plateau.
std::size_t argmin_last(std::span<const double> x, std::size_t lo, std::size_t hi) {
  std::size_t best = lo;
  for (std::size_t i = lo + 1; i <= hi; ++i)
    if (x[i] <= x[best]) best = i;
  return best;
}

std::vector<std::size_t> local_maxima(std::span<const double> x) {
  std::vector<std::size_t> out;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i] > x[i - 1]) {
      // Walk across a plateau and keep its first sample if it falls afterwards.
      std::size_t j = i;
      while (j + 1 < n && x[j + 1] == x[i]) ++j;
      if (j + 1 < n && x[j + 1] < x[i]) out.push_back(i);
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

double prominence(std::span<const double> x, std::size_t k) {
  double left_min = x[k];
  for (std::size_t i = k; i-- > 0;) {
    if (x[i] > x[k]) break;
    left_min = std::min(left_min, x[i]);
  }
  double right_min = x[k];
  for (std::size_t i = k + 1; i < x.size(); ++i) {
    if (x[i] > x[k]) break;
    right_min = std::min(right_min, x[i]);
  }
  return x[k] - std::max(left_min, right_min);
}

std::vector<double> gaussian_smooth(std::span<const double> x, double sigma_samples) {
  if (sigma_samples <= 0.0) return {x.begin(), x.end()};
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma_samples));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double z = static_cast<double>(k) / sigma_samples;
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * z * z);
  }
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> y(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    double wsum = 0.0;
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
      const std::ptrdiff_t j = i + k;
      if (j < 0 || j >= n) continue;
      const double w = kernel[static_cast<std::size_t>(k + radius)];
      acc += w * x[static_cast<std::size_t>(j)];
      wsum += w;
    }
    y[static_cast<std::size_t>(i)] = acc / wsum;
  }
  return y;
}

double percentile(std::vector<double> v, double q) {
  const auto k = static_cast<std::size_t>(std::lround(q * static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

std::size_t clamp_sub(std::size_t a, std::size_t b) { return a > b ? a - b : 0; }

}  // namespace

bool EcgEvents::well_formed() const {
  const std::size_t n = r_peaks.size();
  if (p_peaks.size() != n || q_peaks.size() != n || t_peaks.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && r_peaks[i] <= r_peaks[i - 1]) return false;
    const SampleIndex r = r_peaks[i];
    if (q_peaks[i] && *q_peaks[i] >= r) return false;
    if (p_peaks[i] && *p_peaks[i] >= (q_peaks[i] ? *q_peaks[i] : r)) return false;
    if (t_peaks[i] && *t_peaks[i] <= r) return false;
  }
  return true;
}

bool PpgEvents::well_formed() const {
  const std::size_t n = systolic_peaks.size();
  if (onsets.size() != n || diastolic_peaks.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && systolic_peaks[i] <= systolic_peaks[i - 1]) return false;
    if (onsets[i] && *onsets[i] >= systolic_peaks[i]) return false;
    if (diastolic_peaks[i] && *diastolic_peaks[i] < systolic_peaks[i]) return false;
  }
  return true;
}

Waveform bandpass(const Waveform& w, double lo_hz, double hi_hz) {
  if (!(lo_hz > 0.0) || !(lo_hz < hi_hz) || !(hi_hz < w.fs() / 2.0)) {
    throw Error(ErrorCode::BadBand, "band-pass requires 0 < lo < hi < fs/2");
  }
  auto sections = filter::butterworth_highpass(kFilterOrder, lo_hz, w.fs());
  const auto low = filter::butterworth_lowpass(kFilterOrder, hi_hz, w.fs());
  sections.insert(sections.end(), low.begin(), low.end());
  return w.with_samples(filter::sosfiltfilt(sections, w.samples()));
}

Waveform lowpass(const Waveform& w, double hi_hz) {
  if (!(hi_hz > 0.0) || !(hi_hz < w.fs() / 2.0)) {
    throw Error(ErrorCode::BadBand, "low-pass requires 0 < cutoff < fs/2");
  }
  const auto sections = filter::butterworth_lowpass(kFilterOrder, hi_hz, w.fs());
  return w.with_samples(filter::sosfiltfilt(sections, w.samples()));
}

std::vector<SampleIndex> detect_r_peaks(const Waveform& ecg, const PanTompkinsConfig& cfg) {
  require_duration(ecg, "ECG");
  const double fs = ecg.fs();
  const auto raw = ecg.samples();
  const std::size_t n = raw.size();

  const Waveform band = bandpass(ecg, cfg.band_lo_hz, cfg.band_hi_hz);
  const auto bp = band.samples();

  // Five-point derivative spanning four samples, centred to stay zero-phase.
  std::vector<double> deriv(n, 0.0);
  for (std::size_t i = 2; i + 2 < n; ++i)
    deriv[i] = (2.0 * bp[i + 2] + bp[i + 1] - bp[i - 1] - 2.0 * bp[i - 2]) / 8.0;

  const std::size_t win = std::max<std::size_t>(1, ms_to_samples(cfg.integration_window_ms, fs));
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + deriv[i] * deriv[i];
  std::vector<double> mwi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = clamp_sub(i, win / 2);
    const std::size_t hi = std::min(n, lo + win);
    mwi[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(win);
  }
  if (*std::max_element(mwi.begin(), mwi.end()) <= 0.0) return {};

  const std::size_t refractory = ms_to_samples(cfg.refractory_ms, fs);
  const std::size_t t_check = ms_to_samples(cfg.t_wave_check_ms, fs);

  // Training phase over the first two seconds.
  const std::size_t learn = std::min(n, ms_to_samples(2000.0, fs));
  const double learn_max = *std::max_element(mwi.begin(), mwi.begin() + static_cast<std::ptrdiff_t>(learn));
  const double learn_mean =
      std::accumulate(mwi.begin(), mwi.begin() + static_cast<std::ptrdiff_t>(learn), 0.0) /
      static_cast<double>(learn);
  double spki = learn_max / 3.0;
  double npki = learn_mean / 2.0;
  auto threshold1 = [&] { return npki + 0.25 * (spki - npki); };

  auto max_slope = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t i = clamp_sub(k, win); i <= k; ++i) s = std::max(s, std::abs(deriv[i]));
    return s;
  };

  const auto candidates = local_maxima(mwi);
  std::vector<std::size_t> qrs;
  std::vector<bool> accepted(candidates.size(), false);
  std::deque<double> recent_rr;
  auto rr_mean = [&] {
    return std::accumulate(recent_rr.begin(), recent_rr.end(), 0.0) /
           static_cast<double>(recent_rr.size());
  };
  auto push_qrs = [&](std::size_t k) {
    if (!qrs.empty()) {
      recent_rr.push_back(static_cast<double>(k - qrs.back()));
      if (recent_rr.size() > 8) recent_rr.pop_front();
    }
    qrs.push_back(k);
  };

  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const std::size_t k = candidates[c];
    const double v = mwi[k];

    // Search back for a missed beat among the peaks rejected since the last QRS.
    if (!qrs.empty() && !recent_rr.empty() &&
        static_cast<double>(k - qrs.back()) > cfg.searchback_rr_factor * rr_mean()) {
      std::optional<std::size_t> best;
      for (std::size_t b = 0; b < c; ++b) {
        const std::size_t kb = candidates[b];
        if (accepted[b] || kb <= qrs.back() + refractory || kb + refractory > k) continue;
        if (mwi[kb] < 0.5 * threshold1()) continue;
        if (!best || mwi[kb] > mwi[candidates[*best]]) best = b;
      }
      if (best) {
        accepted[*best] = true;
        spki = 0.25 * mwi[candidates[*best]] + 0.75 * spki;
        push_qrs(candidates[*best]);
      }
    }

    if (!qrs.empty() && k - qrs.back() < refractory) {
      if (v > mwi[qrs.back()]) {
        // Keep the larger of two peaks inside one refractory period.
        qrs.back() = k;
        accepted[c] = true;
      }
      continue;
    }
    if (v >= threshold1()) {
      if (!qrs.empty() && k - qrs.back() < t_check && max_slope(k) < 0.5 * max_slope(qrs.back())) {
        npki = 0.125 * v + 0.875 * npki;
        continue;
      }
      accepted[c] = true;
      spki = 0.125 * v + 0.875 * spki;
      push_qrs(k);
    } else {
      npki = 0.125 * v + 0.875 * npki;
    }
  }

  // Move each energy peak onto the waveform.
  const std::size_t half = win / 2 + 2;
  const std::size_t refine = std::max<std::size_t>(1, ms_to_samples(25.0, fs));
  std::vector<SampleIndex> r;
  r.reserve(qrs.size());
  for (std::size_t k : qrs) {
    const std::size_t j = argmax(bp, clamp_sub(k, half), std::min(n - 1, k + half));
    r.push_back(argmax(raw, clamp_sub(j, refine), std::min(n - 1, j + refine)));
  }
  std::sort(r.begin(), r.end());

  std::vector<SampleIndex> out;
  for (SampleIndex idx : r) {
    if (!out.empty() && idx - out.back() < std::max<std::size_t>(refractory, 1)) {
      if (raw[idx] > raw[out.back()]) out.back() = idx;
      continue;
    }
    out.push_back(idx);
  }
  return out;
}

EcgEvents delineate_ecg(const Waveform& ecg, const std::vector<SampleIndex>& r_peaks,
                        const EcgWindows& windows) {
  const auto x = ecg.samples();
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const double fs = ecg.fs();
  const auto q_len = static_cast<std::ptrdiff_t>(ms_to_samples(windows.q_before_ms, fs));
  const auto p_len = static_cast<std::ptrdiff_t>(ms_to_samples(windows.p_before_ms, fs));
  const auto t_min = static_cast<std::ptrdiff_t>(ms_to_samples(windows.t_after_min_ms, fs));
  const auto t_max = static_cast<std::ptrdiff_t>(ms_to_samples(windows.t_after_max_ms, fs));

  EcgEvents ev;
  ev.r_peaks = r_peaks;
  const std::size_t cycles = r_peaks.size();
  ev.p_peaks.assign(cycles, std::nullopt);
  ev.q_peaks.assign(cycles, std::nullopt);
  ev.t_peaks.assign(cycles, std::nullopt);

  for (std::size_t i = 0; i < cycles; ++i) {
    const auto r = static_cast<std::ptrdiff_t>(r_peaks[i]);
    const std::ptrdiff_t prev_r = i > 0 ? static_cast<std::ptrdiff_t>(r_peaks[i - 1]) : -1;
    const std::ptrdiff_t next_r =
        i + 1 < cycles ? static_cast<std::ptrdiff_t>(r_peaks[i + 1]) : n;

    // Q in [r - q_len, r)
    if (r - q_len >= 0 && q_len > 0) {
      const std::ptrdiff_t lo = std::max(r - q_len, prev_r + 1);
      if (lo <= r - 1)
        ev.q_peaks[i] = argmin_first(x, static_cast<std::size_t>(lo), static_cast<std::size_t>(r - 1));
    }
    // P in [r - p_len, r - q_len)
    if (r - p_len >= 0) {
      const std::ptrdiff_t lo = std::max(r - p_len, prev_r + t_min + 1);
      std::ptrdiff_t hi = r - q_len - 1;
      if (ev.q_peaks[i]) hi = std::min(hi, static_cast<std::ptrdiff_t>(*ev.q_peaks[i]) - 1);
      if (lo <= hi)
        ev.p_peaks[i] = argmax(x, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
    }
    // T in (r + t_min, r + t_max]
    if (r + t_max < n) {
      const std::ptrdiff_t lo = r + t_min + 1;
      const std::ptrdiff_t hi = std::min(r + t_max, next_r - q_len - 1);
      if (lo <= hi)
        ev.t_peaks[i] = argmax(x, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
    }
  }
  return ev;
}

PpgEvents detect_ppg_events(const Waveform& ppg, std::optional<double> expected_rate_hint,
                            const PpgDetectorConfig& cfg) {
  require_duration(ppg, "PPG");
  const double fs = ppg.fs();
  const auto x = ppg.samples();
  const std::size_t n = x.size();

  const double sigma = cfg.smoothing_sigma_ms * fs / 1000.0;
  const std::vector<double> s = gaussian_smooth(x, sigma);
  const std::size_t kernel_radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
  const std::size_t refine = std::max(ms_to_samples(cfg.refine_ms, fs), kernel_radius + 1);
  // Extrema are moved from the heavily smoothed signal onto a lightly
  // smoothed copy (or the input itself when refine_sigma_ms is 0).
  const double light_sigma = cfg.refine_sigma_ms * fs / 1000.0;
  const std::vector<double> light = light_sigma > 0.0 ? gaussian_smooth(x, light_sigma)
                                                      : std::vector<double>(x.begin(), x.end());
  const std::size_t snap = cfg.snap_samples;

  PpgEvents ev;
  const double range = percentile(s, 0.95) - percentile(s, 0.05);
  if (!(range > 0.0)) return ev;

  double min_distance_ms = cfg.min_peak_distance_ms;
  if (expected_rate_hint && *expected_rate_hint > 0.0)
    min_distance_ms = 0.5 * 60000.0 / *expected_rate_hint;
  const std::size_t min_distance = ms_to_samples(min_distance_ms, fs);

  const auto maxima = local_maxima(s);
  std::vector<std::size_t> candidates;
  for (std::size_t k : maxima)
    if (prominence(s, k) >= cfg.min_prominence_fraction * range) candidates.push_back(k);

  // Tallest first; drop anything within the minimum spacing of a kept peak.
  std::vector<std::size_t> by_height = candidates;
  std::stable_sort(by_height.begin(), by_height.end(),
                   [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t k : by_height) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](std::size_t m) {
      return (k > m ? k - m : m - k) < min_distance;
    });
    if (!clash) kept.push_back(k);
  }
  std::sort(kept.begin(), kept.end());

  std::vector<std::size_t> smoothed_peaks;
  for (std::size_t k : kept) {
    std::size_t j = argmax(light, clamp_sub(k, refine), std::min(n - 1, k + refine));
    j = argmax(x, clamp_sub(j, snap), std::min(n - 1, j + snap));
    if (!ev.systolic_peaks.empty() && j <= ev.systolic_peaks.back()) continue;
    ev.systolic_peaks.push_back(j);
    smoothed_peaks.push_back(k);
  }

  const std::size_t pulses = ev.systolic_peaks.size();
  ev.onsets.assign(pulses, std::nullopt);
  ev.diastolic_peaks.assign(pulses, std::nullopt);

  for (std::size_t i = 0; i < pulses; ++i) {
    const std::size_t lo = i == 0 ? 0 : ev.systolic_peaks[i - 1] + 1;
    if (ev.systolic_peaks[i] == 0 || lo > ev.systolic_peaks[i] - 1) continue;
    const std::size_t hi = ev.systolic_peaks[i] - 1;
    const std::size_t j = argmin_last(s, lo, hi);
    std::size_t onset =
        argmin_last(light, std::max(lo, clamp_sub(j, refine)), std::min(hi, j + refine));
    onset = argmin_last(x, std::max(lo, clamp_sub(onset, snap)), std::min(hi, onset + snap));
    // A minimum on the first sample is a truncated pulse, not an onset.
    if (onset > 0) ev.onsets[i] = onset;
  }

  for (std::size_t i = 0; i < pulses; ++i) {
    const std::size_t sys = ev.systolic_peaks[i];
    std::size_t end = n;
    if (i + 1 < pulses) end = ev.onsets[i + 1] ? *ev.onsets[i + 1] : ev.systolic_peaks[i + 1];
    const std::size_t start = std::max(sys, smoothed_peaks[i]);
    std::optional<std::size_t> best;
    for (std::size_t k : maxima) {
      if (k <= start || k >= end) continue;
      if (prominence(s, k) < cfg.diastolic_prominence_fraction * range) continue;
      if (!best || s[k] > s[*best]) best = k;
    }
    if (!best) continue;
    const std::size_t notch = argmin_first(s, start, *best);
    const std::size_t lo = std::max({notch, clamp_sub(*best, refine), sys + 1});
    const std::size_t hi = std::min(end - 1, *best + refine);
    if (lo > hi) continue;
    const std::size_t d = argmax(light, lo, hi);
    ev.diastolic_peaks[i] = argmax(x, std::max(lo, clamp_sub(d, snap)), std::min(hi, d + snap));
  }
  return ev;
}

}  // namespace ecgppg
