#include "ecgppg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ecgppg/error.hpp"

namespace ecgppg::synth {

namespace {

constexpr double kSystolicLevel = 1.0;
constexpr double kNotchLevel = 0.25;
constexpr double kDiastolicLevel = 0.4;

struct Bump {
  double centre_ms, amplitude, sigma_ms;
};

class Draws {
 public:
  explicit Draws(std::uint64_t seed) : rng_(seed) {}

  // Normal draw truncated (clamped) at three standard deviations.
  double normal(double mean, double sd) {
    if (sd <= 0.0) return mean;
    const double z = std::clamp(std_normal_(rng_), -3.0, 3.0);
    return mean + sd * z;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> std_normal_{0.0, 1.0};
};

void bad(const std::string& what) { throw Error(ErrorCode::BadSpec, what); }

enum class Shape { RaisedCosine, FastStart, FastEnd, RunOff };

struct Knot {
  double time_ms;
  double level;
  Shape to_next;
};

double blend(Shape shape, double t, double t0, double v0, double t1, double v1) {
  const double u = (t - t0) / (t1 - t0);
  double w = 0.0;
  switch (shape) {
    case Shape::RaisedCosine: w = 0.5 * (1.0 - std::cos(std::numbers::pi * u)); break;
    case Shape::FastStart: w = std::sin(0.5 * std::numbers::pi * u); break;
    case Shape::FastEnd: w = u * u; break;
    case Shape::RunOff: w = 0.5 * u + 0.5 * u * u; break;
  }
  return v0 + (v1 - v0) * w;
}

}  // namespace

void SynthSpec::validate() const {
  if (n_cycles == 0) bad("n_cycles must be positive");
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) bad(std::string(name) + " must be positive");
  };
  auto non_negative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) bad(std::string(name) + " must be non-negative");
  };
  positive(rr_mean_ms, "rr_mean_ms");
  positive(pr_mean_ms, "pr_mean_ms");
  positive(qr_mean_ms, "qr_mean_ms");
  positive(rt_mean_ms, "rt_mean_ms");
  positive(pat_ms, "pat_ms");
  positive(delta_t_ms, "delta_t_ms");
  positive(fs, "fs");
  non_negative(rr_jitter_ms, "rr_jitter_ms");
  non_negative(pr_jitter_ms, "pr_jitter_ms");
  non_negative(qr_jitter_ms, "qr_jitter_ms");
  non_negative(rt_jitter_ms, "rt_jitter_ms");
  non_negative(pat_jitter_ms, "pat_jitter_ms");
  non_negative(lead_in_ms, "lead_in_ms");
  non_negative(noise_sigma, "noise_sigma");
  if (!(pr_mean_ms < rr_mean_ms)) bad("pr_mean_ms must be below rr_mean_ms");
  if (!(pat_ms < rr_mean_ms)) bad("pat_ms must be below rr_mean_ms");

  // Worst-case draws must keep every cycle ordered p < q < r < t < next p,
  // and onset < systolic <= diastolic < next onset.
  const double pr_min = pr_mean_ms - 3.0 * pr_jitter_ms;
  const double pr_max = pr_mean_ms + 3.0 * pr_jitter_ms;
  const double qr_min = qr_mean_ms - 3.0 * qr_jitter_ms;
  const double qr_max = qr_mean_ms + 3.0 * qr_jitter_ms;
  const double rr_min = rr_mean_ms - 3.0 * rr_jitter_ms;
  const double rt_max = rt_mean_ms + 3.0 * rt_jitter_ms;
  const double pat_spread = 6.0 * pat_jitter_ms;
  if (!(qr_min > 0.0)) bad("qr_jitter_ms too large for qr_mean_ms");
  if (!(rt_mean_ms - 3.0 * rt_jitter_ms > 0.0)) bad("rt_jitter_ms too large for rt_mean_ms");
  if (!(pr_min > qr_max)) bad("pr_mean_ms/pr_jitter_ms overlap the Q wave");
  if (!(rt_max + pr_max < rr_min)) bad("rr_mean_ms too short for the T wave and next P wave");
  if (!(pr_min > pat_spread)) bad("pat_jitter_ms too large for the PR interval");
  if (!(delta_t_ms + pr_max + pat_spread < rr_min)) bad("delta_t_ms too long for the cycle length");
  if (!(lead_in_ms >= pr_max)) bad("lead_in_ms must cover the first P wave");
}

EventStreams gen_event_streams(const SynthSpec& spec) {
  spec.validate();
  Draws draws(spec.seed);
  EventStreams out;
  GroundTruth& truth = out.truth;
  truth.pat_ms = spec.pat_ms;

  double r = spec.lead_in_ms;
  for (std::size_t i = 0; i < spec.n_cycles; ++i) {
    if (i > 0) {
      const double rr = draws.normal(spec.rr_mean_ms, spec.rr_jitter_ms);
      truth.rr_draws_ms.push_back(rr);
      r += rr;
    }
    CycleTruth c{};
    c.r_ms = r;
    c.p_ms = r - draws.normal(spec.pr_mean_ms, spec.pr_jitter_ms);
    c.q_ms = r - draws.normal(spec.qr_mean_ms, spec.qr_jitter_ms);
    c.t_ms = r + draws.normal(spec.rt_mean_ms, spec.rt_jitter_ms);
    c.onset_ms = c.p_ms + spec.pat_ms + draws.normal(0.0, spec.pat_jitter_ms);
    c.systolic_ms = c.r_ms + spec.pat_ms + draws.normal(0.0, spec.pat_jitter_ms);
    c.diastolic_ms = c.systolic_ms + spec.delta_t_ms;
    truth.cycles.push_back(c);
  }

  std::vector<TimedEvent> ecg, ppg;
  for (const auto& c : truth.cycles) {
    ecg.push_back({EventLabel::EcgP, c.p_ms});
    ecg.push_back({EventLabel::EcgQ, c.q_ms});
    ecg.push_back({EventLabel::EcgR, c.r_ms});
    ecg.push_back({EventLabel::EcgT, c.t_ms});
    ppg.push_back({EventLabel::PpgOnset, c.onset_ms});
    ppg.push_back({EventLabel::PpgSystolic, c.systolic_ms});
    ppg.push_back({EventLabel::PpgDiastolic, c.diastolic_ms});
  }
  out.ecg = TimedTrace(std::move(ecg));
  out.ppg = TimedTrace(std::move(ppg));
  return out;
}

SynthRecord gen_waveforms(const SynthSpec& spec) {
  spec.validate();
  if (spec.fs < 100.0) bad("fs must be at least 100 Hz for waveform synthesis");
  const EventStreams streams = gen_event_streams(spec);
  const double period = 1000.0 / spec.fs;
  auto snap = [&](double ms) { return std::round(ms / period) * period; };

  GroundTruth truth;
  truth.rr_draws_ms = streams.truth.rr_draws_ms;
  truth.pat_ms = snap(spec.pat_ms);
  for (const auto& c : streams.truth.cycles) {
    CycleTruth q{};
    q.r_ms = snap(c.r_ms);
    q.p_ms = snap(c.p_ms);
    q.q_ms = snap(c.q_ms);
    q.t_ms = snap(c.t_ms);
    // PPG events keep their offset from the ECG event they follow, so a
    // jitter-free lag stays constant after quantization.
    q.onset_ms = q.p_ms + snap(c.onset_ms - c.p_ms);
    q.systolic_ms = q.r_ms + snap(c.systolic_ms - c.r_ms);
    q.diastolic_ms = q.systolic_ms + snap(spec.delta_t_ms);
    truth.cycles.push_back(q);
  }

  const auto& last = truth.cycles.back();
  const double end_ms = std::max(last.diastolic_ms, last.t_ms) + spec.rr_mean_ms;
  const auto n = static_cast<std::size_t>(std::ceil(end_ms / period)) + 1;

  std::vector<Bump> bumps;
  for (const auto& c : truth.cycles) {
    bumps.push_back({c.p_ms, 0.15, 20.0});
    bumps.push_back({c.q_ms, -0.15, 8.0});
    bumps.push_back({c.r_ms, 1.0, 10.0});
    bumps.push_back({c.r_ms + 30.0, -0.2, 8.0});
    bumps.push_back({c.t_ms, 0.3, 40.0});
  }
  std::vector<double> ecg(n, 0.0);
  for (const Bump& b : bumps) {
    const double reach = 6.0 * b.sigma_ms;
    const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor((b.centre_ms - reach) / period)));
    const auto hi = std::min(n - 1, static_cast<std::size_t>(std::ceil((b.centre_ms + reach) / period)));
    for (std::size_t i = lo; i <= hi; ++i) {
      const double z = (static_cast<double>(i) * period - b.centre_ms) / b.sigma_ms;
      ecg[i] += b.amplitude * std::exp(-0.5 * z * z);
    }
  }

  // PPG envelope knots. The upstroke leaves the onset steeply and the
  // run-off accelerates into the next onset, so the foot is a sharp minimum.
  std::vector<Knot> knots;
  const auto& first = truth.cycles.front();
  // Run-off of a beat before the record so the first foot is not flat.
  knots.push_back({first.onset_ms - (spec.rr_mean_ms - (first.diastolic_ms - first.onset_ms)),
                   kDiastolicLevel, Shape::RunOff});
  for (std::size_t k = 0; k < truth.cycles.size(); ++k) {
    const auto& c = truth.cycles[k];
    knots.push_back({c.onset_ms, 0.0, Shape::FastStart});
    knots.push_back({c.systolic_ms, kSystolicLevel, Shape::RaisedCosine});
    knots.push_back({0.5 * (c.systolic_ms + c.diastolic_ms), kNotchLevel, Shape::FastEnd});
    knots.push_back({c.diastolic_ms, kDiastolicLevel, Shape::RunOff});
  }
  knots.push_back({last.onset_ms + spec.rr_mean_ms, 0.0, Shape::RaisedCosine});
  std::vector<double> ppg(n, 0.0);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * period;
    if (t <= knots.front().time_ms) {
      ppg[i] = knots.front().level;
      continue;
    }
    if (t >= knots.back().time_ms) continue;
    while (seg + 1 < knots.size() && knots[seg + 1].time_ms <= t) ++seg;
    const Knot& a = knots[seg];
    const Knot& b = knots[seg + 1];
    ppg[i] = a.time_ms == t ? a.level : blend(a.to_next, t, a.time_ms, a.level, b.time_ms, b.level);
  }

  if (spec.noise_sigma > 0.0) {
    // Noise comes from its own stream so timing draws match gen_event_streams.
    Draws noise(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> d(0.0, spec.noise_sigma);
    for (double& v : ecg) v += d(noise.engine());
    for (double& v : ppg) v += d(noise.engine());
  }

  SynthRecord out{
      SyncedRecord::aligned("synth-" + std::to_string(spec.seed), Waveform(std::move(ecg), spec.fs, "ecg"),
                            Waveform(std::move(ppg), spec.fs, "ppg")),
      std::move(truth)};
  return out;
}

CycleSeries truth_to_cycles(const GroundTruth& truth, double fs_hz) {
  CycleSeries s;
  s.fs_hz = fs_hz;
  for (std::size_t i = 0; i < truth.cycles.size(); ++i) {
    const auto& t = truth.cycles[i];
    CardiacCycle c;
    c.p_ms = t.p_ms;
    c.q_ms = t.q_ms;
    c.r_ms = t.r_ms;
    c.t_ms = t.t_ms;
    c.ppg_pulse = i;
    c.onset_ms = t.onset_ms;
    c.systolic_ms = t.systolic_ms;
    c.diastolic_ms = t.diastolic_ms;
    s.cycles.push_back(c);
  }
  return compute_intervals(std::move(s));
}

nlohmann::json spec_to_json(const SynthSpec& s) {
  return {
      {"n_cycles", s.n_cycles},       {"rr_mean_ms", s.rr_mean_ms},   {"rr_jitter_ms", s.rr_jitter_ms},
      {"pr_mean_ms", s.pr_mean_ms},   {"pr_jitter_ms", s.pr_jitter_ms}, {"qr_mean_ms", s.qr_mean_ms},
      {"qr_jitter_ms", s.qr_jitter_ms}, {"rt_mean_ms", s.rt_mean_ms}, {"rt_jitter_ms", s.rt_jitter_ms},
      {"pat_ms", s.pat_ms},           {"pat_jitter_ms", s.pat_jitter_ms}, {"delta_t_ms", s.delta_t_ms},
      {"lead_in_ms", s.lead_in_ms},   {"fs_hz", s.fs},                {"noise_sigma", s.noise_sigma},
      {"seed", s.seed},
  };
}

nlohmann::json truth_to_json(const GroundTruth& truth, const SynthSpec& spec) {
  nlohmann::json cycles = nlohmann::json::array();
  for (const auto& c : truth.cycles) {
    cycles.push_back({{"p_ms", c.p_ms},
                      {"q_ms", c.q_ms},
                      {"r_ms", c.r_ms},
                      {"t_ms", c.t_ms},
                      {"onset_ms", c.onset_ms},
                      {"systolic_ms", c.systolic_ms},
                      {"diastolic_ms", c.diastolic_ms},
                      {"r_to_systolic_ms", c.systolic_ms - c.r_ms},
                      {"p_to_onset_ms", c.onset_ms - c.p_ms}});
  }
  return {{"spec", spec_to_json(spec)}, {"pat_ms_effective", truth.pat_ms}, {"cycles", cycles}};
}

}  // namespace ecgppg::synth
