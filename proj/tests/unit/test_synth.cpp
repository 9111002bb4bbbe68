#include "doctest.h"

#include <cmath>
#include <numeric>

#include "ecgppg/error.hpp"
#include "ecgppg/synth.hpp"

using namespace ecgppg;
using namespace ecgppg::synth;

namespace {

std::string bad_field(SynthSpec s) {
  try {
    s.validate();
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadSpec);
    return e.what();
  }
  return {};
}

bool on_grid(double ms, double fs) {
  const double k = ms * fs / 1000.0;
  return std::abs(k - std::round(k)) < 1e-9;
}

}  // namespace

TEST_CASE("event streams: exact PAT without jitter") {
  SynthSpec s;
  s.pat_ms = 650.0;
  const auto st = gen_event_streams(s);
  REQUIRE(st.truth.cycles.size() == 100);
  for (const auto& c : st.truth.cycles) {
    CHECK(c.systolic_ms - c.r_ms == doctest::Approx(650.0).epsilon(1e-12));
    CHECK(c.onset_ms - c.p_ms == doctest::Approx(650.0).epsilon(1e-12));
    CHECK(c.diastolic_ms - c.systolic_ms == doctest::Approx(250.0).epsilon(1e-12));
  }
  CHECK(st.truth.pat_ms == 650.0);
}

TEST_CASE("event streams: R spacing equals the RR draws") {
  const auto st = gen_event_streams(SynthSpec{});
  const auto& cyc = st.truth.cycles;
  REQUIRE(st.truth.rr_draws_ms.size() == cyc.size() - 1);
  CHECK(cyc.front().r_ms == doctest::Approx(400.0));
  const double total = std::accumulate(st.truth.rr_draws_ms.begin(), st.truth.rr_draws_ms.end(), 0.0);
  CHECK(cyc.back().r_ms - cyc.front().r_ms == doctest::Approx(total).epsilon(1e-12));
  for (double rr : st.truth.rr_draws_ms) {
    CHECK(rr >= 800.0 - 120.0);
    CHECK(rr <= 800.0 + 120.0);
  }
}

TEST_CASE("event streams: per-cycle ordering") {
  SynthSpec s;
  s.pat_jitter_ms = 5.0;
  s.n_cycles = 400;
  s.seed = 99;
  const auto st = gen_event_streams(s);
  const auto& c = st.truth.cycles;
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c[i].p_ms < c[i].q_ms);
    CHECK(c[i].q_ms < c[i].r_ms);
    CHECK(c[i].r_ms < c[i].t_ms);
    CHECK(c[i].onset_ms < c[i].systolic_ms);
    CHECK(c[i].systolic_ms < c[i].diastolic_ms);
    if (i + 1 < c.size()) {
      CHECK(c[i].t_ms < c[i + 1].p_ms);
      CHECK(c[i].diastolic_ms < c[i + 1].onset_ms);
    }
  }
  // traces hold four ECG and three PPG events per cycle
  CHECK(st.ecg.size() == 4 * c.size());
  CHECK(st.ppg.size() == 3 * c.size());
}

TEST_CASE("same seed, same output; different seed, different output") {
  SynthSpec a;
  a.seed = 17;
  const auto x = gen_waveforms(a);
  const auto y = gen_waveforms(a);
  CHECK(std::equal(x.record.ecg.samples().begin(), x.record.ecg.samples().end(),
                   y.record.ecg.samples().begin(), y.record.ecg.samples().end()));
  CHECK(std::equal(x.record.ppg.samples().begin(), x.record.ppg.samples().end(),
                   y.record.ppg.samples().begin(), y.record.ppg.samples().end()));
  a.seed = 18;
  const auto z = gen_waveforms(a);
  CHECK(z.truth.rr_draws_ms != x.truth.rr_draws_ms);
}

TEST_CASE("waveform events sit on the sample grid") {
  for (double fs : {125.0, 200.0, 360.0}) {
    SynthSpec s;
    s.fs = fs;
    s.n_cycles = 30;
    s.pat_ms = 607.065;
    const auto w = gen_waveforms(s);
    CHECK(w.record.ecg.fs() == fs);
    CHECK(w.record.ecg.size() == w.record.ppg.size());
    CHECK(on_grid(w.truth.pat_ms, fs));
    CHECK(std::abs(w.truth.pat_ms - 607.065) <= 500.0 / fs);
    for (const auto& c : w.truth.cycles) {
      CHECK(on_grid(c.r_ms, fs));
      CHECK(on_grid(c.systolic_ms, fs));
      CHECK(on_grid(c.onset_ms, fs));
      CHECK(c.systolic_ms - c.r_ms == doctest::Approx(w.truth.pat_ms));
    }
    const double last_ms = 1000.0 * static_cast<double>(w.record.ecg.size() - 1) / fs;
    CHECK(w.truth.cycles.back().diastolic_ms < last_ms);
  }
}

TEST_CASE("noiseless PPG extrema land on the true events") {
  SynthSpec s;
  s.noise_sigma = 0.0;
  s.n_cycles = 10;
  const auto w = gen_waveforms(s);
  const auto x = w.record.ppg.samples();
  auto at = [&](double ms) { return static_cast<std::size_t>(std::llround(ms * s.fs / 1000.0)); };
  for (const auto& c : w.truth.cycles) {
    const auto sp = at(c.systolic_ms);
    CHECK(x[sp] > x[sp - 1]);
    CHECK(x[sp] > x[sp + 1]);
    const auto on = at(c.onset_ms);
    CHECK(x[on] < x[on - 1]);
    CHECK(x[on] < x[on + 1]);
    const auto d = at(c.diastolic_ms);
    CHECK(x[d] > x[d - 1]);
    CHECK(x[d] > x[d + 1]);
  }
}

TEST_CASE("truth_to_cycles fills intervals") {
  const auto st = gen_event_streams(SynthSpec{});
  const auto s = truth_to_cycles(st.truth, 125.0);
  REQUIRE(s.cycles.size() == st.truth.cycles.size());
  for (std::size_t i = 0; i + 1 < s.cycles.size(); ++i) {
    const auto& c = s.cycles[i];
    const auto& t = st.truth.cycles[i];
    CHECK(*c.ecg_intervals.pr_ms == doctest::Approx(t.r_ms - t.p_ms));
    CHECK(*c.ecg_intervals.rr_ms == doctest::Approx(st.truth.rr_draws_ms[i]));
    CHECK(*c.ppg_intervals.systole_ms == doctest::Approx(t.systolic_ms - t.onset_ms));
    CHECK(*c.ppg_intervals.diastole_ms == doctest::Approx(st.truth.cycles[i + 1].onset_ms - t.systolic_ms));
    CHECK(*c.ppg_intervals.peak_to_peak_ms ==
          doctest::Approx(st.truth.cycles[i + 1].systolic_ms - t.systolic_ms));
  }
  CHECK_FALSE(s.cycles.back().ecg_intervals.rr_ms);
}

TEST_CASE("spec validation names the field") {
  SynthSpec s;
  s.n_cycles = 0;
  CHECK(bad_field(s).find("n_cycles must be positive") != std::string::npos);
  s = {};
  s.fs = -1.0;
  CHECK(bad_field(s).find("fs") != std::string::npos);
  s = {};
  s.rr_jitter_ms = -1.0;
  CHECK(bad_field(s).find("rr_jitter_ms") != std::string::npos);
  s = {};
  s.noise_sigma = std::nan("");
  CHECK(bad_field(s).find("noise_sigma") != std::string::npos);
  s = {};
  s.pat_jitter_ms = 40.0;
  CHECK(bad_field(s).find("pat_jitter_ms") != std::string::npos);
  s = {};
  s.rr_mean_ms = 300.0;
  CHECK(bad_field(s).find("rr_mean_ms") != std::string::npos);
  CHECK(bad_field(SynthSpec{}).empty());
}

TEST_CASE("ground truth JSON") {
  SynthSpec s;
  s.n_cycles = 3;
  const auto st = gen_event_streams(s);
  const auto j = truth_to_json(st.truth, s);
  CHECK(j["spec"]["n_cycles"] == 3);
  CHECK(j["cycles"].size() == 3);
  CHECK(j["cycles"][0]["r_to_systolic_ms"].get<double>() == doctest::Approx(650.0));
}

TEST_CASE("waveforms need at least 100 Hz") {
  SynthSpec s;
  s.fs = 50.0;
  try {
    gen_waveforms(s);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadSpec);
  }
}
