#include "ecgppg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ecgppg/policy_io.hpp"
#include "ecgppg/trace_io.hpp"

namespace ecgppg::pipeline {

using nlohmann::json;

namespace {

json or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json error_json(const std::optional<ErrorCode>& code, const std::string& message) {
  if (!code) return nullptr;
  return json{{"code", std::string(to_string(*code))}, {"message", message}};
}

double threshold_value(const json& v, const std::string& key) {
  if (!v.is_number()) throw Error(ErrorCode::BadSpec, "threshold " + key + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorCode::BadSpec, "threshold " + key + " must be finite");
  return d;
}

struct LabeledTime {
  EventLabel label;
  double time_ms;
  std::size_t cycle;
};

std::vector<LabeledTime> ecg_stream(const CycleSeries& s) {
  std::vector<LabeledTime> out;
  for (std::size_t i = 0; i < s.cycles.size(); ++i) {
    const auto& c = s.cycles[i];
    if (c.p_ms) out.push_back({EventLabel::EcgP, *c.p_ms, i});
    if (c.q_ms) out.push_back({EventLabel::EcgQ, *c.q_ms, i});
    out.push_back({EventLabel::EcgR, c.r_ms, i});
    if (c.t_ms) out.push_back({EventLabel::EcgT, *c.t_ms, i});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const LabeledTime& a, const LabeledTime& b) { return a.time_ms < b.time_ms; });
  return out;
}

std::vector<LabeledTime> ppg_stream(const CycleSeries& s) {
  std::vector<LabeledTime> out;
  for (std::size_t i = 0; i < s.cycles.size(); ++i) {
    const auto& c = s.cycles[i];
    if (!c.paired()) continue;
    if (c.onset_ms) out.push_back({EventLabel::PpgOnset, *c.onset_ms, i});
    if (c.systolic_ms) out.push_back({EventLabel::PpgSystolic, *c.systolic_ms, i});
    if (c.diastolic_ms) out.push_back({EventLabel::PpgDiastolic, *c.diastolic_ms, i});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const LabeledTime& a, const LabeledTime& b) { return a.time_ms < b.time_ms; });
  return out;
}

TimedTrace to_trace(const std::vector<LabeledTime>& stream) {
  std::vector<TimedEvent> ev;
  ev.reserve(stream.size());
  for (const auto& e : stream) ev.push_back({e.label, e.time_ms});
  return TimedTrace(std::move(ev));
}

bool next_pulse(const CycleSeries& s, std::size_t i, std::size_t j, bool ppg) {
  if (j == i) return true;
  if (j != i + 1) return false;
  if (!ppg) return true;
  const auto& a = s.cycles[i];
  const auto& b = s.cycles[j];
  return a.ppg_pulse && b.ppg_pulse && *b.ppg_pulse == *a.ppg_pulse + 1;
}

// Start event of cycle i and the first end event after it, if no other start
// intervenes and the end belongs to this beat or the next one.
std::optional<std::pair<double, double>> cycle_interval(const CycleSeries& s,
                                                        const std::vector<LabeledTime>& stream,
                                                        std::size_t i, EventLabel start,
                                                        EventLabel end, bool ppg) {
  std::size_t k = 0;
  while (k < stream.size() && !(stream[k].cycle == i && stream[k].label == start)) ++k;
  if (k == stream.size()) return std::nullopt;
  for (std::size_t j = k + 1; j < stream.size(); ++j) {
    if (stream[j].label == start) return std::nullopt;
    if (stream[j].label == end) {
      if (!next_pulse(s, i, stream[j].cycle, ppg)) return std::nullopt;
      return std::make_pair(stream[k].time_ms, stream[j].time_ms);
    }
  }
  return std::nullopt;
}

std::vector<Verdict> run_intervals(const SignalPolicy& policy,
                                   const std::vector<std::pair<double, double>>& spans) {
  Monitor m(policy.automaton);
  std::vector<Verdict> out;
  out.reserve(spans.size());
  for (const auto& [t0, t1] : spans) {
    m.reset();
    m.feed({policy.interval->first, t0});
    auto v = m.feed({policy.interval->second, t1});
    out.push_back(v.value_or(Verdict::Violated));
  }
  return out;
}

ComposedVerdicts cycle_aligned(const CycleSeries& s, const PolicyPair& policy) {
  const auto ecg = ecg_stream(s);
  const auto ppg = ppg_stream(s);
  std::vector<std::pair<double, double>> ecg_spans, ppg_spans;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < s.cycles.size(); ++i) {
    if (!s.cycles[i].paired()) continue;
    auto a = cycle_interval(s, ecg, i, policy.ecg.interval->first, policy.ecg.interval->second, false);
    auto b = cycle_interval(s, ppg, i, policy.ppg.interval->first, policy.ppg.interval->second, true);
    if (a && b) {
      ecg_spans.push_back(*a);
      ppg_spans.push_back(*b);
    } else {
      ++dropped;
    }
  }
  auto fe = std::async(std::launch::async, [&] { return run_intervals(policy.ecg, ecg_spans); });
  auto fp = std::async(std::launch::async, [&] { return run_intervals(policy.ppg, ppg_spans); });
  const auto ve = fe.get();
  const auto vp = fp.get();
  auto out = compose(ve, vp);
  out.dropped_cycles = dropped;
  return out;
}

void fill_rates(MonitorOutcome& out) {
  if (out.verdicts.cycles.empty()) {
    out.error = ErrorCode::EmptyVerdicts;
    out.message = "no cycle produced verdicts on both signals";
    return;
  }
  out.agreement = agreement_rate(out.verdicts);
  out.composed_true = composed_true_rate(out.verdicts);
}

RegressionOutcome regress(const CycleSeries& s, bool p_to_onset) {
  RegressionOutcome out;
  const auto [x, y] = event_pairs(s, p_to_onset);
  try {
    out.result = stats::ols_lag(x, y);
  } catch (const Error& e) {
    out.error = e.code();
    out.message = e.what();
  }
  return out;
}

json regression_json(const RegressionOutcome& r) {
  json j;
  if (r.result) {
    j["slope_b1"] = r.result->slope_b1;
    j["lag_time_ms"] = r.result->lag_time_ms;
    j["r_squared"] = r.result->r_squared;
    j["n"] = r.result->n;
  } else {
    j["slope_b1"] = nullptr;
    j["lag_time_ms"] = nullptr;
    j["r_squared"] = nullptr;
    j["n"] = 0;
  }
  j["error"] = error_json(r.error, r.message);
  return j;
}

json monitor_json(const MonitorOutcome& m, bool with_log) {
  json j;
  j["name"] = m.name;
  j["cycles"] = m.verdicts.cycles.size();
  j["dropped_cycles"] = m.verdicts.dropped_cycles;
  j["agreement_rate"] = or_null(m.agreement);
  j["composed_true_rate"] = or_null(m.composed_true);
  j["error"] = error_json(m.error, m.message);
  if (with_log) {
    json log = json::array();
    for (const auto& c : m.verdicts.cycles) {
      log.push_back(std::string{to_char(c.ecg), to_char(c.ppg), to_char(c.composed)});
    }
    j["verdict_log"] = std::move(log);
  }
  return j;
}

json observation(std::optional<double> value, json threshold, std::optional<bool> passed) {
  return json{{"value", or_null(value)},
              {"threshold", std::move(threshold)},
              {"passed", passed ? json(*passed) : json(nullptr)}};
}

std::optional<double> cell_r(const stats::CellResult& c) {
  if (!c.result) return std::nullopt;
  return c.result->r;
}

std::string deletion_name(stats::Deletion d) {
  return d == stats::Deletion::Listwise ? "listwise" : "pairwise";
}

std::string fixed(double v, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

std::string num_or_dash(const json& v, int digits) {
  return v.is_number() ? fixed(v.get<double>(), digits) : std::string("-");
}

}  // namespace

Thresholds Thresholds::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::BadSpec, "thresholds must be a JSON object");
  Thresholds t;
  for (const auto& [key, v] : j.items()) {
    if (key == "obs1_min_r") t.obs1_min_r = threshold_value(v, key);
    else if (key == "obs2_slope_tolerance") t.obs2_slope_tolerance = threshold_value(v, key);
    else if (key == "obs3_min_r") t.obs3_min_r = threshold_value(v, key);
    else if (key == "obs4_min_r") t.obs4_min_r = threshold_value(v, key);
    else if (key == "lag_min_ms") t.lag_min_ms = threshold_value(v, key);
    else if (key == "lag_max_ms") t.lag_max_ms = threshold_value(v, key);
    else if (key == "agreement_min") t.agreement_min = threshold_value(v, key);
    else throw Error(ErrorCode::BadSpec, "unknown threshold " + key);
  }
  if (t.lag_min_ms > t.lag_max_ms) throw Error(ErrorCode::BadSpec, "lag_min_ms exceeds lag_max_ms");
  return t;
}

json Thresholds::to_json() const {
  return json{{"obs1_min_r", obs1_min_r},       {"obs2_slope_tolerance", obs2_slope_tolerance},
              {"obs3_min_r", obs3_min_r},       {"obs4_min_r", obs4_min_r},
              {"lag_min_ms", lag_min_ms},       {"lag_max_ms", lag_max_ms},
              {"agreement_min", agreement_min}};
}

SignalPolicy interval_signal_policy(EventLabel start, EventLabel end, double bound_ms) {
  return {build_interval_policy(start, end, bound_ms), std::make_pair(start, end)};
}

SignalPolicy load_signal_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::BadPolicy, path.string() + ": " + ex.what());
  }
  SignalPolicy out{policy_from_json(j), std::nullopt};
  if (!j.contains("transitions")) {
    const auto s = label_from_string(j.at("start_event").get<std::string>());
    const auto e = label_from_string(j.at("end_event").get<std::string>());
    out.interval = std::make_pair(*s, *e);
  }
  return out;
}

PolicyPair pr_systole_policy(double guard_ms) {
  PolicyPair p{"pr_systole", interval_signal_policy(EventLabel::EcgP, EventLabel::EcgR, guard_ms),
               interval_signal_policy(EventLabel::PpgOnset, EventLabel::PpgSystolic, guard_ms)};
  p.ecg.automaton.name = "pr_interval";
  p.ppg.automaton.name = "systole_period";
  return p;
}

std::vector<PolicyPair> AnalysisConfig::effective_policies() const {
  if (!policies.empty()) return policies;
  return {pr_systole_policy(guard_ms)};
}

MonitorOutcome monitor_cycles(const CycleSeries& cycles, const PolicyPair& policy) {
  MonitorOutcome out;
  out.name = policy.name;
  try {
    if (policy.ecg.interval && policy.ppg.interval) {
      out.verdicts = cycle_aligned(cycles, policy);
    } else {
      const auto ecg = to_trace(ecg_stream(cycles));
      const auto ppg = to_trace(ppg_stream(cycles));
      out.verdicts = run_parallel(policy.ecg.automaton, ecg, policy.ppg.automaton, ppg);
    }
  } catch (const Error& e) {
    out.error = e.code();
    out.message = e.what();
    return out;
  }
  fill_rates(out);
  return out;
}

std::pair<std::vector<double>, std::vector<double>> event_pairs(const CycleSeries& cycles,
                                                                 bool p_to_onset) {
  std::pair<std::vector<double>, std::vector<double>> out;
  for (const auto& c : cycles.cycles) {
    if (!c.paired()) continue;
    if (p_to_onset) {
      if (!c.p_ms || !c.onset_ms) continue;
      out.first.push_back(*c.p_ms);
      out.second.push_back(*c.onset_ms);
    } else {
      if (!c.systolic_ms) continue;
      out.first.push_back(c.r_ms);
      out.second.push_back(*c.systolic_ms);
    }
  }
  return out;
}

RecordAnalysis analyze_record(const SyncedRecord& record, const AnalysisConfig& cfg) {
  RecordAnalysis a;
  a.record_id = record.record_id;
  const double fs = record.ecg.fs();
  a.fs_hz = fs;
  const double nyq_cap = 0.45 * fs;

  Waveform ecg = record.ecg;
  if (cfg.prefilter.ecg_band) {
    const double lo = cfg.prefilter.ecg_band->first;
    const double hi = std::min(cfg.prefilter.ecg_band->second, nyq_cap);
    if (ecg.duration_ms() >= 2000.0) ecg = bandpass(ecg, lo, hi);
  }
  Waveform ppg = record.ppg;
  if (cfg.prefilter.ppg_lowpass_hz && *cfg.prefilter.ppg_lowpass_hz < nyq_cap &&
      ppg.duration_ms() >= 2000.0) {
    ppg = lowpass(ppg, *cfg.prefilter.ppg_lowpass_hz);
  }

  const auto r = detect_r_peaks(ecg, cfg.pan_tompkins);
  a.ecg = delineate_ecg(ecg, r, cfg.ecg_windows);

  std::optional<double> hint;
  if (r.size() >= 3) {
    std::vector<double> rr;
    for (std::size_t i = 1; i < r.size(); ++i) rr.push_back(static_cast<double>(r[i] - r[i - 1]));
    std::nth_element(rr.begin(), rr.begin() + rr.size() / 2, rr.end());
    hint = 60.0 * fs / rr[rr.size() / 2];
  }
  a.ppg = detect_ppg_events(ppg, hint, cfg.ppg_detector);

  a.cycles = compute_intervals(pair_cycles(a.ecg, a.ppg, fs, cfg.lag_window));
  a.p_onset = regress(a.cycles, true);
  a.r_systolic = regress(a.cycles, false);
  for (const auto& p : cfg.effective_policies()) a.monitors.push_back(monitor_cycles(a.cycles, p));
  return a;
}

void write_record_artifacts(const std::filesystem::path& dir, const RecordAnalysis& a) {
  std::filesystem::create_directories(dir);
  write_events_csv(dir / "ecg_events.csv", a.ecg, a.fs_hz);
  write_events_csv(dir / "ppg_events.csv", a.ppg, a.fs_hz);
  write_intervals_csv(dir / "intervals.csv", a.cycles);
  for (const auto& m : a.monitors) {
    std::optional<VerdictSummary> summary;
    if (m.agreement && m.composed_true) summary = VerdictSummary{*m.agreement, *m.composed_true};
    write_verdicts_csv(dir / ("verdicts_" + m.name + ".csv"), m.verdicts, summary);
  }
  const auto po = event_pairs(a.cycles, true);
  stats::scatter_export(po.first, po.second, dir / "scatter_p_onset.csv");
  const auto rs = event_pairs(a.cycles, false);
  stats::scatter_export(rs.first, rs.second, dir / "scatter_r_systolic.csv");
}

json cell_to_json(const stats::CellResult& cell) {
  json j;
  j["ecg_interval"] = stats::name_of(cell.row);
  j["ppg_interval"] = stats::name_of(cell.column);
  j["n"] = cell.n;
  if (cell.result) {
    j["r"] = cell.result->r;
    j["t_stat"] = std::isfinite(cell.result->t_stat) ? json(cell.result->t_stat) : json(nullptr);
    j["p_value"] = cell.result->p_two_sided;
    j["p_display"] = stats::format_p(cell.result->p_two_sided);
  } else {
    j["r"] = nullptr;
    j["t_stat"] = nullptr;
    j["p_value"] = nullptr;
    j["p_display"] = nullptr;
  }
  j["error"] = error_json(cell.error, cell.message);
  return j;
}

json table_to_json(const stats::CorrelationTable& table) {
  json j;
  j["deletion"] = deletion_name(table.deletion);
  j["cells"] = json::array();
  for (const auto& c : table.cells) j["cells"].push_back(cell_to_json(c));
  return j;
}

json build_report(const std::vector<RecordAnalysis>& records,
                  const std::vector<RecordFailure>& failures, const AnalysisConfig& cfg) {
  const auto policies = cfg.effective_policies();
  json report;
  report["schema_version"] = 1;

  json config;
  config["guard_ms"] = cfg.guard_ms;
  config["lag_window_ms"] = json::array({cfg.lag_window.lo_ms, cfg.lag_window.hi_ms});
  config["deletion"] = deletion_name(cfg.deletion);
  config["thresholds"] = cfg.thresholds.to_json();
  config["policies"] = json::array();
  for (const auto& p : policies) {
    config["policies"].push_back(json{{"name", p.name},
                                      {"ecg", automaton_to_json(p.ecg.automaton)},
                                      {"ppg", automaton_to_json(p.ppg.automaton)}});
  }
  report["config"] = std::move(config);

  json table1 = json::array();
  table1.push_back(json{{"ecg", "P peak"}, {"ppg", "onset"}, {"labels", "p / F"}});
  table1.push_back(json{{"ecg", "R peak"}, {"ppg", "systolic peak"}, {"labels", "r / P"}});
  table1.push_back(json{{"ecg", "T peak"}, {"ppg", "diastolic peak"}, {"labels", "t / D"}});
  table1.push_back(json{{"ecg", "PR interval"}, {"ppg", "systole period"}, {"labels", "p->r / F->P"}});
  table1.push_back(json{{"ecg", "RP interval"}, {"ppg", "diastole period"}, {"labels", "r->p / P->F"}});
  table1.push_back(json{{"ecg", "RR interval"}, {"ppg", "peak-to-peak"}, {"labels", "r->r / P->P"}});
  report["event_mapping"] = std::move(table1);

  CycleSeries pooled;
  json recs = json::array();
  for (const auto& a : records) {
    json r;
    r["record_id"] = a.record_id;
    r["status"] = "ok";
    r["error"] = nullptr;
    r["fs_hz"] = a.fs_hz;
    r["n_r_peaks"] = a.ecg.cycles();
    r["n_ppg_pulses"] = a.ppg.pulses();
    r["n_cycles"] = a.cycles.cycles.size();
    r["unpaired_cycles"] = a.cycles.unpaired_cycles;
    r["ambiguous_pairings"] = a.cycles.ambiguous_pairings;
    r["regression"] = json{{"p_onset", regression_json(a.p_onset)},
                           {"r_systolic", regression_json(a.r_systolic)}};
    r["monitors"] = json::array();
    for (const auto& m : a.monitors) r["monitors"].push_back(monitor_json(m, true));
    recs.push_back(std::move(r));
    if (pooled.cycles.empty()) pooled.fs_hz = a.fs_hz;
    pooled.cycles.insert(pooled.cycles.end(), a.cycles.cycles.begin(), a.cycles.cycles.end());
    pooled.ambiguous_pairings += a.cycles.ambiguous_pairings;
    pooled.unpaired_cycles += a.cycles.unpaired_cycles;
  }
  for (const auto& f : failures) {
    recs.push_back(json{{"record_id", f.record_id},
                        {"status", "error"},
                        {"error", error_json(f.code, f.message)}});
  }
  report["records"] = std::move(recs);

  const auto table = stats::correlation_table(pooled, cfg.deletion);
  report["correlation_table"] = table_to_json(table);
  report["rr_peak_to_peak"] = cell_to_json(table.rr_peak_to_peak);

  const auto p_onset = regress(pooled, true);
  const auto r_systolic = regress(pooled, false);
  report["regression"] = json{{"p_onset", regression_json(p_onset)},
                              {"r_systolic", regression_json(r_systolic)}};

  std::vector<MonitorOutcome> pooled_monitors;
  for (std::size_t k = 0; k < policies.size(); ++k) {
    MonitorOutcome m;
    m.name = policies[k].name;
    for (const auto& a : records) {
      const auto& rm = a.monitors.at(k);
      if (rm.error && *rm.error != ErrorCode::EmptyVerdicts) {
        m.error = rm.error;
        m.message = a.record_id + ": " + rm.message;
      }
      m.verdicts.cycles.insert(m.verdicts.cycles.end(), rm.verdicts.cycles.begin(),
                               rm.verdicts.cycles.end());
      m.verdicts.dropped_cycles += rm.verdicts.dropped_cycles;
    }
    if (!m.error) fill_rates(m);
    pooled_monitors.push_back(std::move(m));
  }
  report["monitors"] = json::array();
  for (const auto& m : pooled_monitors) report["monitors"].push_back(monitor_json(m, false));

  json desc = json::object();
  auto add_desc = [&](const std::string& name, std::vector<double> v) {
    const auto d = stats::describe(v);
    desc[name] = json{{"n", d.n},
                      {"mean", d.n ? json(d.mean) : json(nullptr)},
                      {"sd", d.n > 1 ? json(d.sd) : json(nullptr)},
                      {"skewness", d.n > 2 ? json(d.skewness) : json(nullptr)},
                      {"excess_kurtosis", d.n > 3 ? json(d.excess_kurtosis) : json(nullptr)}};
  };
  for (auto e : {stats::EcgInterval::PR, stats::EcgInterval::QR, stats::EcgInterval::RP,
                 stats::EcgInterval::RT, stats::EcgInterval::QT, stats::EcgInterval::RR}) {
    std::vector<double> v;
    for (const auto& c : pooled.cycles)
      if (auto x = stats::value_of(c, e)) v.push_back(*x);
    add_desc(stats::name_of(e), std::move(v));
  }
  for (auto p : {stats::PpgInterval::Systole, stats::PpgInterval::Diastole,
                 stats::PpgInterval::PeakToPeak, stats::PpgInterval::PulseInterval,
                 stats::PpgInterval::DeltaT}) {
    std::vector<double> v;
    for (const auto& c : pooled.cycles)
      if (auto x = stats::value_of(c, p)) v.push_back(*x);
    add_desc(stats::name_of(p), std::move(v));
  }
  report["descriptive"] = std::move(desc);

  const auto& th = cfg.thresholds;
  auto min_r = [](std::optional<double> r, double thr) -> std::optional<bool> {
    if (!r) return std::nullopt;
    return *r >= thr;
  };
  auto in_lag = [&](const RegressionOutcome& reg) -> std::optional<bool> {
    if (!reg.result) return std::nullopt;
    return reg.result->lag_time_ms >= th.lag_min_ms && reg.result->lag_time_ms <= th.lag_max_ms;
  };
  auto lag_of = [](const RegressionOutcome& reg) -> std::optional<double> {
    if (!reg.result) return std::nullopt;
    return reg.result->lag_time_ms;
  };
  json obs;
  const auto r1 = cell_r(table.rr_peak_to_peak);
  obs["obs1_rr_peak_to_peak"] = observation(r1, json{{"min_r", th.obs1_min_r}}, min_r(r1, th.obs1_min_r));
  {
    std::optional<double> slope;
    std::optional<bool> pass;
    if (p_onset.result) {
      slope = p_onset.result->slope_b1;
      pass = std::abs(*slope - 1.0) <= th.obs2_slope_tolerance;
    }
    obs["obs2_p_onset_slope"] =
        observation(slope, json{{"slope", 1.0}, {"tolerance", th.obs2_slope_tolerance}}, pass);
  }
  const auto r3 = cell_r(table.at(stats::EcgInterval::PR, stats::PpgInterval::Systole));
  obs["obs3_pr_systole"] = observation(r3, json{{"min_r", th.obs3_min_r}}, min_r(r3, th.obs3_min_r));
  const auto r4 = cell_r(table.at(stats::EcgInterval::RP, stats::PpgInterval::Diastole));
  obs["obs4_rp_diastole"] = observation(r4, json{{"min_r", th.obs4_min_r}}, min_r(r4, th.obs4_min_r));
  const json lag_thr{{"min_ms", th.lag_min_ms}, {"max_ms", th.lag_max_ms}};
  obs["obs5_p_onset_lag"] = observation(lag_of(p_onset), lag_thr, in_lag(p_onset));
  obs["obs6_r_systolic_lag"] = observation(lag_of(r_systolic), lag_thr, in_lag(r_systolic));
  {
    std::optional<double> agree;
    std::optional<bool> pass;
    if (!pooled_monitors.empty() && pooled_monitors.front().agreement) {
      agree = pooled_monitors.front().agreement;
      pass = *agree > th.agreement_min;
    }
    obs["monitor_agreement"] = observation(agree, json{{"greater_than", th.agreement_min}}, pass);
  }
  report["observations"] = std::move(obs);

  std::string status = "ok";
  if (!failures.empty()) status = records.empty() ? "error" : "partial";
  report["status"] = status;
  return report;
}

void write_table_csv(const std::filesystem::path& path, const json& report) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "ecg_interval,ppg_interval,n,r,t_stat,p_value\n";
  auto row = [&](const json& c) {
    out << c.at("ecg_interval").get<std::string>() << ',' << c.at("ppg_interval").get<std::string>()
        << ',' << c.at("n").get<std::size_t>() << ',';
    for (const char* key : {"r", "t_stat", "p_value"}) {
      if (c.at(key).is_number()) out << c.at(key).get<double>();
      out << (std::string(key) == "p_value" ? "\n" : ",");
    }
  };
  for (const auto& c : report.at("correlation_table").at("cells")) row(c);
  row(report.at("rr_peak_to_peak"));
}

std::string render_report(const json& report) {
  std::ostringstream out;
  out << "Event mapping\n";
  for (const auto& m : report.at("event_mapping")) {
    out << "  " << std::left << std::setw(14) << m.at("ecg").get<std::string>() << " <-> "
        << std::setw(16) << m.at("ppg").get<std::string>() << m.at("labels").get<std::string>()
        << '\n';
  }

  const auto& table = report.at("correlation_table");
  out << "\nCorrelation (" << table.at("deletion").get<std::string>() << ")\n";
  out << "  " << std::left << std::setw(6) << "ECG" << std::setw(14) << "PPG" << std::right
      << std::setw(6) << "n" << std::setw(10) << "r" << std::setw(12) << "p" << '\n';
  auto cell_line = [&](const json& c) {
    out << "  " << std::left << std::setw(6) << c.at("ecg_interval").get<std::string>()
        << std::setw(14) << c.at("ppg_interval").get<std::string>() << std::right << std::setw(6)
        << c.at("n").get<std::size_t>() << std::setw(10) << num_or_dash(c.at("r"), 4)
        << std::setw(12)
        << (c.at("p_display").is_string() ? c.at("p_display").get<std::string>() : "-");
    if (!c.at("error").is_null()) out << "  " << c.at("error").at("code").get<std::string>();
    out << '\n';
  };
  for (const auto& c : table.at("cells")) cell_line(c);
  cell_line(report.at("rr_peak_to_peak"));

  out << "\nRegression\n";
  for (const char* key : {"p_onset", "r_systolic"}) {
    const auto& r = report.at("regression").at(key);
    out << "  " << std::left << std::setw(12) << key << "b1=" << num_or_dash(r.at("slope_b1"), 5)
        << "  lag=" << num_or_dash(r.at("lag_time_ms"), 3) << " ms  r2="
        << num_or_dash(r.at("r_squared"), 5) << "  n=" << r.at("n").get<std::size_t>() << '\n';
  }

  out << "\nMonitors\n";
  for (const auto& m : report.at("monitors")) {
    out << "  " << std::left << std::setw(12) << m.at("name").get<std::string>()
        << "cycles=" << m.at("cycles").get<std::size_t>()
        << "  agreement=" << num_or_dash(m.at("agreement_rate"), 4)
        << "  composed_true=" << num_or_dash(m.at("composed_true_rate"), 4)
        << "  dropped=" << m.at("dropped_cycles").get<std::size_t>() << '\n';
  }

  out << "\nObservations\n";
  for (const auto& [name, o] : report.at("observations").items()) {
    const auto& p = o.at("passed");
    out << "  " << std::left << std::setw(22) << name << std::setw(6)
        << (p.is_null() ? "N/A" : (p.get<bool>() ? "PASS" : "FAIL"))
        << num_or_dash(o.at("value"), 4) << '\n';
  }

  out << "\nRecords\n";
  for (const auto& r : report.at("records")) {
    out << "  " << r.at("record_id").get<std::string>() << ": " << r.at("status").get<std::string>();
    if (!r.at("error").is_null()) out << " (" << r.at("error").at("message").get<std::string>() << ")";
    out << '\n';
  }
  out << "\nstatus: " << report.at("status").get<std::string>() << '\n';
  return out.str();
}

}  // namespace ecgppg::pipeline
