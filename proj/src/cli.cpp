#include "ecgppg/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "ecgppg/ingest.hpp"
#include "ecgppg/monitor.hpp"
#include "ecgppg/pipeline.hpp"
#include "ecgppg/policy_io.hpp"
#include "ecgppg/stats.hpp"
#include "ecgppg/synth.hpp"
#include "ecgppg/trace_io.hpp"

namespace ecgppg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct AnalyzeOptions {
  std::string manifest;
  std::optional<double> fs_hz;
  double guard_ms = 210.0;
  std::string lag_window = "200,1200";
  std::string out_dir = "ecgppg_out";
  std::string thresholds;
  std::vector<std::string> ecg_policies;
  std::vector<std::string> ppg_policies;
  bool listwise = false;
  bool no_prefilter = false;
  unsigned workers = 0;
};

struct MonitorOptions {
  std::string ecg_trace;
  std::string ppg_trace;
  double guard_ms = 210.0;
  std::string ecg_policy;
  std::string ppg_policy;
  std::string out;
};

struct SynthOptions {
  synth::SynthSpec spec;
  std::string out_dir;
  std::string record_id = "synth";
  bool no_noise = false;
};

struct ReportOptions {
  std::string report;
  std::string table_csv;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

json read_json(const fs::path& path, ErrorCode bad) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& ex) {
    throw Error(bad, path.string() + ": " + ex.what());
  }
}

LagWindow parse_lag_window(const std::string& text) {
  const auto sep = text.find_first_of(",:");
  if (sep == std::string::npos) throw Error(ErrorCode::BadLagWindow, "expected lo,hi: " + text);
  LagWindow w;
  try {
    std::size_t used = 0;
    const std::string a = text.substr(0, sep);
    const std::string b = text.substr(sep + 1);
    w.lo_ms = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(a);
    w.hi_ms = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::BadLagWindow, "expected lo,hi: " + text);
  }
  if (!(w.lo_ms >= 0.0) || !(w.lo_ms < w.hi_ms))
    throw Error(ErrorCode::BadLagWindow, "need 0 <= lo < hi: " + text);
  return w;
}

pipeline::Thresholds parse_thresholds(const std::string& arg) {
  if (arg.empty()) return {};
  const auto first = arg.find_first_not_of(" \t\n");
  json j;
  if (first != std::string::npos && arg[first] == '{') {
    try {
      j = json::parse(arg);
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::BadSpec, std::string("thresholds: ") + ex.what());
    }
  } else {
    j = read_json(arg, ErrorCode::BadSpec);
  }
  return pipeline::Thresholds::from_json(j);
}

std::string sanitize(std::string id) {
  for (char& c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  if (id.empty() || id == "." || id == "..") id = "record";
  return id;
}

void report_error(std::ostream& err, const Error& e) {
  err << "error: " << e.what();
  if (e.index() && (e.code() == ErrorCode::TimeRegression || e.code() == ErrorCode::BadTrace))
    err << " (line " << *e.index() << ")";
  else if (e.index() && e.code() == ErrorCode::NonFiniteSample)
    err << " (sample " << *e.index() << ")";
  err << '\n';
}

void write_pooled_scatter(const fs::path& dir, const std::vector<pipeline::RecordAnalysis>& records) {
  CycleSeries pooled;
  for (const auto& a : records)
    pooled.cycles.insert(pooled.cycles.end(), a.cycles.cycles.begin(), a.cycles.cycles.end());
  fs::create_directories(dir);
  auto dump = [&](stats::EcgInterval e, stats::PpgInterval p) {
    const auto [x, y] = stats::paired_series(pooled, e, p);
    stats::scatter_export(x, y, dir / (stats::name_of(e) + "_" + stats::name_of(p) + ".csv"));
  };
  for (auto e : stats::kTableRows)
    for (auto p : stats::kTableColumns) dump(e, p);
  dump(stats::EcgInterval::RR, stats::PpgInterval::PeakToPeak);
}

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  pipeline::AnalysisConfig cfg;
  std::vector<ManifestEntry> entries;
  try {
    cfg.lag_window = parse_lag_window(o.lag_window);
    if (!(o.guard_ms > 0.0)) throw Error(ErrorCode::BadPolicy, "--guard-ms must be positive");
    cfg.guard_ms = o.guard_ms;
    cfg.thresholds = parse_thresholds(o.thresholds);
    cfg.deletion = o.listwise ? stats::Deletion::Listwise : stats::Deletion::Pairwise;
    if (o.no_prefilter) cfg.prefilter = pipeline::Prefilter{std::nullopt, std::nullopt};
    if (o.fs_hz && !(*o.fs_hz > 0.0)) throw Error(ErrorCode::BadSampleRate, "--fs must be positive");
    if (o.ecg_policies.size() != o.ppg_policies.size())
      throw Error(ErrorCode::BadPolicy, "--ecg-policy and --ppg-policy must be given in pairs");
    for (std::size_t i = 0; i < o.ecg_policies.size(); ++i) {
      pipeline::PolicyPair p{fs::path(o.ecg_policies[i]).stem().string() + "+" +
                                 fs::path(o.ppg_policies[i]).stem().string(),
                             pipeline::load_signal_policy(o.ecg_policies[i]),
                             pipeline::load_signal_policy(o.ppg_policies[i])};
      cfg.policies.push_back(std::move(p));
    }
    entries = load_manifest(o.manifest);
  } catch (const Error& e) {
    report_error(err, e);
    return exit_code_for(e.code());
  }

  struct Outcome {
    std::optional<pipeline::RecordAnalysis> analysis;
    std::optional<pipeline::RecordFailure> failure;
  };
  auto process = [&](const ManifestEntry& entry) -> Outcome {
    try {
      double fs_hz = entry.fs_hz;
      if (o.fs_hz) {
        if (fs_hz > 0.0 && std::abs(fs_hz - *o.fs_hz) > 1e-9)
          throw Error(ErrorCode::SampleRateMismatch,
                      "manifest says " + std::to_string(fs_hz) + " Hz, --fs says " +
                          std::to_string(*o.fs_hz) + " Hz");
        fs_hz = *o.fs_hz;
      }
      if (!(fs_hz > 0.0)) throw Error(ErrorCode::BadSampleRate, "no sample rate for " + entry.record_id);
      const auto record = load_record_pair(entry.ecg_path, entry.ppg_path, fs_hz, entry.record_id,
                                           entry.ecg_column, entry.ppg_column);
      return {pipeline::analyze_record(record, cfg), std::nullopt};
    } catch (const Error& e) {
      return {std::nullopt, pipeline::RecordFailure{entry.record_id, e.code(), e.what()}};
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::max<std::size_t>(1, o.workers ? o.workers : hw);
  std::vector<Outcome> outcomes(entries.size());
  for (std::size_t start = 0; start < entries.size(); start += workers) {
    const std::size_t stop = std::min(entries.size(), start + workers);
    std::vector<std::future<Outcome>> batch;
    for (std::size_t i = start; i < stop; ++i)
      batch.push_back(std::async(std::launch::async, process, std::cref(entries[i])));
    for (std::size_t i = start; i < stop; ++i) outcomes[i] = batch[i - start].get();
  }

  std::vector<pipeline::RecordAnalysis> records;
  std::vector<pipeline::RecordFailure> failures;
  for (auto& oc : outcomes) {
    if (oc.analysis) records.push_back(std::move(*oc.analysis));
    if (oc.failure) {
      err << "error: record " << oc.failure->record_id << ": " << oc.failure->message << '\n';
      failures.push_back(std::move(*oc.failure));
    }
  }

  json report;
  try {
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    for (const auto& a : records) pipeline::write_record_artifacts(dir / "records" / sanitize(a.record_id), a);
    write_pooled_scatter(dir / "scatter", records);
    report = pipeline::build_report(records, failures, cfg);
    write_json(dir / "report.json", report);
    pipeline::write_table_csv(dir / "correlation_table.csv", report);
  } catch (const Error& e) {
    report_error(err, e);
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << '\n';
    return 1;
  }

  out << pipeline::render_report(report);
  out << "report: " << (fs::path(o.out_dir) / "report.json").string() << '\n';

  if (!failures.empty()) return exit_code_for(failures.front().code);
  for (const auto& m : report.at("monitors")) {
    if (!m.at("error").is_null()) {
      const std::string code = m.at("error").at("code").get<std::string>();
      err << "error: monitor " << m.at("name").get<std::string>() << ": "
          << m.at("error").at("message").get<std::string>() << '\n';
      return code == "EmptyVerdicts" ? 4 : 1;
    }
  }
  return 0;
}

int cmd_monitor(const MonitorOptions& o, std::ostream& out, std::ostream& err) {
  try {
    if (!(o.guard_ms > 0.0)) throw Error(ErrorCode::BadPolicy, "--guard-ms must be positive");
    const auto builtin = pipeline::pr_systole_policy(o.guard_ms);
    const TimedAutomaton ecg_policy = o.ecg_policy.empty() ? builtin.ecg.automaton : load_policy(o.ecg_policy);
    const TimedAutomaton ppg_policy = o.ppg_policy.empty() ? builtin.ppg.automaton : load_policy(o.ppg_policy);
    const auto ecg = read_trace_csv(o.ecg_trace);
    const auto ppg = read_trace_csv(o.ppg_trace);
    const auto verdicts = run_parallel(ecg_policy, ecg, ppg_policy, ppg);
    if (verdicts.cycles.empty()) throw Error(ErrorCode::EmptyVerdicts, "traces produced no verdicts");
    const VerdictSummary summary{agreement_rate(verdicts), composed_true_rate(verdicts)};
    if (o.out.empty()) {
      write_verdicts_csv(out, verdicts, summary);
    } else {
      write_verdicts_csv(o.out, verdicts, summary);
    }
  } catch (const Error& e) {
    report_error(err, e);
    return exit_code_for(e.code());
  }
  return 0;
}

const std::map<std::string, std::string>& synth_flags() {
  static const std::map<std::string, std::string> flags{
      {"n_cycles", "--n-cycles"},       {"rr_mean_ms", "--rr-mean"},
      {"rr_jitter_ms", "--rr-jitter"},  {"pr_mean_ms", "--pr-mean"},
      {"pr_jitter_ms", "--pr-jitter"},  {"qr_mean_ms", "--qr-mean"},
      {"qr_jitter_ms", "--qr-jitter"},  {"rt_mean_ms", "--rt-mean"},
      {"rt_jitter_ms", "--rt-jitter"},  {"pat_ms", "--pat"},
      {"pat_jitter_ms", "--pat-jitter"}, {"delta_t_ms", "--delta-t"},
      {"lead_in_ms", "--lead-in"},      {"fs", "--fs"},
      {"noise_sigma", "--noise"},       {"seed", "--seed"}};
  return flags;
}

// "BadSpec: pat_ms must be below ..." -> "--pat"
std::string flag_for(const std::string& message) {
  auto pos = message.find(": ");
  std::string rest = pos == std::string::npos ? message : message.substr(pos + 2);
  const std::string field = rest.substr(0, rest.find(' '));
  const auto& flags = synth_flags();
  const auto it = flags.find(field);
  return it == flags.end() ? std::string() : it->second;
}

TimedTrace truth_trace(const synth::GroundTruth& truth, bool ecg) {
  std::vector<TimedEvent> ev;
  for (const auto& c : truth.cycles) {
    if (ecg) {
      ev.push_back({EventLabel::EcgP, c.p_ms});
      ev.push_back({EventLabel::EcgQ, c.q_ms});
      ev.push_back({EventLabel::EcgR, c.r_ms});
      ev.push_back({EventLabel::EcgT, c.t_ms});
    } else {
      ev.push_back({EventLabel::PpgOnset, c.onset_ms});
      ev.push_back({EventLabel::PpgSystolic, c.systolic_ms});
      ev.push_back({EventLabel::PpgDiastolic, c.diastolic_ms});
    }
  }
  std::stable_sort(ev.begin(), ev.end(),
                   [](const TimedEvent& a, const TimedEvent& b) { return a.time_ms < b.time_ms; });
  return TimedTrace(std::move(ev));
}

int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err) {
  synth::SynthSpec spec = o.spec;
  if (o.no_noise) spec.noise_sigma = 0.0;
  try {
    const auto rec = synth::gen_waveforms(spec);
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    write_waveform(dir / "ecg.csv", rec.record.ecg);
    write_waveform(dir / "ppg.csv", rec.record.ppg);
    write_manifest(dir / "manifest.json", ManifestEntry{o.record_id, "ecg.csv", "ppg.csv", spec.fs, std::size_t{0}, std::size_t{0}});
    write_json(dir / "ground_truth.json", synth::truth_to_json(rec.truth, spec));
    write_trace_csv(dir / "ecg_trace.csv", truth_trace(rec.truth, true));
    write_trace_csv(dir / "ppg_trace.csv", truth_trace(rec.truth, false));
    out << "wrote " << rec.truth.cycles.size() << " cycles (" << rec.record.ecg.size()
        << " samples at " << spec.fs << " Hz) to " << dir.string() << '\n';
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BadSpec) {
      const auto flag = flag_for(e.what());
      err << "error: " << e.what();
      if (!flag.empty()) err << " (flag " << flag << ")";
      err << '\n';
    } else {
      report_error(err, e);
    }
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  try {
    const json report = read_json(o.report, ErrorCode::BadManifest);
    out << pipeline::render_report(report);
    if (!o.table_csv.empty()) pipeline::write_table_csv(o.table_csv, report);
  } catch (const Error& e) {
    report_error(err, e);
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    err << "error: BadManifest: malformed report: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile:
    case ErrorCode::BadColumn:
    case ErrorCode::NonFiniteSample:
    case ErrorCode::EmptySignal:
    case ErrorCode::SampleRateMismatch:
    case ErrorCode::BadSampleRate:
    case ErrorCode::BadManifest:
    case ErrorCode::BadBand:
    case ErrorCode::BadLagWindow:
    case ErrorCode::BadPolicy:
    case ErrorCode::TimeRegression:
    case ErrorCode::BadTrace:
    case ErrorCode::BadSpec:
      return 2;
    case ErrorCode::SignalTooShort:
      return 3;
    case ErrorCode::EmptyVerdicts:
      return 4;
    default:
      return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ECG/PPG event correlation and runtime monitoring", "ecgppg"};
  app.require_subcommand(1);

  AnalyzeOptions ao;
  auto* analyze = app.add_subcommand("analyze", "Delineate, pair, correlate and monitor records");
  analyze->add_option("--manifest", ao.manifest, "Record manifest (JSON)")->required();
  analyze->add_option("--fs", ao.fs_hz, "Sample rate in Hz (overrides a missing manifest rate)");
  analyze->add_option("--guard-ms", ao.guard_ms, "Interval bound for both monitors")->capture_default_str();
  analyze->add_option("--lag-window", ao.lag_window, "R to systolic pairing window, lo,hi in ms")
      ->capture_default_str();
  analyze->add_option("--out", ao.out_dir, "Output directory")->capture_default_str();
  analyze->add_option("--thresholds", ao.thresholds, "Observation thresholds: JSON file or inline object");
  analyze->add_option("--ecg-policy", ao.ecg_policies, "ECG policy file (repeatable, paired with --ppg-policy)");
  analyze->add_option("--ppg-policy", ao.ppg_policies, "PPG policy file (repeatable)");
  analyze->add_flag("--listwise", ao.listwise, "Listwise deletion for the correlation table");
  analyze->add_flag("--no-prefilter", ao.no_prefilter, "Skip the ECG band-pass and PPG low-pass");
  analyze->add_option("--workers", ao.workers, "Records processed concurrently (0 = all cores)");

  MonitorOptions mo;
  auto* monitor = app.add_subcommand("monitor", "Run the paired interval monitors over event traces");
  monitor->add_option("--ecg-trace", mo.ecg_trace, "ECG trace CSV (label,time_ms)")->required();
  monitor->add_option("--ppg-trace", mo.ppg_trace, "PPG trace CSV (label,time_ms)")->required();
  monitor->add_option("--guard-ms", mo.guard_ms, "Interval bound for the built-in policies")->capture_default_str();
  monitor->add_option("--ecg-policy", mo.ecg_policy, "ECG policy file instead of p->r");
  monitor->add_option("--ppg-policy", mo.ppg_policy, "PPG policy file instead of F->P");
  monitor->add_option("--out", mo.out, "Verdict CSV path (default: stdout)");

  SynthOptions so;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic record with ground truth");
  auto& sp = so.spec;
  synth_cmd->add_option("--out", so.out_dir, "Output directory")->required();
  synth_cmd->add_option("--record-id", so.record_id, "Record id in the manifest")->capture_default_str();
  synth_cmd->add_option("--n-cycles", sp.n_cycles)->capture_default_str();
  synth_cmd->add_option("--rr-mean", sp.rr_mean_ms)->capture_default_str();
  synth_cmd->add_option("--rr-jitter", sp.rr_jitter_ms)->capture_default_str();
  synth_cmd->add_option("--pr-mean", sp.pr_mean_ms)->capture_default_str();
  synth_cmd->add_option("--pr-jitter", sp.pr_jitter_ms)->capture_default_str();
  synth_cmd->add_option("--qr-mean", sp.qr_mean_ms)->capture_default_str();
  synth_cmd->add_option("--qr-jitter", sp.qr_jitter_ms)->capture_default_str();
  synth_cmd->add_option("--rt-mean", sp.rt_mean_ms)->capture_default_str();
  synth_cmd->add_option("--rt-jitter", sp.rt_jitter_ms)->capture_default_str();
  synth_cmd->add_option("--pat", sp.pat_ms, "ECG to PPG lag in ms")->capture_default_str();
  synth_cmd->add_option("--pat-jitter", sp.pat_jitter_ms)->capture_default_str();
  synth_cmd->add_option("--delta-t", sp.delta_t_ms, "Systolic to diastolic spacing in ms")->capture_default_str();
  synth_cmd->add_option("--lead-in", sp.lead_in_ms)->capture_default_str();
  synth_cmd->add_option("--fs", sp.fs, "Sample rate in Hz")->capture_default_str();
  synth_cmd->add_option("--noise", sp.noise_sigma, "Additive noise sigma")->capture_default_str();
  synth_cmd->add_flag("--no-noise", so.no_noise, "Same as --noise 0");
  synth_cmd->add_option("--seed", sp.seed)->capture_default_str();

  ReportOptions ro;
  auto* report = app.add_subcommand("report", "Print the tables of an analyze report");
  report->add_option("report", ro.report, "report.json")->required();
  report->add_option("--table-csv", ro.table_csv, "Also write the correlation grid as CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  if (analyze->parsed()) return cmd_analyze(ao, out, err);
  if (monitor->parsed()) return cmd_monitor(mo, out, err);
  if (synth_cmd->parsed()) return cmd_synth(so, out, err);
  if (report->parsed()) return cmd_report(ro, out, err);
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return run(args, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ecgppg::cli
