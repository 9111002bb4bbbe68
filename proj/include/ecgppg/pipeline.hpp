#ifndef ECGPPG_PIPELINE_HPP
#define ECGPPG_PIPELINE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ecgppg/delineate.hpp"
#include "ecgppg/events.hpp"
#include "ecgppg/ingest.hpp"
#include "ecgppg/monitor.hpp"
#include "ecgppg/stats.hpp"

namespace ecgppg::pipeline {

/// Pass/fail limits for the six correlation observations and the monitor
/// agreement check.
struct Thresholds {
  double obs1_min_r = 0.95;            // RR vs peak-to-peak
  double obs2_slope_tolerance = 0.01;  // |b1 - 1| for P peak vs onset
  double obs3_min_r = 0.90;            // PR vs systole
  double obs4_min_r = 0.60;            // RP vs diastole
  double lag_min_ms = 600.0;           // Obs5 / Obs6
  double lag_max_ms = 700.0;
  double agreement_min = 0.90;         // strictly greater than

  /// Overrides any subset of the fields above; unknown keys throw BadSpec.
  static Thresholds from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// One monitored signal. `interval` is set for start/end template policies,
/// which lets the pipeline align verdicts by cardiac cycle.
struct SignalPolicy {
  TimedAutomaton automaton;
  std::optional<std::pair<EventLabel, EventLabel>> interval;
};

SignalPolicy interval_signal_policy(EventLabel start, EventLabel end, double bound_ms);
/// Reads either policy JSON form (see policy_io.hpp).
SignalPolicy load_signal_policy(const std::filesystem::path& path);

struct PolicyPair {
  std::string name;
  SignalPolicy ecg;
  SignalPolicy ppg;
};

/// PR interval (p -> r) against systole period (F -> P), same bound on both.
PolicyPair pr_systole_policy(double guard_ms);

struct Prefilter {
  std::optional<std::pair<double, double>> ecg_band{{0.5, 40.0}};
  std::optional<double> ppg_lowpass_hz;  // the PPG detector smooths on its own
};

struct AnalysisConfig {
  LagWindow lag_window;
  double guard_ms = 210.0;
  std::vector<PolicyPair> policies;  // empty: the built-in PR/systole pair
  Prefilter prefilter;
  PanTompkinsConfig pan_tompkins;
  EcgWindows ecg_windows;
  PpgDetectorConfig ppg_detector;
  stats::Deletion deletion = stats::Deletion::Pairwise;
  Thresholds thresholds;

  std::vector<PolicyPair> effective_policies() const;
};

struct MonitorOutcome {
  std::string name;
  ComposedVerdicts verdicts;
  std::optional<double> agreement;
  std::optional<double> composed_true;
  std::optional<ErrorCode> error;
  std::string message;
};

struct RegressionOutcome {
  std::optional<stats::RegressionResult> result;
  std::optional<ErrorCode> error;
  std::string message;
};

struct RecordAnalysis {
  std::string record_id;
  double fs_hz = 0.0;
  EcgEvents ecg;
  PpgEvents ppg;
  CycleSeries cycles;
  RegressionOutcome p_onset;
  RegressionOutcome r_systolic;
  std::vector<MonitorOutcome> monitors;
};

/// Monitors every paired cycle with both signals. Interval policies are
/// evaluated per cycle (start from the cycle, end from the same or the next
/// beat) so verdicts stay cycle-aligned; other automata run over the full
/// traces and must produce equally long verdict sequences.
MonitorOutcome monitor_cycles(const CycleSeries& cycles, const PolicyPair& policy);

/// Paired event times for the P-peak/onset and R-peak/systolic regressions.
std::pair<std::vector<double>, std::vector<double>> event_pairs(const CycleSeries& cycles,
                                                                 bool p_to_onset);

/// Delineation, pairing, intervals, regression and monitoring for one record.
/// Throws on precondition failures (e.g. SignalTooShort).
RecordAnalysis analyze_record(const SyncedRecord& record, const AnalysisConfig& cfg);

/// Writes per-record CSV artefacts (events, intervals, verdicts, scatter
/// data) under `dir`.
void write_record_artifacts(const std::filesystem::path& dir, const RecordAnalysis& a);

struct RecordFailure {
  std::string record_id;
  ErrorCode code;
  std::string message;
};

/// Assembles report.json. Keys are always present; values that could not be
/// computed are null with an accompanying error.
nlohmann::json build_report(const std::vector<RecordAnalysis>& records,
                            const std::vector<RecordFailure>& failures, const AnalysisConfig& cfg);

nlohmann::json cell_to_json(const stats::CellResult& cell);
nlohmann::json table_to_json(const stats::CorrelationTable& table);
void write_table_csv(const std::filesystem::path& path, const nlohmann::json& report);

/// Human-readable rendering of report.json (event mapping, correlation grid,
/// regression coefficients, monitor agreement, observation verdicts).
std::string render_report(const nlohmann::json& report);

}  // namespace ecgppg::pipeline

#endif  // ECGPPG_PIPELINE_HPP
