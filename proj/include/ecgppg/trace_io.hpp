#ifndef ECGPPG_TRACE_IO_HPP
#define ECGPPG_TRACE_IO_HPP

#include <filesystem>
#include <optional>
#include <ostream>

#include "ecgppg/monitor.hpp"

namespace ecgppg {

/// Reads a `label,time_ms` CSV. Errors carry the 1-based file line number:
/// TimeRegression when a time decreases, BadTrace for unknown labels or
/// unparsable times.
TimedTrace read_trace_csv(const std::filesystem::path& path);
void write_trace_csv(const std::filesystem::path& path, const TimedTrace& trace);

struct VerdictSummary {
  double agreement_rate;
  double composed_true_rate;
};

/// cycle_index,ecg_verdict,ppg_verdict,composed with T/F cells, followed by
/// `#` footer lines when a summary is given.
void write_verdicts_csv(const std::filesystem::path& path, const ComposedVerdicts& verdicts,
                        std::optional<VerdictSummary> summary = std::nullopt);
void write_verdicts_csv(std::ostream& out, const ComposedVerdicts& verdicts,
                        std::optional<VerdictSummary> summary = std::nullopt);

}  // namespace ecgppg

#endif  // ECGPPG_TRACE_IO_HPP
