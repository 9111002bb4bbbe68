#include "ecgppg/trace_io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>

#include "ecgppg/error.hpp"

namespace ecgppg {

namespace {

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

TimedTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::vector<TimedEvent> events;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = strip(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (t != "label,time_ms")
        throw Error(ErrorCode::BadTrace, path.string() + ": expected header 'label,time_ms'", line_no);
      continue;
    }
    const auto comma = t.find(',');
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (comma == std::string::npos) throw Error(ErrorCode::BadTrace, where + ": missing time", line_no);
    const auto label = label_from_string(strip(t.substr(0, comma)));
    if (!label) throw Error(ErrorCode::BadTrace, where + ": unknown label", line_no);
    const std::string cell = strip(t.substr(comma + 1));
    char* end = nullptr;
    const double time = std::strtod(cell.c_str(), &end);
    if (cell.empty() || *end != '\0' || !std::isfinite(time) || time < 0.0)
      throw Error(ErrorCode::BadTrace, where + ": bad time '" + cell + "'", line_no);
    if (!events.empty() && time < events.back().time_ms)
      throw Error(ErrorCode::TimeRegression, where + ": time goes backwards", line_no);
    events.push_back({*label, time});
  }
  return TimedTrace(std::move(events));
}

void write_trace_csv(const std::filesystem::path& path, const TimedTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "label,time_ms\n";
  for (const auto& e : trace) out << to_char(e.label) << ',' << e.time_ms << '\n';
}

void write_verdicts_csv(std::ostream& out, const ComposedVerdicts& v,
                        std::optional<VerdictSummary> summary) {
  out << "cycle_index,ecg_verdict,ppg_verdict,composed\n";
  for (std::size_t i = 0; i < v.cycles.size(); ++i) {
    const auto& c = v.cycles[i];
    out << i << ',' << to_char(c.ecg) << ',' << to_char(c.ppg) << ',' << to_char(c.composed) << '\n';
  }
  if (summary) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::fixed << std::setprecision(6);
    out << "# agreement_rate=" << summary->agreement_rate << '\n';
    out << "# composed_true_rate=" << summary->composed_true_rate << '\n';
    out << "# dropped_cycles=" << v.dropped_cycles << '\n';
    out.flags(flags);
    out.precision(prec);
  }
}

void write_verdicts_csv(const std::filesystem::path& path, const ComposedVerdicts& v,
                        std::optional<VerdictSummary> summary) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_verdicts_csv(out, v, summary);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace ecgppg
