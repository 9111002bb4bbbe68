#include "ecgppg/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include "ecgppg/error.hpp"
#include "json.hpp"

namespace ecgppg {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Parses "fs_hz=125" out of a comment body; nullopt for any other comment.
std::optional<double> parse_rate_comment(const std::string& body) {
  const auto eq = body.find('=');
  if (eq == std::string::npos || trim(body.substr(0, eq)) != "fs_hz") return std::nullopt;
  const std::string value = trim(body.substr(eq + 1));
  char* end = nullptr;
  const double fs = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') return std::nullopt;
  return fs;
}

bool same_rate(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

Waveform::Waveform(std::vector<double> samples, double fs_hz, std::string label)
    : samples_(std::move(samples)), fs_(fs_hz), label_(std::move(label)) {
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) {
    throw Error(ErrorCode::BadSampleRate, "sampling rate must be positive and finite");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw Error(ErrorCode::NonFiniteSample,
                  "sample " + std::to_string(i) + " is not finite", i);
    }
  }
}

Waveform Waveform::with_samples(std::vector<double> samples) const {
  return Waveform(std::move(samples), fs_, label_);
}

Waveform Waveform::truncated(std::size_t n) const {
  n = std::min(n, samples_.size());
  return with_samples(std::vector<double>(samples_.begin(), samples_.begin() + n));
}

SyncedRecord SyncedRecord::aligned(std::string record_id, Waveform ecg, Waveform ppg) {
  if (!same_rate(ecg.fs(), ppg.fs())) {
    throw Error(ErrorCode::SampleRateMismatch, "ECG and PPG sampling rates differ");
  }
  const std::size_t n = std::min(ecg.size(), ppg.size());
  return SyncedRecord{std::move(record_id), ecg.truncated(n), ppg.truncated(n)};
}

Waveform load_waveform(const std::filesystem::path& path,
                       const ColumnSelector& column, double fs_hz) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::MissingFile, path.string());
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());

  std::optional<double> file_rate;
  std::vector<std::string> header;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (auto fs = parse_rate_comment(t.substr(1))) file_rate = fs;
      continue;
    }
    header = split_csv_line(t);
    break;
  }
  if (header.empty()) throw Error(ErrorCode::EmptySignal, path.string() + " has no header");

  std::size_t col = 0;
  if (const auto* name = std::get_if<std::string>(&column)) {
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) {
      throw Error(ErrorCode::BadColumn, "no column '" + *name + "' in " + path.string());
    }
    col = static_cast<std::size_t>(it - header.begin());
  } else {
    col = std::get<std::size_t>(column);
    if (col >= header.size()) {
      throw Error(ErrorCode::BadColumn, "column index " + std::to_string(col) +
                                            " out of range in " + path.string());
    }
  }

  if (file_rate && !same_rate(*file_rate, fs_hz)) {
    std::ostringstream msg;
    msg << path.string() << " declares fs_hz=" << *file_rate << ", expected " << fs_hz;
    throw Error(ErrorCode::SampleRateMismatch, msg.str());
  }

  std::vector<double> samples;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split_csv_line(t);
    const std::size_t index = samples.size();
    if (col >= cells.size()) {
      throw Error(ErrorCode::BadColumn, "row " + std::to_string(index) + " is missing column " +
                                            std::to_string(col), index);
    }
    const std::string& cell = cells[col];
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteSample,
                  "sample " + std::to_string(index) + " ('" + cell + "') in " + path.string(),
                  index);
    }
    samples.push_back(v);
  }
  if (samples.empty()) throw Error(ErrorCode::EmptySignal, path.string());
  return Waveform(std::move(samples), fs_hz, path.stem().string());
}

void write_waveform(const std::filesystem::path& path, const Waveform& w) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "# fs_hz=" << w.fs() << "\namplitude\n";
  for (double v : w.samples()) out << v << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

SyncedRecord load_record_pair(const std::filesystem::path& ecg_path,
                              const std::filesystem::path& ppg_path, double fs_hz,
                              std::string record_id, const ColumnSelector& ecg_column,
                              const ColumnSelector& ppg_column) {
  Waveform ecg = load_waveform(ecg_path, ecg_column, fs_hz);
  Waveform ppg = load_waveform(ppg_path, ppg_column, fs_hz);
  if (record_id.empty()) record_id = ecg_path.stem().string();
  return SyncedRecord::aligned(std::move(record_id), std::move(ecg), std::move(ppg));
}

namespace {

ColumnSelector parse_column(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  throw Error(ErrorCode::BadManifest, "column must be a name or a non-negative index");
}

ManifestEntry parse_entry(const nlohmann::json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw Error(ErrorCode::BadManifest, "manifest entry is not an object");
  ManifestEntry e;
  try {
    e.record_id = j.at("record_id").get<std::string>();
    e.ecg_path = j.at("ecg_path").get<std::string>();
    e.ppg_path = j.at("ppg_path").get<std::string>();
    e.fs_hz = j.at("fs_hz").get<double>();
    if (j.contains("ecg_column")) e.ecg_column = parse_column(j.at("ecg_column"));
    if (j.contains("ppg_column")) e.ppg_column = parse_column(j.at("ppg_column"));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::BadManifest, ex.what());
  }
  if (!(e.fs_hz > 0.0)) throw Error(ErrorCode::BadManifest, "fs_hz must be positive");
  if (e.ecg_path.is_relative()) e.ecg_path = base / e.ecg_path;
  if (e.ppg_path.is_relative()) e.ppg_path = base / e.ppg_path;
  return e;
}

}  // namespace

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::BadManifest, path.string() + ": " + ex.what());
  }
  const auto base = path.parent_path();
  std::vector<ManifestEntry> entries;
  if (j.is_array()) {
    for (const auto& item : j) entries.push_back(parse_entry(item, base));
  } else {
    entries.push_back(parse_entry(j, base));
  }
  if (entries.empty()) throw Error(ErrorCode::BadManifest, path.string() + " lists no records");
  return entries;
}

void write_manifest(const std::filesystem::path& path, const ManifestEntry& entry) {
  nlohmann::json j = {
      {"record_id", entry.record_id},
      {"ecg_path", entry.ecg_path.generic_string()},
      {"ppg_path", entry.ppg_path.generic_string()},
      {"fs_hz", entry.fs_hz},
  };
  auto column = [](const ColumnSelector& c) -> nlohmann::json {
    if (const auto* name = std::get_if<std::string>(&c)) return *name;
    return std::get<std::size_t>(c);
  };
  if (entry.ecg_column != ColumnSelector{std::size_t{0}}) j["ecg_column"] = column(entry.ecg_column);
  if (entry.ppg_column != ColumnSelector{std::size_t{0}}) j["ppg_column"] = column(entry.ppg_column);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace ecgppg
