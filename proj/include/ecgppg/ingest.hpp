#ifndef ECGPPG_INGEST_HPP
#define ECGPPG_INGEST_HPP

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ecgppg {

/// Uniformly sampled single channel. Construction rejects a non-positive
/// rate and non-finite samples, so every live Waveform satisfies both.
class Waveform {
 public:
  Waveform(std::vector<double> samples, double fs_hz, std::string label = {});

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double fs() const noexcept { return fs_; }
  const std::string& label() const noexcept { return label_; }
  double duration_ms() const noexcept {
    return 1000.0 * static_cast<double>(samples_.size()) / fs_;
  }

  /// Copy with the same rate and label but new samples.
  Waveform with_samples(std::vector<double> samples) const;
  /// First `n` samples (n clamped to size()).
  Waveform truncated(std::size_t n) const;

 private:
  std::vector<double> samples_;
  double fs_;
  std::string label_;
};

/// ECG and PPG channels of one recording, trimmed to equal length.
struct SyncedRecord {
  std::string record_id;
  Waveform ecg;
  Waveform ppg;

  /// Trims the longer channel. Throws SampleRateMismatch if rates differ.
  static SyncedRecord aligned(std::string record_id, Waveform ecg, Waveform ppg);
};

/// Column by header name or by zero-based position.
using ColumnSelector = std::variant<std::string, std::size_t>;

/// Reads one column of a CSV file. The file may start with `#` comment lines;
/// a `# fs_hz=<rate>` comment is compared against `fs_hz` and a disagreement
/// raises SampleRateMismatch.
Waveform load_waveform(const std::filesystem::path& path,
                       const ColumnSelector& column, double fs_hz);

/// Writes the canonical single-column form (`# fs_hz=` line, `amplitude`
/// header, one value per line at round-trip precision).
void write_waveform(const std::filesystem::path& path, const Waveform& w);

SyncedRecord load_record_pair(const std::filesystem::path& ecg_path,
                              const std::filesystem::path& ppg_path,
                              double fs_hz, std::string record_id = {},
                              const ColumnSelector& ecg_column = std::size_t{0},
                              const ColumnSelector& ppg_column = std::size_t{0});

struct ManifestEntry {
  std::string record_id;
  std::filesystem::path ecg_path;
  std::filesystem::path ppg_path;
  double fs_hz = 0.0;
  ColumnSelector ecg_column = std::size_t{0};
  ColumnSelector ppg_column = std::size_t{0};
};

/// Accepts a single manifest object or an array of them. Relative channel
/// paths are resolved against the manifest's directory. Optional
/// `ecg_column` / `ppg_column` pick a column by name or zero-based index
/// (default 0), so both channels may live in one multi-column file.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const ManifestEntry& entry);

}  // namespace ecgppg

#endif  // ECGPPG_INGEST_HPP
