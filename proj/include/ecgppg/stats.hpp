#ifndef ECGPPG_STATS_HPP
#define ECGPPG_STATS_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ecgppg/error.hpp"
#include "ecgppg/events.hpp"

namespace ecgppg::stats {

/// Smallest p-value ever reported.
inline constexpr double kPFloor = 1e-300;

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

/// Student-t cumulative distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// Two-sided tail probability P(|T| >= |t|).
double student_t_two_sided(double t, double df);

struct CorrelationResult {
  double r;
  double t_stat;
  double p_two_sided;
  std::size_t n;
};

/// Sample Pearson correlation with a Student-t significance test on n - 2
/// degrees of freedom. Throws LengthMismatch, TooFewSamples (n < 3) or
/// ZeroVariance.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

struct RegressionResult {
  double slope_b1;
  double lag_time_ms;
  double r_squared;
  std::size_t n;
};

/// Closed-form least squares for t_ppg = b1 * t_ecg + lag_time.
/// Throws LengthMismatch, TooFewSamples (n < 2) or ZeroVariance.
RegressionResult ols_lag(std::span<const double> t_ecg, std::span<const double> t_ppg);

struct Descriptive {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// Moment-based summary (population skewness and excess kurtosis).
Descriptive describe(std::span<const double> x);

enum class EcgInterval { PR, QR, RP, RT, QT, RR };
enum class PpgInterval { Systole, Diastole, PeakToPeak, PulseInterval, DeltaT };

std::string name_of(EcgInterval i);
std::string name_of(PpgInterval i);

std::optional<double> value_of(const CardiacCycle& c, EcgInterval i);
std::optional<double> value_of(const CardiacCycle& c, PpgInterval i);

/// Aligned (ECG, PPG) interval pairs from cycles where both are present.
std::pair<std::vector<double>, std::vector<double>> paired_series(const CycleSeries& s,
                                                                   EcgInterval e, PpgInterval p);

struct CellResult {
  EcgInterval row;
  PpgInterval column;
  std::size_t n = 0;
  std::optional<CorrelationResult> result;
  std::optional<ErrorCode> error;
  std::string message;
};

enum class Deletion { Pairwise, Listwise };

inline constexpr std::array<EcgInterval, 5> kTableRows{EcgInterval::PR, EcgInterval::QR, EcgInterval::RP,
                                                       EcgInterval::RT, EcgInterval::QT};
inline constexpr std::array<PpgInterval, 2> kTableColumns{PpgInterval::Systole, PpgInterval::Diastole};

/// Five ECG intervals against systole and diastole periods, plus RR against
/// peak-to-peak. Cells that cannot be computed carry their error instead.
struct CorrelationTable {
  std::vector<CellResult> cells;  // row-major over kTableRows x kTableColumns
  CellResult rr_peak_to_peak;
  Deletion deletion = Deletion::Pairwise;

  const CellResult& at(EcgInterval row, PpgInterval column) const;
};

CorrelationTable correlation_table(const CycleSeries& cycles, Deletion deletion = Deletion::Pairwise);

/// Formats p the way the report prints it: "< 0.0001" below 1e-4.
std::string format_p(double p);

/// Two-column CSV with header `x_ms,y_ms`. Throws LengthMismatch or IoError.
void scatter_export(std::span<const double> x, std::span<const double> y,
                    const std::filesystem::path& path);
std::pair<std::vector<double>, std::vector<double>> read_scatter(const std::filesystem::path& path);

}  // namespace ecgppg::stats

#endif  // ECGPPG_STATS_HPP
