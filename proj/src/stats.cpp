#include "ecgppg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ecgppg::stats {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::LengthMismatch,
                "series lengths differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(incomplete_beta(0.5 * df, 0.5, x), 0.0, 1.0);
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size());
  const std::size_t n = x.size();
  if (n < 3) throw Error(ErrorCode::TooFewSamples, "pearson needs at least 3 pairs");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorCode::ZeroVariance, "series has zero variance");

  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  const double one_minus = 1.0 - r * r;
  const double t = one_minus > 0.0 ? r * std::sqrt(df / one_minus)
                                   : std::copysign(std::numeric_limits<double>::infinity(), r);
  const double p = std::max(student_t_two_sided(t, df), kPFloor);
  return {r, t, p, n};
}

RegressionResult ols_lag(std::span<const double> t_ecg, std::span<const double> t_ppg) {
  require_same_length(t_ecg.size(), t_ppg.size());
  const std::size_t n = t_ecg.size();
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "regression needs at least 2 points");
  const double mx = mean_of(t_ecg);
  const double my = mean_of(t_ppg);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = t_ecg[i] - mx;
    const double dy = t_ppg[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::ZeroVariance, "ECG event times are all equal");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  const double r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return {slope, intercept, r2, n};
}

Descriptive describe(std::span<const double> x) {
  Descriptive d;
  d.n = x.size();
  if (x.empty()) return d;
  d.mean = mean_of(x);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double e = v - d.mean;
    m2 += e * e;
    m3 += e * e * e;
    m4 += e * e * e * e;
  }
  const double n = static_cast<double>(x.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  d.sd = x.size() > 1 ? std::sqrt(m2 * n / (n - 1.0)) : 0.0;
  if (m2 > 0.0) {
    d.skewness = m3 / std::pow(m2, 1.5);
    d.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return d;
}

std::string name_of(EcgInterval i) {
  switch (i) {
    case EcgInterval::PR: return "PR";
    case EcgInterval::QR: return "QR";
    case EcgInterval::RP: return "RP";
    case EcgInterval::RT: return "RT";
    case EcgInterval::QT: return "QT";
    case EcgInterval::RR: return "RR";
  }
  return "?";
}

std::string name_of(PpgInterval i) {
  switch (i) {
    case PpgInterval::Systole: return "systole";
    case PpgInterval::Diastole: return "diastole";
    case PpgInterval::PeakToPeak: return "peak_to_peak";
    case PpgInterval::PulseInterval: return "pulse_interval";
    case PpgInterval::DeltaT: return "delta_t";
  }
  return "?";
}

std::optional<double> value_of(const CardiacCycle& c, EcgInterval i) {
  const auto& e = c.ecg_intervals;
  switch (i) {
    case EcgInterval::PR: return e.pr_ms;
    case EcgInterval::QR: return e.qr_ms;
    case EcgInterval::RP: return e.rp_ms;
    case EcgInterval::RT: return e.rt_ms;
    case EcgInterval::QT: return e.qt_ms;
    case EcgInterval::RR: return e.rr_ms;
  }
  return std::nullopt;
}

std::optional<double> value_of(const CardiacCycle& c, PpgInterval i) {
  const auto& p = c.ppg_intervals;
  switch (i) {
    case PpgInterval::Systole: return p.systole_ms;
    case PpgInterval::Diastole: return p.diastole_ms;
    case PpgInterval::PeakToPeak: return p.peak_to_peak_ms;
    case PpgInterval::PulseInterval: return p.pulse_interval_ms;
    case PpgInterval::DeltaT: return p.delta_t_ms;
  }
  return std::nullopt;
}

std::pair<std::vector<double>, std::vector<double>> paired_series(const CycleSeries& s,
                                                                   EcgInterval e, PpgInterval p) {
  std::pair<std::vector<double>, std::vector<double>> out;
  for (const auto& c : s.cycles) {
    const auto x = value_of(c, e);
    const auto y = value_of(c, p);
    if (x && y) {
      out.first.push_back(*x);
      out.second.push_back(*y);
    }
  }
  return out;
}

namespace {

CellResult evaluate_cell(EcgInterval row, PpgInterval column, const CycleSeries& cycles) {
  CellResult cell{row, column, 0, std::nullopt, std::nullopt, {}};
  const auto [x, y] = paired_series(cycles, row, column);
  cell.n = x.size();
  try {
    cell.result = pearson(x, y);
  } catch (const Error& e) {
    cell.error = e.code();
    cell.message = e.what();
  }
  return cell;
}

bool complete_for_table(const CardiacCycle& c) {
  for (auto r : kTableRows)
    if (!value_of(c, r)) return false;
  for (auto col : kTableColumns)
    if (!value_of(c, col)) return false;
  return true;
}

}  // namespace

const CellResult& CorrelationTable::at(EcgInterval row, PpgInterval column) const {
  for (const auto& c : cells)
    if (c.row == row && c.column == column) return c;
  if (row == EcgInterval::RR && column == PpgInterval::PeakToPeak) return rr_peak_to_peak;
  throw std::out_of_range("no such correlation cell");
}

CorrelationTable correlation_table(const CycleSeries& cycles, Deletion deletion) {
  CycleSeries filtered;
  const CycleSeries* source = &cycles;
  if (deletion == Deletion::Listwise) {
    filtered.fs_hz = cycles.fs_hz;
    for (const auto& c : cycles.cycles)
      if (complete_for_table(c)) filtered.cycles.push_back(c);
    source = &filtered;
  }
  CorrelationTable table;
  table.deletion = deletion;
  for (auto row : kTableRows)
    for (auto col : kTableColumns) table.cells.push_back(evaluate_cell(row, col, *source));
  table.rr_peak_to_peak = evaluate_cell(EcgInterval::RR, PpgInterval::PeakToPeak, cycles);
  return table;
}

std::string format_p(double p) {
  if (p < 1e-4) return "< 0.0001";
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << p;
  return out.str();
}

void scatter_export(std::span<const double> x, std::span<const double> y,
                    const std::filesystem::path& path) {
  require_same_length(x.size(), y.size());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "x_ms,y_ms\n";
  for (std::size_t i = 0; i < x.size(); ++i) out << x[i] << ',' << y[i] << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::pair<std::vector<double>, std::vector<double>> read_scatter(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::pair<std::vector<double>, std::vector<double>> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::IoError, "malformed scatter row in " + path.string());
    out.first.push_back(std::strtod(line.substr(0, comma).c_str(), nullptr));
    out.second.push_back(std::strtod(line.substr(comma + 1).c_str(), nullptr));
  }
  return out;
}

}  // namespace ecgppg::stats
