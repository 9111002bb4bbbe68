#include "ecgppg/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ecgppg::filter {

namespace {

double section_q(int order, int k) {
  return 1.0 / (2.0 * std::cos(std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order)));
}

void check_order(int order) {
  if (order <= 0 || order % 2 != 0) throw std::invalid_argument("Butterworth order must be even");
}

// Runs one pass in place. `x0` seeds the steady state; pass 0 to start at rest.
void run_cascade(std::span<const Biquad> sections, std::vector<double>& x, double x0) {
  double level = x0;
  for (const Biquad& s : sections) {
    const double y_ss = s.dc_gain() * level;
    double z1 = y_ss - s.b0 * level;
    double z2 = s.b2 * level - s.a2 * y_ss;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    level = y_ss;
  }
}

}  // namespace

std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double fs_hz) {
  check_order(order);
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / fs_hz;
  const double c = std::cos(w0);
  std::vector<Biquad> out;
  for (int k = 0; k < order / 2; ++k) {
    const double alpha = std::sin(w0) / (2.0 * section_q(order, k));
    const double a0 = 1.0 + alpha;
    out.push_back({(1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0,
                   -2.0 * c / a0, (1.0 - alpha) / a0});
  }
  return out;
}

std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double fs_hz) {
  check_order(order);
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / fs_hz;
  const double c = std::cos(w0);
  std::vector<Biquad> out;
  for (int k = 0; k < order / 2; ++k) {
    const double alpha = std::sin(w0) / (2.0 * section_q(order, k));
    const double a0 = 1.0 + alpha;
    out.push_back({(1.0 + c) / 2.0 / a0, -(1.0 + c) / a0, (1.0 + c) / 2.0 / a0,
                   -2.0 * c / a0, (1.0 - alpha) / a0});
  }
  return out;
}

std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  run_cascade(sections, y, 0.0);
  return y;
}

std::vector<double> sosfiltfilt(std::span<const Biquad> sections, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2 || sections.empty()) return {x.begin(), x.end()};

  const std::size_t pad = std::min<std::size_t>(n - 1, 3 * (2 * sections.size() + 1));
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  run_cascade(sections, ext, ext.front());
  std::reverse(ext.begin(), ext.end());
  run_cascade(sections, ext, ext.front());
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace ecgppg::filter
