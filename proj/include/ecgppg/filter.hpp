#ifndef ECGPPG_FILTER_HPP
#define ECGPPG_FILTER_HPP

#include <span>
#include <vector>

namespace ecgppg::filter {

/// Normalized second-order section (a0 == 1), transposed direct form II.
struct Biquad {
  double b0, b1, b2, a1, a2;

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

/// Digital Butterworth sections from the bilinear transform with prewarping.
/// `order` must be even.
std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double fs_hz);
std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double fs_hz);

/// Single causal pass through the cascade starting from rest.
std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x);

/// Forward-backward (zero-phase) filtering with odd-reflection edge padding
/// and steady-state initial conditions, so a constant input passes through
/// the cascade at exactly its DC gain.
std::vector<double> sosfiltfilt(std::span<const Biquad> sections, std::span<const double> x);

}  // namespace ecgppg::filter

#endif  // ECGPPG_FILTER_HPP
