#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vfe::dsp {

struct BandpassSpec {
  double center_hz = 136.0;
  double bandwidth_hz = 10.0;
  int prototype_order = 4;  // low-pass prototype order; band-pass has twice the poles
  double sample_rate_hz = 400.0;

  double low_edge_hz() const noexcept { return center_hz - bandwidth_hz / 2.0; }
  double high_edge_hz() const noexcept { return center_hz + bandwidth_hz / 2.0; }
};

// H(z) = b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct FilterCoefficients {
  std::vector<Biquad> sections;
  double gain = 1.0;
  int prototype_order = 0;

  // Order of the realized digital filter (number of poles).
  int order() const noexcept { return 2 * static_cast<int>(sections.size()); }
};

// Digital Butterworth band-pass via bilinear transform of the analog
// prototype, returned as conjugate-pole second-order sections.
FilterCoefficients design_bandpass(const BandpassSpec& spec);

// Complex response at freq_hz, including the overall gain.
std::complex<double> frequency_response(const FilterCoefficients& coeffs, double freq_hz,
                                        double sample_rate_hz);

// True when both poles of every section lie strictly inside the unit circle.
bool is_stable(const FilterCoefficients& coeffs) noexcept;

// Single causal pass from rest.
std::vector<double> filter_causal(std::span<const double> signal, const FilterCoefficients& coeffs);

// Forward-backward filtering with odd-reflected edge padding of
// 3 * (order + 1) samples and steady-state initial conditions. Output has
// zero phase and squared magnitude response.
std::vector<double> filter_zero_phase(std::span<const double> signal, const FilterCoefficients& coeffs);

struct EnvelopeOptions {
  // Minimum distance between kept extrema of the same polarity.
  double min_peak_spacing_s = 0.5 / 136.0;
  // When > 0, each extremum's height is refined with the three-sample
  // sinusoid identity A^2 sin^2(w) = x[n]^2 - x[n-1] x[n+1] at this carrier.
  // Needed when the carrier has only a few samples per period.
  double carrier_hz = 0.0;
};

struct Envelope {
  std::vector<double> values;
  double min_peak_spacing_s = 0.0;
  std::vector<std::size_t> upper_anchors;
  std::vector<std::size_t> lower_anchors;
};

// Upper envelope (through local maxima) plus |lower envelope| (through local
// minima), each linearly interpolated and held flat beyond the outermost
// extremum.
Envelope full_envelope(std::span<const double> signal, double sample_rate_hz,
                       const EnvelopeOptions& options = {});

// Sliding median with an odd kernel; windows shrink at the edges.
std::vector<double> median_filter(std::span<const double> signal, std::size_t kernel);

}  // namespace vfe::dsp
