#include "vfe/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "vfe/error.hpp"

namespace vfe::dsp {

namespace {

using cplx = std::complex<double>;

void check_spec(const BandpassSpec& spec) {
  if (spec.prototype_order < 1) {
    throw Error(Errc::InvalidSpec, fmt::format("prototype order {} must be >= 1", spec.prototype_order));
  }
  if (!(spec.sample_rate_hz > 0.0) || !(spec.bandwidth_hz > 0.0)) {
    throw Error(Errc::InvalidSpec, "sample rate and bandwidth must be positive");
  }
  if (!(spec.low_edge_hz() > 0.0)) {
    throw Error(Errc::InvalidSpec, fmt::format("lower band edge {} Hz must be above 0", spec.low_edge_hz()));
  }
  if (!(spec.high_edge_hz() < spec.sample_rate_hz / 2.0)) {
    throw Error(Errc::InvalidSpec,
                fmt::format("upper band edge {} Hz must be below Nyquist ({} Hz)", spec.high_edge_hz(),
                            spec.sample_rate_hz / 2.0));
  }
}

// Transposed direct form II state for one section.
struct SectionState {
  double z1 = 0.0;
  double z2 = 0.0;
};

// Sections with the overall gain folded into the first numerator.
std::vector<Biquad> folded_sections(const FilterCoefficients& coeffs) {
  std::vector<Biquad> secs = coeffs.sections;
  if (!secs.empty()) {
    secs[0].b0 *= coeffs.gain;
    secs[0].b1 *= coeffs.gain;
    secs[0].b2 *= coeffs.gain;
  }
  return secs;
}

// Steady-state states of the cascade for a unit step input.
std::vector<SectionState> step_initial_state(const std::vector<Biquad>& secs) {
  std::vector<SectionState> zi(secs.size());
  double scale = 1.0;
  for (std::size_t s = 0; s < secs.size(); ++s) {
    const Biquad& q = secs[s];
    const double dc = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    const double y = dc * scale;
    zi[s].z2 = q.b2 * scale - q.a2 * y;
    zi[s].z1 = q.b1 * scale - q.a1 * y + zi[s].z2;
    scale = y;
  }
  return zi;
}

void run_cascade(const std::vector<Biquad>& secs, std::vector<SectionState> state, std::vector<double>& data) {
  for (std::size_t s = 0; s < secs.size(); ++s) {
    const Biquad& q = secs[s];
    double z1 = state[s].z1;
    double z2 = state[s].z2;
    for (double& x : data) {
      const double y = q.b0 * x + z1;
      z1 = q.b1 * x - q.a1 * y + z2;
      z2 = q.b2 * x - q.a2 * y;
      x = y;
    }
  }
}

std::vector<SectionState> scaled(std::vector<SectionState> zi, double k) {
  for (auto& z : zi) {
    z.z1 *= k;
    z.z2 *= k;
  }
  return zi;
}

}  // namespace

FilterCoefficients design_bandpass(const BandpassSpec& spec) {
  check_spec(spec);
  const int n = spec.prototype_order;
  const double fs = spec.sample_rate_hz;
  const double fs2 = 2.0 * fs;

  // Pre-warped analog band edges (rad/s).
  const double w_lo = fs2 * std::tan(std::numbers::pi * spec.low_edge_hz() / fs);
  const double w_hi = fs2 * std::tan(std::numbers::pi * spec.high_edge_hz() / fs);
  const double bw = w_hi - w_lo;
  const double w0 = std::sqrt(w_lo * w_hi);

  // Butterworth prototype poles, mapped low-pass -> band-pass: each prototype
  // pole p yields the two roots of s^2 - p*bw*s + w0^2.
  std::vector<cplx> analog_poles;
  analog_poles.reserve(2 * static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const cplx p = std::polar(1.0, std::numbers::pi * (2.0 * k + n + 1.0) / (2.0 * n));
    const cplx half = p * bw / 2.0;
    const cplx root = std::sqrt(half * half - w0 * w0);
    analog_poles.push_back(half + root);
    analog_poles.push_back(half - root);
  }

  // Bilinear transform. The n analog zeros at s = 0 map to z = +1 and the n
  // zeros at infinity map to z = -1.
  cplx gain = std::pow(bw, n) * std::pow(fs2, n);
  std::vector<cplx> poles;
  poles.reserve(analog_poles.size());
  for (const cplx& s : analog_poles) {
    gain /= (fs2 - s);
    poles.push_back((fs2 + s) / (fs2 - s));
  }

  // Pair conjugates; real poles (wide bands) pair with each other.
  std::vector<cplx> upper;
  std::vector<double> reals;
  for (const cplx& p : poles) {
    if (std::abs(p.imag()) <= 1e-12 * std::abs(p)) {
      reals.push_back(p.real());
    } else if (p.imag() > 0.0) {
      upper.push_back(p);
    }
  }
  std::sort(reals.begin(), reals.end());

  FilterCoefficients out;
  out.prototype_order = n;
  out.gain = gain.real();
  for (const cplx& p : upper) {
    out.sections.push_back({1.0, 0.0, -1.0, -2.0 * p.real(), std::norm(p)});
  }
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
    out.sections.push_back({1.0, 0.0, -1.0, -(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]});
  }
  if (out.sections.size() != static_cast<std::size_t>(n)) {
    throw Error(Errc::InvalidSpec, "band-pass design produced an unpaired pole");
  }
  // Poles nearest the unit circle last.
  std::sort(out.sections.begin(), out.sections.end(),
            [](const Biquad& a, const Biquad& b) { return a.a2 < b.a2; });
  return out;
}

std::complex<double> frequency_response(const FilterCoefficients& coeffs, double freq_hz,
                                        double sample_rate_hz) {
  const cplx zinv = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / sample_rate_hz);
  cplx h = coeffs.gain;
  for (const Biquad& q : coeffs.sections) {
    h *= (q.b0 + zinv * (q.b1 + zinv * q.b2)) / (1.0 + zinv * (q.a1 + zinv * q.a2));
  }
  return h;
}

bool is_stable(const FilterCoefficients& coeffs) noexcept {
  for (const Biquad& q : coeffs.sections) {
    // Roots of z^2 + a1 z + a2.
    const cplx disc = std::sqrt(cplx(q.a1 * q.a1 - 4.0 * q.a2, 0.0));
    const cplx r1 = (-q.a1 + disc) / 2.0;
    const cplx r2 = (-q.a1 - disc) / 2.0;
    if (!(std::abs(r1) < 1.0) || !(std::abs(r2) < 1.0)) return false;
  }
  return true;
}

std::vector<double> filter_causal(std::span<const double> signal, const FilterCoefficients& coeffs) {
  std::vector<double> data(signal.begin(), signal.end());
  const auto secs = folded_sections(coeffs);
  run_cascade(secs, std::vector<SectionState>(secs.size()), data);
  return data;
}

std::vector<double> filter_zero_phase(std::span<const double> signal, const FilterCoefficients& coeffs) {
  const std::size_t n = signal.size();
  const std::size_t padlen = 3 * (static_cast<std::size_t>(coeffs.order()) + 1);
  if (n < padlen) {
    throw Error(Errc::SignalTooShort,
                fmt::format("zero-phase filtering needs at least {} samples, got {}", padlen, n));
  }
  const std::size_t pad = std::min(padlen, n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * signal[0] - signal[i]);
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * signal[n - 1] - signal[n - 1 - i]);

  const auto secs = folded_sections(coeffs);
  const auto zi = step_initial_state(secs);

  run_cascade(secs, scaled(zi, ext.front()), ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(secs, scaled(zi, ext.front()), ext);
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

namespace {

struct Anchor {
  std::size_t index;
  double height;
};

// Local extrema of one polarity (sign = +1 maxima, -1 minima), thinned so
// kept extrema are at least min_gap samples apart (the more extreme wins).
std::vector<std::size_t> find_extrema(std::span<const double> x, int sign, double min_gap) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double v = sign * x[i];
    if (!(v > sign * x[i - 1] && v >= sign * x[i + 1])) continue;
    if (!kept.empty() && static_cast<double>(i - kept.back()) < min_gap) {
      if (v > sign * x[kept.back()]) kept.back() = i;
      continue;
    }
    kept.push_back(i);
  }
  return kept;
}

std::vector<Anchor> anchor_heights(std::span<const double> x, const std::vector<std::size_t>& idx, int sign,
                                   double omega) {
  const double sin_w = std::abs(std::sin(omega));
  std::vector<Anchor> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    double h = x[i];
    if (omega > 0.0 && sin_w > 1e-6 && sign * x[i] > 0.0) {
      const double q = x[i] * x[i] - x[i - 1] * x[i + 1];
      if (q > 0.0) h = sign * std::max(std::sqrt(q) / sin_w, std::abs(x[i]));
    }
    out.push_back({i, h});
  }
  return out;
}

std::vector<double> interpolate_anchors(const std::vector<Anchor>& anchors, std::size_t n) {
  std::vector<double> out(n);
  const Anchor& first = anchors.front();
  const Anchor& last = anchors.back();
  for (std::size_t i = 0; i <= first.index; ++i) out[i] = first.height;
  for (std::size_t k = 0; k + 1 < anchors.size(); ++k) {
    const Anchor& a = anchors[k];
    const Anchor& b = anchors[k + 1];
    const double span = static_cast<double>(b.index - a.index);
    for (std::size_t i = a.index; i <= b.index; ++i) {
      out[i] = a.height + (b.height - a.height) * static_cast<double>(i - a.index) / span;
    }
  }
  for (std::size_t i = last.index; i < n; ++i) out[i] = last.height;
  return out;
}

}  // namespace

Envelope full_envelope(std::span<const double> signal, double sample_rate_hz, const EnvelopeOptions& options) {
  if (signal.size() < 3) throw Error(Errc::NoExtremaFound, "signal shorter than 3 samples");
  const double min_gap = options.min_peak_spacing_s * sample_rate_hz;
  const double omega = options.carrier_hz > 0.0 ? 2.0 * std::numbers::pi * options.carrier_hz / sample_rate_hz : 0.0;

  Envelope env;
  env.min_peak_spacing_s = options.min_peak_spacing_s;
  env.upper_anchors = find_extrema(signal, +1, min_gap);
  env.lower_anchors = find_extrema(signal, -1, min_gap);
  if (env.upper_anchors.empty() || env.lower_anchors.empty()) {
    throw Error(Errc::NoExtremaFound, "signal has no local maxima or no local minima");
  }

  const auto upper = interpolate_anchors(anchor_heights(signal, env.upper_anchors, +1, omega), signal.size());
  const auto lower = interpolate_anchors(anchor_heights(signal, env.lower_anchors, -1, omega), signal.size());

  env.values.resize(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    env.values[i] = std::max(0.0, upper[i] + std::abs(lower[i]));
  }
  return env;
}

std::vector<double> median_filter(std::span<const double> signal, std::size_t kernel) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw Error(Errc::InvalidSpec, fmt::format("median kernel {} must be odd", kernel));
  }
  const std::size_t half = kernel / 2;
  const std::size_t n = signal.size();
  std::vector<double> out(n);
  std::vector<double> window;
  window.reserve(kernel);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    window.assign(signal.begin() + static_cast<std::ptrdiff_t>(lo), signal.begin() + static_cast<std::ptrdiff_t>(hi));
    auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
    std::nth_element(window.begin(), mid, window.end());
    out[i] = *mid;
  }
  return out;
}

}  // namespace vfe::dsp
