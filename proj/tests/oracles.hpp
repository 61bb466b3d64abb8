// Independent reference computations shared by the test suites. Nothing in
// here calls into the library paths it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

/// Direct O(M^2) DFT magnitudes.
inline std::vector<double> dft_magnitudes(const std::vector<double>& x) {
  const std::size_t m = x.size();
  std::vector<double> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    long double re = 0, im = 0;
    for (std::size_t n = 0; n < m; ++n) {
      // reduce k*n mod m first so the angle stays accurate for large products
      const long double ang = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>((k * n) % m) /
                              static_cast<long double>(m);
      re += x[n] * std::cos(ang);
      im += x[n] * std::sin(ang);
    }
    out[k] = static_cast<double>(std::sqrt(re * re + im * im));
  }
  return out;
}

/// Windows of t seconds at 1 s stride, counted by walking offsets.
inline std::size_t enumerate_windows(std::size_t n_samples, std::size_t rate, std::size_t window_samples) {
  std::size_t count = 0;
  for (std::size_t offset = 0; offset + window_samples <= n_samples; offset += rate) ++count;
  return count;
}

/// g-th largest and smallest via a full sort; zero when g exceeds the sample count.
inline std::pair<double, double> order_stat(std::vector<double> v, std::size_t g) {
  if (v.size() < g) return {0.0, 0.0};
  std::vector<double> desc = v;
  std::sort(desc.begin(), desc.end(), std::greater<>());
  std::sort(v.begin(), v.end());
  return {desc[g - 1], v[g - 1]};
}

/// Squared magnitude of an order-n digital Butterworth low-pass designed by
/// prewarped bilinear transform, written in closed form.
inline double butter_lowpass_power(double f, double fc, double fs, int n) {
  const double ratio = std::tan(std::numbers::pi * f / fs) / std::tan(std::numbers::pi * fc / fs);
  return 1.0 / (1.0 + std::pow(ratio, 2 * n));
}

inline double butter_highpass_power(double f, double fc, double fs, int n) {
  if (f == 0.0) return 0.0;
  const double ratio = std::tan(std::numbers::pi * fc / fs) / std::tan(std::numbers::pi * f / fs);
  return 1.0 / (1.0 + std::pow(ratio, 2 * n));
}

inline std::vector<double> sinusoid(double freq, double rate, std::size_t n, double amplitude = 1.0,
                                    double phase = 0.0) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate + phase);
  return out;
}

inline double rms(const std::vector<double>& x, std::size_t begin = 0, std::size_t end = SIZE_MAX) {
  end = std::min(end, x.size());
  long double s = 0;
  for (std::size_t i = begin; i < end; ++i) s += static_cast<long double>(x[i]) * x[i];
  return static_cast<double>(std::sqrt(s / static_cast<long double>(end - begin)));
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

/// Binary F1 with a confusion matrix built by hand.
struct Confusion {
  int tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy() const { return double(tp + tn) / double(tp + fp + fn + tn); }
  double f1() const {
    const double p = tp + fp ? double(tp) / (tp + fp) : 0.0;
    const double r = tp + fn ? double(tp) / (tp + fn) : 0.0;
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
};

}  // namespace oracle
