#include "eegfb/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "eegfb/error.hpp"
#include "fft.hpp"

namespace eegfb {

namespace {

std::size_t whole_samples(double seconds, double rate, const char* what) {
  const double x = seconds * rate;
  const double r = std::round(x);
  if (!(x > 0.0) || std::abs(x - r) > 1e-9 * std::max(1.0, x))
    config_error(std::string(what) + " of " + std::to_string(seconds) + " s is not a whole number of samples at " +
                 std::to_string(rate) + " Hz");
  return static_cast<std::size_t>(r);
}

using detail::FftwDeleter;

// Writes |X_k| for k = 0..n-1 into magnitudes.
void row_magnitudes(std::span<const double> x, std::span<double> magnitudes) {
  const std::size_t n = x.size();
  fftw_plan plan = detail::r2c_plan(n);
  std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(n / 2 + 1));
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute_dft_r2c(plan, in.get(), out.get());
  const fftw_complex* X = out.get();
  for (std::size_t k = 0; k <= n / 2; ++k) magnitudes[k] = std::hypot(X[k][0], X[k][1]);
  for (std::size_t k = n / 2 + 1; k < n; ++k) magnitudes[k] = magnitudes[n - k];
}

// Inclusive 0-based column range for band b under the given mode.
std::pair<std::size_t, std::size_t> band_columns(const Band& band, double t, BandMode mode) {
  if (mode == BandMode::PaperLiteral) return {band.first_column - 1, band.last_column - 1};
  // f = k / t in [low, high)
  const auto first = static_cast<std::size_t>(std::ceil(band.low_hz * t - 1e-9));
  const auto end = static_cast<std::size_t>(std::ceil(band.high_hz * t - 1e-9));
  return {first, end - 1};
}

void check_mode(double t, BandMode mode) {
  if (mode == BandMode::PaperLiteral && std::abs(t - 1.0) > 1e-12)
    config_error("paper-literal band columns are only defined for 1 s windows (got t = " + std::to_string(t) + ")");
}

std::array<std::pair<std::size_t, std::size_t>, kBandCount> all_band_columns(const BandTable& bands, double t,
                                                                             BandMode mode, std::size_t cols) {
  check_mode(t, mode);
  std::array<std::pair<std::size_t, std::size_t>, kBandCount> out;
  for (std::size_t b = 0; b < kBandCount; ++b) {
    out[b] = band_columns(bands.bands[b], t, mode);
    if (out[b].second >= cols)
      config_error("band " + bands.bands[b].name + " needs spectral column " + std::to_string(out[b].second + 1) +
                   " but windows have only " + std::to_string(cols));
  }
  return out;
}

}  // namespace

BandTable BandTable::standard() {
  return BandTable{{{
      {"delta", 0.5, 4.0, 2, 5},
      {"theta", 4.0, 8.0, 5, 9},
      {"alpha", 8.0, 12.0, 9, 13},
      {"beta", 12.0, 30.0, 13, 31},
      {"gamma", 30.0, 45.0, 31, 46},
  }}};
}

std::string to_string(BandMode mode) {
  return mode == BandMode::PaperLiteral ? "paper-literal" : "resolution-aware";
}

BandMode band_mode_from_string(const std::string& s) {
  if (s == "paper-literal") return BandMode::PaperLiteral;
  if (s == "resolution-aware") return BandMode::ResolutionAware;
  config_error("unknown band mode '" + s + "' (expected paper-literal or resolution-aware)");
}

void validate(const StatConfig& cfg) {
  auto increasing = [](const auto& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i - 1] < v[i])) return false;
    return true;
  };
  if (cfg.window_lengths_s.empty() || !increasing(cfg.window_lengths_s) || !(cfg.window_lengths_s.front() > 0.0))
    config_error("window lengths must be a nonempty strictly increasing list of positive seconds");
  if (cfg.order_ranks.empty() || !increasing(cfg.order_ranks) || cfg.order_ranks.front() < 1)
    config_error("order ranks must be a nonempty strictly increasing list of positive integers");
  if (!(cfg.window_stride_s > 0.0)) config_error("window stride must be positive");
  if (cfg.artifact_threshold_v && !(*cfg.artifact_threshold_v > 0.0))
    config_error("artifact threshold must be positive");
  if (cfg.mode == BandMode::PaperLiteral)
    for (double t : cfg.window_lengths_s) check_mode(t, cfg.mode);
}

std::size_t window_count(std::size_t n_samples, double rate_hz, double t_seconds, double stride_s) {
  const std::size_t m = whole_samples(t_seconds, rate_hz, "window length");
  const std::size_t stride = whole_samples(stride_s, rate_hz, "window stride");
  if (n_samples < m) return 0;
  return (n_samples - m) / stride + 1;
}

std::vector<std::size_t> window_offsets(std::size_t n_samples, double rate_hz, double t_seconds, double stride_s) {
  const std::size_t count = window_count(n_samples, rate_hz, t_seconds, stride_s);
  const std::size_t stride = whole_samples(stride_s, rate_hz, "window stride");
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = i * stride;
  return out;
}

std::vector<RowMatrix> split_windows(const EegSegment& segment, double t_seconds, double stride_s) {
  const double rate = segment.sample_rate_hz();
  const std::size_t m = whole_samples(t_seconds, rate, "window length");
  std::vector<RowMatrix> out;
  for (std::size_t offset : window_offsets(segment.samples_per_channel(), rate, t_seconds, stride_s)) {
    RowMatrix w(segment.channels(), m);
    for (std::size_t c = 0; c < segment.channels(); ++c) {
      auto src = segment.row(c).subspan(offset, m);
      std::copy(src.begin(), src.end(), w.row(c).begin());
    }
    out.push_back(std::move(w));
  }
  return out;
}

RowMatrix window_spectrum(const RowMatrix& window) {
  RowMatrix out(window.rows, window.cols);
  if (window.cols == 0) return out;
  for (std::size_t r = 0; r < window.rows; ++r) row_magnitudes(window.row(r), out.row(r));
  return out;
}

RowMatrix energy_density(const RowMatrix& spectrum) {
  RowMatrix out = spectrum;
  for (double& v : out.values) v = v * v;
  return out;
}

RowMatrix band_energies(const RowMatrix& density, const BandTable& bands, double t_seconds, BandMode mode) {
  const auto columns = all_band_columns(bands, t_seconds, mode, density.cols);
  RowMatrix out(density.rows, kBandCount);
  for (std::size_t r = 0; r < density.rows; ++r) {
    auto row = density.row(r);
    for (std::size_t b = 0; b < kBandCount; ++b) {
      double sum = 0.0;
      for (std::size_t k = columns[b].first; k <= columns[b].second; ++k) sum += row[k];
      out.at(r, b) = sum;
    }
  }
  return out;
}

OrderStatistics combine_stats(const std::vector<RowMatrix>& series, std::span<const std::size_t> ranks,
                              std::size_t channels) {
  OrderStatistics out;
  out.channels = channels;
  out.ranks = ranks.size();
  out.max.assign(ranks.size() * channels * kBandCount, 0.0);
  out.min.assign(out.max.size(), 0.0);
  for (const auto& e : series)
    if (e.rows != channels || e.cols != kBandCount)
      data_error("band energy matrices must all be " + std::to_string(channels) + " x 5");

  const std::size_t n = series.size();
  std::vector<double> values(n);
  for (std::size_t r = 0; r < channels; ++r) {
    for (std::size_t c = 0; c < kBandCount; ++c) {
      for (std::size_t i = 0; i < n; ++i) values[i] = series[i].at(r, c);
      std::sort(values.begin(), values.end());
      for (std::size_t j = 0; j < ranks.size(); ++j) {
        const std::size_t g = ranks[j];
        if (g == 0) config_error("order ranks are 1-based");
        if (n < g) continue;
        const std::size_t idx = (j * channels + r) * kBandCount + c;
        out.max[idx] = values[n - g];
        out.min[idx] = values[g - 1];
      }
    }
  }
  return out;
}

std::size_t feature_count(const StatConfig& cfg, std::size_t channels) {
  return 2 * cfg.order_ranks.size() * cfg.window_lengths_s.size() * channels * kBandCount;
}

std::vector<FeatureColumn> describe_features(const StatConfig& cfg, const std::vector<std::string>& channel_labels) {
  std::vector<FeatureColumn> out;
  out.reserve(feature_count(cfg, channel_labels.size()));
  for (double t : cfg.window_lengths_s)
    for (StatKind stat : {StatKind::Max, StatKind::Min})
      for (std::size_t rank : cfg.order_ranks)
        for (std::size_t ch = 0; ch < channel_labels.size(); ++ch)
          for (std::size_t b = 0; b < kBandCount; ++b) out.push_back({t, stat, rank, ch, channel_labels[ch], b});
  return out;
}

FeatureVector extract_features(const EegSegment& segment, const StatConfig& cfg, const BandTable& bands) {
  validate(cfg);
  const std::size_t ch = segment.channels();
  const double rate = segment.sample_rate_hz();
  FeatureVector out;
  out.values.reserve(feature_count(cfg, ch));

  for (double t : cfg.window_lengths_s) {
    const std::size_t m = whole_samples(t, rate, "window length");
    std::vector<RowMatrix> energies;
    std::vector<double> magnitudes(m);
    RowMatrix density(1, m);
    for (std::size_t offset : window_offsets(segment.samples_per_channel(), rate, t, cfg.window_stride_s)) {
      if (cfg.artifact_threshold_v && exceeds_amplitude(segment, offset, m, *cfg.artifact_threshold_v)) continue;
      RowMatrix e(ch, kBandCount);
      for (std::size_t r = 0; r < ch; ++r) {
        row_magnitudes(segment.row(r).subspan(offset, m), magnitudes);
        for (std::size_t k = 0; k < m; ++k) density.values[k] = magnitudes[k] * magnitudes[k];
        const RowMatrix row_energy = band_energies(density, bands, t, cfg.mode);
        std::copy(row_energy.values.begin(), row_energy.values.end(), e.row(r).begin());
      }
      energies.push_back(std::move(e));
    }
    const OrderStatistics stats = combine_stats(energies, cfg.order_ranks, ch);
    out.values.insert(out.values.end(), stats.max.begin(), stats.max.end());
    out.values.insert(out.values.end(), stats.min.begin(), stats.min.end());
  }
  return out;
}

}  // namespace eegfb
