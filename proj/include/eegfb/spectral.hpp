#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eegfb/signal.hpp"

namespace eegfb {

/// Dense row-major matrix used for windows, spectra and band energies.
struct RowMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  RowMatrix() = default;
  RowMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<double> row(std::size_t r) { return std::span<double>(values).subspan(r * cols, cols); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols, cols);
  }

  bool operator==(const RowMatrix&) const = default;
};

inline constexpr std::size_t kBandCount = 5;

struct Band {
  std::string name;
  double low_hz;
  double high_hz;
  // 1-based inclusive spectral columns used when t == 1 (DC is column 1).
  std::size_t first_column;
  std::size_t last_column;
};

/// delta, theta, alpha, beta, gamma in that order.
struct BandTable {
  std::array<Band, kBandCount> bands;

  static BandTable standard();
};

/// How spectral bins are assigned to bands.
enum class BandMode {
  /// Bin k (0-based) sits at k / t Hz and counts toward a band when it falls in [low, high).
  ResolutionAware,
  /// The fixed inclusive column intervals [2,5],[5,9],[9,13],[13,31],[31,46]; t must be 1.
  PaperLiteral,
};

std::string to_string(BandMode mode);
BandMode band_mode_from_string(const std::string& s);

struct StatConfig {
  std::vector<double> window_lengths_s{1, 2, 4, 8};
  std::vector<std::size_t> order_ranks{1, 2, 4, 8};
  double window_stride_s = 1.0;
  BandMode mode = BandMode::ResolutionAware;
  /// When set, windows with any |v| above it are dropped before combining.
  std::optional<double> artifact_threshold_v;
};

void validate(const StatConfig& cfg);

/// Number of sliding windows of length t (stride 1 s) in a recording of n samples.
std::size_t window_count(std::size_t n_samples, double rate_hz, double t_seconds, double stride_s = 1.0);

/// Sample offsets of each window start.
std::vector<std::size_t> window_offsets(std::size_t n_samples, double rate_hz, double t_seconds,
                                        double stride_s = 1.0);

/// Windows of t seconds starting at 0, 1, 2, ... s. Empty when the segment is shorter than t.
std::vector<RowMatrix> split_windows(const EegSegment& segment, double t_seconds, double stride_s = 1.0);

/// Per-row magnitudes of the unnormalised forward DFT; column 0 is DC.
RowMatrix window_spectrum(const RowMatrix& window);

/// Element-wise square of a magnitude spectrum.
RowMatrix energy_density(const RowMatrix& spectrum);

/// Sums energy-density columns per band. Only the low-frequency columns named
/// by the band are counted, so the mirrored half of a real spectrum is not.
RowMatrix band_energies(const RowMatrix& density, const BandTable& bands, double t_seconds,
                        BandMode mode = BandMode::ResolutionAware);

/// g-th largest / smallest band energy across windows, per channel and band.
struct OrderStatistics {
  std::size_t channels = 0;
  std::size_t ranks = 0;
  std::vector<double> max;  // indexed [rank][channel][band]
  std::vector<double> min;

  double max_at(std::size_t channel, std::size_t band, std::size_t rank) const {
    return max[(rank * channels + channel) * kBandCount + band];
  }
  double min_at(std::size_t channel, std::size_t band, std::size_t rank) const {
    return min[(rank * channels + channel) * kBandCount + band];
  }
};

/// Entries whose rank exceeds the number of windows are zero.
OrderStatistics combine_stats(const std::vector<RowMatrix>& series, std::span<const std::size_t> ranks,
                              std::size_t channels);

enum class StatKind { Max, Min };

/// Where one feature column comes from.
struct FeatureColumn {
  double window_s;
  StatKind stat;
  std::size_t rank;
  std::size_t channel;
  std::string channel_label;
  std::size_t band;
};

std::size_t feature_count(const StatConfig& cfg, std::size_t channels);

/// Column order: window length, statistic (max then min), rank, channel, band.
std::vector<FeatureColumn> describe_features(const StatConfig& cfg, const std::vector<std::string>& channel_labels);

struct FeatureVector {
  std::vector<double> values;
};

FeatureVector extract_features(const EegSegment& segment, const StatConfig& cfg,
                               const BandTable& bands = BandTable::standard());

}  // namespace eegfb
