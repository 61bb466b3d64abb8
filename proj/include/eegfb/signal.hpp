#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eegfb {

/// Who was reading what when a segment was recorded.
struct SegmentMeta {
  std::string user;
  std::string query;
  std::int64_t judgment = 0;
  std::int64_t paragraph = 0;
  double dwell_seconds = 0.0;

  bool operator==(const SegmentMeta&) const = default;
};

/// Minimum sampling rate accepted for analysis: twice the top of the gamma band.
inline constexpr double kMinSampleRateHz = 90.0;

/// Continuous multi-channel EEG, channel-major. A segment with zero samples is
/// allowed (it marks a zero-length paragraph view) and reports degenerate().
class EegSegment {
 public:
  EegSegment() = default;
  EegSegment(std::vector<std::string> channel_labels, double sample_rate_hz,
             std::vector<double> samples, SegmentMeta meta);

  std::size_t channels() const noexcept { return labels_.size(); }
  std::size_t samples_per_channel() const noexcept { return n_; }
  double sample_rate_hz() const noexcept { return rate_; }
  double duration_seconds() const noexcept;
  bool degenerate() const noexcept { return n_ == 0; }

  const std::vector<std::string>& channel_labels() const noexcept { return labels_; }
  const SegmentMeta& meta() const noexcept { return meta_; }
  SegmentMeta& meta() noexcept { return meta_; }

  std::span<const double> row(std::size_t channel) const;
  std::span<double> row(std::size_t channel);
  const std::vector<double>& data() const noexcept { return data_; }

  /// Index of a channel label; throws a config error when absent.
  std::size_t channel_index(const std::string& label) const;

  bool operator==(const EegSegment&) const = default;

 private:
  std::vector<std::string> labels_;
  double rate_ = 0.0;
  std::size_t n_ = 0;
  std::vector<double> data_;
  SegmentMeta meta_;
};

/// Half-open time interval [start_s, end_s) in seconds from segment start.
struct TimeInterval {
  double start_s = 0.0;
  double end_s = 0.0;
};

struct PreprocessConfig {
  /// Averaged reference (mastoids). Empty skips re-referencing.
  std::vector<std::string> reference_channels;
  bool bandpass_enabled = true;
  double highpass_hz = 0.5;
  double lowpass_hz = 50.0;
  TimeInterval baseline_window{0.0, 0.2};
  double target_rate_hz = 1000.0;
  int filter_order = 4;
  /// Windows holding any |v| above this are excluded from feature extraction.
  std::optional<double> artifact_threshold_v = 100e-6;
};

/// Throws a config error unless cfg is usable on a recording sampled at rate_hz.
void validate(const PreprocessConfig& cfg, double rate_hz);

EegSegment rereference(const EegSegment& segment, const std::vector<std::string>& refs);
EegSegment baseline_correct(const EegSegment& segment, TimeInterval window);
EegSegment bandpass(const EegSegment& segment, const PreprocessConfig& cfg);
EegSegment downsample(const EegSegment& segment, double target_rate_hz);

/// rereference -> baseline_correct -> bandpass -> downsample.
EegSegment preprocess(const EegSegment& segment, const PreprocessConfig& cfg);

/// One direct-form-II-transposed second-order section with a0 == 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

using SosFilter = std::vector<Biquad>;

/// Butterworth band-pass as a high-pass of the given order cascaded with a
/// low-pass of the same order, bilinear transform with prewarping.
SosFilter design_bandpass(int order, double low_hz, double high_hz, double rate_hz);

/// Single-pass magnitude response |H(f)|. Zero-phase filtering squares it.
double magnitude_response(const SosFilter& filter, double freq_hz, double rate_hz);

/// Forward-backward filtering with odd-extension padding and steady-state
/// initial conditions.
std::vector<double> filtfilt(const SosFilter& filter, std::span<const double> x);

/// A paragraph view inside a continuous recording.
struct ViewEvent {
  std::int64_t paragraph = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  std::optional<bool> clicked;
  std::optional<std::string> annotation;
};

/// Cut a recording into one segment per view, samples
/// [floor(start*sr), floor(end*sr)). Zero-length views give degenerate segments.
std::vector<EegSegment> slice_by_events(const EegSegment& recording,
                                        const std::vector<ViewEvent>& events);

/// True when any sample of any channel in [begin, begin+length) exceeds threshold in magnitude.
bool exceeds_amplitude(const EegSegment& segment, std::size_t begin, std::size_t length,
                       double threshold_v);

}  // namespace eegfb
