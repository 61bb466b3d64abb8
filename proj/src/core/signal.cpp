#include "eegfb/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "eegfb/error.hpp"

namespace eegfb {

namespace {

// Guards floor() against products like 0.29 * 1000 landing a hair below an integer.
std::size_t floor_index(double seconds, double rate) {
  const double x = seconds * rate;
  return static_cast<std::size_t>(std::floor(x + 1e-9 * std::max(1.0, std::abs(x))));
}

}  // namespace

EegSegment::EegSegment(std::vector<std::string> channel_labels, double sample_rate_hz,
                       std::vector<double> samples, SegmentMeta meta)
    : labels_(std::move(channel_labels)), rate_(sample_rate_hz), data_(std::move(samples)),
      meta_(std::move(meta)) {
  if (labels_.empty()) data_error("segment needs at least one channel");
  if (!(rate_ > 0.0) || !std::isfinite(rate_)) data_error("sample rate must be positive");
  if (data_.size() % labels_.size() != 0)
    data_error("sample count " + std::to_string(data_.size()) + " is not a multiple of " +
               std::to_string(labels_.size()) + " channels");
  n_ = data_.size() / labels_.size();
}

double EegSegment::duration_seconds() const noexcept { return static_cast<double>(n_) / rate_; }

std::span<const double> EegSegment::row(std::size_t channel) const {
  return std::span<const double>(data_).subspan(channel * n_, n_);
}

std::span<double> EegSegment::row(std::size_t channel) {
  return std::span<double>(data_).subspan(channel * n_, n_);
}

std::size_t EegSegment::channel_index(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) config_error("unknown channel label '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

void validate(const PreprocessConfig& cfg, double rate_hz) {
  if (cfg.filter_order < 1 || cfg.filter_order > 12) config_error("filter_order must be in 1..12");
  if (!(cfg.target_rate_hz > 0.0)) config_error("target_rate_hz must be positive");
  if (cfg.baseline_window.end_s <= cfg.baseline_window.start_s || cfg.baseline_window.start_s < 0)
    config_error("baseline window must be a nonempty interval starting at or after 0");
  if (cfg.artifact_threshold_v && !(*cfg.artifact_threshold_v > 0.0))
    config_error("artifact threshold must be positive");
  if (cfg.bandpass_enabled) {
    if (!(cfg.highpass_hz > 0.0) || !(cfg.highpass_hz < cfg.lowpass_hz))
      config_error("need 0 < highpass_hz < lowpass_hz");
    if (cfg.lowpass_hz >= cfg.target_rate_hz / 2.0)
      config_error("lowpass_hz must lie below the target Nyquist frequency");
    if (cfg.lowpass_hz >= rate_hz / 2.0) config_error("lowpass_hz must lie below the Nyquist frequency");
  }
  const double ratio = rate_hz / cfg.target_rate_hz;
  if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-9)
    config_error("sample rate " + std::to_string(rate_hz) + " Hz is not an integer multiple of target " +
                 std::to_string(cfg.target_rate_hz) + " Hz");
}

EegSegment rereference(const EegSegment& segment, const std::vector<std::string>& refs) {
  if (refs.empty()) config_error("rereference needs at least one reference channel");
  std::vector<std::size_t> idx;
  idx.reserve(refs.size());
  for (const auto& r : refs) idx.push_back(segment.channel_index(r));

  const std::size_t n = segment.samples_per_channel();
  std::vector<double> reference(n, 0.0);
  for (std::size_t c : idx) {
    auto row = segment.row(c);
    for (std::size_t s = 0; s < n; ++s) reference[s] += row[s];
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  for (double& v : reference) v *= inv;

  EegSegment out = segment;
  for (std::size_t c = 0; c < out.channels(); ++c) {
    auto row = out.row(c);
    for (std::size_t s = 0; s < n; ++s) row[s] -= reference[s];
  }
  return out;
}

EegSegment baseline_correct(const EegSegment& segment, TimeInterval window) {
  const double rate = segment.sample_rate_hz();
  if (window.start_s < 0.0 || window.end_s <= window.start_s)
    config_error("baseline window must be a nonempty interval starting at or after 0");
  const std::size_t n = segment.samples_per_channel();
  const std::size_t begin = floor_index(window.start_s, rate);
  const std::size_t end = std::min(n, floor_index(window.end_s, rate));
  if (begin >= end) config_error("baseline window selects no samples");

  EegSegment out = segment;
  for (std::size_t c = 0; c < out.channels(); ++c) {
    auto row = out.row(c);
    double sum = 0.0;
    for (std::size_t s = begin; s < end; ++s) sum += row[s];
    const double mean = sum / static_cast<double>(end - begin);
    for (double& v : row) v -= mean;
  }
  return out;
}

SosFilter design_bandpass(int order, double low_hz, double high_hz, double rate_hz) {
  if (order < 1) config_error("filter order must be positive");
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < rate_hz / 2.0))
    config_error("band-pass cutoffs must satisfy 0 < low < high < Nyquist");

  using cplx = std::complex<double>;
  const double fs2 = 2.0 * rate_hz;
  const double w_low = fs2 * std::tan(std::numbers::pi * low_hz / rate_hz);
  const double w_high = fs2 * std::tan(std::numbers::pi * high_hz / rate_hz);

  auto bilinear = [fs2](cplx s) { return (1.0 + s / fs2) / (1.0 - s / fs2); };

  SosFilter sos;
  // Upper-half-plane prototype poles pair with their conjugates; the real pole (odd order) stands alone.
  auto add_sections = [&](bool highpass) {
    const double wc = highpass ? w_low : w_high;
    const double zero = highpass ? 1.0 : -1.0;
    const double eval = highpass ? -1.0 : 1.0;  // unity-gain point: Nyquist for HP, DC for LP
    for (int k = 0; k < order / 2; ++k) {
      const double theta = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
      const cplx proto = std::polar(1.0, theta);
      const cplx s = highpass ? wc / proto : wc * proto;
      const cplx p = bilinear(s);
      Biquad q{1.0, -2.0 * zero, zero * zero, -2.0 * p.real(), std::norm(p)};
      const double num = q.b0 + q.b1 * eval + q.b2;
      const double den = 1.0 + q.a1 * eval + q.a2;
      const double g = den / num;
      q.b0 *= g;
      q.b1 *= g;
      q.b2 *= g;
      sos.push_back(q);
    }
    if (order % 2 == 1) {
      const double s = -wc;  // prototype pole at -1 maps to itself under s -> wc/s as well
      const double p = bilinear(cplx(s, 0.0)).real();
      Biquad q{1.0, -zero, 0.0, -p, 0.0};
      const double g = (1.0 - p * eval) / (1.0 - zero * eval);
      q.b0 *= g;
      q.b1 *= g;
      sos.push_back(q);
    }
  };
  add_sections(true);
  add_sections(false);
  return sos;
}

double magnitude_response(const SosFilter& filter, double freq_hz, double rate_hz) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / rate_hz);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const auto& q : filter) h *= (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
  return std::abs(h);
}

namespace {

struct SectionState {
  double z1 = 0.0, z2 = 0.0;
};

std::vector<SectionState> steady_state(const SosFilter& filter, double x0) {
  std::vector<SectionState> zi(filter.size());
  double scale = 1.0;
  for (std::size_t k = 0; k < filter.size(); ++k) {
    const auto& q = filter[k];
    const double gain = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    zi[k].z1 = (gain - q.b0) * scale * x0;
    zi[k].z2 = (q.b2 - q.a2 * gain) * scale * x0;
    scale *= gain;
  }
  return zi;
}

void run_sos(const SosFilter& filter, std::vector<double>& x) {
  auto state = steady_state(filter, x.empty() ? 0.0 : x.front());
  for (std::size_t k = 0; k < filter.size(); ++k) {
    const auto& q = filter[k];
    auto [z1, z2] = state[k];
    for (double& v : x) {
      const double y = q.b0 * v + z1;
      z1 = q.b1 * v - q.a1 * y + z2;
      z2 = q.b2 * v - q.a2 * y;
      v = y;
    }
  }
}

}  // namespace

std::vector<double> filtfilt(const SosFilter& filter, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::size_t zero_b2 = 0, zero_a2 = 0;
  for (const auto& q : filter) {
    zero_b2 += q.b2 == 0.0;
    zero_a2 += q.a2 == 0.0;
  }
  const std::size_t pad = std::min(n - 1, 3 * (2 * filter.size() + 1 - std::min(zero_b2, zero_a2)));

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  run_sos(filter, ext);
  std::reverse(ext.begin(), ext.end());
  run_sos(filter, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

EegSegment bandpass(const EegSegment& segment, const PreprocessConfig& cfg) {
  const double rate = segment.sample_rate_hz();
  if (cfg.lowpass_hz >= rate / 2.0 || cfg.highpass_hz >= rate / 2.0)
    config_error("band-pass cutoff at or above the Nyquist frequency " + std::to_string(rate / 2.0) + " Hz");
  const auto filter = design_bandpass(cfg.filter_order, cfg.highpass_hz, cfg.lowpass_hz, rate);
  EegSegment out = segment;
  for (std::size_t c = 0; c < out.channels(); ++c) {
    auto row = out.row(c);
    auto filtered = filtfilt(filter, row);
    std::copy(filtered.begin(), filtered.end(), row.begin());
  }
  return out;
}

EegSegment downsample(const EegSegment& segment, double target_rate_hz) {
  const double rate = segment.sample_rate_hz();
  if (!(target_rate_hz > 0.0)) config_error("target rate must be positive");
  const double ratio = rate / target_rate_hz;
  const double k_real = std::round(ratio);
  if (k_real < 1.0 || std::abs(ratio - k_real) > 1e-9)
    config_error("cannot decimate " + std::to_string(rate) + " Hz to " + std::to_string(target_rate_hz) +
                 " Hz: ratio is not an integer");
  const auto k = static_cast<std::size_t>(k_real);
  if (k == 1) return segment;

  const std::size_t n = segment.samples_per_channel();
  const std::size_t n_out = n / k;
  std::vector<double> data;
  data.reserve(segment.channels() * n_out);
  for (std::size_t c = 0; c < segment.channels(); ++c) {
    auto row = segment.row(c);
    for (std::size_t s = 0; s < n_out; ++s) data.push_back(row[s * k]);
  }
  SegmentMeta meta = segment.meta();
  const double new_rate = rate / k_real;
  meta.dwell_seconds = static_cast<double>(n_out) / new_rate;
  return EegSegment(segment.channel_labels(), new_rate, std::move(data), std::move(meta));
}

EegSegment preprocess(const EegSegment& segment, const PreprocessConfig& cfg) {
  validate(cfg, segment.sample_rate_hz());
  EegSegment s = cfg.reference_channels.empty() ? segment : rereference(segment, cfg.reference_channels);
  s = baseline_correct(s, cfg.baseline_window);
  if (cfg.bandpass_enabled) s = bandpass(s, cfg);
  return downsample(s, cfg.target_rate_hz);
}

std::vector<EegSegment> slice_by_events(const EegSegment& recording, const std::vector<ViewEvent>& events) {
  const double rate = recording.sample_rate_hz();
  const double secs = recording.duration_seconds();
  const std::size_t n = recording.samples_per_channel();
  std::vector<EegSegment> out;
  out.reserve(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) {
    const auto& ev = events[e];
    const std::size_t begin = floor_index(ev.start_s, rate);
    const std::size_t end = floor_index(ev.end_s, rate);
    if (ev.start_s < 0.0 || ev.end_s < ev.start_s || end > n) {
      std::ostringstream msg;
      msg << "event " << e << " (paragraph " << ev.paragraph << ", [" << ev.start_s << ", " << ev.end_s
          << ") s) lies outside the recording of " << secs << " s";
      data_error(msg.str());
    }
    std::vector<double> data;
    data.reserve(recording.channels() * (end - begin));
    for (std::size_t c = 0; c < recording.channels(); ++c) {
      auto row = recording.row(c);
      data.insert(data.end(), row.begin() + static_cast<std::ptrdiff_t>(begin),
                  row.begin() + static_cast<std::ptrdiff_t>(end));
    }
    SegmentMeta meta = recording.meta();
    meta.paragraph = ev.paragraph;
    meta.dwell_seconds = static_cast<double>(end - begin) / rate;
    out.emplace_back(recording.channel_labels(), rate, std::move(data), std::move(meta));
  }
  return out;
}

bool exceeds_amplitude(const EegSegment& segment, std::size_t begin, std::size_t length, double threshold_v) {
  for (std::size_t c = 0; c < segment.channels(); ++c) {
    auto row = segment.row(c).subspan(begin, length);
    for (double v : row)
      if (std::abs(v) > threshold_v) return true;
  }
  return false;
}

}  // namespace eegfb
