#include "eegfb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <random>

#include "eegfb/container.hpp"
#include "eegfb/error.hpp"
#include "fft.hpp"

namespace eegfb {

namespace {

constexpr double kAlphaLow = 8.0;
constexpr double kAlphaHigh = 12.0;

std::string numbered(char prefix, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%02zu", prefix, i + 1);
  return buf;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

// Random draws go through these so results do not depend on the standard
// library's distribution implementations.
double unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) { return lo + rng() % (hi - lo + 1); }

double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - unit(rng), u2 = unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

void validate(const SynthSpec& s) {
  if (s.users == 0 || s.tasks == 0) config_error("synth: need at least one user and one task");
  if (s.tasks_per_user == 0 || s.tasks_per_user > s.tasks) config_error("synth: tasks_per_user must be in 1..tasks");
  if (s.intents_min == 0 || s.intents_min > s.intents_max) config_error("synth: need 1 <= intents_min <= intents_max");
  if (s.pool_size == 0 || s.corpus_size < s.pool_size) config_error("synth: corpus must hold at least pool_size judgments");
  if (s.intents_max > s.pool_size) config_error("synth: more intents than pool slots");
  if (s.paragraphs_min == 0 || s.paragraphs_min > s.paragraphs_max) config_error("synth: bad paragraph count range");
  if (s.paragraph_seconds_min < 2 || s.paragraph_seconds_min > s.paragraph_seconds_max)
    config_error("synth: paragraph durations must be at least 2 s and ordered");
  if (s.burst_seconds_min < 1 || s.burst_seconds_min > s.burst_seconds_max)
    config_error("synth: bad burst duration range");
  if (s.burst_seconds_max > s.paragraph_seconds_min - 1)
    config_error("synth: bursts must fit after the first second of the shortest paragraph");
  if (s.channel_labels.empty()) config_error("synth: need at least one channel");
  if (!(s.sample_rate_hz >= kMinSampleRateHz) || std::abs(s.sample_rate_hz - std::round(s.sample_rate_hz)) > 0)
    config_error("synth: sample rate must be a whole number of Hz, at least 90");
  if (!(s.noise_rms_v > 0.0)) config_error("synth: noise_rms_v must be positive");
  if (!(s.noise_low_hz > 0.0 && s.noise_low_hz < kAlphaLow)) config_error("synth: noise_low_hz must be in (0, 8)");
  if (!(s.burst_hz > 0.0 && s.burst_hz < s.sample_rate_hz / 2)) config_error("synth: burst_hz must be below Nyquist");
  if (!(s.alpha_contrast >= 1.0)) config_error("synth: alpha_contrast must be at least 1");
  if (s.burst_amplitude_v && !(*s.burst_amplitude_v >= 0.0)) config_error("synth: burst amplitude must be >= 0");
  for (double p : {s.useful_if_satisfied, s.useful_if_unsatisfied, s.hard_to_say, s.click_if_useful, s.click_otherwise})
    if (!(p >= 0.0 && p <= 1.0)) config_error("synth: probabilities must lie in [0, 1]");
  if (s.arms.empty()) config_error("synth: need at least one arm");
}

double background_alpha_power(const SynthSpec& s) {
  const double nyquist = s.sample_rate_hz / 2.0;
  return s.noise_rms_v * s.noise_rms_v * std::log(kAlphaHigh / kAlphaLow) / std::log(nyquist / s.noise_low_hz);
}

double burst_amplitude(const SynthSpec& s) {
  if (s.burst_amplitude_v) return *s.burst_amplitude_v;
  return std::sqrt(2.0 * (s.alpha_contrast - 1.0) * background_alpha_power(s));
}

std::vector<double> pink_noise(std::size_t n, double rate_hz, double rms, double low_hz, std::uint64_t seed) {
  if (n < 4) config_error("pink noise needs at least 4 samples");
  std::mt19937_64 rng(seed);
  const std::size_t half = n / 2 + 1;
  std::unique_ptr<fftw_complex, detail::FftwDeleter> spec(fftw_alloc_complex(half));
  std::unique_ptr<double, detail::FftwDeleter> out(fftw_alloc_real(n));

  // Power 1/f on bins from low_hz up to, not including, Nyquist.
  std::vector<double> power(half, 0.0);
  double total = 0.0;
  for (std::size_t k = 1; 2 * k < n; ++k) {
    const double f = double(k) * rate_hz / double(n);
    if (f < low_hz) continue;
    power[k] = 1.0 / f;
    total += power[k];
  }
  if (total == 0.0) config_error("segment too short for the noise band");
  for (std::size_t k = 0; k < half; ++k) {
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    // c2r doubles every interior bin, so amplitude sqrt(p/2) yields sqrt(2p) cos(...)
    const double a = std::sqrt(rms * rms * power[k] / total / 2.0);
    spec.get()[k][0] = a * std::cos(phase);
    spec.get()[k][1] = a * std::sin(phase);
  }
  fftw_execute_dft_c2r(detail::c2r_plan(n), spec.get(), out.get());
  return std::vector<double>(out.get(), out.get() + n);
}

SynthStudy synth_sessions(const SynthSpec& spec, std::uint64_t seed) {
  validate(spec);
  std::mt19937_64 rng(seed);
  SynthStudy study;

  for (std::size_t t = 0; t < spec.tasks; ++t) {
    TaskLabels labels;
    labels.task = numbered('T', t);
    const std::size_t intents = pick(rng, spec.intents_min, spec.intents_max);
    for (std::size_t i = 0; i < intents; ++i)
      labels.profile.intents.push_back({"intent" + std::to_string(i + 1), round_to(0.3 + 0.7 * unit(rng), 0.01)});
    for (std::size_t j = 0; j < spec.corpus_size; ++j) {
      JudgmentRelevance row{static_cast<JudgmentId>((t + 1) * 1000 + j + 1), {}, 1};
      for (std::size_t i = 0; i < intents; ++i) row.per_intent.push_back(round_to(unit(rng), 0.1));
      row.overall = static_cast<int>(pick(rng, 1, 4));
      labels.matrix.judgments.push_back(std::move(row));
    }
    labels.pool = select_candidate_pool(labels.matrix, spec.pool_size);
    study.labels.push_back(std::move(labels));
  }

  const double amplitude = burst_amplitude(spec);
  const std::size_t ch = spec.channel_labels.size();
  const auto sr = static_cast<std::size_t>(spec.sample_rate_hz);

  for (std::size_t u = 0; u < spec.users; ++u) {
    for (std::size_t s = 0; s < spec.tasks_per_user; ++s) {
      const auto& labels = study.labels[(u * spec.tasks_per_user + s) % spec.tasks];
      SessionLog log;
      log.user = numbered('U', u);
      log.task = labels.task;
      log.arm = spec.arms[(u + s) % spec.arms.size()];
      log.seq = static_cast<int>(s + 1);

      // The user's own taste: upper half of a noisy ranking score is satisfying.
      const auto order = fixed_relevance_order(labels.matrix, labels.pool);
      std::vector<double> taste;
      for (JudgmentId j : order) taste.push_back(ranking_score(labels.profile, labels.matrix.at(j).per_intent) + 0.1 * gaussian(rng));
      auto sorted = taste;
      std::sort(sorted.begin(), sorted.end());
      const double median = sorted[sorted.size() / 2];

      double clock = 0.0;
      int satisfied_first = 0;
      for (std::size_t k = 0; k < order.size(); ++k) {
        const JudgmentId j = order[k];
        const bool satisfied = taste[k] >= median;
        if (k < 3 && satisfied) ++satisfied_first;
        const std::size_t paragraphs = pick(rng, spec.paragraphs_min, spec.paragraphs_max);
        for (std::size_t p = 1; p <= paragraphs; ++p) {
          const auto dwell = static_cast<int>(pick(rng, spec.paragraph_seconds_min, spec.paragraph_seconds_max));
          const auto para = static_cast<std::int64_t>(p);
          log.views.push_back({j, para, clock, clock + dwell});
          clock += dwell + 1.0;

          std::string annotation;
          bool burst;
          if (unit(rng) < spec.hard_to_say) {
            annotation = "hard_to_say";
            burst = unit(rng) < 0.5;
          } else {
            burst = unit(rng) < (satisfied ? spec.useful_if_satisfied : spec.useful_if_unsatisfied);
            annotation = burst ? "useful" : "useless";
          }
          log.annotations.push_back({j, para, annotation});
          if (unit(rng) < (annotation == "useful" ? spec.click_if_useful : spec.click_otherwise))
            log.clicks.push_back({j, para});

          const std::size_t n = static_cast<std::size_t>(dwell) * sr;
          std::vector<double> samples(ch * n);
          for (std::size_t c = 0; c < ch; ++c) {
            const auto noise = pink_noise(n, spec.sample_rate_hz, spec.noise_rms_v, spec.noise_low_hz, rng());
            std::copy(noise.begin(), noise.end(), samples.begin() + static_cast<std::ptrdiff_t>(c * n));
          }
          const auto duration = static_cast<int>(pick(rng, spec.burst_seconds_min, spec.burst_seconds_max));
          const auto start = static_cast<int>(pick(rng, 1, dwell - duration));
          for (std::size_t c = 0; c < ch; ++c) {
            const double phase = 2.0 * std::numbers::pi * unit(rng);
            if (!burst || amplitude == 0.0) continue;
            for (std::size_t i = start * sr; i < (start + duration) * sr; ++i)
              samples[c * n + i] += amplitude * std::sin(2.0 * std::numbers::pi * spec.burst_hz * double(i) / spec.sample_rate_hz + phase);
          }
          study.segments.emplace_back(spec.channel_labels, spec.sample_rate_hz, std::move(samples),
                                      SegmentMeta{log.user, log.task, j, para, double(dwell)});
        }
        log.gold.emplace_back(j, satisfied);
      }
      log.ranking_quality = 1 + satisfied_first;
      log.task_satisfied = satisfied_first >= 2;
      study.logs.push_back(std::move(log));
    }
  }
  return study;
}

void write_study(const SynthStudy& study, const std::filesystem::path& dir) {
  std::string logs;
  for (const auto& log : study.logs) logs += to_jsonl(log);
  std::filesystem::create_directories(dir / "logs");
  write_file_atomic(dir / "logs" / "sessions.jsonl", logs);
  std::filesystem::create_directories(dir / "labels");
  for (const auto& labels : study.labels) write_file_atomic(dir / "labels" / (labels.task + ".json"), to_json(labels));
  for (const auto& seg : study.segments) {
    const auto& m = seg.meta();
    save_segment(seg, dir / "raw" /
                          (m.user + "_" + m.query + "_" + std::to_string(m.judgment) + "_" + std::to_string(m.paragraph)));
  }
}

}  // namespace eegfb
