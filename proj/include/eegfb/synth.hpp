#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eegfb/rerank.hpp"
#include "eegfb/session.hpp"
#include "eegfb/signal.hpp"

namespace eegfb {

/// Parameters of a synthetic study. Background EEG is pink noise; paragraphs
/// annotated useful carry a sinusoidal burst on every channel.
struct SynthSpec {
  std::size_t users = 6;
  std::size_t tasks = 6;
  std::size_t tasks_per_user = 3;
  std::size_t intents_min = 2;
  std::size_t intents_max = 3;
  std::size_t corpus_size = 30;
  std::size_t pool_size = 7;
  std::size_t paragraphs_min = 4;
  std::size_t paragraphs_max = 6;
  int paragraph_seconds_min = 6;
  int paragraph_seconds_max = 12;

  std::vector<std::string> channel_labels{"Fz", "Cz", "Pz", "Oz"};
  double sample_rate_hz = 1000.0;
  double noise_rms_v = 10e-6;
  /// Lowest frequency carrying background power.
  double noise_low_hz = 0.5;

  double burst_hz = 10.0;
  int burst_seconds_min = 2;
  int burst_seconds_max = 3;
  /// Ratio of 8-12 Hz power inside a burst to the background's.
  double alpha_contrast = 3.0;
  /// Overrides alpha_contrast when set.
  std::optional<double> burst_amplitude_v;

  double useful_if_satisfied = 0.8;
  double useful_if_unsatisfied = 0.2;
  double hard_to_say = 0.1;
  double click_if_useful = 0.5;
  double click_otherwise = 0.1;
  std::vector<std::string> arms{"None", "Click", "EEG"};
};

void validate(const SynthSpec& spec);

/// Expected 8-12 Hz background power in V^2 for the spec's pink noise.
double background_alpha_power(const SynthSpec& spec);

/// Sinusoid amplitude that lifts 8-12 Hz power by alpha_contrast, or the override.
double burst_amplitude(const SynthSpec& spec);

struct SynthStudy {
  std::vector<SessionLog> logs;
  std::vector<EegSegment> segments;  // one per viewed paragraph
  std::vector<TaskLabels> labels;
};

/// Deterministic for a given spec and seed.
SynthStudy synth_sessions(const SynthSpec& spec, std::uint64_t seed);

/// Pink noise with fixed per-bin power and random phases; total variance is rms^2.
std::vector<double> pink_noise(std::size_t n, double rate_hz, double rms, double low_hz, std::uint64_t seed);

/// Writes logs/sessions.jsonl, labels/<task>.json and raw/<user>_<task>_<judgment>_<paragraph>/.
void write_study(const SynthStudy& study, const std::filesystem::path& dir);

}  // namespace eegfb
