#include "eegfb/eegfb.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include <json.hpp>

#include "eegfb/container.hpp"
#include "eegfb/error.hpp"
#include "eegfb/pipeline.hpp"
#include "eegfb/rerank.hpp"

struct eegfb_segment {
  eegfb::EegSegment value;
};

struct eegfb_model {
  eegfb::ModelFile value;
};

struct eegfb_ranker {
  eegfb::TaskLabels labels;
  eegfb::RankingState state;
};

namespace {

using nlohmann::json;

thread_local std::string last_error;

eegfb_status fail(eegfb_status status, const std::string& message) {
  last_error = message;
  return status;
}

eegfb_status status_of(eegfb::ErrorKind kind) {
  switch (kind) {
    case eegfb::ErrorKind::Config:
      return EEGFB_ERR_CONFIG;
    case eegfb::ErrorKind::Data:
      return EEGFB_ERR_DATA;
    case eegfb::ErrorKind::Training:
      return EEGFB_ERR_TRAINING;
    case eegfb::ErrorKind::Internal:
      break;
  }
  return EEGFB_ERR_INTERNAL;
}

// Runs f, translating exceptions into statuses.
template <typename F>
eegfb_status guarded(F f) {
  try {
    last_error.clear();
    f();
    return EEGFB_OK;
  } catch (const eegfb::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(EEGFB_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(EEGFB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EEGFB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(EEGFB_ERR_INTERNAL, "unknown error");
  }
}

#define EEGFB_REQUIRE(cond) \
  if (!(cond)) return fail(EEGFB_ERR_ARGUMENT, "invalid argument: " #cond)

eegfb::RunConfig config_of(const char* config_json) {
  return eegfb::run_config_from_json(config_json ? config_json : R"({"version": 1})");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* eegfb_version(void) { return "1.0.0"; }

const char* eegfb_last_error(void) { return last_error.c_str(); }

int eegfb_exit_code(eegfb_status status) {
  switch (status) {
    case EEGFB_OK:
      return 0;
    case EEGFB_ERR_CONFIG:
    case EEGFB_ERR_ARGUMENT:
      return 2;
    case EEGFB_ERR_DATA:
    case EEGFB_ERR_TRAINING:
      return 3;
    case EEGFB_ERR_INTERNAL:
      break;
  }
  return 4;
}

void eegfb_string_free(char* s) { std::free(s); }

eegfb_status eegfb_segment_load(const char* dir, eegfb_segment** out) {
  EEGFB_REQUIRE(dir && out);
  return guarded([&] { *out = new eegfb_segment{eegfb::load_segment(dir)}; });
}

eegfb_status eegfb_segment_save(const eegfb_segment* segment, const char* dir) {
  EEGFB_REQUIRE(segment && dir);
  return guarded([&] { eegfb::save_segment(segment->value, dir); });
}

eegfb_status eegfb_segment_create(const char* const* channel_labels, size_t n_channels, double sample_rate_hz,
                                  const double* samples, size_t n_samples, eegfb_segment** out) {
  EEGFB_REQUIRE(channel_labels && out && (samples || n_samples == 0));
  return guarded([&] {
    std::vector<std::string> labels;
    for (size_t c = 0; c < n_channels; ++c) {
      if (!channel_labels[c]) eegfb::config_error("channel label " + std::to_string(c) + " is null");
      labels.emplace_back(channel_labels[c]);
    }
    std::vector<double> data(samples, samples + n_channels * n_samples);
    eegfb::SegmentMeta meta;
    meta.dwell_seconds = sample_rate_hz > 0 ? double(n_samples) / sample_rate_hz : 0.0;
    *out = new eegfb_segment{eegfb::EegSegment(std::move(labels), sample_rate_hz, std::move(data), meta)};
  });
}

void eegfb_segment_free(eegfb_segment* segment) { delete segment; }

size_t eegfb_segment_channels(const eegfb_segment* segment) { return segment ? segment->value.channels() : 0; }

size_t eegfb_segment_samples(const eegfb_segment* segment) {
  return segment ? segment->value.samples_per_channel() : 0;
}

double eegfb_segment_rate(const eegfb_segment* segment) { return segment ? segment->value.sample_rate_hz() : 0.0; }

eegfb_status eegfb_segment_row(const eegfb_segment* segment, size_t channel, double* out, size_t capacity) {
  EEGFB_REQUIRE(segment && out);
  EEGFB_REQUIRE(channel < segment->value.channels());
  EEGFB_REQUIRE(capacity >= segment->value.samples_per_channel());
  const auto row = segment->value.row(channel);
  std::copy(row.begin(), row.end(), out);
  return EEGFB_OK;
}

eegfb_status eegfb_segment_preprocess(const eegfb_segment* segment, const char* config_json, eegfb_segment** out) {
  EEGFB_REQUIRE(segment && out);
  return guarded([&] {
    const auto cfg = config_of(config_json);
    eegfb::validate(cfg.preprocess, segment->value.sample_rate_hz());
    *out = new eegfb_segment{eegfb::preprocess(segment->value, cfg.preprocess)};
  });
}

eegfb_status eegfb_feature_count(const char* config_json, size_t n_channels, size_t* out) {
  EEGFB_REQUIRE(out);
  return guarded([&] { *out = eegfb::feature_count(config_of(config_json).features, n_channels); });
}

eegfb_status eegfb_segment_extract(const eegfb_segment* segment, const char* config_json, double* out,
                                   size_t capacity, size_t* written) {
  EEGFB_REQUIRE(segment && out && written);
  return guarded([&] {
    const auto cfg = config_of(config_json);
    auto stat = cfg.features;
    stat.artifact_threshold_v = cfg.preprocess.artifact_threshold_v;
    const size_t n = eegfb::feature_count(stat, segment->value.channels());
    *written = n;
    if (capacity < n) eegfb::config_error("output buffer holds " + std::to_string(capacity) + " values, need " + std::to_string(n));
    const auto features = eegfb::extract_features(segment->value, stat);
    std::copy(features.values.begin(), features.values.end(), out);
  });
}

eegfb_status eegfb_model_load(const char* path, eegfb_model** out) {
  EEGFB_REQUIRE(path && out);
  return guarded([&] { *out = new eegfb_model{eegfb::model_file_from_json(eegfb::read_text_file(path))}; });
}

void eegfb_model_free(eegfb_model* model) { delete model; }

size_t eegfb_model_input_dims(const eegfb_model* model) { return model ? model->value.model.input_dims : 0; }

eegfb_status eegfb_model_predict(const eegfb_model* model, const double* features, size_t n, double* decision,
                                 int* satisfied) {
  EEGFB_REQUIRE(model && features);
  return guarded([&] {
    if (n != model->value.model.input_dims)
      eegfb::data_error("model expects " + std::to_string(model->value.model.input_dims) + " features, got " +
                        std::to_string(n));
    double d = 0.0;
    const auto label = eegfb::predict_raw(model->value, std::span<const double>(features, n), &d);
    if (decision) *decision = d;
    if (satisfied) *satisfied = label == eegfb::Label::Satisfied;
  });
}

eegfb_status eegfb_ranker_create(const char* labels_json, size_t pool_size, eegfb_ranker** out) {
  EEGFB_REQUIRE(labels_json && out);
  return guarded([&] {
    auto labels = eegfb::task_labels_from_json(labels_json);
    auto state = eegfb::RankingState::start(labels.profile, eegfb::candidate_pool(labels, pool_size));
    *out = new eegfb_ranker{std::move(labels), std::move(state)};
  });
}

void eegfb_ranker_free(eegfb_ranker* ranker) { delete ranker; }

eegfb_status eegfb_ranker_next(eegfb_ranker* ranker, int64_t* judgment, int* done) {
  EEGFB_REQUIRE(ranker && judgment && done);
  return guarded([&] {
    *done = ranker->state.remaining.empty();
    if (*done) return;
    ranker->state = eegfb::show_next(ranker->state, ranker->labels.matrix);
    *judgment = ranker->state.shown.back();
  });
}

eegfb_status eegfb_ranker_feedback(eegfb_ranker* ranker, int64_t judgment, int satisfied, size_t top_t, int blame) {
  EEGFB_REQUIRE(ranker);
  EEGFB_REQUIRE(blame == 0 || blame == 1);
  EEGFB_REQUIRE(top_t >= 1);
  return guarded([&] {
    ranker->state = eegfb::apply_feedback(ranker->state, ranker->labels.matrix, judgment, satisfied != 0, top_t,
                                          blame == 0 ? eegfb::BlameMode::Product : eegfb::BlameMode::ProfileOnly);
  });
}

eegfb_status eegfb_ranker_weights(const eegfb_ranker* ranker, double* out, size_t capacity, size_t* n) {
  EEGFB_REQUIRE(ranker && n);
  const auto w = ranker->state.profile.weights();
  *n = w.size();
  EEGFB_REQUIRE(out && capacity >= w.size());
  std::copy(w.begin(), w.end(), out);
  return EEGFB_OK;
}

eegfb_status eegfb_ranker_remaining(const eegfb_ranker* ranker, int64_t* out, size_t capacity, size_t* n) {
  EEGFB_REQUIRE(ranker && n);
  return guarded([&] {
    const auto order = eegfb::rank_remaining(ranker->state, ranker->labels.matrix);
    *n = order.size();
    if (order.empty()) return;
    if (!out || capacity < order.size()) eegfb::config_error("output buffer too small for the remaining judgments");
    std::copy(order.begin(), order.end(), out);
  });
}

eegfb_status eegfb_run_command(const char* command, const char* config_json, const char* overrides_json,
                               char** result_json) {
  EEGFB_REQUIRE(command && result_json);
  *result_json = nullptr;
  return guarded([&] {
    auto cfg = config_of(config_json);
    json overrides = json::object();
    if (overrides_json) {
      try {
        overrides = json::parse(overrides_json);
        for (const auto& [key, value] : overrides.items()) {
          if (key == "seed")
            cfg.seed = value.get<std::uint64_t>();
          else if (key == "data")
            cfg.data_dir = value.get<std::string>();
          else if (key == "out")
            cfg.out_dir = value.get<std::string>();
          else if (key == "mode")
            cfg.features.mode = eegfb::band_mode_from_string(value.get<std::string>());
          else if (key != "labels" && key != "feedback")
            eegfb::config_error("unknown override '" + key + "'");
        }
      } catch (const json::exception& e) {
        eegfb::config_error(std::string("malformed overrides: ") + e.what());
      }
    }
    eegfb::validate(cfg);

    const std::string cmd = command;
    eegfb::CommandResult result;
    if (cmd == "synth")
      result = eegfb::cmd_synth(cfg);
    else if (cmd == "preprocess")
      result = eegfb::cmd_preprocess(cfg);
    else if (cmd == "extract")
      result = eegfb::cmd_extract(cfg);
    else if (cmd == "train")
      result = eegfb::cmd_train(cfg);
    else if (cmd == "predict")
      result = eegfb::cmd_predict(cfg);
    else if (cmd == "simulate")
      result = eegfb::cmd_simulate(cfg);
    else if (cmd == "report")
      result = eegfb::cmd_report(cfg);
    else if (cmd == "rerank") {
      if (!overrides.contains("labels") || !overrides.contains("feedback"))
        eegfb::config_error("rerank needs labels and feedback paths");
      result = eegfb::cmd_rerank(cfg, overrides["labels"].get<std::string>(), overrides["feedback"].get<std::string>());
    } else
      eegfb::config_error("unknown command '" + cmd + "'");

    *result_json = dup_string(json{{"outputs", result.outputs}, {"warnings", result.warnings}}.dump());
  });
}

}  // extern "C"
