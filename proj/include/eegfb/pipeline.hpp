#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eegfb/model.hpp"
#include "eegfb/session.hpp"
#include "eegfb/signal.hpp"
#include "eegfb/spectral.hpp"
#include "eegfb/synth.hpp"

namespace eegfb {

/// Which sessions the simulator scores.
enum class SessionScope {
  All,
  /// Sessions after each user's first two tasks, i.e. the ones held out from training.
  HeldOut,
};

/// Everything a run needs, read from one JSON document.
struct RunConfig {
  static constexpr int kVersion = 1;

  std::filesystem::path data_dir = "data";
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  PreprocessConfig preprocess;
  StatConfig features;
  RfeConfig rfe;
  VotingConfig voting;
  std::vector<Strategy> strategies{Strategy{}, Strategy{Strategy::Kind::Click, 2}, Strategy{Strategy::Kind::Eeg, 3}};
  RerankOptions rerank;
  SessionScope scope = SessionScope::HeldOut;
  SynthSpec synth;
  /// Allow preprocess to run on containers it already produced.
  bool reprocess = false;
};

/// Strict: unknown keys and a missing or wrong `version` are config errors.
RunConfig run_config_from_json(const std::string& text);
std::string to_json(const RunConfig& cfg);
void validate(const RunConfig& cfg);

/// Conventional locations under data_dir and out_dir.
struct RunLayout {
  std::filesystem::path raw, logs, labels;                    // inputs
  std::filesystem::path segments, features, model, predictions, simulate, report, rerank;  // outputs

  static RunLayout of(const RunConfig& cfg);
};

/// Messages worth surfacing to the user; the command still succeeded.
struct CommandResult {
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
};

/// Writes a synthetic study (raw segments, logs, labels) into data_dir.
CommandResult cmd_synth(const RunConfig& cfg);

/// Raw containers to preprocessed per-paragraph containers. A container with
/// an events.jsonl is a continuous recording and is cut into paragraphs after
/// filtering.
CommandResult cmd_preprocess(const RunConfig& cfg);

/// One CSV row per segment plus a JSON column descriptor.
CommandResult cmd_extract(const RunConfig& cfg);

/// Joins features with log annotations, splits by task, standardises, runs
/// RFE and writes the model with a training summary.
CommandResult cmd_train(const RunConfig& cfg);

/// Scores every feature row with the trained model.
CommandResult cmd_predict(const RunConfig& cfg);

/// Replays logged sessions under each strategy and writes their traces.
CommandResult cmd_simulate(const RunConfig& cfg);

/// Compares strategies and writes report.json plus the rendered table.
CommandResult cmd_report(const RunConfig& cfg);

/// Re-ranks one task's pool from an explicit feedback file
/// ({"judgment": id, "satisfied": bool} per line).
CommandResult cmd_rerank(const RunConfig& cfg, const std::filesystem::path& labels_file,
                         const std::filesystem::path& feedback_file);

/// Feature table as written by cmd_extract.
struct FeatureTable {
  std::vector<std::string> columns;
  std::vector<ParagraphOrigin> rows;
  std::vector<std::vector<double>> values;
};

std::string to_csv(const FeatureTable& table);
FeatureTable feature_table_from_csv(const std::string& text);

/// Paragraph labels from log annotations; hard_to_say is left out.
std::map<ParagraphOrigin, Label> annotation_labels(const std::vector<SessionLog>& logs);

/// (user, task) pairs in each user's seq order.
std::vector<std::pair<std::string, std::string>> task_order(const std::vector<SessionLog>& logs);

struct Prediction {
  ParagraphOrigin origin;
  double decision = 0.0;
  Label label = Label::Unsatisfied;
};

std::string to_jsonl(const std::vector<Prediction>& predictions);
std::vector<Prediction> predictions_from_jsonl(const std::string& text);

}  // namespace eegfb
