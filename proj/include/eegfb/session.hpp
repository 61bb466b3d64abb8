#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eegfb/model.hpp"
#include "eegfb/rerank.hpp"
#include "eegfb/signal.hpp"

namespace eegfb {

struct ParagraphView {
  JudgmentId judgment = 0;
  std::int64_t paragraph = 0;
  double start_s = 0.0;
  double end_s = 0.0;

  bool operator==(const ParagraphView&) const = default;
};

struct ParagraphRef {
  JudgmentId judgment = 0;
  std::int64_t paragraph = 0;

  auto operator<=>(const ParagraphRef&) const = default;
};

struct ParagraphAnnotation {
  JudgmentId judgment = 0;
  std::int64_t paragraph = 0;
  std::string annotation;  // useful | useless | hard_to_say

  bool operator==(const ParagraphAnnotation&) const = default;
};

/// One user working on one task, rebuilt from the event stream.
struct SessionLog {
  std::string user;
  std::string task;
  /// Feedback condition the user was exposed to (None, Click, EEG, ...).
  std::string arm;
  /// Position of this task in the user's sequence.
  int seq = 0;
  std::optional<int> ranking_quality;  // 1..4
  std::optional<bool> task_satisfied;

  std::vector<ParagraphView> views;  // time-ordered
  std::vector<ParagraphRef> clicks;
  std::vector<ParagraphAnnotation> annotations;
  /// Per-judgment gold satisfaction in the order given.
  std::vector<std::pair<JudgmentId, bool>> gold;

  /// Distinct judgments in order of first view; its length is the stop point.
  std::vector<JudgmentId> judgments_read() const;
  /// Distinct viewed paragraphs of a judgment, in order of first view.
  std::vector<std::int64_t> viewed_paragraphs(JudgmentId judgment) const;
  bool viewed(JudgmentId judgment) const;
  std::optional<bool> gold_for(JudgmentId judgment) const;

  bool operator==(const SessionLog&) const = default;
};

/// Throws a data error when views go back in time, a view ends before it
/// starts, an annotation names an unviewed paragraph, or labels are out of range.
void validate(const SessionLog& log);

/// Events carry `type`, `user` and `task`; lines are grouped into one log per
/// (user, task) and returned sorted by user, then seq, then task.
std::vector<SessionLog> parse_session_logs(const std::string& jsonl);
std::vector<SessionLog> read_session_logs(const std::filesystem::path& path);
std::string to_jsonl(const SessionLog& log);

/// Satisfied iff the number of distinct clicked paragraphs of the judgment is
/// at least threshold. Throws a data error when the judgment was never viewed.
Label click_feedback(const SessionLog& log, JudgmentId judgment, int threshold);

/// Label for one paragraph of one session.
using ParagraphPredictor = std::function<Label(const ParagraphOrigin&)>;

/// Votes over the predicted labels of the judgment's viewed paragraphs.
Label eeg_feedback(const SessionLog& log, JudgmentId judgment, const ParagraphPredictor& predict,
                   const VotingConfig& voting);

/// Segments keyed by (user, task, judgment, paragraph).
using SegmentStore = std::map<ParagraphOrigin, EegSegment>;

ParagraphOrigin origin_of(const EegSegment& segment);

/// extract_features with the model's feature settings, then predict_raw.
/// Throws a data error naming the paragraph when its segment is missing.
ParagraphPredictor model_predictor(const ModelFile& model, const SegmentStore& segments);

/// Looks labels up in a precomputed table; missing entries are data errors.
ParagraphPredictor table_predictor(std::map<ParagraphOrigin, Label> labels);

struct Strategy {
  enum class Kind { None, Click, Eeg };
  Kind kind = Kind::None;
  int threshold = 1;  // clicks or satisfied paragraphs, >= 1

  std::string name() const;
  bool operator==(const Strategy&) const = default;
};

void validate(const Strategy& strategy);

/// Accepts "none", "click:N", "eeg:N" (case-insensitive).
Strategy strategy_from_string(const std::string& text);

struct RerankOptions {
  std::size_t top_t = 1;
  BlameMode blame = BlameMode::Product;
  std::size_t pool_size = 7;
};

struct TraceStep {
  JudgmentId judgment = 0;
  /// Empty when the strategy gives no feedback or the log has no data for the judgment.
  std::optional<Label> feedback;
  std::vector<std::size_t> halved;
  std::vector<double> weights_after;

  bool operator==(const TraceStep&) const = default;
};

struct SessionTrace {
  std::string user;
  std::string task;
  std::string strategy;
  std::vector<JudgmentId> shown;
  std::vector<TraceStep> steps;

  bool operator==(const SessionTrace&) const = default;
};

std::string to_json(const SessionTrace& trace);

/// Replays a session under a strategy: None shows the fixed r-descending
/// order; Click and EEG re-rank the rest of the pool after every shown
/// judgment. Stops after as many judgments as the log read.
SessionTrace simulate_session(const SessionLog& log, const Strategy& strategy, const TaskLabels& labels,
                              const ParagraphPredictor& predict = {}, const RerankOptions& options = {});

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  Confusion& operator+=(const Confusion& o);
};

struct FeedbackScores {
  double accuracy = 0.0;
  double f1 = 0.0;
  Confusion counts;
};

/// Positive class is Satisfied; F1 is 0 when precision + recall is 0.
FeedbackScores evaluate_feedback(const std::vector<Label>& predictions, const std::vector<Label>& gold);
FeedbackScores scores_from(const Confusion& counts);

struct StrategyRow {
  std::string strategy;
  /// Absent for strategies that give no feedback.
  std::optional<FeedbackScores> scores;
};

struct ArmRow {
  std::string arm;
  std::size_t tasks = 0;
  std::size_t rated = 0;
  double mean_ranking_quality = 0.0;
  double satisfied_rate = 0.0;
};

struct MetricsReport {
  std::vector<StrategyRow> strategies;
  std::vector<ArmRow> arms;
  std::vector<SessionTrace> traces;
  std::vector<std::string> warnings;
};

/// Scores every strategy's feedback against the logs' gold labels,
/// micro-averaged over the judgments each strategy gave feedback on, and
/// summarises the logs' ranking-quality and satisfaction labels per arm.
MetricsReport compare_strategies(const std::vector<SessionLog>& logs, const std::vector<Strategy>& strategies,
                                 const std::map<std::string, TaskLabels>& labels,
                                 const ParagraphPredictor& predict = {}, const RerankOptions& options = {});

std::string to_json(const MetricsReport& report);
std::string render_table(const MetricsReport& report);

}  // namespace eegfb
