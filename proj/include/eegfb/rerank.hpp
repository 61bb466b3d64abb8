#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eegfb {

using JudgmentId = std::int64_t;

struct Intent {
  std::string id;
  double weight = 0.0;  // in [0, 1]

  bool operator==(const Intent&) const = default;
};

struct IntentProfile {
  std::vector<Intent> intents;

  std::vector<double> weights() const;
  bool operator==(const IntentProfile&) const = default;
};

struct JudgmentRelevance {
  JudgmentId id = 0;
  std::vector<double> per_intent;  // D_j, each in [0, 1]
  int overall = 1;                 // graded relevance r_j in 1..4
};

struct RelevanceMatrix {
  std::vector<JudgmentRelevance> judgments;

  const JudgmentRelevance& at(JudgmentId id) const;
  bool contains(JudgmentId id) const;
};

/// One task's label file: intents with initial weights, judgments with their
/// relevance rows, and optionally a fixed candidate pool.
struct TaskLabels {
  std::string task;
  IntentProfile profile;
  RelevanceMatrix matrix;
  std::vector<JudgmentId> pool;
};

void validate(const TaskLabels& labels);
TaskLabels task_labels_from_json(const std::string& text);
std::string to_json(const TaskLabels& labels);

/// sum_i I_i * D_{j,i}
double ranking_score(const IntentProfile& profile, std::span<const double> relevance);

/// Which weight attributes an unsatisfied judgment to its intents.
enum class BlameMode {
  Product,      // I_i * D_{j,i}
  ProfileOnly,  // I_i
};

struct FeedbackRecord {
  JudgmentId judgment = 0;
  bool satisfied = false;
  std::vector<std::size_t> halved;  // intent indices
  IntentProfile profile_after;
};

/// Shown judgments in display order and the rest of the candidate pool.
struct RankingState {
  IntentProfile profile;
  std::vector<JudgmentId> shown;
  std::vector<JudgmentId> remaining;  // kept sorted by id
  std::vector<FeedbackRecord> history;

  static RankingState start(IntentProfile profile, std::vector<JudgmentId> pool);
};

/// Remaining judgments by score descending, then r_j descending, then id ascending.
std::vector<JudgmentId> rank_remaining(const RankingState& state, const RelevanceMatrix& matrix);

/// Moves the head of rank_remaining to the shown list.
RankingState show_next(const RankingState& state, const RelevanceMatrix& matrix);

/// Satisfied leaves the profile untouched; otherwise the top-t intents by
/// blame weight (lower index on ties) have their weight halved.
RankingState apply_feedback(const RankingState& state, const RelevanceMatrix& matrix, JudgmentId judgment,
                            bool satisfied, std::size_t top_t = 1, BlameMode mode = BlameMode::Product);

/// Per intent, the judgment with the highest D (ties: higher r, lower id), then
/// fill by r descending (ties: lower id) up to pool_size distinct judgments.
std::vector<JudgmentId> select_candidate_pool(const RelevanceMatrix& matrix, std::size_t pool_size = 7);

/// The labels' pool, or select_candidate_pool when the file names none.
std::vector<JudgmentId> candidate_pool(const TaskLabels& labels, std::size_t pool_size = 7);

/// Pool ordered by r_j descending, ids ascending on ties.
std::vector<JudgmentId> fixed_relevance_order(const RelevanceMatrix& matrix, std::vector<JudgmentId> pool);

}  // namespace eegfb
