#include "eegfb/rerank.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <json.hpp>

#include "eegfb/error.hpp"

namespace eegfb {

using nlohmann::json;

std::vector<double> IntentProfile::weights() const {
  std::vector<double> w;
  w.reserve(intents.size());
  for (const auto& i : intents) w.push_back(i.weight);
  return w;
}

const JudgmentRelevance& RelevanceMatrix::at(JudgmentId id) const {
  for (const auto& j : judgments)
    if (j.id == id) return j;
  data_error("unknown judgment " + std::to_string(id));
}

bool RelevanceMatrix::contains(JudgmentId id) const {
  return std::any_of(judgments.begin(), judgments.end(), [id](const auto& j) { return j.id == id; });
}

void validate(const TaskLabels& labels) {
  const auto& intents = labels.profile.intents;
  if (intents.empty()) data_error("task " + labels.task + ": at least one intent required");
  for (const auto& i : intents)
    if (!(i.weight >= 0.0 && i.weight <= 1.0))
      data_error("task " + labels.task + ": intent " + i.id + " weight outside [0, 1]");
  std::set<JudgmentId> ids;
  for (const auto& j : labels.matrix.judgments) {
    if (!ids.insert(j.id).second) data_error("task " + labels.task + ": duplicate judgment " + std::to_string(j.id));
    if (j.per_intent.size() != intents.size())
      data_error("task " + labels.task + ": judgment " + std::to_string(j.id) + " has " +
                 std::to_string(j.per_intent.size()) + " relevance values for " + std::to_string(intents.size()) +
                 " intents");
    for (double d : j.per_intent)
      if (!(d >= 0.0 && d <= 1.0))
        data_error("task " + labels.task + ": judgment " + std::to_string(j.id) + " relevance outside [0, 1]");
    if (j.overall < 1 || j.overall > 4)
      data_error("task " + labels.task + ": judgment " + std::to_string(j.id) + " r must be in 1..4");
  }
  std::set<JudgmentId> pool;
  for (JudgmentId id : labels.pool) {
    if (!ids.count(id)) data_error("task " + labels.task + ": pool judgment " + std::to_string(id) + " not labelled");
    if (!pool.insert(id).second) data_error("task " + labels.task + ": pool repeats judgment " + std::to_string(id));
  }
}

TaskLabels task_labels_from_json(const std::string& text) {
  TaskLabels out;
  try {
    const json j = json::parse(text);
    out.task = j.at("task").is_string() ? j.at("task").get<std::string>() : j.at("task").dump();
    for (const auto& i : j.at("intents")) out.profile.intents.push_back({i.at("id").get<std::string>(), i.at("weight").get<double>()});
    for (const auto& d : j.at("judgments"))
      out.matrix.judgments.push_back(
          {d.at("id").get<JudgmentId>(), d.at("relevance").get<std::vector<double>>(), d.at("r").get<int>()});
    if (j.contains("pool")) out.pool = j.at("pool").get<std::vector<JudgmentId>>();
  } catch (const json::exception& e) {
    data_error(std::string("malformed label file: ") + e.what());
  }
  validate(out);
  return out;
}

std::string to_json(const TaskLabels& labels) {
  json j;
  j["task"] = labels.task;
  j["intents"] = json::array();
  for (const auto& i : labels.profile.intents) j["intents"].push_back({{"id", i.id}, {"weight", i.weight}});
  j["judgments"] = json::array();
  for (const auto& d : labels.matrix.judgments)
    j["judgments"].push_back({{"id", d.id}, {"relevance", d.per_intent}, {"r", d.overall}});
  if (!labels.pool.empty()) j["pool"] = labels.pool;
  return j.dump(1) + "\n";
}

double ranking_score(const IntentProfile& profile, std::span<const double> relevance) {
  if (relevance.size() != profile.intents.size())
    data_error("relevance row has " + std::to_string(relevance.size()) + " entries for " +
               std::to_string(profile.intents.size()) + " intents");
  double s = 0.0;
  for (std::size_t i = 0; i < relevance.size(); ++i) s += profile.intents[i].weight * relevance[i];
  return s;
}

RankingState RankingState::start(IntentProfile profile, std::vector<JudgmentId> pool) {
  RankingState s;
  s.profile = std::move(profile);
  std::sort(pool.begin(), pool.end());
  if (std::adjacent_find(pool.begin(), pool.end()) != pool.end()) data_error("candidate pool repeats a judgment");
  s.remaining = std::move(pool);
  return s;
}

std::vector<JudgmentId> rank_remaining(const RankingState& state, const RelevanceMatrix& matrix) {
  struct Entry {
    double score;
    int overall;
    JudgmentId id;
  };
  std::vector<Entry> entries;
  entries.reserve(state.remaining.size());
  for (JudgmentId id : state.remaining) {
    const auto& j = matrix.at(id);
    entries.push_back({ranking_score(state.profile, j.per_intent), j.overall, id});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.overall != b.overall) return a.overall > b.overall;
    return a.id < b.id;
  });
  std::vector<JudgmentId> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.id);
  return out;
}

RankingState show_next(const RankingState& state, const RelevanceMatrix& matrix) {
  if (state.remaining.empty()) data_error("no judgments left to show");
  const JudgmentId head = rank_remaining(state, matrix).front();
  RankingState next = state;
  next.shown.push_back(head);
  next.remaining.erase(std::find(next.remaining.begin(), next.remaining.end(), head));
  return next;
}

RankingState apply_feedback(const RankingState& state, const RelevanceMatrix& matrix, JudgmentId judgment,
                            bool satisfied, std::size_t top_t, BlameMode mode) {
  if (std::find(state.shown.begin(), state.shown.end(), judgment) == state.shown.end())
    data_error("feedback for judgment " + std::to_string(judgment) + " which has not been shown");
  RankingState next = state;
  FeedbackRecord record{judgment, satisfied, {}, {}};
  if (!satisfied) {
    const auto& d = matrix.at(judgment).per_intent;
    auto& intents = next.profile.intents;
    if (d.size() != intents.size()) data_error("relevance row does not match the intent profile");
    std::vector<std::size_t> order(intents.size());
    std::iota(order.begin(), order.end(), 0);
    auto blame = [&](std::size_t i) { return mode == BlameMode::Product ? intents[i].weight * d[i] : intents[i].weight; };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return blame(a) > blame(b); });
    for (std::size_t k = 0; k < std::min(top_t, order.size()); ++k) {
      intents[order[k]].weight *= 0.5;
      record.halved.push_back(order[k]);
    }
  }
  record.profile_after = next.profile;
  next.history.push_back(std::move(record));
  return next;
}

namespace {

// Better candidate first: higher r, then lower id.
bool better_by_overall(const JudgmentRelevance& a, const JudgmentRelevance& b) {
  if (a.overall != b.overall) return a.overall > b.overall;
  return a.id < b.id;
}

}  // namespace

std::vector<JudgmentId> select_candidate_pool(const RelevanceMatrix& matrix, std::size_t pool_size) {
  if (matrix.judgments.size() < pool_size)
    data_error("corpus of " + std::to_string(matrix.judgments.size()) + " judgments is smaller than the pool size " +
               std::to_string(pool_size));
  if (matrix.judgments.empty()) return {};
  const std::size_t intents = matrix.judgments.front().per_intent.size();
  std::vector<JudgmentId> pool;
  auto add = [&pool](JudgmentId id) {
    if (std::find(pool.begin(), pool.end(), id) == pool.end()) pool.push_back(id);
  };
  for (std::size_t i = 0; i < intents; ++i) {
    const JudgmentRelevance* best = nullptr;
    for (const auto& j : matrix.judgments) {
      if (!best || j.per_intent[i] > best->per_intent[i] ||
          (j.per_intent[i] == best->per_intent[i] && better_by_overall(j, *best)))
        best = &j;
    }
    add(best->id);
  }
  if (pool.size() > pool_size)
    data_error("intents need " + std::to_string(pool.size()) + " distinct judgments but the pool holds " +
               std::to_string(pool_size));
  std::vector<const JudgmentRelevance*> by_overall;
  for (const auto& j : matrix.judgments) by_overall.push_back(&j);
  std::sort(by_overall.begin(), by_overall.end(), [](auto* a, auto* b) { return better_by_overall(*a, *b); });
  for (const auto* j : by_overall) {
    if (pool.size() == pool_size) break;
    add(j->id);
  }
  return pool;
}

std::vector<JudgmentId> candidate_pool(const TaskLabels& labels, std::size_t pool_size) {
  if (!labels.pool.empty()) return labels.pool;
  return select_candidate_pool(labels.matrix, pool_size);
}

std::vector<JudgmentId> fixed_relevance_order(const RelevanceMatrix& matrix, std::vector<JudgmentId> pool) {
  std::sort(pool.begin(), pool.end(),
            [&](JudgmentId a, JudgmentId b) { return better_by_overall(matrix.at(a), matrix.at(b)); });
  return pool;
}

}  // namespace eegfb
