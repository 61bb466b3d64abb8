#include "eegfb/session.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eegfb/container.hpp"
#include "eegfb/error.hpp"

namespace eegfb {

using nlohmann::json;

namespace {

std::string describe(const ParagraphOrigin& o) {
  return "user " + o.user + " task " + o.task + " judgment " + std::to_string(o.judgment) + " paragraph " +
         std::to_string(o.paragraph);
}

std::string session_name(const SessionLog& log) { return "session " + log.user + "/" + log.task; }

std::string id_string(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

std::int64_t id_number(const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    std::size_t used = 0;
    const auto n = std::stoll(s, &used);
    if (used == s.size()) return n;
  }
  throw json::type_error::create(302, "expected an integer id", &v);
}

}  // namespace

std::vector<JudgmentId> SessionLog::judgments_read() const {
  std::vector<JudgmentId> out;
  for (const auto& v : views)
    if (std::find(out.begin(), out.end(), v.judgment) == out.end()) out.push_back(v.judgment);
  return out;
}

std::vector<std::int64_t> SessionLog::viewed_paragraphs(JudgmentId judgment) const {
  std::vector<std::int64_t> out;
  for (const auto& v : views)
    if (v.judgment == judgment && std::find(out.begin(), out.end(), v.paragraph) == out.end())
      out.push_back(v.paragraph);
  return out;
}

bool SessionLog::viewed(JudgmentId judgment) const {
  return std::any_of(views.begin(), views.end(), [judgment](const auto& v) { return v.judgment == judgment; });
}

std::optional<bool> SessionLog::gold_for(JudgmentId judgment) const {
  for (const auto& [j, sat] : gold)
    if (j == judgment) return sat;
  return std::nullopt;
}

void validate(const SessionLog& log) {
  const auto name = session_name(log);
  if (log.ranking_quality && (*log.ranking_quality < 1 || *log.ranking_quality > 4))
    data_error(name + ": ranking quality must be in 1..4");
  double last = -1e300;
  std::set<ParagraphRef> seen;
  for (const auto& v : log.views) {
    if (!(v.end_s >= v.start_s)) data_error(name + ": view of paragraph " + std::to_string(v.paragraph) + " ends before it starts");
    if (v.start_s < last) data_error(name + ": views are not time-ordered");
    last = v.start_s;
    seen.insert({v.judgment, v.paragraph});
  }
  for (const auto& a : log.annotations) {
    if (!seen.count({a.judgment, a.paragraph}))
      data_error(name + ": annotated paragraph " + std::to_string(a.paragraph) + " of judgment " +
                 std::to_string(a.judgment) + " was never viewed");
    label_from_annotation(a.annotation);
  }
  std::set<JudgmentId> judged;
  for (const auto& [j, sat] : log.gold)
    if (!judged.insert(j).second) data_error(name + ": judgment " + std::to_string(j) + " judged twice");
}

std::vector<SessionLog> parse_session_logs(const std::string& jsonl) {
  std::map<std::pair<std::string, std::string>, SessionLog> logs;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json e = json::parse(line);
      const auto type = e.at("type").get<std::string>();
      const auto user = id_string(e.at("user"));
      const auto task = id_string(e.at("task"));
      auto& log = logs[{user, task}];
      log.user = user;
      log.task = task;
      if (type == "view") {
        log.views.push_back({id_number(e.at("judgment")), id_number(e.at("paragraph")), e.at("start_s").get<double>(),
                             e.at("end_s").get<double>()});
      } else if (type == "click") {
        log.clicks.push_back({id_number(e.at("judgment")), id_number(e.at("paragraph"))});
      } else if (type == "annotate") {
        log.annotations.push_back(
            {id_number(e.at("judgment")), id_number(e.at("paragraph")), e.at("annotation").get<std::string>()});
      } else if (type == "judge") {
        log.gold.emplace_back(id_number(e.at("judgment")), e.at("satisfied").get<bool>());
      } else if (type == "task_label") {
        if (e.contains("arm")) log.arm = e.at("arm").get<std::string>();
        if (e.contains("seq")) log.seq = e.at("seq").get<int>();
        if (e.contains("ranking_quality")) log.ranking_quality = e.at("ranking_quality").get<int>();
        if (e.contains("task_satisfied")) {
          const auto& v = e.at("task_satisfied");
          log.task_satisfied = v.is_boolean() ? v.get<bool>() : v.get<int>() != 0;
        }
      } else {
        data_error("line " + std::to_string(line_no) + ": unknown event type '" + type + "'");
      }
    } catch (const json::exception& ex) {
      data_error("line " + std::to_string(line_no) + ": malformed event: " + ex.what());
    } catch (const std::invalid_argument&) {
      data_error("line " + std::to_string(line_no) + ": malformed id");
    } catch (const std::out_of_range&) {
      data_error("line " + std::to_string(line_no) + ": id out of range");
    }
  }
  std::vector<SessionLog> out;
  for (auto& [key, log] : logs) {
    validate(log);
    out.push_back(std::move(log));
  }
  std::stable_sort(out.begin(), out.end(), [](const SessionLog& a, const SessionLog& b) {
    return std::tie(a.user, a.seq, a.task) < std::tie(b.user, b.seq, b.task);
  });
  return out;
}

std::vector<SessionLog> read_session_logs(const std::filesystem::path& path) {
  try {
    return parse_session_logs(read_text_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Data) data_error(path.string() + ": " + e.what());
    throw;
  }
}

std::string to_jsonl(const SessionLog& log) {
  std::string out;
  auto emit = [&](json e) {
    json line{{"type", e.at("type")}, {"user", log.user}, {"task", log.task}};
    e.erase("type");
    line.update(e);
    out += line.dump() + "\n";
  };
  json label{{"type", "task_label"}, {"arm", log.arm}, {"seq", log.seq}};
  if (log.ranking_quality) label["ranking_quality"] = *log.ranking_quality;
  if (log.task_satisfied) label["task_satisfied"] = *log.task_satisfied ? 1 : 0;
  emit(label);
  for (const auto& v : log.views)
    emit({{"type", "view"}, {"judgment", v.judgment}, {"paragraph", v.paragraph}, {"start_s", v.start_s}, {"end_s", v.end_s}});
  for (const auto& c : log.clicks) emit({{"type", "click"}, {"judgment", c.judgment}, {"paragraph", c.paragraph}});
  for (const auto& a : log.annotations)
    emit({{"type", "annotate"}, {"judgment", a.judgment}, {"paragraph", a.paragraph}, {"annotation", a.annotation}});
  for (const auto& [j, sat] : log.gold) emit({{"type", "judge"}, {"judgment", j}, {"satisfied", sat}});
  return out;
}

Label click_feedback(const SessionLog& log, JudgmentId judgment, int threshold) {
  if (threshold < 1) config_error("click threshold must be at least 1");
  if (!log.viewed(judgment))
    data_error(session_name(log) + ": judgment " + std::to_string(judgment) + " not in log");
  std::set<std::int64_t> clicked;
  for (const auto& c : log.clicks)
    if (c.judgment == judgment) clicked.insert(c.paragraph);
  return static_cast<int>(clicked.size()) >= threshold ? Label::Satisfied : Label::Unsatisfied;
}

Label eeg_feedback(const SessionLog& log, JudgmentId judgment, const ParagraphPredictor& predict,
                   const VotingConfig& voting) {
  if (!predict) config_error("EEG feedback needs a paragraph predictor");
  if (!log.viewed(judgment))
    data_error(session_name(log) + ": judgment " + std::to_string(judgment) + " not in log");
  std::vector<Label> labels;
  for (std::int64_t p : log.viewed_paragraphs(judgment)) labels.push_back(predict({log.user, log.task, judgment, p}));
  return judge_satisfaction(labels, voting);
}

ParagraphOrigin origin_of(const EegSegment& segment) {
  const auto& m = segment.meta();
  return {m.user, m.query, m.judgment, m.paragraph};
}

ParagraphPredictor model_predictor(const ModelFile& model, const SegmentStore& segments) {
  struct Cache {
    std::mutex mutex;
    std::map<ParagraphOrigin, Label> labels;
  };
  auto cache = std::make_shared<Cache>();
  return [model, &segments, cache](const ParagraphOrigin& origin) {
    {
      std::lock_guard lock(cache->mutex);
      if (auto it = cache->labels.find(origin); it != cache->labels.end()) return it->second;
    }
    const auto it = segments.find(origin);
    if (it == segments.end()) data_error("no EEG segment for " + describe(origin));
    if (it->second.channel_labels() != model.channel_labels)
      data_error("channels of " + describe(origin) + " do not match the model");
    const auto features = extract_features(it->second, model.features);
    const Label label = predict_raw(model, features.values);
    std::lock_guard lock(cache->mutex);
    cache->labels.emplace(origin, label);
    return label;
  };
}

ParagraphPredictor table_predictor(std::map<ParagraphOrigin, Label> labels) {
  auto table = std::make_shared<const std::map<ParagraphOrigin, Label>>(std::move(labels));
  return [table](const ParagraphOrigin& origin) {
    const auto it = table->find(origin);
    if (it == table->end()) data_error("no prediction for " + describe(origin));
    return it->second;
  };
}

std::string Strategy::name() const {
  switch (kind) {
    case Kind::None:
      return "None";
    case Kind::Click:
      return "Click(" + std::to_string(threshold) + ")";
    case Kind::Eeg:
      return "EEG(" + std::to_string(threshold) + ")";
  }
  return "?";
}

void validate(const Strategy& strategy) {
  if (strategy.kind != Strategy::Kind::None && strategy.threshold < 1)
    config_error("strategy " + strategy.name() + ": threshold must be at least 1");
}

Strategy strategy_from_string(const std::string& text) {
  std::string s = text;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  Strategy out;
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  if (kind == "none") {
    if (colon != std::string::npos) config_error("strategy '" + text + "': none takes no threshold");
    return out;
  }
  if (kind == "click")
    out.kind = Strategy::Kind::Click;
  else if (kind == "eeg")
    out.kind = Strategy::Kind::Eeg;
  else
    config_error("unknown strategy '" + text + "'");
  if (colon == std::string::npos) config_error("strategy '" + text + "' needs a threshold, e.g. " + kind + ":2");
  try {
    std::size_t used = 0;
    out.threshold = std::stoi(s.substr(colon + 1), &used);
    if (used != s.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    config_error("strategy '" + text + "': threshold is not an integer");
  }
  validate(out);
  return out;
}

std::string to_json(const SessionTrace& trace) {
  json steps = json::array();
  for (const auto& s : trace.steps) {
    json step{{"judgment", s.judgment}, {"halved", s.halved}, {"weights", s.weights_after}};
    step["feedback"] = s.feedback ? json(to_string(*s.feedback)) : json(nullptr);
    steps.push_back(step);
  }
  json j{{"user", trace.user}, {"task", trace.task}, {"strategy", trace.strategy}, {"shown", trace.shown}, {"steps", steps}};
  return j.dump();
}

SessionTrace simulate_session(const SessionLog& log, const Strategy& strategy, const TaskLabels& labels,
                              const ParagraphPredictor& predict, const RerankOptions& options) {
  validate(strategy);
  if (log.task != labels.task)
    data_error(session_name(log) + ": labels are for task " + labels.task);
  for (JudgmentId j : log.judgments_read())
    if (!labels.matrix.contains(j))
      data_error(session_name(log) + ": judgment " + std::to_string(j) + " has no relevance labels");
  if (strategy.kind == Strategy::Kind::Eeg && !predict) config_error("EEG strategy needs a paragraph predictor");

  const auto pool = candidate_pool(labels, options.pool_size);
  const std::size_t stop = std::min(log.judgments_read().size(), pool.size());

  SessionTrace trace{log.user, log.task, strategy.name(), {}, {}};
  if (strategy.kind == Strategy::Kind::None) {
    const auto order = fixed_relevance_order(labels.matrix, pool);
    const auto weights = labels.profile.weights();
    for (std::size_t k = 0; k < stop; ++k) {
      trace.shown.push_back(order[k]);
      trace.steps.push_back({order[k], std::nullopt, {}, weights});
    }
    return trace;
  }

  auto state = RankingState::start(labels.profile, pool);
  for (std::size_t k = 0; k < stop; ++k) {
    state = show_next(state, labels.matrix);
    const JudgmentId j = state.shown.back();
    TraceStep step{j, std::nullopt, {}, {}};
    if (log.viewed(j)) {
      step.feedback = strategy.kind == Strategy::Kind::Click
                          ? click_feedback(log, j, strategy.threshold)
                          : eeg_feedback(log, j, predict, VotingConfig{strategy.threshold});
      state = apply_feedback(state, labels.matrix, j, *step.feedback == Label::Satisfied, options.top_t, options.blame);
      step.halved = state.history.back().halved;
    }
    step.weights_after = state.profile.weights();
    trace.steps.push_back(std::move(step));
  }
  trace.shown = state.shown;
  return trace;
}

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

FeedbackScores scores_from(const Confusion& c) {
  if (c.total() == 0) data_error("no feedback to evaluate");
  FeedbackScores s;
  s.counts = c;
  s.accuracy = double(c.tp + c.tn) / double(c.total());
  // 2PR / (P + R) rewritten over counts so the result is a single rounding
  s.f1 = c.tp ? double(2 * c.tp) / double(2 * c.tp + c.fp + c.fn) : 0.0;
  return s;
}

FeedbackScores evaluate_feedback(const std::vector<Label>& predictions, const std::vector<Label>& gold) {
  if (predictions.size() != gold.size())
    data_error(std::to_string(predictions.size()) + " predictions for " + std::to_string(gold.size()) + " gold labels");
  Confusion c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool p = predictions[i] == Label::Satisfied, g = gold[i] == Label::Satisfied;
    (p ? (g ? c.tp : c.fp) : (g ? c.fn : c.tn)) += 1;
  }
  return scores_from(c);
}

MetricsReport compare_strategies(const std::vector<SessionLog>& logs, const std::vector<Strategy>& strategies,
                                 const std::map<std::string, TaskLabels>& labels, const ParagraphPredictor& predict,
                                 const RerankOptions& options) {
  if (logs.empty()) data_error("no session logs to compare");
  MetricsReport report;
  for (const auto& strategy : strategies) {
    std::vector<Label> predicted, gold;
    for (const auto& log : logs) {
      const auto it = labels.find(log.task);
      if (it == labels.end()) data_error(session_name(log) + ": no label file for task " + log.task);
      auto trace = simulate_session(log, strategy, it->second, predict, options);
      for (const auto& step : trace.steps) {
        const auto g = log.gold_for(step.judgment);
        if (!step.feedback || !g) continue;
        predicted.push_back(*step.feedback);
        gold.push_back(*g ? Label::Satisfied : Label::Unsatisfied);
      }
      report.traces.push_back(std::move(trace));
    }
    StrategyRow row{strategy.name(), std::nullopt};
    if (strategy.kind != Strategy::Kind::None) {
      if (gold.empty())
        report.warnings.push_back(strategy.name() + ": no judged judgment received feedback");
      else
        row.scores = evaluate_feedback(predicted, gold);
    }
    report.strategies.push_back(std::move(row));
  }

  std::map<std::string, std::vector<const SessionLog*>> by_arm;
  for (const auto& log : logs) by_arm[log.arm.empty() ? "-" : log.arm].push_back(&log);
  for (const auto& [arm, group] : by_arm) {
    ArmRow row{arm, group.size(), 0, 0.0, 0.0};
    double quality = 0.0;
    std::size_t sat = 0, sat_known = 0;
    for (const auto* log : group) {
      if (log->ranking_quality) {
        quality += *log->ranking_quality;
        ++row.rated;
      }
      if (log->task_satisfied) {
        sat += *log->task_satisfied;
        ++sat_known;
      }
    }
    if (row.rated) row.mean_ranking_quality = quality / double(row.rated);
    if (sat_known) row.satisfied_rate = double(sat) / double(sat_known);
    report.arms.push_back(row);
  }
  return report;
}

std::string to_json(const MetricsReport& report) {
  json j;
  j["version"] = 1;
  j["aggregation"] = "micro-average over judged judgments that received feedback";
  j["strategies"] = json::array();
  for (const auto& row : report.strategies) {
    json r{{"strategy", row.strategy}};
    if (row.scores) {
      const auto& c = row.scores->counts;
      r["accuracy"] = row.scores->accuracy;
      r["f1"] = row.scores->f1;
      r["judgments"] = c.total();
      r["confusion"] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
    } else {
      r["accuracy"] = nullptr;
      r["f1"] = nullptr;
      r["judgments"] = nullptr;
    }
    j["strategies"].push_back(r);
  }
  j["arms"] = json::array();
  for (const auto& a : report.arms)
    j["arms"].push_back({{"arm", a.arm},
                         {"tasks", a.tasks},
                         {"rated", a.rated},
                         {"mean_ranking_quality", a.mean_ranking_quality},
                         {"satisfied_rate", a.satisfied_rate}});
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

namespace {

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) { return s.size() >= width ? s : s + std::string(width - s.size(), ' '); }

}  // namespace

std::string render_table(const MetricsReport& report) {
  std::size_t w = 8;
  for (const auto& r : report.strategies) w = std::max(w, r.strategy.size());
  for (const auto& a : report.arms) w = std::max(w, a.arm.size());
  w += 2;

  std::string out = "Relevance feedback\n";
  out += pad("Method", w) + pad("Accuracy", 10) + pad("F1", 8) + "Judgments\n";
  for (const auto& r : report.strategies) {
    if (r.scores)
      out += pad(r.strategy, w) + pad(fixed(r.scores->accuracy, 3), 10) + pad(fixed(r.scores->f1, 3), 8) +
             std::to_string(r.scores->counts.total()) + "\n";
    else
      out += pad(r.strategy, w) + pad("-", 10) + pad("-", 8) + "-\n";
  }
  out += "\nTask outcomes by arm\n";
  out += pad("Arm", w) + pad("Tasks", 7) + pad("Ranking quality", 17) + "Satisfied\n";
  for (const auto& a : report.arms)
    out += pad(a.arm, w) + pad(std::to_string(a.tasks), 7) +
           pad(a.rated ? fixed(a.mean_ranking_quality, 2) : "-", 17) + fixed(a.satisfied_rate, 2) + "\n";
  for (const auto& warning : report.warnings) out += "warning: " + warning + "\n";
  return out;
}

}  // namespace eegfb
