#include "eegfb/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "eegfb/container.hpp"
#include "eegfb/error.hpp"

namespace eegfb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& section) {
  if (!obj.is_object()) config_error(section + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      config_error("unknown key '" + key + "' in " + section);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

std::string blame_name(BlameMode m) { return m == BlameMode::Product ? "product" : "profile"; }

BlameMode blame_from(const std::string& s) {
  if (s == "product") return BlameMode::Product;
  if (s == "profile") return BlameMode::ProfileOnly;
  config_error("rerank.blame must be 'product' or 'profile', got '" + s + "'");
}

std::string strategy_key(const Strategy& s) {
  switch (s.kind) {
    case Strategy::Kind::None:
      return "none";
    case Strategy::Kind::Click:
      return "click:" + std::to_string(s.threshold);
    case Strategy::Kind::Eeg:
      break;
  }
  return "eeg:" + std::to_string(s.threshold);
}

void read_synth(const json& j, SynthSpec& s) {
  check_keys(j,
             {"users", "tasks", "tasks_per_user", "intents_min", "intents_max", "corpus_size", "pool_size",
              "paragraphs_min", "paragraphs_max", "paragraph_seconds_min", "paragraph_seconds_max", "channel_labels",
              "sample_rate_hz", "noise_rms_v", "noise_low_hz", "burst_hz", "burst_seconds_min", "burst_seconds_max",
              "alpha_contrast", "burst_amplitude_v", "useful_if_satisfied", "useful_if_unsatisfied", "hard_to_say",
              "click_if_useful", "click_otherwise", "arms"},
             "synth");
  read(j, "users", s.users);
  read(j, "tasks", s.tasks);
  read(j, "tasks_per_user", s.tasks_per_user);
  read(j, "intents_min", s.intents_min);
  read(j, "intents_max", s.intents_max);
  read(j, "corpus_size", s.corpus_size);
  read(j, "pool_size", s.pool_size);
  read(j, "paragraphs_min", s.paragraphs_min);
  read(j, "paragraphs_max", s.paragraphs_max);
  read(j, "paragraph_seconds_min", s.paragraph_seconds_min);
  read(j, "paragraph_seconds_max", s.paragraph_seconds_max);
  read(j, "channel_labels", s.channel_labels);
  read(j, "sample_rate_hz", s.sample_rate_hz);
  read(j, "noise_rms_v", s.noise_rms_v);
  read(j, "noise_low_hz", s.noise_low_hz);
  read(j, "burst_hz", s.burst_hz);
  read(j, "burst_seconds_min", s.burst_seconds_min);
  read(j, "burst_seconds_max", s.burst_seconds_max);
  read(j, "alpha_contrast", s.alpha_contrast);
  if (j.contains("burst_amplitude_v") && !j.at("burst_amplitude_v").is_null())
    s.burst_amplitude_v = j.at("burst_amplitude_v").get<double>();
  read(j, "useful_if_satisfied", s.useful_if_satisfied);
  read(j, "useful_if_unsatisfied", s.useful_if_unsatisfied);
  read(j, "hard_to_say", s.hard_to_say);
  read(j, "click_if_useful", s.click_if_useful);
  read(j, "click_otherwise", s.click_otherwise);
  read(j, "arms", s.arms);
}

json synth_json(const SynthSpec& s) {
  return {{"users", s.users},
          {"tasks", s.tasks},
          {"tasks_per_user", s.tasks_per_user},
          {"intents_min", s.intents_min},
          {"intents_max", s.intents_max},
          {"corpus_size", s.corpus_size},
          {"pool_size", s.pool_size},
          {"paragraphs_min", s.paragraphs_min},
          {"paragraphs_max", s.paragraphs_max},
          {"paragraph_seconds_min", s.paragraph_seconds_min},
          {"paragraph_seconds_max", s.paragraph_seconds_max},
          {"channel_labels", s.channel_labels},
          {"sample_rate_hz", s.sample_rate_hz},
          {"noise_rms_v", s.noise_rms_v},
          {"noise_low_hz", s.noise_low_hz},
          {"burst_hz", s.burst_hz},
          {"burst_seconds_min", s.burst_seconds_min},
          {"burst_seconds_max", s.burst_seconds_max},
          {"alpha_contrast", s.alpha_contrast},
          {"burst_amplitude_v", s.burst_amplitude_v ? json(*s.burst_amplitude_v) : json(nullptr)},
          {"useful_if_satisfied", s.useful_if_satisfied},
          {"useful_if_unsatisfied", s.useful_if_unsatisfied},
          {"hard_to_say", s.hard_to_say},
          {"click_if_useful", s.click_if_useful},
          {"click_otherwise", s.click_otherwise},
          {"arms", s.arms}};
}

void require_exists(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) data_error("missing " + what + ": expected " + p.string());
}

// Output directories are built next to their final place and swapped in whole.
class StagedDir {
 public:
  explicit StagedDir(fs::path target) : target_(std::move(target)), tmp_(target_.string() + ".tmp") {
    fs::remove_all(tmp_);
    fs::create_directories(tmp_);
  }
  StagedDir(const StagedDir&) = delete;
  StagedDir& operator=(const StagedDir&) = delete;
  ~StagedDir() {
    std::error_code ec;
    if (!committed_) fs::remove_all(tmp_, ec);
  }

  const fs::path& path() const { return tmp_; }

  void commit() {
    const fs::path old = target_.string() + ".old";
    fs::remove_all(old);
    if (fs::exists(target_)) fs::rename(target_, old);
    fs::rename(tmp_, target_);
    fs::remove_all(old);
    committed_ = true;
  }

 private:
  fs::path target_, tmp_;
  bool committed_ = false;
};

std::vector<fs::path> containers_in(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// Runs body(i) for i in [0, n) on a few threads; rethrows the lowest-index failure.
template <typename F>
void parallel_for(std::size_t n, F body) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(run);
  run();
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Prefixes errors with the file they came from.
template <typename F>
auto for_file(const fs::path& p, F f) {
  try {
    return f();
  } catch (const Error& e) {
    if (std::string(e.what()).find(p.string()) == std::string::npos) throw Error(e.kind(), p.string() + ": " + e.what());
    throw;
  }
}

std::string segment_name(const SegmentMeta& m) {
  return m.user + "_" + m.query + "_" + std::to_string(m.judgment) + "_" + std::to_string(m.paragraph);
}

StatConfig extraction_config(const RunConfig& cfg) {
  StatConfig s = cfg.features;
  s.artifact_threshold_v = cfg.preprocess.artifact_threshold_v;
  return s;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string column_name(const FeatureColumn& c, const BandTable& bands) {
  char t[32];
  std::snprintf(t, sizeof t, "%g", c.window_s);
  return std::string("t") + t + (c.stat == StatKind::Max ? "_max" : "_min") + "_r" + std::to_string(c.rank) + "_" +
         c.channel_label + "_" + bands.bands[c.band].name;
}

std::map<std::string, TaskLabels> read_label_dir(const fs::path& dir) {
  require_exists(dir, "label directory");
  std::map<std::string, TaskLabels> out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto labels = for_file(f, [&] { return task_labels_from_json(read_text_file(f)); });
    const std::string task = labels.task;
    if (!out.emplace(task, std::move(labels)).second) data_error(f.string() + ": task " + task + " labelled twice");
  }
  return out;
}

std::vector<SessionLog> scoped_logs(const std::vector<SessionLog>& logs, SessionScope scope) {
  if (scope == SessionScope::All) return logs;
  std::map<std::string, int> seen;
  std::vector<SessionLog> out;
  for (const auto& log : logs)  // sorted by user, then seq
    if (++seen[log.user] > 2) out.push_back(log);
  return out;
}

MetricsReport run_comparison(const RunConfig& cfg) {
  validate(cfg);
  const auto layout = RunLayout::of(cfg);
  require_exists(layout.logs, "session log");
  const auto all_logs = read_session_logs(layout.logs);
  const auto logs = scoped_logs(all_logs, cfg.scope);
  if (logs.empty()) data_error("no sessions to simulate in " + layout.logs.string());
  const auto labels = read_label_dir(layout.labels);

  ParagraphPredictor predict;
  const bool needs_eeg = std::any_of(cfg.strategies.begin(), cfg.strategies.end(),
                                     [](const Strategy& s) { return s.kind == Strategy::Kind::Eeg; });
  if (needs_eeg) {
    const auto file = layout.predictions / "predictions.jsonl";
    require_exists(file, "predictions (run predict first)");
    std::map<ParagraphOrigin, Label> table;
    for (const auto& p : for_file(file, [&] { return predictions_from_jsonl(read_text_file(file)); }))
      table[p.origin] = p.label;
    predict = table_predictor(std::move(table));
  }
  auto report = compare_strategies(logs, cfg.strategies, labels, predict, cfg.rerank);
  // Task outcomes are human labels and are summarised over every session.
  report.arms = compare_strategies(all_logs, {}, labels).arms;
  return report;
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  RunConfig cfg;
  try {
    const json j = json::parse(text);
    check_keys(j,
               {"version", "seed", "paths", "preprocess", "features", "rfe", "voting", "strategies", "rerank",
                "simulate", "synth", "reprocess"},
               "config");
    if (!j.contains("version")) config_error("config needs a \"version\" field");
    const int version = j.at("version").get<int>();
    if (version != RunConfig::kVersion) config_error("unsupported config version " + std::to_string(version));
    read(j, "seed", cfg.seed);
    read(j, "reprocess", cfg.reprocess);
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      check_keys(p, {"data", "out"}, "paths");
      if (p.contains("data")) cfg.data_dir = p.at("data").get<std::string>();
      if (p.contains("out")) cfg.out_dir = p.at("out").get<std::string>();
    }
    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      auto& c = cfg.preprocess;
      check_keys(p,
                 {"reference_channels", "bandpass", "highpass_hz", "lowpass_hz", "baseline_window_s", "target_rate_hz",
                  "filter_order", "artifact_threshold_v"},
                 "preprocess");
      read(p, "reference_channels", c.reference_channels);
      read(p, "bandpass", c.bandpass_enabled);
      read(p, "highpass_hz", c.highpass_hz);
      read(p, "lowpass_hz", c.lowpass_hz);
      if (p.contains("baseline_window_s")) {
        const auto w = p.at("baseline_window_s").get<std::vector<double>>();
        if (w.size() != 2) config_error("preprocess.baseline_window_s must be [start, end]");
        c.baseline_window = {w[0], w[1]};
      }
      read(p, "target_rate_hz", c.target_rate_hz);
      read(p, "filter_order", c.filter_order);
      if (p.contains("artifact_threshold_v")) {
        const auto& a = p.at("artifact_threshold_v");
        c.artifact_threshold_v = a.is_null() ? std::nullopt : std::optional<double>(a.get<double>());
      }
    }
    if (j.contains("features")) {
      const auto& f = j.at("features");
      check_keys(f, {"window_lengths_s", "order_ranks", "window_stride_s", "mode"}, "features");
      read(f, "window_lengths_s", cfg.features.window_lengths_s);
      read(f, "order_ranks", cfg.features.order_ranks);
      read(f, "window_stride_s", cfg.features.window_stride_s);
      if (f.contains("mode")) cfg.features.mode = band_mode_from_string(f.at("mode").get<std::string>());
    }
    if (j.contains("rfe")) {
      const auto& r = j.at("rfe");
      check_keys(r, {"C", "elimination_fraction", "target_dims", "max_rounds"}, "rfe");
      read(r, "C", cfg.rfe.C);
      read(r, "elimination_fraction", cfg.rfe.elimination_fraction);
      read(r, "target_dims", cfg.rfe.target_dims);
      read(r, "max_rounds", cfg.rfe.max_rounds);
    }
    if (j.contains("voting")) {
      check_keys(j.at("voting"), {"threshold"}, "voting");
      read(j.at("voting"), "threshold", cfg.voting.threshold);
    }
    if (j.contains("strategies")) {
      cfg.strategies.clear();
      for (const auto& s : j.at("strategies")) cfg.strategies.push_back(strategy_from_string(s.get<std::string>()));
    }
    if (j.contains("rerank")) {
      const auto& r = j.at("rerank");
      check_keys(r, {"top_t", "blame", "pool_size"}, "rerank");
      read(r, "top_t", cfg.rerank.top_t);
      read(r, "pool_size", cfg.rerank.pool_size);
      if (r.contains("blame")) cfg.rerank.blame = blame_from(r.at("blame").get<std::string>());
    }
    if (j.contains("simulate")) {
      const auto& s = j.at("simulate");
      check_keys(s, {"sessions"}, "simulate");
      if (s.contains("sessions")) {
        const auto v = s.at("sessions").get<std::string>();
        if (v == "all")
          cfg.scope = SessionScope::All;
        else if (v == "held-out")
          cfg.scope = SessionScope::HeldOut;
        else
          config_error("simulate.sessions must be 'all' or 'held-out'");
      }
    }
    if (j.contains("synth")) read_synth(j.at("synth"), cfg.synth);
  } catch (const json::exception& e) {
    config_error(std::string("malformed config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

std::string to_json(const RunConfig& cfg) {
  const auto& p = cfg.preprocess;
  json j;
  j["version"] = RunConfig::kVersion;
  j["seed"] = cfg.seed;
  j["paths"] = {{"data", cfg.data_dir.string()}, {"out", cfg.out_dir.string()}};
  j["preprocess"] = {{"reference_channels", p.reference_channels},
                     {"bandpass", p.bandpass_enabled},
                     {"highpass_hz", p.highpass_hz},
                     {"lowpass_hz", p.lowpass_hz},
                     {"baseline_window_s", {p.baseline_window.start_s, p.baseline_window.end_s}},
                     {"target_rate_hz", p.target_rate_hz},
                     {"filter_order", p.filter_order},
                     {"artifact_threshold_v", p.artifact_threshold_v ? json(*p.artifact_threshold_v) : json(nullptr)}};
  j["features"] = {{"window_lengths_s", cfg.features.window_lengths_s},
                   {"order_ranks", cfg.features.order_ranks},
                   {"window_stride_s", cfg.features.window_stride_s},
                   {"mode", to_string(cfg.features.mode)}};
  j["rfe"] = {{"C", cfg.rfe.C},
              {"elimination_fraction", cfg.rfe.elimination_fraction},
              {"target_dims", cfg.rfe.target_dims},
              {"max_rounds", cfg.rfe.max_rounds}};
  j["voting"] = {{"threshold", cfg.voting.threshold}};
  j["strategies"] = json::array();
  for (const auto& s : cfg.strategies) j["strategies"].push_back(strategy_key(s));
  j["rerank"] = {{"top_t", cfg.rerank.top_t}, {"blame", blame_name(cfg.rerank.blame)}, {"pool_size", cfg.rerank.pool_size}};
  j["simulate"] = {{"sessions", cfg.scope == SessionScope::All ? "all" : "held-out"}};
  j["synth"] = synth_json(cfg.synth);
  j["reprocess"] = cfg.reprocess;
  return j.dump(2) + "\n";
}

void validate(const RunConfig& cfg) {
  const auto& p = cfg.preprocess;
  if (p.bandpass_enabled && !(p.highpass_hz > 0 && p.highpass_hz < p.lowpass_hz && p.lowpass_hz < p.target_rate_hz / 2))
    config_error("need 0 < highpass_hz < lowpass_hz < target_rate_hz / 2");
  validate(cfg.features);
  validate(cfg.rfe);
  validate(cfg.voting);
  for (const auto& s : cfg.strategies) validate(s);
  if (cfg.strategies.empty()) config_error("at least one strategy is required");
  if (cfg.rerank.top_t < 1) config_error("rerank.top_t must be at least 1");
  if (cfg.rerank.pool_size < 1) config_error("rerank.pool_size must be at least 1");
  validate(cfg.synth);
}

RunLayout RunLayout::of(const RunConfig& cfg) {
  RunLayout l;
  l.raw = cfg.data_dir / "raw";
  l.logs = cfg.data_dir / "logs" / "sessions.jsonl";
  l.labels = cfg.data_dir / "labels";
  l.segments = cfg.out_dir / "segments";
  l.features = cfg.out_dir / "features";
  l.model = cfg.out_dir / "model";
  l.predictions = cfg.out_dir / "predictions";
  l.simulate = cfg.out_dir / "simulate";
  l.report = cfg.out_dir / "report";
  l.rerank = cfg.out_dir / "rerank";
  return l;
}

std::string to_csv(const FeatureTable& t) {
  std::string out = "user,task,judgment,paragraph";
  for (const auto& c : t.columns) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& o = t.rows[r];
    for (const auto& s : {o.user, o.task})
      if (s.find_first_of(",\n\"") != std::string::npos) data_error("id '" + s + "' cannot be written to CSV");
    out += o.user + "," + o.task + "," + std::to_string(o.judgment) + "," + std::to_string(o.paragraph);
    for (double v : t.values[r]) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

FeatureTable feature_table_from_csv(const std::string& text) {
  FeatureTable t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) data_error("feature table is empty");
  auto header = split(line);
  if (header.size() < 4 || header[0] != "user" || header[1] != "task" || header[2] != "judgment" ||
      header[3] != "paragraph")
    data_error("feature table header must start with user,task,judgment,paragraph");
  t.columns.assign(header.begin() + 4, header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      data_error("feature table line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                 " cells, header has " + std::to_string(header.size()));
    try {
      t.rows.push_back({cells[0], cells[1], std::stoll(cells[2]), std::stoll(cells[3])});
      std::vector<double> v;
      v.reserve(t.columns.size());
      for (std::size_t k = 4; k < cells.size(); ++k) {
        std::size_t used = 0;
        v.push_back(std::stod(cells[k], &used));
        if (used != cells[k].size()) throw std::invalid_argument(cells[k]);
      }
      t.values.push_back(std::move(v));
    } catch (const std::logic_error&) {
      data_error("feature table line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return t;
}

std::map<ParagraphOrigin, Label> annotation_labels(const std::vector<SessionLog>& logs) {
  std::map<ParagraphOrigin, Label> out;
  for (const auto& log : logs)
    for (const auto& a : log.annotations)
      if (auto label = label_from_annotation(a.annotation)) out[{log.user, log.task, a.judgment, a.paragraph}] = *label;
  return out;
}

std::vector<std::pair<std::string, std::string>> task_order(const std::vector<SessionLog>& logs) {
  auto sorted = logs;
  std::stable_sort(sorted.begin(), sorted.end(), [](const SessionLog& a, const SessionLog& b) {
    return std::tie(a.user, a.seq) < std::tie(b.user, b.seq);
  });
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& l : sorted) out.emplace_back(l.user, l.task);
  return out;
}

std::string to_jsonl(const std::vector<Prediction>& predictions) {
  std::string out;
  for (const auto& p : predictions)
    out += json{{"user", p.origin.user},
                {"task", p.origin.task},
                {"judgment", p.origin.judgment},
                {"paragraph", p.origin.paragraph},
                {"decision", p.decision},
                {"label", to_string(p.label)}}
               .dump() +
           "\n";
  return out;
}

std::vector<Prediction> predictions_from_jsonl(const std::string& text) {
  std::vector<Prediction> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      Prediction p;
      p.origin = {j.at("user").get<std::string>(), j.at("task").get<std::string>(), j.at("judgment").get<std::int64_t>(),
                  j.at("paragraph").get<std::int64_t>()};
      p.decision = j.at("decision").get<double>();
      const auto label = j.at("label").get<std::string>();
      if (label == "satisfied")
        p.label = Label::Satisfied;
      else if (label == "unsatisfied")
        p.label = Label::Unsatisfied;
      else
        data_error("predictions line " + std::to_string(line_no) + ": unknown label '" + label + "'");
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      data_error("predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

CommandResult cmd_synth(const RunConfig& cfg) {
  validate(cfg);
  const auto study = synth_sessions(cfg.synth, cfg.seed);
  const fs::path tmp = cfg.data_dir.string() + ".tmp";
  fs::remove_all(tmp);
  write_study(study, tmp);
  fs::create_directories(cfg.data_dir);
  CommandResult result;
  for (const char* sub : {"raw", "logs", "labels"}) {
    fs::remove_all(cfg.data_dir / sub);
    fs::rename(tmp / sub, cfg.data_dir / sub);
    result.outputs.push_back((cfg.data_dir / sub).string());
  }
  fs::remove_all(tmp);
  return result;
}

CommandResult cmd_preprocess(const RunConfig& cfg) {
  validate(cfg);
  const auto layout = RunLayout::of(cfg);
  require_exists(layout.raw, "raw segment directory");
  CommandResult result;
  const auto inputs = containers_in(layout.raw);
  if (inputs.empty()) {
    result.warnings.push_back("no segment containers in " + layout.raw.string());
    return result;
  }

  StagedDir staged(layout.segments);
  std::vector<std::vector<std::string>> written(inputs.size());
  std::vector<std::vector<std::string>> warnings(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) {
    const auto& dir = inputs[i];
    for_file(dir, [&] {
      if (fs::exists(dir / ".preprocessed") && !cfg.reprocess)
        data_error("already preprocessed; set \"reprocess\": true to process it again");
      const auto raw = load_segment(dir);
      validate(cfg.preprocess, raw.sample_rate_hz());
      const auto clean = preprocess(raw, cfg.preprocess);
      std::vector<EegSegment> parts;
      if (fs::exists(dir / "events.jsonl"))
        parts = slice_by_events(clean, read_view_events(dir / "events.jsonl"));
      else
        parts.push_back(clean);
      for (const auto& part : parts) {
        if (part.degenerate()) {
          warnings[i].push_back(dir.string() + ": paragraph " + std::to_string(part.meta().paragraph) +
                                " has no samples, skipped");
          continue;
        }
        const auto name = segment_name(part.meta());
        save_segment(part, staged.path() / name);
        write_file_atomic(staged.path() / name / ".preprocessed", "");
        written[i].push_back(name);
      }
      return 0;
    });
  });
  std::set<std::string> names;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (const auto& n : written[i])
      if (!names.insert(n).second) data_error("two inputs produce segment " + n);
    result.warnings.insert(result.warnings.end(), warnings[i].begin(), warnings[i].end());
  }
  staged.commit();
  result.outputs.push_back(layout.segments.string());
  return result;
}

CommandResult cmd_extract(const RunConfig& cfg) {
  validate(cfg);
  const auto layout = RunLayout::of(cfg);
  require_exists(layout.segments, "preprocessed segments (run preprocess first)");
  const auto inputs = containers_in(layout.segments);
  if (inputs.empty()) data_error("no segments in " + layout.segments.string());
  const auto stat = extraction_config(cfg);

  std::vector<EegSegment> segments(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) { segments[i] = for_file(inputs[i], [&] { return load_segment(inputs[i]); }); });
  const auto& labels = segments.front().channel_labels();
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].channels() != labels.size())
      data_error(inputs[i].string() + ": " + std::to_string(segments[i].channels()) + " channels, " +
                 inputs.front().string() + " has " + std::to_string(labels.size()));
    if (segments[i].channel_labels() != labels) data_error(inputs[i].string() + ": channel labels differ from " + inputs.front().string());
  }

  std::vector<std::size_t> order(segments.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return origin_of(segments[a]) < origin_of(segments[b]); });

  FeatureTable table;
  const auto bands = BandTable::standard();
  for (const auto& c : describe_features(stat, labels)) table.columns.push_back(column_name(c, bands));
  table.rows.resize(segments.size());
  table.values.resize(segments.size());
  parallel_for(order.size(), [&](std::size_t r) {
    const auto& seg = segments[order[r]];
    table.rows[r] = origin_of(seg);
    table.values[r] = for_file(inputs[order[r]], [&] { return extract_features(seg, stat, bands).values; });
  });
  for (std::size_t r = 1; r < table.rows.size(); ++r)
    if (table.rows[r] == table.rows[r - 1]) data_error("two segments for the same paragraph of " + table.rows[r].user);

  json descriptor{{"version", 1},
                  {"feature_count", table.columns.size()},
                  {"rows", table.rows.size()},
                  {"channel_labels", labels},
                  {"window_lengths_s", stat.window_lengths_s},
                  {"order_ranks", stat.order_ranks},
                  {"window_stride_s", stat.window_stride_s},
                  {"mode", to_string(stat.mode)},
                  {"artifact_threshold_v", stat.artifact_threshold_v ? json(*stat.artifact_threshold_v) : json(nullptr)},
                  {"columns", table.columns}};
  StagedDir staged(layout.features);
  write_file_atomic(staged.path() / "features.csv", to_csv(table));
  write_file_atomic(staged.path() / "features.json", descriptor.dump(1) + "\n");
  staged.commit();
  return {{(layout.features / "features.csv").string(), (layout.features / "features.json").string()}, {}};
}

namespace {

struct LoadedFeatures {
  FeatureTable table;
  std::vector<std::string> channel_labels;
};

LoadedFeatures load_features(const RunLayout& layout) {
  const auto csv = layout.features / "features.csv", desc = layout.features / "features.json";
  require_exists(csv, "feature table (run extract first)");
  require_exists(desc, "feature descriptor (run extract first)");
  LoadedFeatures out;
  out.table = for_file(csv, [&] { return feature_table_from_csv(read_text_file(csv)); });
  try {
    out.channel_labels = json::parse(read_text_file(desc)).at("channel_labels").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    data_error(desc.string() + ": " + e.what());
  }
  return out;
}

}  // namespace

CommandResult cmd_train(const RunConfig& cfg) {
  validate(cfg);
  const auto layout = RunLayout::of(cfg);
  const auto features = load_features(layout);
  require_exists(layout.logs, "session log");
  const auto logs = read_session_logs(layout.logs);
  const auto labels = annotation_labels(logs);

  CommandResult result;
  Dataset data;
  std::size_t unlabeled = 0;
  for (std::size_t r = 0; r < features.table.rows.size(); ++r) {
    const auto it = labels.find(features.table.rows[r]);
    if (it == labels.end()) {
      ++unlabeled;
      continue;
    }
    data.push_back({features.table.values[r], it->second, features.table.rows[r]});
  }
  if (unlabeled) result.warnings.push_back(std::to_string(unlabeled) + " feature rows without a usable annotation left out");

  auto split = split_by_task(data, task_order(logs));
  for (auto& w : split.warnings) result.warnings.push_back(w);
  if (split.train.empty()) training_error("no training examples after the task split");
  auto [train, scaler] = standardize(split.train);
  RfeConfig rfe_cfg = cfg.rfe;
  rfe_cfg.seed = cfg.seed;
  auto rfe_result = rfe(train, rfe_cfg);
  for (auto& w : rfe_result.warnings) result.warnings.push_back(w);

  ModelFile file{rfe_result.model, scaler, rfe_cfg, cfg.voting, extraction_config(cfg), features.channel_labels};
  const double train_acc = accuracy(file.model, train);
  const auto test = scaler.apply(split.test);
  json summary{{"train_examples", split.train.size()},
               {"test_examples", split.test.size()},
               {"unlabeled_rows", unlabeled},
               {"input_dims", file.model.input_dims},
               {"selected_dims", file.model.feature_mask.size()},
               {"rfe_round_sizes", rfe_result.round_sizes},
               {"train_accuracy", train_acc},
               {"test_accuracy", test.empty() ? json(nullptr) : json(accuracy(file.model, test))},
               {"warnings", result.warnings}};
  StagedDir staged(layout.model);
  write_file_atomic(staged.path() / "model.json", to_json(file));
  write_file_atomic(staged.path() / "train_summary.json", summary.dump(2) + "\n");
  staged.commit();
  result.outputs = {(layout.model / "model.json").string(), (layout.model / "train_summary.json").string()};
  return result;
}

CommandResult cmd_predict(const RunConfig& cfg) {
  validate(cfg);
  const auto layout = RunLayout::of(cfg);
  const auto model_path = layout.model / "model.json";
  require_exists(model_path, "model (run train first)");
  const auto model = for_file(model_path, [&] { return model_file_from_json(read_text_file(model_path)); });
  const auto features = load_features(layout);
  if (features.table.columns.size() != model.model.input_dims)
    data_error("model expects " + std::to_string(model.model.input_dims) + " features but " +
               (layout.features / "features.csv").string() + " has " + std::to_string(features.table.columns.size()));
  if (features.channel_labels != model.channel_labels) data_error("feature channels do not match the model's channels");

  std::vector<Prediction> predictions;
  for (std::size_t r = 0; r < features.table.rows.size(); ++r) {
    Prediction p{features.table.rows[r], 0.0, Label::Unsatisfied};
    p.label = predict_raw(model, features.table.values[r], &p.decision);
    predictions.push_back(std::move(p));
  }
  StagedDir staged(layout.predictions);
  write_file_atomic(staged.path() / "predictions.jsonl", to_jsonl(predictions));
  staged.commit();
  return {{(layout.predictions / "predictions.jsonl").string()}, {}};
}

CommandResult cmd_simulate(const RunConfig& cfg) {
  const auto report = run_comparison(cfg);
  const auto layout = RunLayout::of(cfg);
  std::string traces;
  for (const auto& t : report.traces) traces += to_json(t) + "\n";
  StagedDir staged(layout.simulate);
  write_file_atomic(staged.path() / "traces.jsonl", traces);
  staged.commit();
  return {{(layout.simulate / "traces.jsonl").string()}, report.warnings};
}

CommandResult cmd_report(const RunConfig& cfg) {
  const auto report = run_comparison(cfg);
  const auto layout = RunLayout::of(cfg);
  StagedDir staged(layout.report);
  write_file_atomic(staged.path() / "report.json", to_json(report));
  write_file_atomic(staged.path() / "report.txt", render_table(report));
  staged.commit();
  return {{(layout.report / "report.json").string(), (layout.report / "report.txt").string()}, report.warnings};
}

CommandResult cmd_rerank(const RunConfig& cfg, const fs::path& labels_file, const fs::path& feedback_file) {
  validate(cfg);
  require_exists(labels_file, "label file");
  require_exists(feedback_file, "feedback file");
  const auto labels = for_file(labels_file, [&] { return task_labels_from_json(read_text_file(labels_file)); });
  const auto pool = candidate_pool(labels, cfg.rerank.pool_size);

  std::map<JudgmentId, bool> feedback;
  for_file(feedback_file, [&] {
    std::istringstream in(read_text_file(feedback_file));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const json j = json::parse(line);
        const auto id = j.at("judgment").get<JudgmentId>();
        if (std::find(pool.begin(), pool.end(), id) == pool.end())
          data_error("line " + std::to_string(line_no) + ": judgment " + std::to_string(id) + " is not in the pool");
        if (!feedback.emplace(id, j.at("satisfied").get<bool>()).second)
          data_error("line " + std::to_string(line_no) + ": second feedback for judgment " + std::to_string(id));
      } catch (const json::exception& e) {
        data_error("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    return 0;
  });

  std::string out;
  auto state = RankingState::start(labels.profile, pool);
  for (std::size_t step = 1; !state.remaining.empty(); ++step) {
    state = show_next(state, labels.matrix);
    const JudgmentId j = state.shown.back();
    json line{{"step", step}, {"shown", j}};
    if (auto it = feedback.find(j); it != feedback.end()) {
      state = apply_feedback(state, labels.matrix, j, it->second, cfg.rerank.top_t, cfg.rerank.blame);
      line["feedback"] = it->second ? "satisfied" : "unsatisfied";
      line["halved"] = state.history.back().halved;
    } else {
      line["feedback"] = nullptr;
    }
    line["weights"] = state.profile.weights();
    line["ranking"] = rank_remaining(state, labels.matrix);
    out += line.dump() + "\n";
  }
  const auto layout = RunLayout::of(cfg);
  StagedDir staged(layout.rerank);
  write_file_atomic(staged.path() / "trace.jsonl", out);
  staged.commit();
  return {{(layout.rerank / "trace.jsonl").string()}, {}};
}

}  // namespace eegfb
