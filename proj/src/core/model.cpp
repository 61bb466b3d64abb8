#include "eegfb/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "eegfb/error.hpp"

namespace eegfb {

using nlohmann::json;

std::string to_string(Label label) { return label == Label::Satisfied ? "satisfied" : "unsatisfied"; }

std::optional<Label> label_from_annotation(const std::string& annotation) {
  if (annotation == "useful") return Label::Satisfied;
  if (annotation == "useless") return Label::Unsatisfied;
  if (annotation == "hard_to_say") return std::nullopt;
  data_error("unknown annotation '" + annotation + "'");
}

namespace {

std::size_t uniform_dims(const Dataset& data) {
  if (data.empty()) data_error("dataset is empty");
  const std::size_t d = data.front().features.size();
  for (const auto& ex : data)
    if (ex.features.size() != d) data_error("feature lengths differ within the dataset");
  return d;
}

// Fisher-Yates over mt19937_64 so the order does not depend on the standard library.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

}  // namespace

Scaler fit_scaler(const Dataset& data) {
  const std::size_t d = uniform_dims(data);
  Scaler s;
  s.means.assign(d, 0.0);
  s.stds.assign(d, 0.0);
  const double n = static_cast<double>(data.size());
  for (const auto& ex : data)
    for (std::size_t k = 0; k < d; ++k) s.means[k] += ex.features[k];
  for (double& m : s.means) m /= n;
  for (const auto& ex : data)
    for (std::size_t k = 0; k < d; ++k) {
      const double c = ex.features[k] - s.means[k];
      s.stds[k] += c * c;
    }
  for (std::size_t k = 0; k < d; ++k) {
    s.stds[k] = std::sqrt(s.stds[k] / n);
    // relative guard: energies at 1e-10 scale are legitimate, round-off of a constant is not
    if (!(s.stds[k] > 1e-12 * std::max(std::abs(s.means[k]), 1e-300))) s.stds[k] = 0.0;
  }
  return s;
}

std::vector<double> Scaler::apply(std::span<const double> x) const {
  if (x.size() != means.size())
    data_error("scaler expects " + std::to_string(means.size()) + " features, got " + std::to_string(x.size()));
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = stds[k] > 0.0 ? (x[k] - means[k]) / stds[k] : 0.0;
  return out;
}

Dataset Scaler::apply(const Dataset& data) const {
  Dataset out = data;
  for (auto& ex : out) ex.features = apply(ex.features);
  return out;
}

std::pair<Dataset, Scaler> standardize(const Dataset& data) {
  if (data.size() < 2) data_error("standardize needs at least two examples");
  Scaler s = fit_scaler(data);
  return {s.apply(data), std::move(s)};
}

double LinearModel::decision(std::span<const double> x) const {
  if (x.size() != input_dims)
    data_error("model expects " + std::to_string(input_dims) + " features, got " + std::to_string(x.size()));
  double sum = bias;
  for (std::size_t k = 0; k < feature_mask.size(); ++k) sum += weights[k] * x[feature_mask[k]];
  return sum;
}

LinearModel train_linear_svm(const Dataset& data, const SvmOptions& options) {
  const std::size_t d = uniform_dims(data);
  std::vector<std::size_t> all(d);
  std::iota(all.begin(), all.end(), 0);
  return train_linear_svm(data, all, options);
}

LinearModel train_linear_svm(const Dataset& data, std::span<const std::size_t> columns, const SvmOptions& options) {
  const std::size_t d_in = uniform_dims(data);
  if (!(options.C > 0.0)) config_error("SVM regularization C must be positive");
  const std::size_t n = data.size();
  std::size_t positives = 0;
  for (const auto& ex : data) positives += ex.label == Label::Satisfied;
  if (positives == 0 || positives == n) training_error("SVM training needs both classes; got only " +
                                                       to_string(positives ? Label::Satisfied : Label::Unsatisfied));
  for (std::size_t c : columns)
    if (c >= d_in) data_error("feature column " + std::to_string(c) + " out of range");

  // Packed design matrix with the bias column appended.
  const std::size_t d = columns.size() + 1;
  std::vector<double> x(n * d);
  std::vector<double> y(n), upper(n), qii(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = x.data() + i * d;
    for (std::size_t k = 0; k < columns.size(); ++k) row[k] = data[i].features[columns[k]];
    row[d - 1] = options.bias_feature;
    for (std::size_t k = 0; k < d; ++k) qii[i] += row[k] * row[k];
    y[i] = data[i].label == Label::Satisfied ? 1.0 : -1.0;
    const double class_n = static_cast<double>(y[i] > 0 ? positives : n - positives);
    upper[i] = options.balance_classes ? options.C * static_cast<double>(n) / (2.0 * class_n) : options.C;
  }

  std::vector<double> alpha(n, 0.0), w(d, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(options.seed);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    shuffle(order, rng);
    double pg_max = -INFINITY, pg_min = INFINITY;
    for (std::size_t i : order) {
      if (qii[i] <= 0.0) continue;
      const double* row = x.data() + i * d;
      double wx = 0.0;
      for (std::size_t k = 0; k < d; ++k) wx += w[k] * row[k];
      const double g = y[i] * wx - 1.0;
      double pg = g;
      if (alpha[i] == 0.0)
        pg = std::min(g, 0.0);
      else if (alpha[i] == upper[i])
        pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::abs(pg) > 1e-14) {
        const double old = alpha[i];
        alpha[i] = std::clamp(old - g / qii[i], 0.0, upper[i]);
        const double step = (alpha[i] - old) * y[i];
        for (std::size_t k = 0; k < d; ++k) w[k] += step * row[k];
      }
    }
    if (pg_max - pg_min < options.tolerance) break;
  }

  LinearModel model;
  model.input_dims = d_in;
  model.feature_mask.assign(columns.begin(), columns.end());
  model.weights.assign(w.begin(), w.end() - 1);
  model.bias = w.back() * options.bias_feature;
  return model;
}

void validate(const RfeConfig& cfg) {
  if (!(cfg.elimination_fraction > 0.0 && cfg.elimination_fraction < 1.0))
    config_error("elimination_fraction must lie in (0, 1)");
  if (cfg.target_dims < 1) config_error("target_dims must be at least 1");
  if (!(cfg.C > 0.0)) config_error("C must be positive");
  if (cfg.max_rounds < 1) config_error("max_rounds must be at least 1");
}

RfeResult rfe(const Dataset& data, const RfeConfig& cfg) {
  validate(cfg);
  const std::size_t d = uniform_dims(data);
  SvmOptions svm;
  svm.C = cfg.C;
  svm.seed = cfg.seed;

  std::vector<std::size_t> current(d);
  std::iota(current.begin(), current.end(), 0);
  RfeResult result;
  if (cfg.target_dims >= d)
    result.warnings.push_back("target_dims " + std::to_string(cfg.target_dims) + " >= " + std::to_string(d) +
                              " input features; no elimination performed");

  std::size_t rounds = 0;
  while (current.size() > cfg.target_dims && rounds < cfg.max_rounds) {
    result.round_sizes.push_back(current.size());
    const LinearModel m = train_linear_svm(data, current, svm);
    const auto drop = std::min(
        static_cast<std::size_t>(std::ceil(cfg.elimination_fraction * static_cast<double>(current.size()))),
        current.size() - cfg.target_dims);
    std::vector<std::size_t> pos(current.size());
    std::iota(pos.begin(), pos.end(), 0);
    // current is ascending, so ordering by position breaks |w| ties toward the lower feature index
    std::stable_sort(pos.begin(), pos.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(m.weights[a]) < std::abs(m.weights[b]); });
    std::vector<bool> removed(current.size(), false);
    for (std::size_t k = 0; k < drop; ++k) {
      removed[pos[k]] = true;
      result.elimination_order.push_back(current[pos[k]]);
    }
    std::vector<std::size_t> next;
    next.reserve(current.size() - drop);
    for (std::size_t k = 0; k < current.size(); ++k)
      if (!removed[k]) next.push_back(current[k]);
    current = std::move(next);
    ++rounds;
  }
  if (current.size() > cfg.target_dims)
    result.warnings.push_back("stopped after max_rounds with " + std::to_string(current.size()) + " features");
  result.round_sizes.push_back(current.size());
  result.model = train_linear_svm(data, current, svm);
  return result;
}

Label predict_paragraph(const LinearModel& model, std::span<const double> features) {
  return model.decision(features) > 0.0 ? Label::Satisfied : Label::Unsatisfied;
}

void validate(const VotingConfig& cfg) {
  if (cfg.threshold < 1) config_error("voting threshold must be at least 1");
}

Label judge_satisfaction(std::span<const Label> paragraph_labels, const VotingConfig& cfg) {
  validate(cfg);
  const auto satisfied = std::count(paragraph_labels.begin(), paragraph_labels.end(), Label::Satisfied);
  return satisfied >= cfg.threshold ? Label::Satisfied : Label::Unsatisfied;
}

TaskSplit split_by_task(const Dataset& data, const std::vector<std::pair<std::string, std::string>>& task_order) {
  std::map<std::string, std::vector<std::string>> tasks;  // user -> tasks in order
  auto note = [&](const std::string& user, const std::string& task) {
    auto& v = tasks[user];
    if (std::find(v.begin(), v.end(), task) == v.end()) v.push_back(task);
  };
  for (const auto& [user, task] : task_order) note(user, task);
  for (const auto& ex : data) note(ex.origin.user, ex.origin.task);

  TaskSplit out;
  std::set<std::string> excluded;
  for (const auto& [user, list] : tasks)
    if (list.size() < 2) {
      excluded.insert(user);
      out.warnings.push_back("user " + user + " has fewer than two tasks; excluded from the split");
    }
  for (const auto& ex : data) {
    if (excluded.count(ex.origin.user)) continue;
    const auto& list = tasks[ex.origin.user];
    const auto rank = std::find(list.begin(), list.end(), ex.origin.task) - list.begin();
    (rank < 2 ? out.train : out.test).push_back(ex);
  }
  return out;
}

double accuracy(const LinearModel& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) correct += predict_paragraph(model, ex.features) == ex.label;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::string to_json(const ModelFile& file) {
  json j;
  j["format_version"] = ModelFile::kFormatVersion;
  j["weights"] = file.model.weights;
  j["bias"] = file.model.bias;
  j["feature_mask"] = file.model.feature_mask;
  j["input_dims"] = file.model.input_dims;
  j["scaler"] = {{"means", file.scaler.means}, {"stds", file.scaler.stds}};
  j["config"] = {
      {"rfe",
       {{"C", file.rfe.C},
        {"elimination_fraction", file.rfe.elimination_fraction},
        {"target_dims", file.rfe.target_dims},
        {"max_rounds", file.rfe.max_rounds},
        {"seed", file.rfe.seed}}},
      {"voting", {{"threshold", file.voting.threshold}}},
      {"features",
       {{"window_lengths_s", file.features.window_lengths_s},
        {"order_ranks", file.features.order_ranks},
        {"window_stride_s", file.features.window_stride_s},
        {"mode", to_string(file.features.mode)}}},
  };
  if (file.features.artifact_threshold_v) j["config"]["features"]["artifact_threshold_v"] = *file.features.artifact_threshold_v;
  j["channel_labels"] = file.channel_labels;
  return j.dump(1) + "\n";
}

ModelFile model_file_from_json(const std::string& text) {
  ModelFile f;
  try {
    const json j = json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != ModelFile::kFormatVersion) data_error("unsupported model format version " + std::to_string(version));
    f.model.weights = j.at("weights").get<std::vector<double>>();
    f.model.bias = j.at("bias").get<double>();
    f.model.feature_mask = j.at("feature_mask").get<std::vector<std::size_t>>();
    f.model.input_dims = j.at("input_dims").get<std::size_t>();
    f.scaler.means = j.at("scaler").at("means").get<std::vector<double>>();
    f.scaler.stds = j.at("scaler").at("stds").get<std::vector<double>>();
    const auto& c = j.at("config");
    f.rfe.C = c.at("rfe").at("C").get<double>();
    f.rfe.elimination_fraction = c.at("rfe").at("elimination_fraction").get<double>();
    f.rfe.target_dims = c.at("rfe").at("target_dims").get<std::size_t>();
    f.rfe.max_rounds = c.at("rfe").at("max_rounds").get<std::size_t>();
    f.rfe.seed = c.at("rfe").at("seed").get<std::uint64_t>();
    f.voting.threshold = c.at("voting").at("threshold").get<int>();
    const auto& fe = c.at("features");
    f.features.window_lengths_s = fe.at("window_lengths_s").get<std::vector<double>>();
    f.features.order_ranks = fe.at("order_ranks").get<std::vector<std::size_t>>();
    f.features.window_stride_s = fe.at("window_stride_s").get<double>();
    f.features.mode = band_mode_from_string(fe.at("mode").get<std::string>());
    if (fe.contains("artifact_threshold_v")) f.features.artifact_threshold_v = fe["artifact_threshold_v"].get<double>();
    f.channel_labels = j.at("channel_labels").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    data_error(std::string("malformed model file: ") + e.what());
  }
  if (f.model.weights.size() != f.model.feature_mask.size())
    data_error("model file: weights and feature_mask lengths differ");
  if (f.scaler.means.size() != f.model.input_dims || f.scaler.stds.size() != f.model.input_dims)
    data_error("model file: scaler length does not match input_dims");
  for (std::size_t k : f.model.feature_mask)
    if (k >= f.model.input_dims) data_error("model file: feature_mask index out of range");
  return f;
}

Label predict_raw(const ModelFile& file, std::span<const double> raw_features, double* decision) {
  const auto x = file.scaler.apply(raw_features);
  const double v = file.model.decision(x);
  if (decision) *decision = v;
  return v > 0.0 ? Label::Satisfied : Label::Unsatisfied;
}

}  // namespace eegfb
