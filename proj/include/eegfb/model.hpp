#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eegfb/spectral.hpp"

namespace eegfb {

enum class Label { Unsatisfied = 0, Satisfied = 1 };

std::string to_string(Label label);

/// useful -> Satisfied, useless -> Unsatisfied, hard_to_say -> nullopt (excluded).
/// Throws a data error for anything else.
std::optional<Label> label_from_annotation(const std::string& annotation);

struct ParagraphOrigin {
  std::string user;
  std::string task;
  std::int64_t judgment = 0;
  std::int64_t paragraph = 0;

  auto operator<=>(const ParagraphOrigin&) const = default;
};

struct LabeledExample {
  std::vector<double> features;
  Label label = Label::Unsatisfied;
  ParagraphOrigin origin;
};

using Dataset = std::vector<LabeledExample>;

/// Per-feature affine map to zero mean, unit variance. Zero-variance features map to 0.
struct Scaler {
  std::vector<double> means;
  std::vector<double> stds;

  std::vector<double> apply(std::span<const double> x) const;
  Dataset apply(const Dataset& data) const;
};

Scaler fit_scaler(const Dataset& data);
std::pair<Dataset, Scaler> standardize(const Dataset& data);

/// w . x[mask] + b over the surviving features of the original input.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<std::size_t> feature_mask;
  std::size_t input_dims = 0;

  double decision(std::span<const double> x) const;
};

struct SvmOptions {
  double C = 1.0;
  /// Constant appended to each example so the bias is learned as a weight.
  double bias_feature = 1.0;
  /// Scale each example's box bound by n / (2 * n_class).
  bool balance_classes = true;
  double tolerance = 1e-3;
  int max_iterations = 2000;
  std::uint64_t seed = 0;
};

/// Soft-margin linear SVM, hinge loss + L2, solved by dual coordinate descent.
/// Needs both classes present.
LinearModel train_linear_svm(const Dataset& data, const SvmOptions& options = {});

/// Same, restricted to the given feature columns.
LinearModel train_linear_svm(const Dataset& data, std::span<const std::size_t> columns, const SvmOptions& options);

struct RfeConfig {
  double C = 1.0;
  double elimination_fraction = 0.10;
  std::size_t target_dims = 512;
  std::size_t max_rounds = 10000;
  std::uint64_t seed = 0;
};

void validate(const RfeConfig& cfg);

struct RfeResult {
  LinearModel model;
  /// Feature indices in the order they were dropped.
  std::vector<std::size_t> elimination_order;
  /// Number of features entering each training round, then the final count.
  std::vector<std::size_t> round_sizes;
  std::vector<std::string> warnings;
};

/// Recursive feature elimination: train, drop the ceil(fraction * current)
/// smallest |w| (lower index first on ties), repeat until target_dims remain.
RfeResult rfe(const Dataset& data, const RfeConfig& cfg);

/// Satisfied iff the decision value is strictly positive.
Label predict_paragraph(const LinearModel& model, std::span<const double> features);

struct VotingConfig {
  int threshold = 3;
};

void validate(const VotingConfig& cfg);

/// Satisfied iff at least `threshold` paragraphs are satisfied.
Label judge_satisfaction(std::span<const Label> paragraph_labels, const VotingConfig& cfg);

struct TaskSplit {
  Dataset train;
  Dataset test;
  std::vector<std::string> warnings;
};

/// Per user, paragraphs of the first two tasks train and the rest test. Task
/// order is the order of first appearance in `data` unless `task_order` lists
/// (user, task) pairs explicitly. Users with fewer than two tasks are dropped.
TaskSplit split_by_task(const Dataset& data,
                        const std::vector<std::pair<std::string, std::string>>& task_order = {});

double accuracy(const LinearModel& model, const Dataset& data);

/// Everything needed to score new feature vectors.
struct ModelFile {
  static constexpr int kFormatVersion = 1;
  LinearModel model;
  Scaler scaler;
  RfeConfig rfe;
  VotingConfig voting;
  StatConfig features;
  std::vector<std::string> channel_labels;
};

std::string to_json(const ModelFile& file);
ModelFile model_file_from_json(const std::string& text);

/// Standardizes with the stored scaler and applies the model.
Label predict_raw(const ModelFile& file, std::span<const double> raw_features, double* decision = nullptr);

}  // namespace eegfb
