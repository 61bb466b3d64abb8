#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eegfb/model.hpp"

namespace eegfb {

/// Ridge least-squares fit to +/-1 targets; satisfied when the fit is positive.
struct LinearRegressionModel {
  std::vector<double> weights;
  double intercept = 0.0;

  Label predict(std::span<const double> x) const;
};

LinearRegressionModel train_linear_regression(const Dataset& data, double ridge = 1e-3);

/// CART classification tree with Gini impurity.
class DecisionTree {
 public:
  struct Node {
    // leaf when feature < 0
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    Label label = Label::Unsatisfied;
  };

  DecisionTree() = default;
  DecisionTree(const Dataset& data, int max_depth);

  Label predict(std::span<const double> x) const;
  int depth() const { return depth_; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  int grow(const Dataset& data, std::vector<std::size_t>& idx, std::size_t begin, std::size_t end, int depth);

  std::vector<Node> nodes_;
  int max_depth_ = 0;
  int depth_ = 0;
};

struct MlpOptions {
  std::size_t hidden_units = 32;
  std::size_t epochs = 300;
  double learning_rate = 0.01;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

/// One hidden tanh layer, sigmoid output, full-batch Adam on log loss.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const Dataset& data, const MlpOptions& options);

  double probability(std::span<const double> x) const;
  Label predict(std::span<const double> x) const;

 private:
  std::size_t inputs_ = 0, hidden_ = 0;
  std::vector<double> w1_, b1_, w2_;
  double b2_ = 0.0;
};

struct BaselineOptions {
  std::vector<int> tree_depths{4, 8, 16, 32};
  double validation_fraction = 0.25;
  MlpOptions mlp;
  std::uint64_t seed = 0;
};

struct Baselines {
  LinearRegressionModel linear;
  DecisionTree tree;
  int tree_depth = 0;
  std::vector<double> depth_validation_accuracy;  // aligned with BaselineOptions::tree_depths
  Mlp mlp;
};

/// Fits the three comparison models. Tree depth is picked by accuracy on a
/// seeded validation split (ties go to the smaller depth); the returned tree
/// is the one trained on the remaining examples.
Baselines train_baselines(const Dataset& data, const BaselineOptions& options = {});

/// Index of the best score, first one on ties.
std::size_t argmax_first(std::span<const double> scores);

template <typename Model>
double accuracy_of(const Model& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) correct += model.predict(ex.features) == ex.label;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace eegfb
