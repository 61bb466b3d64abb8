#include "eegfb/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "eegfb/error.hpp"

namespace eegfb {

namespace {

Eigen::MatrixXd design_matrix(const Dataset& data) {
  if (data.empty()) data_error("dataset is empty");
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto d = static_cast<Eigen::Index>(data.front().features.size());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& f = data[static_cast<std::size_t>(i)].features;
    if (static_cast<Eigen::Index>(f.size()) != d) data_error("feature lengths differ within the dataset");
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(f.data(), d);
  }
  return x;
}

void require_both_classes(const Dataset& data) {
  std::size_t pos = 0;
  for (const auto& ex : data) pos += ex.label == Label::Satisfied;
  if (pos == 0 || pos == data.size()) training_error("training needs both classes present");
}

double gini(double pos, double total) {
  if (total <= 0.0) return 0.0;
  const double p = pos / total;
  return 2.0 * p * (1.0 - p);
}

}  // namespace

Label LinearRegressionModel::predict(std::span<const double> x) const {
  if (x.size() != weights.size()) data_error("linear model expects " + std::to_string(weights.size()) + " features");
  double v = intercept;
  for (std::size_t k = 0; k < x.size(); ++k) v += weights[k] * x[k];
  return v > 0.0 ? Label::Satisfied : Label::Unsatisfied;
}

LinearRegressionModel train_linear_regression(const Dataset& data, double ridge) {
  require_both_classes(data);
  Eigen::MatrixXd x = design_matrix(data);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = data[static_cast<std::size_t>(i)].label == Label::Satisfied ? 1.0 : -1.0;
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const double y_mean = y.mean();
  y.array() -= y_mean;

  // Kernel form: w = X^T (X X^T + lambda I)^-1 y, cheap when examples << features.
  Eigen::MatrixXd gram = x * x.transpose();
  const double lambda = ridge * std::max(gram.trace() / static_cast<double>(gram.rows()), 1e-300);
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd alpha = gram.ldlt().solve(y);
  const Eigen::VectorXd w = x.transpose() * alpha;

  LinearRegressionModel m;
  m.weights.assign(w.data(), w.data() + w.size());
  m.intercept = y_mean - mean.dot(w);
  return m;
}

DecisionTree::DecisionTree(const Dataset& data, int max_depth) : max_depth_(max_depth) {
  if (max_depth < 1) config_error("tree depth must be at least 1");
  require_both_classes(data);
  const std::size_t d = data.front().features.size();
  for (const auto& ex : data)
    if (ex.features.size() != d) data_error("feature lengths differ within the dataset");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  grow(data, idx, 0, idx.size(), 0);
}

int DecisionTree::grow(const Dataset& data, std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                       int depth) {
  depth_ = std::max(depth_, depth);
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  std::size_t pos = 0;
  for (std::size_t i = begin; i < end; ++i) pos += data[idx[i]].label == Label::Satisfied;
  const std::size_t total = end - begin;
  nodes_[id].label = 2 * pos > total ? Label::Satisfied : Label::Unsatisfied;
  if (depth >= max_depth_ || pos == 0 || pos == total || total < 2) return id;

  const double parent = gini(double(pos), double(total));
  const std::size_t d = data.front().features.size();
  double best = parent;
  int best_feature = -1;
  double best_threshold = 0.0;
  std::vector<std::pair<double, bool>> column(total);
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t i = 0; i < total; ++i) {
      const auto& ex = data[idx[begin + i]];
      column[i] = {ex.features[f], ex.label == Label::Satisfied};
    }
    std::sort(column.begin(), column.end());
    std::size_t left_pos = 0;
    for (std::size_t i = 0; i + 1 < total; ++i) {
      left_pos += column[i].second;
      if (column[i].first == column[i + 1].first) continue;
      const double nl = double(i + 1), nr = double(total - i - 1);
      const double score = (nl * gini(double(left_pos), nl) + nr * gini(double(pos - left_pos), nr)) / double(total);
      if (score < best - 1e-12) {
        best = score;
        best_feature = static_cast<int>(f);
        best_threshold = 0.5 * (column[i].first + column[i + 1].first);
      }
    }
  }
  if (best_feature < 0) return id;

  auto mid = std::stable_partition(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                   idx.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t i) {
                                     return data[i].features[static_cast<std::size_t>(best_feature)] <= best_threshold;
                                   });
  const auto split = static_cast<std::size_t>(mid - idx.begin());
  const int left = grow(data, idx, begin, split, depth + 1);
  const int right = grow(data, idx, split, end, depth + 1);
  nodes_[id].feature = best_feature;
  nodes_[id].threshold = best_threshold;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

Label DecisionTree::predict(std::span<const double> x) const {
  if (nodes_.empty()) throw Error(ErrorKind::Internal, "decision tree is untrained");
  int n = 0;
  while (nodes_[n].feature >= 0) {
    const auto f = static_cast<std::size_t>(nodes_[n].feature);
    if (f >= x.size()) data_error("decision tree input too short");
    n = x[f] <= nodes_[n].threshold ? nodes_[n].left : nodes_[n].right;
  }
  return nodes_[n].label;
}

Mlp::Mlp(const Dataset& data, const MlpOptions& options) {
  require_both_classes(data);
  const Eigen::MatrixXd x = design_matrix(data);
  const Eigen::Index n = x.rows(), d = x.cols(), h = static_cast<Eigen::Index>(options.hidden_units);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = data[static_cast<std::size_t>(i)].label == Label::Satisfied ? 1.0 : 0.0;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd w1(h, d);
  for (Eigen::Index i = 0; i < w1.size(); ++i) w1.data()[i] = normal(rng) / std::sqrt(static_cast<double>(d));
  Eigen::VectorXd b1 = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd w2(h);
  for (Eigen::Index i = 0; i < h; ++i) w2(i) = normal(rng) / std::sqrt(static_cast<double>(h));
  double b2 = 0.0;

  // Adam moments
  Eigen::MatrixXd m_w1 = Eigen::MatrixXd::Zero(h, d), v_w1 = m_w1;
  Eigen::VectorXd m_b1 = Eigen::VectorXd::Zero(h), v_b1 = m_b1, m_w2 = m_b1, v_w2 = m_b1;
  double m_b2 = 0.0, v_b2 = 0.0;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, lr = options.learning_rate;

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    const Eigen::MatrixXd hidden = ((x * w1.transpose()).rowwise() + b1.transpose()).array().tanh();
    const Eigen::VectorXd logits = (hidden * w2).array() + b2;
    const Eigen::VectorXd prob = (1.0 / (1.0 + (-logits.array()).exp())).matrix();
    const Eigen::VectorXd delta = (prob - y) / static_cast<double>(n);

    const Eigen::VectorXd g_w2 = hidden.transpose() * delta + options.l2 * w2;
    const double g_b2 = delta.sum();
    const Eigen::MatrixXd d_hidden = ((delta * w2.transpose()).array() * (1.0 - hidden.array().square())).matrix();
    const Eigen::MatrixXd g_w1 = d_hidden.transpose() * x + options.l2 * w1;
    const Eigen::VectorXd g_b1 = d_hidden.colwise().sum().transpose();

    const double c1 = 1.0 - std::pow(beta1, double(epoch)), c2 = 1.0 - std::pow(beta2, double(epoch));
    auto adam = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = beta1 * m + (1.0 - beta1) * g;
      v = beta2 * v + (1.0 - beta2) * g.array().square().matrix();
      param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    adam(w1, m_w1, v_w1, g_w1);
    adam(b1, m_b1, v_b1, g_b1);
    adam(w2, m_w2, v_w2, g_w2);
    m_b2 = beta1 * m_b2 + (1.0 - beta1) * g_b2;
    v_b2 = beta2 * v_b2 + (1.0 - beta2) * g_b2 * g_b2;
    b2 -= lr * (m_b2 / c1) / (std::sqrt(v_b2 / c2) + eps);
  }

  inputs_ = static_cast<std::size_t>(d);
  hidden_ = static_cast<std::size_t>(h);
  w1_.assign(w1.size(), 0.0);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(w1_.data(), h, d) = w1;
  b1_.assign(b1.data(), b1.data() + h);
  w2_.assign(w2.data(), w2.data() + h);
  b2_ = b2;
}

double Mlp::probability(std::span<const double> x) const {
  if (x.size() != inputs_) data_error("MLP expects " + std::to_string(inputs_) + " features");
  double logit = b2_;
  for (std::size_t j = 0; j < hidden_; ++j) {
    double a = b1_[j];
    const double* row = w1_.data() + j * inputs_;
    for (std::size_t k = 0; k < inputs_; ++k) a += row[k] * x[k];
    logit += w2_[j] * std::tanh(a);
  }
  return 1.0 / (1.0 + std::exp(-logit));
}

Label Mlp::predict(std::span<const double> x) const {
  return probability(x) > 0.5 ? Label::Satisfied : Label::Unsatisfied;
}

std::size_t argmax_first(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

Baselines train_baselines(const Dataset& data, const BaselineOptions& options) {
  if (options.tree_depths.empty()) config_error("need at least one tree depth");
  if (!(options.validation_fraction > 0.0 && options.validation_fraction < 1.0))
    config_error("validation_fraction must lie in (0, 1)");
  require_both_classes(data);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(options.seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(options.validation_fraction * static_cast<double>(data.size())));
  Dataset validation, train;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_val ? validation : train).push_back(data[order[i]]);

  Baselines out;
  out.linear = train_linear_regression(data);
  out.mlp = Mlp(data, options.mlp);

  std::vector<DecisionTree> trees;
  for (int depth : options.tree_depths) {
    trees.emplace_back(train, depth);
    out.depth_validation_accuracy.push_back(accuracy_of(trees.back(), validation));
  }
  const std::size_t best = argmax_first(out.depth_validation_accuracy);
  out.tree = trees[best];
  out.tree_depth = options.tree_depths[best];
  return out;
}

}  // namespace eegfb
