#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <variant>
#include <vector>

#include "fefi/core.hpp"
#include "fefi/kinds.hpp"
#include "fefi/predictor.hpp"

namespace fefi {

// ---------------------------------------------------------------------------
// Hyperparameters (benchmark defaults).
// ---------------------------------------------------------------------------

struct GbParams {
  double learning_rate = 0.1;
  std::size_t n_stages = 50;
  std::size_t min_samples_split = 2;
  std::size_t max_depth = 3;
};

struct ForestParams {
  std::size_t n_trees = 50;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_split = 2;
  bool bootstrap = true;
};

struct SvrParams {
  double tolerance = 1e-3;
  double c = 1.0;
  double epsilon = 0.1;
  std::size_t max_iterations = 8000;
};

struct MlpParams {
  std::size_t hidden_size = 50;
  double l2 = 1e-4;
  double learning_rate = 1e-3;
  std::size_t epochs = 200;  // full-batch Adam, fixed budget
};

struct Hyperparams {
  GbParams gb;
  ForestParams rf;           // bootstrap = true
  ForestParams et;           // bootstrap = false, random split thresholds
  SvrParams svr;
  MlpParams mlp;

  static Hyperparams defaults() {
    Hyperparams hp;
    hp.et.bootstrap = false;
    return hp;
  }

  void validate(LearnerKind kind) const {
    switch (kind) {
      case LearnerKind::GradientBoosting:
        if (gb.n_stages < 1) throw ParameterError("gb.n_stages must be >= 1");
        if (gb.max_depth < 1) throw ParameterError("gb.max_depth must be >= 1");
        if (gb.min_samples_split < 2)
          throw ParameterError("gb.min_samples_split must be >= 2");
        if (!(gb.learning_rate > 0)) throw ParameterError("gb.learning_rate must be > 0");
        break;
      case LearnerKind::RandomForest:
      case LearnerKind::ExtraTrees: {
        const ForestParams& p = kind == LearnerKind::RandomForest ? rf : et;
        if (p.n_trees < 1) throw ParameterError("forest n_trees must be >= 1");
        if (p.min_samples_split < 2)
          throw ParameterError("forest min_samples_split must be >= 2");
        break;
      }
      case LearnerKind::LinearSVR:
        if (!(svr.tolerance > 0)) throw ParameterError("svr.tolerance must be > 0");
        if (!(svr.c > 0)) throw ParameterError("svr.c must be > 0");
        if (svr.epsilon < 0) throw ParameterError("svr.epsilon must be >= 0");
        if (svr.max_iterations < 1) throw ParameterError("svr.max_iterations must be >= 1");
        break;
      case LearnerKind::MLP:
        if (mlp.hidden_size < 1) throw ParameterError("mlp.hidden_size must be >= 1");
        if (!(mlp.learning_rate > 0)) throw ParameterError("mlp.learning_rate must be > 0");
        if (mlp.epochs < 1) throw ParameterError("mlp.epochs must be >= 1");
        if (mlp.l2 < 0) throw ParameterError("mlp.l2 must be >= 0");
        break;
    }
  }
};

// ---------------------------------------------------------------------------
// Regression tree shared by GB / RF / ET. Exhaustive split search over all
// features with midpoint thresholds; ExtraTrees instead draws one uniform
// threshold per feature. A node becomes a leaf when it is too small, too
// deep, has (numerically) zero target variance, or no split improves.
// ---------------------------------------------------------------------------

struct TreeConfig {
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_split = 2;
  bool friedman_mse = false;      // split score for gradient boosting
  bool random_thresholds = false;  // ExtraTrees
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  double value = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
};

class RegressionTree {
 public:
  void fit(const Matrix& X, const Vec& y, std::vector<std::size_t> rows,
           const TreeConfig& cfg, Rng* rng) {
    nodes_.clear();
    decreases_.assign(X.cols, 0.0);
    root_size_ = rows.size();
    Builder builder{X, y, cfg, rng, *this};
    builder.scratch.reserve(rows.size());
    builder.build(rows, 0);
  }

  double predict_row(std::span<const double> row) const {
    std::uint32_t i = 0;
    while (nodes_[i].feature >= 0)
      i = row[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold
              ? nodes_[i].left
              : nodes_[i].right;
    return nodes_[i].value;
  }

  void predict_accumulate(const Matrix& X, Vec& acc) const {
    for (std::size_t i = 0; i < X.rows; ++i) acc[i] += predict_row(X.row(i));
  }

  // Weighted variance reduction per feature, node weight = node fraction of
  // this tree's sample.
  const Vec& impurity_decreases() const { return decreases_; }

  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = 0.0;       // selection score (variance gain or Friedman)
    double variance_gain = 0.0;  // sse_node - sse_left - sse_right
  };

  struct Builder {
    const Matrix& X;
    const Vec& y;
    const TreeConfig& cfg;
    Rng* rng;
    RegressionTree& tree;
    std::vector<std::pair<double, double>> scratch;  // (x, y) per node/feature

    std::uint32_t build(std::span<std::size_t> rows, std::size_t depth) {
      const auto id = static_cast<std::uint32_t>(tree.nodes_.size());
      tree.nodes_.emplace_back();

      double sum = 0.0;
      double sumsq = 0.0;
      for (std::size_t r : rows) {
        sum += y[r];
        sumsq += y[r] * y[r];
      }
      const double mean = sum / static_cast<double>(rows.size());
      double sse = 0.0;
      for (std::size_t r : rows) {
        const double d = y[r] - mean;
        sse += d * d;
      }
      tree.nodes_[id].value = mean;

      const bool depth_ok = cfg.max_depth == 0 || depth < cfg.max_depth;
      if (!depth_ok || rows.size() < cfg.min_samples_split ||
          sse <= 1e-12 * std::max(1.0, mean * mean * static_cast<double>(rows.size())))
        return id;

      const SplitChoice split = cfg.random_thresholds
                                    ? find_random_split(rows, sum, sumsq, sse)
                                    : find_exhaustive_split(rows, sum, sumsq, sse);
      if (!split.found) return id;

      tree.decreases_[split.feature] +=
          split.variance_gain / static_cast<double>(tree.root_size_);

      auto mid = std::stable_partition(rows.begin(), rows.end(), [&](std::size_t r) {
        return X(r, split.feature) <= split.threshold;
      });
      const auto n_left = static_cast<std::size_t>(mid - rows.begin());
      if (n_left == 0 || n_left == rows.size()) return id;  // numeric safety

      tree.nodes_[id].feature = static_cast<std::int32_t>(split.feature);
      tree.nodes_[id].threshold = split.threshold;
      const std::uint32_t left = build(rows.subspan(0, n_left), depth + 1);
      const std::uint32_t right = build(rows.subspan(n_left), depth + 1);
      tree.nodes_[id].left = left;
      tree.nodes_[id].right = right;
      return id;
    }

    SplitChoice find_exhaustive_split(std::span<const std::size_t> rows, double sum,
                                      double sumsq, double sse) {
      SplitChoice best;
      const auto n = static_cast<double>(rows.size());
      for (std::size_t j = 0; j < X.cols; ++j) {
        scratch.clear();
        for (std::size_t r : rows) scratch.emplace_back(X(r, j), y[r]);
        std::sort(scratch.begin(), scratch.end());
        double sum_left = 0.0, sumsq_left = 0.0;
        for (std::size_t i = 1; i < scratch.size(); ++i) {
          sum_left += scratch[i - 1].second;
          sumsq_left += scratch[i - 1].second * scratch[i - 1].second;
          if (scratch[i - 1].first >= scratch[i].first) continue;
          const auto nl = static_cast<double>(i);
          const double nr = n - nl;
          const double sum_right = sum - sum_left;
          const double sse_left = std::max(0.0, sumsq_left - sum_left * sum_left / nl);
          const double sse_right =
              std::max(0.0, sumsq - sumsq_left - sum_right * sum_right / nr);
          const double variance_gain = sse - sse_left - sse_right;
          const double mean_left = sum_left / nl;
          const double mean_right = sum_right / nr;
          const double score =
              cfg.friedman_mse
                  ? nl * nr / n * (mean_left - mean_right) * (mean_left - mean_right)
                  : variance_gain;
          if (score > best.score && variance_gain > 0.0) {
            best.found = true;
            best.feature = j;
            best.threshold = 0.5 * (scratch[i - 1].first + scratch[i].first);
            best.score = score;
            best.variance_gain = variance_gain;
          }
        }
      }
      return best;
    }

    SplitChoice find_random_split(std::span<const std::size_t> rows, double sum,
                                  double sumsq, double sse) {
      SplitChoice best;
      const auto n = static_cast<double>(rows.size());
      for (std::size_t j = 0; j < X.cols; ++j) {
        double lo = X(rows.front(), j), hi = lo;
        for (std::size_t r : rows) {
          lo = std::min(lo, X(r, j));
          hi = std::max(hi, X(r, j));
        }
        if (!(hi > lo)) continue;
        const double threshold = rng->uniform(lo, hi);
        double nl = 0.0, sum_left = 0.0, sumsq_left = 0.0;
        for (std::size_t r : rows) {
          if (X(r, j) <= threshold) {
            nl += 1.0;
            sum_left += y[r];
            sumsq_left += y[r] * y[r];
          }
        }
        if (nl == 0.0 || nl == n) continue;
        const double nr = n - nl;
        const double sum_right = sum - sum_left;
        const double sse_left = std::max(0.0, sumsq_left - sum_left * sum_left / nl);
        const double sse_right =
            std::max(0.0, sumsq - sumsq_left - sum_right * sum_right / nr);
        const double variance_gain = sse - sse_left - sse_right;
        if (variance_gain > best.score) {
          best.found = true;
          best.feature = j;
          best.threshold = threshold;
          best.score = variance_gain;
          best.variance_gain = variance_gain;
        }
      }
      return best;
    }
  };

  friend struct Builder;

  std::vector<TreeNode> nodes_;
  Vec decreases_;
  std::size_t root_size_ = 0;
};

// ---------------------------------------------------------------------------
// Ensembles.
// ---------------------------------------------------------------------------

class ForestModel {
 public:
  void fit(const Matrix& X, const Vec& y, const ForestParams& params,
           bool random_thresholds, std::uint64_t seed) {
    d_ = X.cols;
    trees_.assign(params.n_trees, {});
    TreeConfig cfg;
    cfg.max_depth = params.max_depth;
    cfg.min_samples_split = params.min_samples_split;
    cfg.random_thresholds = random_thresholds;
    std::vector<std::size_t> all_rows(X.rows);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
      Rng tree_rng(Rng::mix(seed, t));
      std::vector<std::size_t> rows;
      if (params.bootstrap) {
        rows.resize(X.rows);
        for (auto& r : rows) r = tree_rng.uniform_index(X.rows);
      } else {
        rows = all_rows;
      }
      trees_[t].fit(X, y, std::move(rows), cfg, &tree_rng);
    }
  }

  std::size_t n_features() const { return d_; }

  void predict_into(const Matrix& X, Vec& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& tree : trees_) tree.predict_accumulate(X, out);
    const double inv = 1.0 / static_cast<double>(trees_.size());
    for (auto& v : out) v *= inv;
  }

  Vec impurity_importance() const {
    Vec acc(d_, 0.0);
    for (const auto& tree : trees_) {
      const Vec& dec = tree.impurity_decreases();
      for (std::size_t j = 0; j < d_; ++j) acc[j] += dec[j];
    }
    for (auto& v : acc) v /= static_cast<double>(trees_.size());
    const double total = std::accumulate(acc.begin(), acc.end(), 0.0);
    if (total > 0.0)
      for (auto& v : acc) v /= total;
    return acc;
  }

  const std::vector<RegressionTree>& trees() const { return trees_; }

 private:
  std::vector<RegressionTree> trees_;
  std::size_t d_ = 0;
};

class GradientBoostingModel {
 public:
  void fit(const Matrix& X, const Vec& y, const GbParams& params) {
    d_ = X.cols;
    learning_rate_ = params.learning_rate;
    init_ = mean_of(y);
    trees_.assign(params.n_stages, {});
    TreeConfig cfg;
    cfg.max_depth = params.max_depth;
    cfg.min_samples_split = params.min_samples_split;
    cfg.friedman_mse = true;
    Vec residual(y.size());
    Vec current(y.size(), init_);
    std::vector<std::size_t> rows(X.rows);
    for (std::size_t m = 0; m < params.n_stages; ++m) {
      for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - current[i];
      std::iota(rows.begin(), rows.end(), 0);
      trees_[m].fit(X, residual, rows, cfg, nullptr);
      for (std::size_t i = 0; i < y.size(); ++i)
        current[i] += learning_rate_ * trees_[m].predict_row(X.row(i));
    }
  }

  std::size_t n_features() const { return d_; }

  void predict_into(const Matrix& X, Vec& out) const {
    std::fill(out.begin(), out.end(), init_);
    for (const auto& tree : trees_)
      for (std::size_t i = 0; i < X.rows; ++i)
        out[i] += learning_rate_ * tree.predict_row(X.row(i));
  }

  Vec impurity_importance() const {
    Vec acc(d_, 0.0);
    for (const auto& tree : trees_) {
      const Vec& dec = tree.impurity_decreases();
      for (std::size_t j = 0; j < d_; ++j) acc[j] += dec[j];
    }
    for (auto& v : acc) v /= static_cast<double>(trees_.size());
    const double total = std::accumulate(acc.begin(), acc.end(), 0.0);
    if (total > 0.0)
      for (auto& v : acc) v /= total;
    return acc;
  }

  const std::vector<RegressionTree>& trees() const { return trees_; }
  double initial_prediction() const { return init_; }

 private:
  std::vector<RegressionTree> trees_;
  double init_ = 0.0;
  double learning_rate_ = 0.1;
  std::size_t d_ = 0;
};

// ---------------------------------------------------------------------------
// Linear epsilon-insensitive SVR, primal form:
//   0.5 ||w||^2 + C * sum_i max(0, |y_i - w.x_i - b| - eps)
// minimised by full-batch Adam on the subgradient. Rows are canonicalised
// before optimisation so the fitted weights do not depend on input order.
// ---------------------------------------------------------------------------

class LinearSvrModel {
 public:
  void fit(const Matrix& X, const Vec& y, const SvrParams& params) {
    const std::size_t n = X.rows;
    const std::size_t d = X.cols;
    d_ = d;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (y[a] != y[b]) return y[a] < y[b];
      return std::lexicographical_compare(X.row(a).begin(), X.row(a).end(),
                                          X.row(b).begin(), X.row(b).end());
    });

    w_.assign(d, 0.0);
    b_ = mean_of(y);
    Vec m(d + 1, 0.0), v(d + 1, 0.0);  // Adam state, bias last
    Vec grad(d + 1, 0.0);
    const double y_scale = std::sqrt(variance_of(y));
    const double lr0 = std::clamp(0.05 * std::max(1.0, y_scale), 0.01, 20.0);
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    double best_loss = std::numeric_limits<double>::infinity();
    Vec best_w = w_;
    double best_b = b_;
    std::size_t patience = 0;

    for (std::size_t t = 0; t < params.max_iterations; ++t) {
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        loss += 0.5 * w_[j] * w_[j];
        grad[j] = w_[j];
      }
      for (std::size_t oi = 0; oi < n; ++oi) {
        const std::size_t i = order[oi];
        const auto row = X.row(i);
        double pred = b_;
        for (std::size_t j = 0; j < d; ++j) pred += w_[j] * row[j];
        const double r = y[i] - pred;
        const double excess = std::abs(r) - params.epsilon;
        if (excess > 0.0) {
          loss += params.c * excess;
          const double s = r > 0.0 ? -params.c : params.c;
          for (std::size_t j = 0; j < d; ++j) grad[j] += s * row[j];
          grad[d] += s;
        }
      }
      if (!std::isfinite(best_loss) ||
          loss < best_loss - params.tolerance * std::max(1.0, best_loss)) {
        patience = 0;
      } else if (++patience >= 50) {
        break;
      }
      if (loss < best_loss) {
        best_loss = loss;
        best_w = w_;
        best_b = b_;
      }
      const double lr = lr0 / (1.0 + static_cast<double>(t) / 100.0);
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t) + 1.0);
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t) + 1.0);
      for (std::size_t p = 0; p <= d; ++p) {
        m[p] = beta1 * m[p] + (1.0 - beta1) * grad[p];
        v[p] = beta2 * v[p] + (1.0 - beta2) * grad[p] * grad[p];
        const double step = lr * (m[p] / bc1) / (std::sqrt(v[p] / bc2) + adam_eps);
        if (p < d)
          w_[p] -= step;
        else
          b_ -= step;
      }
    }
    w_ = best_w;
    b_ = best_b;
  }

  std::size_t n_features() const { return d_; }

  void predict_into(const Matrix& X, Vec& out) const {
    for (std::size_t i = 0; i < X.rows; ++i) {
      const auto row = X.row(i);
      double pred = b_;
      for (std::size_t j = 0; j < d_; ++j) pred += w_[j] * row[j];
      out[i] = pred;
    }
  }

  const Vec& weights() const { return w_; }
  double intercept() const { return b_; }

 private:
  Vec w_;
  double b_ = 0.0;
  std::size_t d_ = 0;
};

// ---------------------------------------------------------------------------
// Single-hidden-layer ReLU regressor. The net itself is exposed so gradient
// correctness can be verified against finite differences.
// ---------------------------------------------------------------------------

struct MlpNet {
  Matrix w1;  // hidden x input
  Vec b1;     // hidden
  Vec w2;     // hidden
  double b2 = 0.0;
  double l2 = 0.0;

  static MlpNet init(std::size_t d, std::size_t hidden, double l2, Rng& rng) {
    MlpNet net;
    net.w1 = Matrix(hidden, d);
    net.b1.assign(hidden, 0.0);
    net.w2.assign(hidden, 0.0);
    net.l2 = l2;
    const double bound1 = std::sqrt(6.0 / static_cast<double>(d + hidden));
    for (auto& w : net.w1.data) w = rng.uniform(-bound1, bound1);
    const double bound2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
    for (auto& w : net.w2) w = rng.uniform(-bound2, bound2);
    return net;
  }

  std::size_t n_params() const { return w1.data.size() + b1.size() + w2.size() + 1; }

  Vec flat_params() const {
    Vec out;
    out.reserve(n_params());
    out.insert(out.end(), w1.data.begin(), w1.data.end());
    out.insert(out.end(), b1.begin(), b1.end());
    out.insert(out.end(), w2.begin(), w2.end());
    out.push_back(b2);
    return out;
  }

  void set_flat_params(std::span<const double> p) {
    std::size_t o = 0;
    std::copy_n(p.begin(), w1.data.size(), w1.data.begin());
    o += w1.data.size();
    std::copy_n(p.begin() + o, b1.size(), b1.begin());
    o += b1.size();
    std::copy_n(p.begin() + o, w2.size(), w2.begin());
    o += w2.size();
    b2 = p[o];
  }

  double forward(std::span<const double> x) const {
    double out = b2;
    const std::size_t h = w2.size();
    const std::size_t d = w1.cols;
    for (std::size_t u = 0; u < h; ++u) {
      double z = b1[u];
      const auto wrow = w1.row(u);
      for (std::size_t j = 0; j < d; ++j) z += wrow[j] * x[j];
      if (z > 0.0) out += w2[u] * z;
    }
    return out;
  }

  // Half mean squared error plus L2 on the weight matrices (not biases).
  double loss(const Matrix& X, const Vec& y) const {
    double sse = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
      const double e = forward(X.row(i)) - y[i];
      sse += e * e;
    }
    double reg = 0.0;
    for (double w : w1.data) reg += w * w;
    for (double w : w2) reg += w * w;
    return 0.5 * sse / static_cast<double>(X.rows) + 0.5 * l2 * reg;
  }

  double loss_and_gradient(const Matrix& X, const Vec& y, MlpNet& grad) const {
    const std::size_t h = w2.size();
    const std::size_t d = w1.cols;
    grad.w1 = Matrix(h, d);
    grad.b1.assign(h, 0.0);
    grad.w2.assign(h, 0.0);
    grad.b2 = 0.0;
    const double inv_n = 1.0 / static_cast<double>(X.rows);
    Vec hidden(h, 0.0);
    double sse = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
      const auto x = X.row(i);
      double pred = b2;
      for (std::size_t u = 0; u < h; ++u) {
        double z = b1[u];
        const auto wrow = w1.row(u);
        for (std::size_t j = 0; j < d; ++j) z += wrow[j] * x[j];
        hidden[u] = z > 0.0 ? z : 0.0;
        pred += w2[u] * hidden[u];
      }
      const double err = pred - y[i];
      sse += err * err;
      const double e = err * inv_n;
      grad.b2 += e;
      for (std::size_t u = 0; u < h; ++u) {
        grad.w2[u] += e * hidden[u];
        if (hidden[u] > 0.0) {
          const double gz = e * w2[u];
          grad.b1[u] += gz;
          auto grow = grad.w1.row(u);
          for (std::size_t j = 0; j < d; ++j) grow[j] += gz * x[j];
        }
      }
    }
    double reg = 0.0;
    for (std::size_t p = 0; p < w1.data.size(); ++p) {
      reg += w1.data[p] * w1.data[p];
      grad.w1.data[p] += l2 * w1.data[p];
    }
    for (std::size_t u = 0; u < h; ++u) {
      reg += w2[u] * w2[u];
      grad.w2[u] += l2 * w2[u];
    }
    return 0.5 * sse * inv_n + 0.5 * l2 * reg;
  }
};

class MlpModel {
 public:
  void fit(const Matrix& X, const Vec& y, const MlpParams& params, std::uint64_t seed) {
    d_ = X.cols;
    standardize_fit(X, y);
    Matrix Xs = standardize_features(X);
    Vec ys(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ys[i] = (y[i] - y_mean_) / y_std_;

    Rng rng(Rng::mix(seed, hash_tag("mlp-init")));
    net_ = MlpNet::init(d_, params.hidden_size, params.l2, rng);

    const std::size_t np = net_.n_params();
    Vec m(np, 0.0), v(np, 0.0);
    MlpNet grad = net_;
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    Vec params_flat = net_.flat_params();
    for (std::size_t t = 0; t < params.epochs; ++t) {
      net_.loss_and_gradient(Xs, ys, grad);
      const Vec g = grad.flat_params();
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t) + 1.0);
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t) + 1.0);
      for (std::size_t p = 0; p < np; ++p) {
        m[p] = beta1 * m[p] + (1.0 - beta1) * g[p];
        v[p] = beta2 * v[p] + (1.0 - beta2) * g[p] * g[p];
        params_flat[p] -=
            params.learning_rate * (m[p] / bc1) / (std::sqrt(v[p] / bc2) + adam_eps);
      }
      net_.set_flat_params(params_flat);
    }
  }

  std::size_t n_features() const { return d_; }

  void predict_into(const Matrix& X, Vec& out) const {
    Vec xs(d_);
    for (std::size_t i = 0; i < X.rows; ++i) {
      const auto row = X.row(i);
      for (std::size_t j = 0; j < d_; ++j) xs[j] = (row[j] - x_mean_[j]) / x_std_[j];
      out[i] = net_.forward(xs) * y_std_ + y_mean_;
    }
  }

  const MlpNet& net() const { return net_; }
  const Vec& input_means() const { return x_mean_; }
  const Vec& input_stds() const { return x_std_; }
  double target_mean() const { return y_mean_; }
  double target_std() const { return y_std_; }

 private:
  void standardize_fit(const Matrix& X, const Vec& y) {
    x_mean_.assign(d_, 0.0);
    x_std_.assign(d_, 0.0);
    for (std::size_t i = 0; i < X.rows; ++i)
      for (std::size_t j = 0; j < d_; ++j) x_mean_[j] += X(i, j);
    for (auto& v : x_mean_) v /= static_cast<double>(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i)
      for (std::size_t j = 0; j < d_; ++j) {
        const double c = X(i, j) - x_mean_[j];
        x_std_[j] += c * c;
      }
    for (auto& v : x_std_) {
      v = std::sqrt(v / static_cast<double>(X.rows));
      if (v <= 0.0) v = 1.0;
    }
    y_mean_ = mean_of(y);
    y_std_ = std::sqrt(variance_of(y));
    if (y_std_ <= 0.0) y_std_ = 1.0;
  }

  Matrix standardize_features(const Matrix& X) const {
    Matrix out(X.rows, d_);
    for (std::size_t i = 0; i < X.rows; ++i)
      for (std::size_t j = 0; j < d_; ++j)
        out(i, j) = (X(i, j) - x_mean_[j]) / x_std_[j];
    return out;
  }

  MlpNet net_;
  Vec x_mean_, x_std_;
  double y_mean_ = 0.0, y_std_ = 1.0;
  std::size_t d_ = 0;
};

// ---------------------------------------------------------------------------
// Uniform train/predict surface.
// ---------------------------------------------------------------------------

class TrainedModel final : public Predictor {
 public:
  LearnerKind kind() const { return kind_; }
  double train_rmse() const { return train_rmse_; }

  std::size_t n_features() const override {
    return std::visit([](const auto& m) { return m.n_features(); }, impl_);
  }

  void predict_into(const Matrix& rows, Vec& out) const override {
    std::visit([&](const auto& m) { m.predict_into(rows, out); }, impl_);
  }

  /// Per-feature impurity reduction for tree ensembles, normalized to sum 1.
  Vec impurity_importance() const {
    if (auto* f = std::get_if<ForestModel>(&impl_)) return f->impurity_importance();
    if (auto* g = std::get_if<GradientBoostingModel>(&impl_))
      return g->impurity_importance();
    throw UnsupportedMethodError("impurity importance is undefined for " +
                                 std::string(to_string(kind_)));
  }

  template <class M>
  const M& as() const {
    return std::get<M>(impl_);
  }

  friend TrainedModel train(LearnerKind, const Hyperparams&, const Matrix&,
                            const Vec&, std::uint64_t);

 private:
  LearnerKind kind_ = LearnerKind::GradientBoosting;
  double train_rmse_ = 0.0;
  std::variant<GradientBoostingModel, ForestModel, LinearSvrModel, MlpModel> impl_;
};

inline TrainedModel train(LearnerKind kind, const Hyperparams& hp, const Matrix& X,
                          const Vec& y, std::uint64_t seed) {
  if (X.rows != y.size())
    throw ShapeError("train: feature rows (" + std::to_string(X.rows) +
                     ") != target length (" + std::to_string(y.size()) + ")");
  if (X.rows < 2)
    throw TrainingDegenerateError("train: need at least 2 instances, got " +
                                  std::to_string(X.rows));
  if (X.cols < 1) throw ShapeError("train: empty feature matrix");
  if (!all_finite(X.data) || !all_finite(y))
    throw DataError("train: non-finite value in input");
  hp.validate(kind);

  TrainedModel model;
  model.kind_ = kind;
  switch (kind) {
    case LearnerKind::GradientBoosting: {
      GradientBoostingModel m;
      m.fit(X, y, hp.gb);
      model.impl_ = std::move(m);
      break;
    }
    case LearnerKind::RandomForest: {
      ForestModel m;
      m.fit(X, y, hp.rf, /*random_thresholds=*/false, seed);
      model.impl_ = std::move(m);
      break;
    }
    case LearnerKind::ExtraTrees: {
      ForestModel m;
      m.fit(X, y, hp.et, /*random_thresholds=*/true, seed);
      model.impl_ = std::move(m);
      break;
    }
    case LearnerKind::LinearSVR: {
      LinearSvrModel m;
      m.fit(X, y, hp.svr);
      model.impl_ = std::move(m);
      break;
    }
    case LearnerKind::MLP: {
      MlpModel m;
      m.fit(X, y, hp.mlp, seed);
      model.impl_ = std::move(m);
      break;
    }
  }
  const Vec pred = model.predict(X);
  double sse = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = pred[i] - y[i];
    sse += e * e;
  }
  model.train_rmse_ = std::sqrt(sse / static_cast<double>(y.size()));
  return model;
}

inline Vec impurity_importance(const TrainedModel& model) {
  return model.impurity_importance();
}

}  // namespace fefi
