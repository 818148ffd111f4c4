#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alkit/error.hpp"
#include "alkit/matrix.hpp"
#include "alkit/pool.hpp"
#include "alkit/random.hpp"

namespace alkit {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Index of the largest element; the lowest index wins ties.
inline std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

inline std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> p(z.size());
  if (z.empty()) return p;
  const double m = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - m);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

// Sorted distinct labels; throws unless at least two classes are present.
inline std::vector<ClassId> distinct_classes(std::span<const ClassId> y) {
  std::vector<ClassId> classes(y.begin(), y.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) {
    throw DegenerateLabelsError("training needs at least 2 distinct classes, got " +
                                std::to_string(classes.size()));
  }
  return classes;
}

// A trainable linear classifier. Decision values are W x + b with one row of
// W per class seen in training; binary models keep the rows (-w, w) so that
// predict_real yields (-f(x), f(x)).
class Model {
 public:
  virtual ~Model() = default;

  // Untrained copy carrying the same hyperparameters.
  virtual std::unique_ptr<Model> clone() const = 0;
  virtual std::string kind() const = 0;

  virtual void fit(const Matrix& x, std::span<const ClassId> y) = 0;

  void train(const Pool& pool) {
    auto [x, y] = pool.labeled_data();
    if (y.empty()) throw DegenerateLabelsError("pool has no labeled examples");
    fit(x, y);
  }

  bool trained() const noexcept { return !classes_.empty(); }
  const std::vector<ClassId>& classes() const noexcept { return classes_; }
  std::size_t dimensionality() const noexcept { return weights_.cols(); }
  const Matrix& weights() const noexcept { return weights_; }
  const std::vector<double>& bias() const noexcept { return bias_; }

  Matrix predict_real(const Matrix& x) const {
    check_input(x);
    Matrix out(x.rows(), classes_.size());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t c = 0; c < classes_.size(); ++c) {
        out(i, c) = dot(weights_.row(c), x.row(i)) + bias_[c];
      }
    }
    return out;
  }

  std::vector<ClassId> predict(const Matrix& x) const {
    const Matrix real = predict_real(x);
    std::vector<ClassId> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = classes_[argmax(real.row(i))];
    return out;
  }

  virtual Matrix predict_proba(const Matrix& x) const = 0;

  // Fraction of correctly predicted examples.
  double score(const Matrix& x, std::span<const ClassId> y) const {
    if (x.rows() == 0) throw EmptyInputError("score needs at least one example");
    if (x.rows() != y.size()) throw DimensionError("score: features/labels length mismatch");
    const auto pred = predict(x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i) correct += pred[i] == y[i];
    return static_cast<double>(correct) / static_cast<double>(y.size());
  }

 protected:
  void check_input(const Matrix& x) const {
    if (!trained()) throw UntrainedError(kind() + " used before training");
    if (x.cols() != dimensionality() && x.rows() > 0) {
      throw DimensionError("expected " + std::to_string(dimensionality()) +
                           " features, got " + std::to_string(x.cols()));
    }
  }

  static void check_training_input(const Matrix& x, std::span<const ClassId> y) {
    if (x.rows() != y.size()) throw DimensionError("fit: features/labels length mismatch");
    if (x.cols() == 0) throw DimensionError("fit: zero-width features");
  }

  // Binary models store (-w, w); `w` has d entries followed by the bias.
  void set_binary(std::span<const double> w, std::size_t d) {
    weights_ = Matrix(2, d);
    for (std::size_t j = 0; j < d; ++j) {
      weights_(0, j) = -w[j];
      weights_(1, j) = w[j];
    }
    bias_ = {-w[d], w[d]};
  }

  Matrix weights_;
  std::vector<double> bias_;
  std::vector<ClassId> classes_;
};

// Mean cross-entropy plus (l2 / 2) * ||W||^2, bias unpenalized.
//
// Parameter layout: binary problems use [w_1..w_d, b]; K-class problems use
// K consecutive blocks [w_k1..w_kd, b_k].
class LogisticObjective {
 public:
  LogisticObjective(const Matrix& x, std::vector<std::size_t> targets, std::size_t n_classes,
                    double l2)
      : x_(x), targets_(std::move(targets)), n_classes_(n_classes), l2_(l2) {}

  bool binary() const noexcept { return n_classes_ == 2; }
  std::size_t block() const noexcept { return x_.cols() + 1; }
  std::size_t num_params() const noexcept { return binary() ? block() : n_classes_ * block(); }

  double value(std::span<const double> theta) const {
    const std::size_t d = x_.cols();
    const double n = static_cast<double>(x_.rows());
    double loss = 0.0;
    if (binary()) {
      for (std::size_t i = 0; i < x_.rows(); ++i) {
        const double z = dot(theta.first(d), x_.row(i)) + theta[d];
        loss += softplus(z) - (targets_[i] == 1 ? z : 0.0);
      }
    } else {
      std::vector<double> z(n_classes_);
      for (std::size_t i = 0; i < x_.rows(); ++i) {
        for (std::size_t k = 0; k < n_classes_; ++k) {
          z[k] = dot(theta.subspan(k * block(), d), x_.row(i)) + theta[k * block() + d];
        }
        const double m = *std::max_element(z.begin(), z.end());
        double s = 0.0;
        for (double v : z) s += std::exp(v - m);
        loss += m + std::log(s) - z[targets_[i]];
      }
    }
    return loss / n + 0.5 * l2_ * penalty(theta);
  }

  std::vector<double> gradient(std::span<const double> theta) const {
    const std::size_t d = x_.cols();
    const double n = static_cast<double>(x_.rows());
    std::vector<double> g(num_params(), 0.0);
    if (binary()) {
      for (std::size_t i = 0; i < x_.rows(); ++i) {
        const auto row = x_.row(i);
        const double r = sigmoid(dot(theta.first(d), row) + theta[d]) - (targets_[i] == 1);
        for (std::size_t j = 0; j < d; ++j) g[j] += r * row[j];
        g[d] += r;
      }
    } else {
      std::vector<double> z(n_classes_);
      for (std::size_t i = 0; i < x_.rows(); ++i) {
        const auto row = x_.row(i);
        for (std::size_t k = 0; k < n_classes_; ++k) {
          z[k] = dot(theta.subspan(k * block(), d), row) + theta[k * block() + d];
        }
        const auto p = softmax(z);
        for (std::size_t k = 0; k < n_classes_; ++k) {
          const double r = p[k] - (targets_[i] == k);
          double* gk = g.data() + k * block();
          for (std::size_t j = 0; j < d; ++j) gk[j] += r * row[j];
          gk[d] += r;
        }
      }
    }
    for (double& v : g) v /= n;
    const std::size_t blocks = binary() ? 1 : n_classes_;
    for (std::size_t k = 0; k < blocks; ++k) {
      for (std::size_t j = 0; j < d; ++j) g[k * block() + j] += l2_ * theta[k * block() + j];
    }
    return g;
  }

 private:
  double penalty(std::span<const double> theta) const {
    const std::size_t d = x_.cols();
    const std::size_t blocks = binary() ? 1 : n_classes_;
    double s = 0.0;
    for (std::size_t k = 0; k < blocks; ++k) {
      for (std::size_t j = 0; j < d; ++j) s += theta[k * block() + j] * theta[k * block() + j];
    }
    return s;
  }

  const Matrix& x_;
  std::vector<std::size_t> targets_;
  std::size_t n_classes_;
  double l2_;
};

struct LogisticRegressionParams {
  double l2 = 0.01;
  int max_epochs = 500;
  double step = 0.1;
  double gradient_tolerance = 1e-6;
};

// L2-regularized logistic regression fitted by full-batch gradient descent.
// A step that would increase the objective is halved until it does not, so
// the recorded objective is non-increasing.
class LogisticRegression final : public Model {
 public:
  explicit LogisticRegression(LogisticRegressionParams params = {}) : params_(params) {}

  std::unique_ptr<Model> clone() const override {
    return std::make_unique<LogisticRegression>(params_);
  }
  std::string kind() const override { return "logreg"; }
  const LogisticRegressionParams& params() const noexcept { return params_; }

  void fit(const Matrix& x, std::span<const ClassId> y) override {
    check_training_input(x, y);
    auto classes = distinct_classes(y);
    std::vector<std::size_t> targets(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      targets[i] = static_cast<std::size_t>(
          std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());
    }
    const LogisticObjective objective(x, std::move(targets), classes.size(), params_.l2);
    std::vector<double> theta(objective.num_params(), 0.0);
    double f = objective.value(theta);
    history_.assign(1, f);
    double step = params_.step;
    std::vector<double> candidate(theta.size());
    for (int epoch = 0; epoch < params_.max_epochs; ++epoch) {
      const auto g = objective.gradient(theta);
      double norm2 = 0.0;
      for (double v : g) norm2 += v * v;
      if (std::sqrt(norm2) < params_.gradient_tolerance) break;
      double fc = 0.0;
      bool accepted = false;
      while (step > 1e-12) {
        for (std::size_t k = 0; k < theta.size(); ++k) candidate[k] = theta[k] - step * g[k];
        fc = objective.value(candidate);
        if (fc <= f) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      theta.swap(candidate);
      f = fc;
      history_.push_back(f);
    }

    const std::size_t d = x.cols();
    classes_ = std::move(classes);
    if (objective.binary()) {
      set_binary(theta, d);
    } else {
      weights_ = Matrix(classes_.size(), d);
      bias_.assign(classes_.size(), 0.0);
      for (std::size_t k = 0; k < classes_.size(); ++k) {
        for (std::size_t j = 0; j < d; ++j) weights_(k, j) = theta[k * (d + 1) + j];
        bias_[k] = theta[k * (d + 1) + d];
      }
    }
  }

  Matrix predict_proba(const Matrix& x) const override {
    Matrix real = predict_real(x);
    for (std::size_t i = 0; i < real.rows(); ++i) {
      auto row = real.row_mut(i);
      if (row.size() == 2) {
        const double p = sigmoid(row[1]);
        row[0] = sigmoid(-row[1]);
        row[1] = p;
      } else {
        const auto p = softmax(row);
        std::copy(p.begin(), p.end(), row.begin());
      }
    }
    return real;
  }

  // Objective value after each accepted epoch (index 0 = initial point).
  const std::vector<double>& objective_history() const noexcept { return history_; }

 private:
  LogisticRegressionParams params_;
  std::vector<double> history_;
};

struct LinearSvmParams {
  double lambda = 0.01;
  int iterations = 2000;
  std::uint64_t seed = 0;
  double squash_slope = 1.0;
};

// Pegasos stochastic subgradient solver for the hinge loss; one-vs-rest for
// more than two classes. The bias is learned as a weight on a constant 1
// feature. Probabilities are sigmoid(a * f(x)), renormalized across classes.
class LinearSvm final : public Model {
 public:
  explicit LinearSvm(LinearSvmParams params = {}) : params_(params) {}

  std::unique_ptr<Model> clone() const override { return std::make_unique<LinearSvm>(params_); }
  std::string kind() const override { return "linsvm"; }
  const LinearSvmParams& params() const noexcept { return params_; }

  void fit(const Matrix& x, std::span<const ClassId> y) override {
    check_training_input(x, y);
    auto classes = distinct_classes(y);
    const std::size_t d = x.cols();
    if (classes.size() == 2) {
      const auto w = pegasos(x, y, classes[1], 0);
      classes_ = std::move(classes);
      set_binary(w, d);
      return;
    }
    Matrix weights(classes.size(), d);
    std::vector<double> bias(classes.size());
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const auto w = pegasos(x, y, classes[c], c);
      std::copy(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d), weights.row_mut(c).begin());
      bias[c] = w[d];
    }
    classes_ = std::move(classes);
    weights_ = std::move(weights);
    bias_ = std::move(bias);
  }

  Matrix predict_proba(const Matrix& x) const override {
    Matrix real = predict_real(x);
    for (std::size_t i = 0; i < real.rows(); ++i) {
      auto row = real.row_mut(i);
      if (row.size() == 2) {
        const double f = params_.squash_slope * row[1];
        row[0] = sigmoid(-f);
        row[1] = sigmoid(f);
        continue;
      }
      double total = 0.0;
      for (double& v : row) {
        v = sigmoid(params_.squash_slope * v);
        total += v;
      }
      for (double& v : row) v /= total;
    }
    return real;
  }

 private:
  // Returns d weights followed by the bias for the problem `positive` vs rest.
  std::vector<double> pegasos(const Matrix& x, std::span<const ClassId> y, ClassId positive,
                              std::size_t stream) const {
    const std::size_t d = x.cols();
    std::vector<double> w(d + 1, 0.0);
    Rng rng(derive_seed(params_.seed, stream));
    const double radius = 1.0 / std::sqrt(params_.lambda);
    for (int t = 1; t <= params_.iterations; ++t) {
      const std::size_t i = rng.uniform_index(x.rows());
      const auto row = x.row(i);
      const double target = y[i] == positive ? 1.0 : -1.0;
      const double eta = 1.0 / (params_.lambda * t);
      const double margin = target * (dot(std::span<const double>(w).first(d), row) + w[d]);
      const double shrink = 1.0 - eta * params_.lambda;
      for (double& v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * target * row[j];
        w[d] += eta * target;
      }
      double norm2 = 0.0;
      for (double v : w) norm2 += v * v;
      const double norm = std::sqrt(norm2);
      if (norm > radius) {
        for (double& v : w) v *= radius / norm;
      }
    }
    return w;
  }

  LinearSvmParams params_;
};

enum class ModelKind { LogisticRegression, LinearSvm };

inline ModelKind parse_model_kind(std::string_view name) {
  if (name == "logreg") return ModelKind::LogisticRegression;
  if (name == "linsvm") return ModelKind::LinearSvm;
  throw UsageError("unknown model '" + std::string(name) + "' (valid: logreg, linsvm)");
}

inline std::string to_string(ModelKind kind) {
  return kind == ModelKind::LogisticRegression ? "logreg" : "linsvm";
}

inline std::unique_ptr<Model> make_model(ModelKind kind, std::uint64_t seed = 0) {
  if (kind == ModelKind::LogisticRegression) return std::make_unique<LogisticRegression>();
  LinearSvmParams p;
  p.seed = seed;
  return std::make_unique<LinearSvm>(p);
}

}  // namespace alkit
