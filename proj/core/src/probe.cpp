#include <algorithm>
#include <cmath>
#include <string>

#include "csr/errors.hpp"
#include "csr/numerics.hpp"

namespace csr {
namespace {

void check_dataset(const ProbeModel& model, std::span<const FeatureVec> features,
                   std::span<const int> labels) {
  if (features.empty()) throw InvalidInput("probe: empty dataset");
  if (features.size() != labels.size()) throw InvalidInput("probe: feature/label count mismatch");
  for (const FeatureVec& f : features) {
    if (f.size() != model.dim) throw InvalidInput("probe: feature dimension mismatch");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= model.num_classes) {
      throw InvalidInput("probe: label " + std::to_string(y) + " out of range");
    }
  }
}

// Mean cross-entropy, and its gradient when `grad` is non-null.
double loss_and_grad(const ProbeModel& model, std::span<const FeatureVec> features,
                     std::span<const int> labels, ProbeModel* grad) {
  check_dataset(model, features, labels);
  if (grad != nullptr) *grad = ProbeModel::zeros(model.num_classes, model.dim);
  const double scale = 1.0 / static_cast<double>(features.size());
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const FeatureVec& x = features[i];
    std::vector<double> probs = model.logits(x);
    const double peak = *std::max_element(probs.begin(), probs.end());
    const double label_logit = probs[labels[i]];
    double sum = 0.0;
    for (double& p : probs) {
      p = std::exp(p - peak);
      sum += p;
    }
    total += peak + std::log(sum) - label_logit;
    if (grad == nullptr) continue;

    for (double& p : probs) p /= sum;
    probs[labels[i]] -= 1.0;
    for (std::size_t c = 0; c < model.num_classes; ++c) {
      const double g = probs[c] * scale;
      double* w = grad->weights.data() + c * model.dim;
      for (std::size_t d = 0; d < model.dim; ++d) w[d] += g * x[d];
      grad->bias[c] += g;
    }
  }
  return total * scale;
}

}  // namespace

ProbeModel ProbeModel::zeros(std::size_t num_classes, std::size_t dim) {
  ProbeModel m;
  m.num_classes = num_classes;
  m.dim = dim;
  m.weights.assign(num_classes * dim, 0.0);
  m.bias.assign(num_classes, 0.0);
  return m;
}

std::vector<double> ProbeModel::logits(std::span<const double> x) const {
  std::vector<double> out(bias);
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double* w = weights.data() + c * dim;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) acc += w[d] * x[d];
    out[c] += acc;
  }
  return out;
}

std::size_t ProbeModel::predict(std::span<const double> x) const {
  const std::vector<double> z = logits(x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < z.size(); ++c) {
    if (z[c] > z[best]) best = c;
  }
  return best;
}

double probe_loss(const ProbeModel& model, std::span<const FeatureVec> features,
                  std::span<const int> labels) {
  return loss_and_grad(model, features, labels, nullptr);
}

ProbeModel probe_loss_grad(const ProbeModel& model, std::span<const FeatureVec> features,
                           std::span<const int> labels) {
  ProbeModel grad;
  loss_and_grad(model, features, labels, &grad);
  return grad;
}

ProbeFit train_probe(std::span<const FeatureVec> features, std::span<const int> labels,
                     std::size_t num_classes, const ProbeOptions& options) {
  if (features.empty()) throw InvalidInput("train_probe: empty dataset");
  if (!(options.learning_rate > 0.0)) throw InvalidInput("train_probe: learning rate must be positive");
  if (num_classes == 0) throw InvalidInput("train_probe: need at least one class");

  ProbeFit fit;
  fit.model = ProbeModel::zeros(num_classes, features.front().size());
  check_dataset(fit.model, features, labels);
  fit.loss_history.reserve(options.epochs);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    ProbeModel grad;
    fit.loss_history.push_back(loss_and_grad(fit.model, features, labels, &grad));
    for (std::size_t k = 0; k < grad.weights.size(); ++k) {
      fit.model.weights[k] -= options.learning_rate * grad.weights[k];
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
      fit.model.bias[c] -= options.learning_rate * grad.bias[c];
    }
  }
  return fit;
}

double probe_accuracy(const ProbeModel& model, std::span<const FeatureVec> features,
                      std::span<const int> labels) {
  check_dataset(model, features, labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (model.predict(features[i]) == static_cast<std::size_t>(labels[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(features.size());
}

}  // namespace csr
