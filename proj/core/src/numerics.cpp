#include "csr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "csr/errors.hpp"

namespace csr {

FeatureVec normalize(std::span<const double> raw) {
  const double norm = l2_norm(raw);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateFeature("cannot normalize a zero or non-finite vector");
  }
  std::vector<double> out(raw.begin(), raw.end());
  for (double& x : out) x /= norm;
  return FeatureVec(std::move(out));
}

FeatureVec FeatureVec::from_unit(std::vector<double> values, double tolerance) {
  const double norm = l2_norm(values);
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > tolerance) {
    throw InvalidInput("feature is not unit norm (|v| = " + std::to_string(norm) + ")");
  }
  return FeatureVec(std::move(values));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidInput("feature length mismatch: " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double cos_sim(const FeatureVec& a, const FeatureVec& b) {
  return std::clamp(dot(a, b), -1.0, 1.0);
}

namespace {

void check_nce_inputs(std::span<const FeatureVec> negatives, double tau) {
  if (!(tau > 0.0)) throw InvalidInput("InfoNCE temperature must be positive");
  if (negatives.empty()) throw InvalidInput("InfoNCE needs at least one negative");
}

// Softmax over [q.k+, q.k_1, ..., q.k_K] / tau.
std::vector<double> nce_softmax(std::span<const double> q, const FeatureVec& positive,
                                std::span<const FeatureVec> negatives, double tau,
                                double* log_partition) {
  std::vector<double> logits;
  logits.reserve(negatives.size() + 1);
  logits.push_back(dot(q, positive) / tau);
  for (const FeatureVec& k : negatives) logits.push_back(dot(q, k) / tau);

  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& l : logits) {
    l = std::exp(l - peak);
    sum += l;
  }
  for (double& l : logits) l /= sum;
  if (log_partition != nullptr) *log_partition = peak + std::log(sum);
  return logits;
}

}  // namespace

double info_nce(std::span<const double> q, const FeatureVec& positive,
                std::span<const FeatureVec> negatives, double tau) {
  check_nce_inputs(negatives, tau);
  double log_z = 0.0;
  nce_softmax(q, positive, negatives, tau, &log_z);
  return log_z - dot(q, positive) / tau;
}

std::vector<double> info_nce_grad(std::span<const double> q, const FeatureVec& positive,
                                  std::span<const FeatureVec> negatives, double tau) {
  check_nce_inputs(negatives, tau);
  const std::vector<double> p = nce_softmax(q, positive, negatives, tau, nullptr);

  // dL/dq = (sum_i p_i k_i - k+) / tau, with k_0 = k+.
  std::vector<double> grad(q.size(), 0.0);
  const double w_pos = p[0] - 1.0;
  for (std::size_t d = 0; d < grad.size(); ++d) grad[d] = w_pos * positive[d];
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    const double w = p[i + 1];
    for (std::size_t d = 0; d < grad.size(); ++d) grad[d] += w * negatives[i][d];
  }
  for (double& g : grad) g /= tau;
  return grad;
}

ScoreMatrix::ScoreMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw InvalidInput("score matrix data has wrong size");
}

ScoreMatrix ScoreMatrix::transposed() const {
  ScoreMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
  }
  return t;
}

ScoreMatrix cosine_scores(std::span<const FeatureVec> rows, std::span<const FeatureVec> cols) {
  ScoreMatrix m(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) m.at(r, c) = cos_sim(rows[r], cols[c]);
  }
  return m;
}

double adjusted_rand_index(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw InvalidInput("adjusted_rand_index: label lists differ in length");
  }
  if (predicted.size() < 2) throw InvalidInput("adjusted_rand_index: need at least 2 items");

  std::map<std::pair<int, int>, long long> contingency;
  std::map<int, long long> row_sums;
  std::map<int, long long> col_sums;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ++contingency[{predicted[i], truth[i]}];
    ++row_sums[predicted[i]];
    ++col_sums[truth[i]];
  }
  auto comb2 = [](long long n) { return static_cast<double>(n) * static_cast<double>(n - 1) / 2.0; };

  double index = 0.0;
  for (const auto& [key, n] : contingency) index += comb2(n);
  double sum_rows = 0.0;
  for (const auto& [key, n] : row_sums) sum_rows += comb2(n);
  double sum_cols = 0.0;
  for (const auto& [key, n] : col_sums) sum_cols += comb2(n);

  const double total = comb2(static_cast<long long>(predicted.size()));
  const double expected = sum_rows * sum_cols / total;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  const double denom = max_index - expected;
  // Only reachable when both partitions are all-singletons or both a single block.
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

}  // namespace csr
