#pragma once

// Vector geometry, the InfoNCE objective, linear assignment, the linear probe
// trainer and the Adjusted Rand Index. Everything here is a pure function.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace csr {

/// Default embedding width.
inline constexpr std::size_t kDefaultFeatureDim = 512;

/// Unit-norm embedding. The only ways to build one are `normalize` (any
/// nonzero vector) and `from_unit` (a vector that is already unit length, as
/// read back from disk), so every live FeatureVec satisfies |v| = 1.
class FeatureVec {
 public:
  FeatureVec() = default;

  static FeatureVec from_unit(std::vector<double> values, double tolerance = 1e-9);

  std::span<const double> values() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }  // NOLINT
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const FeatureVec&) const = default;

 private:
  friend FeatureVec normalize(std::span<const double> raw);
  explicit FeatureVec(std::vector<double> values) : values_(std::move(values)) {}

  std::vector<double> values_;
};

/// Scales `raw` to unit L2 norm. Throws DegenerateFeature on a zero or
/// non-finite vector.
FeatureVec normalize(std::span<const double> raw);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

/// Cosine similarity of two unit vectors (their dot product), clamped to
/// [-1, 1]. Throws InvalidInput on a length mismatch.
double cos_sim(const FeatureVec& a, const FeatureVec& b);

/// InfoNCE loss for query `q` against one positive and K >= 1 negatives at
/// temperature `tau`:
///
///   -log( exp(q.k+ / tau) / sum_{k in {k+} U negatives} exp(q.k / tau) )
///
/// The denominator includes the positive. `q` is taken as a free vector so
/// the loss can be differentiated without re-normalizing.
double info_nce(std::span<const double> q, const FeatureVec& positive,
                std::span<const FeatureVec> negatives, double tau);

/// d info_nce / d q.
std::vector<double> info_nce_grad(std::span<const double> q, const FeatureVec& positive,
                                  std::span<const FeatureVec> negatives, double tau);

/// Dense row-major matrix of similarity scores.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  ScoreMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> data() const noexcept { return data_; }

  ScoreMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Builds rows x cols cosine scores between two feature lists.
ScoreMatrix cosine_scores(std::span<const FeatureVec> rows, std::span<const FeatureVec> cols);

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted by row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  double total = 0.0;
};

/// Maximum-total-score one-to-one matching of size min(rows, cols).
///
/// Among equally optimal matchings the lexicographically smallest one is
/// returned: row 0 takes the lowest column it can while staying optimal, then
/// row 1, and so on (a row left unmatched ranks after every column).
/// Throws InvalidInput on a non-finite entry.
Assignment max_assignment(const ScoreMatrix& scores);

/// Multinomial logistic-regression head: logits = W x + b.
struct ProbeModel {
  std::size_t num_classes = 0;
  std::size_t dim = 0;
  std::vector<double> weights;  // num_classes x dim, row-major
  std::vector<double> bias;     // num_classes

  static ProbeModel zeros(std::size_t num_classes, std::size_t dim);

  std::vector<double> logits(std::span<const double> x) const;
  /// argmax of the logits; ties go to the lowest class id.
  std::size_t predict(std::span<const double> x) const;
};

struct ProbeOptions {
  double learning_rate = 0.5;
  std::size_t epochs = 500;
};

struct ProbeFit {
  ProbeModel model;
  std::vector<double> loss_history;  // mean cross-entropy at the start of each epoch
};

/// Mean multinomial cross-entropy of `model` on the dataset.
double probe_loss(const ProbeModel& model, std::span<const FeatureVec> features,
                  std::span<const int> labels);

/// Gradient of probe_loss, laid out like ProbeModel (weights then bias).
ProbeModel probe_loss_grad(const ProbeModel& model, std::span<const FeatureVec> features,
                           std::span<const int> labels);

/// Full-batch gradient descent from a zero model.
ProbeFit train_probe(std::span<const FeatureVec> features, std::span<const int> labels,
                     std::size_t num_classes, const ProbeOptions& options = {});

double probe_accuracy(const ProbeModel& model, std::span<const FeatureVec> features,
                      std::span<const int> labels);

/// Pair-counting Adjusted Rand Index (Hubert & Arabie). Returns 1.0 when both
/// partitions are the same trivial partition. Throws InvalidInput if the
/// lengths differ or are below 2.
double adjusted_rand_index(std::span<const int> predicted, std::span<const int> truth);

}  // namespace csr
