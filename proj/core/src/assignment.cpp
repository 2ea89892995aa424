#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "csr/errors.hpp"
#include "csr/numerics.hpp"

namespace csr {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct HungarianResult {
  std::vector<std::size_t> row_to_col;
  std::vector<double> u;  // row potentials
  std::vector<double> v;  // column potentials
};

// Shortest-augmenting-path Hungarian method on a square minimization
// problem. On return u[i] + v[j] <= cost(i, j) everywhere, with equality on
// the matched pairs.
HungarianResult solve_min_cost(const std::vector<double>& cost, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0);  // match[col] = row, 1-based, 0 = free
  std::vector<std::size_t> way(n + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  HungarianResult out;
  out.row_to_col.assign(n, kNone);
  for (std::size_t j = 1; j <= n; ++j) {
    if (match[j] != 0) out.row_to_col[match[j] - 1] = j - 1;
  }
  out.u.assign(u.begin() + 1, u.end());
  out.v.assign(v.begin() + 1, v.end());
  return out;
}

// Perfect matching over the tight (zero reduced cost) edges. Rows are fixed
// one at a time; fixing a row to a different column only needs one
// alternating path, so each attempt costs O(n^2) rather than a full rematch.
class TightMatching {
 public:
  TightMatching(std::size_t n, std::vector<char> tight, const std::vector<std::size_t>& row_to_col)
      : n_(n), tight_(std::move(tight)), row_to_col_(row_to_col), col_to_row_(n), used_cols_(n, 0) {
    for (std::size_t r = 0; r < n_; ++r) col_to_row_[row_to_col_[r]] = r;
  }

  bool tight(std::size_t r, std::size_t c) const { return tight_[r * n_ + c] != 0; }
  bool col_used(std::size_t c) const { return used_cols_[c] != 0; }

  // Fixes row r to column c if the remaining rows can still be perfectly
  // matched on tight edges; otherwise leaves everything unchanged.
  bool try_fix(std::size_t r, std::size_t c) {
    const std::size_t c0 = row_to_col_[r];
    if (c0 != c) {
      const std::size_t r1 = col_to_row_[c];
      // Free r and c, then look for an alternating path from r1 to c0.
      std::vector<char> visited(n_, 0);
      visited[c] = 1;
      used_cols_[c] = 1;
      std::vector<std::size_t> saved_r2c = row_to_col_;
      std::vector<std::size_t> saved_c2r = col_to_row_;
      col_to_row_[c0] = kNone;
      if (!augment(r1, visited)) {
        row_to_col_ = std::move(saved_r2c);
        col_to_row_ = std::move(saved_c2r);
        used_cols_[c] = 0;
        return false;
      }
      row_to_col_[r] = c;
      col_to_row_[c] = r;
    }
    used_cols_[c] = 1;
    return true;
  }

 private:
  bool augment(std::size_t r, std::vector<char>& visited) {
    for (std::size_t c = 0; c < n_; ++c) {
      if (used_cols_[c] || visited[c] || !tight(r, c)) continue;
      visited[c] = 1;
      if (col_to_row_[c] == kNone || augment(col_to_row_[c], visited)) {
        row_to_col_[r] = c;
        col_to_row_[c] = r;
        return true;
      }
    }
    return false;
  }

  std::size_t n_;
  std::vector<char> tight_;
  std::vector<std::size_t> row_to_col_;
  std::vector<std::size_t> col_to_row_;
  std::vector<char> used_cols_;
};

}  // namespace

Assignment max_assignment(const ScoreMatrix& scores) {
  const std::size_t rows = scores.rows();
  const std::size_t cols = scores.cols();
  for (double s : scores.data()) {
    if (!std::isfinite(s)) throw InvalidInput("max_assignment: non-finite score");
  }

  Assignment result;
  if (rows == 0 || cols == 0) {
    for (std::size_t r = 0; r < rows; ++r) result.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < cols; ++c) result.unmatched_cols.push_back(c);
    return result;
  }

  // Pad to square with a sentinel below every real score. Every completion
  // uses the same number of padded cells, so the sentinel never changes which
  // real pairs are optimal.
  const std::size_t n = std::max(rows, cols);
  double lowest = scores.at(0, 0);
  for (double s : scores.data()) lowest = std::min(lowest, s);
  const double sentinel = lowest - 1.0;

  std::vector<double> cost(n * n);
  double scale = 1.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double s = (r < rows && c < cols) ? scores.at(r, c) : sentinel;
      cost[r * n + c] = -s;
      scale = std::max(scale, std::abs(s));
    }
  }

  const HungarianResult solved = solve_min_cost(cost, n);

  // Every optimal matching lives on the tight edges of an optimal dual, so
  // lexicographic tie-breaking reduces to a search on that graph.
  const double eps = 1e-9 * scale * static_cast<double>(n);
  std::vector<char> tight(n * n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double reduced = cost[r * n + c] - solved.u[r] - solved.v[c];
      tight[r * n + c] = std::abs(reduced) <= eps ? 1 : 0;
    }
  }
  for (std::size_t r = 0; r < n; ++r) tight[r * n + solved.row_to_col[r]] = 1;
  TightMatching graph(n, std::move(tight), solved.row_to_col);

  // Fast path: each real row has exactly one tight outcome (a real column,
  // or "unmatched" via any padded column), so the optimum is unique.
  bool unique = true;
  for (std::size_t r = 0; r < rows && unique; ++r) {
    std::size_t outcomes = 0;
    bool any_padded = false;
    for (std::size_t c = 0; c < n; ++c) {
      if (!graph.tight(r, c)) continue;
      if (c < cols) {
        ++outcomes;
      } else {
        any_padded = true;
      }
    }
    if (any_padded) ++outcomes;
    unique = outcomes == 1;
  }

  std::vector<std::size_t> row_to_col(rows, kNone);
  if (unique) {
    for (std::size_t r = 0; r < rows; ++r) row_to_col[r] = solved.row_to_col[r];
  } else {
    for (std::size_t r = 0; r < rows; ++r) {
      // Real columns in ascending order first, then the padded columns, which
      // are interchangeable, so only the first free one is worth trying.
      for (std::size_t c = 0; c < n; ++c) {
        if (graph.col_used(c) || !graph.tight(r, c)) continue;
        if (graph.try_fix(r, c)) {
          row_to_col[r] = c;
          break;
        }
        if (c >= cols) break;
      }
      // The previous rows were fixed only when a completion existed, so some
      // column must work for this row.
      if (row_to_col[r] == kNone) throw std::logic_error("max_assignment: lost feasibility");
    }
  }

  std::vector<char> col_taken(cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t c = row_to_col[r];
    if (c < cols) {
      result.pairs.emplace_back(r, c);
      result.total += scores.at(r, c);
      col_taken[c] = 1;
    } else {
      result.unmatched_rows.push_back(r);
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (!col_taken[c]) result.unmatched_cols.push_back(c);
  }
  return result;
}

}  // namespace csr
