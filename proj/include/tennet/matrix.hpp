#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace tennet {

// Dense row-major matrix of doubles: a(r, c) = data[r * cols + c].
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows),
        cols_(cols),
        a_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
           0.0) {
    assert(rows >= 0 && cols >= 0);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return a_.size(); }

  double& operator()(int r, int c) { return a_[idx(r, c)]; }
  double operator()(int r, int c) const { return a_[idx(r, c)]; }

  double* row(int r) { return a_.data() + idx(r, 0); }
  const double* row(int r) const { return a_.data() + idx(r, 0); }

  std::span<double> row_span(int r) { return {row(r), static_cast<std::size_t>(cols_)}; }
  std::span<const double> row_span(int r) const { return {row(r), static_cast<std::size_t>(cols_)}; }

  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  void fill(double v) { a_.assign(a_.size(), v); }

  // Reshape without preserving contents; reuses capacity when possible.
  void resize(int rows, int cols) {
    rows_ = rows;
    cols_ = cols;
    a_.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t idx(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

// Dot product with a fixed summation order: four parallel accumulators,
// then a sequential tail. The order never depends on the optimizer, so
// results are identical run to run for a given binary.
inline double dot(const double* a, const double* b, int n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3)) + tail;
}

// y += alpha * x
inline void axpy(double alpha, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace tennet
