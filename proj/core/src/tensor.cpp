#include "nngs/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "nngs/errors.hpp"

namespace nngs {

Tensor Tensor::vector(std::initializer_list<double> values) {
  Tensor t(values.size(), 1);
  std::copy(values.begin(), values.end(), t.data_.begin());
  return t;
}

Tensor Tensor::from(std::span<const double> values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) {
    throw ShapeMismatch("tensor data does not match shape");
  }
  Tensor t(rows, cols);
  std::copy(values.begin(), values.end(), t.data_.begin());
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace kernels {

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      acc += row[c] * x[c];
    }
    y[r] = acc;
  }
}

double sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double manhattan(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += std::abs(a[i] - b[i]);
  }
  return acc;
}

double logsumexp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) {
    acc += std::exp(x - m);
  }
  return m + std::log(acc);
}

void softmax(std::span<const double> v, std::span<double> out) {
  const double m = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    acc += out[i];
  }
  for (double& o : out) {
    o /= acc;
  }
}

}  // namespace kernels

}  // namespace nngs
