#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace nngs {

// Dense row-major matrix of doubles. Vectors are rows x 1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::size_t rows, std::size_t cols = 1, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Tensor vector(std::initializer_list<double> values);
  static Tensor from(std::span<const double> values, std::size_t rows, std::size_t cols = 1);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Shared kernels. Each fixes its floating-point accumulation order so that
// every caller (serial, batched, recorded) produces bit-identical results.
namespace kernels {

// y = W x, W is rows x cols. Each output is accumulated left to right from 0.
void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);

double sigmoid(double x);

// Sum of |a_i - b_i|, accumulated left to right.
double manhattan(std::span<const double> a, std::span<const double> b);

// log(sum exp(v)) computed with the max shift.
double logsumexp(std::span<const double> v);

void softmax(std::span<const double> v, std::span<double> out);

}  // namespace kernels

}  // namespace nngs
