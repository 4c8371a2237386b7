#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nngs/tensor.hpp"

namespace nngs {

// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = 0;
};

// Reverse-mode differentiation over vector-valued primitives.
//
// Values live in one arena owned by the tape. Parameters are leaves that
// alias an external Tensor and accumulate their gradient into an external
// Tensor, so one model can be recorded on many tapes. Every primitive checks
// its output for NaN/Inf and throws NonFinite.
//
// Subgradients at kinks are fixed at zero: d|x|/dx at 0 and dReLU/dx at 0.
class Tape {
 public:
  Var constant(std::span<const double> values);
  Var constant(double value) { return constant(std::span<const double>(&value, 1)); }
  // `grad` may be null for a parameter that should not receive gradients.
  Var parameter(const Tensor& value, Tensor* grad);

  Var matvec(Var w, Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var softmax(Var a);
  Var manhattan(Var a, Var b);
  Var logsumexp(Var a);
  Var concat(Var a, Var b);
  Var pick(Var a, std::size_t i);

  std::span<const double> value(Var v) const;
  double scalar(Var v) const;
  std::size_t rows(Var v) const { return nodes_[v.id].rows; }
  std::size_t cols(Var v) const { return nodes_[v.id].cols; }

  // Propagates d(out)/d(.) scaled by `seed` to every recorded value and into
  // parameter gradient tensors (accumulating). `out` must be a scalar.
  void backward(Var out, double seed = 1.0);
  // Gradient of a non-parameter value after backward().
  std::span<const double> grad(Var v) const;

  // Drops all records but keeps arena capacity.
  void clear();
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    Constant,
    Parameter,
    MatVec,
    Add,
    Sub,
    Mul,
    Scale,
    Sigmoid,
    Tanh,
    Relu,
    Softmax,
    Manhattan,
    LogSumExp,
    Concat,
    Pick,
  };

  struct Node {
    Op op;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;  // into values_/grads_ for non-parameters
    const double* external = nullptr;
    double* external_grad = nullptr;
    double param = 0.0;  // scale factor or picked index
  };

  Var push(Op op, std::uint32_t a, std::uint32_t b, std::size_t rows, std::size_t cols);
  const double* vptr(std::uint32_t id) const;
  double* gptr(std::uint32_t id);
  void check_finite(Var v, const char* op) const;
  void require_same_shape(Var a, Var b, const char* op) const;

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
};

struct NamedParameter {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  bool passed = false;
};

// Compares tape gradients against central finite differences, coordinate by
// coordinate. `loss` records a scalar on the given tape using the parameter
// tensors it captures. Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckReport grad_check(const std::function<Var(Tape&)>& loss,
                           std::span<const NamedParameter> params, double eps, double tol,
                           double floor = 1e-6);

}  // namespace nngs
