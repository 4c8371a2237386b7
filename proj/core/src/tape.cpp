#include "nngs/tape.hpp"

#include <algorithm>
#include <cmath>

#include "nngs/errors.hpp"

namespace nngs {

Var Tape::push(Op op, std::uint32_t a, std::uint32_t b, std::size_t rows, std::size_t cols) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.rows = rows;
  n.cols = cols;
  n.offset = values_.size();
  values_.resize(values_.size() + rows * cols);
  nodes_.push_back(n);
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const double* Tape::vptr(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.op == Op::Parameter ? n.external : values_.data() + n.offset;
}

double* Tape::gptr(std::uint32_t id) {
  Node& n = nodes_[id];
  return n.op == Op::Parameter ? n.external_grad : grads_.data() + n.offset;
}

std::span<const double> Tape::value(Var v) const {
  const Node& n = nodes_[v.id];
  return {vptr(v.id), n.rows * n.cols};
}

double Tape::scalar(Var v) const {
  if (nodes_[v.id].rows * nodes_[v.id].cols != 1) {
    throw ShapeMismatch("scalar() on a non-scalar value");
  }
  return *vptr(v.id);
}

std::span<const double> Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.op == Op::Parameter) {
    throw ShapeMismatch("parameter gradients live in their external tensor");
  }
  if (grads_.size() < values_.size()) {
    throw ShapeMismatch("grad() before backward()");
  }
  return {grads_.data() + n.offset, n.rows * n.cols};
}

void Tape::check_finite(Var v, const char* op) const {
  for (double x : value(v)) {
    if (!std::isfinite(x)) {
      throw NonFinite(std::string("non-finite value produced by ") + op);
    }
  }
}

void Tape::require_same_shape(Var a, Var b, const char* op) const {
  if (nodes_[a.id].rows != nodes_[b.id].rows || nodes_[a.id].cols != nodes_[b.id].cols) {
    throw ShapeMismatch(std::string(op) + ": operand shapes differ");
  }
}

void Tape::clear() {
  nodes_.clear();
  values_.clear();
  grads_.clear();
}

Var Tape::constant(std::span<const double> values) {
  Var v = push(Op::Constant, 0, 0, values.size(), 1);
  std::copy(values.begin(), values.end(), values_.begin() + static_cast<std::ptrdiff_t>(nodes_[v.id].offset));
  check_finite(v, "constant");
  return v;
}

Var Tape::parameter(const Tensor& value, Tensor* grad) {
  if (grad && grad->size() != value.size()) {
    throw ShapeMismatch("parameter gradient tensor has the wrong size");
  }
  Node n;
  n.op = Op::Parameter;
  n.rows = value.rows();
  n.cols = value.cols();
  n.offset = values_.size();
  n.external = value.data().data();
  n.external_grad = grad ? grad->data().data() : nullptr;
  nodes_.push_back(n);
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::matvec(Var w, Var x) {
  const std::size_t rows = nodes_[w.id].rows;
  const std::size_t cols = nodes_[w.id].cols;
  if (nodes_[x.id].rows * nodes_[x.id].cols != cols) {
    throw ShapeMismatch("matvec: matrix columns do not match vector length");
  }
  Var y = push(Op::MatVec, w.id, x.id, rows, 1);
  kernels::matvec({vptr(w.id), rows * cols}, rows, cols, {vptr(x.id), cols},
                  {values_.data() + nodes_[y.id].offset, rows});
  check_finite(y, "matvec");
  return y;
}

namespace {

template <class F>
void zip(const double* a, const double* b, double* out, std::size_t n, F f) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = f(a[i], b[i]);
  }
}

}  // namespace

Var Tape::add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Var y = push(Op::Add, a.id, b.id, nodes_[a.id].rows, nodes_[a.id].cols);
  zip(vptr(a.id), vptr(b.id), values_.data() + nodes_[y.id].offset, value(y).size(),
      [](double p, double q) { return p + q; });
  check_finite(y, "add");
  return y;
}

Var Tape::sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Var y = push(Op::Sub, a.id, b.id, nodes_[a.id].rows, nodes_[a.id].cols);
  zip(vptr(a.id), vptr(b.id), values_.data() + nodes_[y.id].offset, value(y).size(),
      [](double p, double q) { return p - q; });
  check_finite(y, "sub");
  return y;
}

Var Tape::mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Var y = push(Op::Mul, a.id, b.id, nodes_[a.id].rows, nodes_[a.id].cols);
  zip(vptr(a.id), vptr(b.id), values_.data() + nodes_[y.id].offset, value(y).size(),
      [](double p, double q) { return p * q; });
  check_finite(y, "mul");
  return y;
}

Var Tape::scale(Var a, double s) {
  Var y = push(Op::Scale, a.id, 0, nodes_[a.id].rows, nodes_[a.id].cols);
  nodes_[y.id].param = s;
  const double* in = vptr(a.id);
  double* out = values_.data() + nodes_[y.id].offset;
  for (std::size_t i = 0; i < value(y).size(); ++i) {
    out[i] = s * in[i];
  }
  check_finite(y, "scale");
  return y;
}

#define NNGS_UNARY(method, opcode, expr)                                \
  Var Tape::method(Var a) {                                              \
    Var y = push(Op::opcode, a.id, 0, nodes_[a.id].rows, nodes_[a.id].cols); \
    const double* in = vptr(a.id);                                       \
    double* out = values_.data() + nodes_[y.id].offset;                  \
    for (std::size_t i = 0; i < value(y).size(); ++i) {                  \
      const double x = in[i];                                            \
      out[i] = (expr);                                                   \
    }                                                                    \
    check_finite(y, #method);                                            \
    return y;                                                            \
  }

NNGS_UNARY(sigmoid, Sigmoid, kernels::sigmoid(x))
NNGS_UNARY(tanh, Tanh, std::tanh(x))
NNGS_UNARY(relu, Relu, x >= 0.0 ? x : 0.0)

#undef NNGS_UNARY

Var Tape::softmax(Var a) {
  Var y = push(Op::Softmax, a.id, 0, nodes_[a.id].rows, nodes_[a.id].cols);
  const std::size_t n = value(y).size();
  kernels::softmax({vptr(a.id), n}, {values_.data() + nodes_[y.id].offset, n});
  check_finite(y, "softmax");
  return y;
}

Var Tape::manhattan(Var a, Var b) {
  require_same_shape(a, b, "manhattan");
  const std::size_t n = value(a).size();
  Var y = push(Op::Manhattan, a.id, b.id, 1, 1);
  values_[nodes_[y.id].offset] = kernels::manhattan({vptr(a.id), n}, {vptr(b.id), n});
  check_finite(y, "manhattan");
  return y;
}

Var Tape::logsumexp(Var a) {
  const std::size_t n = value(a).size();
  Var y = push(Op::LogSumExp, a.id, 0, 1, 1);
  values_[nodes_[y.id].offset] = kernels::logsumexp({vptr(a.id), n});
  check_finite(y, "logsumexp");
  return y;
}

Var Tape::concat(Var a, Var b) {
  const std::size_t na = value(a).size();
  const std::size_t nb = value(b).size();
  Var y = push(Op::Concat, a.id, b.id, na + nb, 1);
  double* out = values_.data() + nodes_[y.id].offset;
  std::copy_n(vptr(a.id), na, out);
  std::copy_n(vptr(b.id), nb, out + na);
  return y;
}

Var Tape::pick(Var a, std::size_t i) {
  if (i >= value(a).size()) {
    throw ShapeMismatch("pick: index out of range");
  }
  Var y = push(Op::Pick, a.id, 0, 1, 1);
  nodes_[y.id].param = static_cast<double>(i);
  values_[nodes_[y.id].offset] = vptr(a.id)[i];
  return y;
}

void Tape::backward(Var out, double seed) {
  if (nodes_[out.id].rows * nodes_[out.id].cols != 1) {
    throw ShapeMismatch("backward() needs a scalar output");
  }
  grads_.assign(values_.size(), 0.0);
  if (double* g = gptr(out.id)) {
    *g = seed;
  }
  for (std::uint32_t id = out.id + 1; id-- > 0;) {
    const Node n = nodes_[id];
    if (n.op == Op::Constant || n.op == Op::Parameter) {
      continue;
    }
    const std::size_t size = n.rows * n.cols;
    const double* g = grads_.data() + n.offset;
    const double* y = values_.data() + n.offset;
    if (std::all_of(g, g + size, [](double v) { return v == 0.0; })) {
      continue;
    }
    double* ga = gptr(n.a);
    const double* va = vptr(n.a);
    switch (n.op) {
      case Op::MatVec: {
        const std::size_t cols = nodes_[n.a].cols;
        double* gx = gptr(n.b);
        const double* x = vptr(n.b);
        if (ga) {
          for (std::size_t r = 0; r < n.rows; ++r) {
            if (g[r] == 0.0) {
              continue;
            }
            double* row = ga + r * cols;
            for (std::size_t c = 0; c < cols; ++c) {
              row[c] += g[r] * x[c];
            }
          }
        }
        if (gx) {
          for (std::size_t r = 0; r < n.rows; ++r) {
            const double* row = va + r * cols;
            for (std::size_t c = 0; c < cols; ++c) {
              gx[c] += row[c] * g[r];
            }
          }
        }
        break;
      }
      case Op::Add:
      case Op::Sub: {
        double* gb = gptr(n.b);
        const double sign = n.op == Op::Add ? 1.0 : -1.0;
        for (std::size_t i = 0; i < size; ++i) {
          if (ga) ga[i] += g[i];
          if (gb) gb[i] += sign * g[i];
        }
        break;
      }
      case Op::Mul: {
        double* gb = gptr(n.b);
        const double* vb = vptr(n.b);
        for (std::size_t i = 0; i < size; ++i) {
          if (ga) ga[i] += g[i] * vb[i];
          if (gb) gb[i] += g[i] * va[i];
        }
        break;
      }
      case Op::Scale:
        if (ga) {
          for (std::size_t i = 0; i < size; ++i) ga[i] += n.param * g[i];
        }
        break;
      case Op::Sigmoid:
        if (ga) {
          for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
        }
        break;
      case Op::Tanh:
        if (ga) {
          for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
        }
        break;
      case Op::Relu:
        if (ga) {
          for (std::size_t i = 0; i < size; ++i) ga[i] += va[i] > 0.0 ? g[i] : 0.0;
        }
        break;
      case Op::Softmax:
        if (ga) {
          double dot = 0.0;
          for (std::size_t i = 0; i < size; ++i) dot += g[i] * y[i];
          for (std::size_t i = 0; i < size; ++i) ga[i] += y[i] * (g[i] - dot);
        }
        break;
      case Op::Manhattan: {
        double* gb = gptr(n.b);
        const double* vb = vptr(n.b);
        const std::size_t len = nodes_[n.a].rows * nodes_[n.a].cols;
        for (std::size_t i = 0; i < len; ++i) {
          const double d = va[i] - vb[i];
          const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
          if (ga) ga[i] += g[0] * s;
          if (gb) gb[i] -= g[0] * s;
        }
        break;
      }
      case Op::LogSumExp:
        if (ga) {
          const std::size_t len = nodes_[n.a].rows * nodes_[n.a].cols;
          for (std::size_t i = 0; i < len; ++i) ga[i] += g[0] * std::exp(va[i] - y[0]);
        }
        break;
      case Op::Concat: {
        const std::size_t na = nodes_[n.a].rows * nodes_[n.a].cols;
        double* gb = gptr(n.b);
        for (std::size_t i = 0; i < na; ++i) {
          if (ga) ga[i] += g[i];
        }
        for (std::size_t i = na; i < size; ++i) {
          if (gb) gb[i - na] += g[i];
        }
        break;
      }
      case Op::Pick:
        if (ga) ga[static_cast<std::size_t>(n.param)] += g[0];
        break;
      case Op::Constant:
      case Op::Parameter:
        break;
    }
  }
}

GradCheckReport grad_check(const std::function<Var(Tape&)>& loss,
                           std::span<const NamedParameter> params, double eps, double tol,
                           double floor) {
  GradCheckReport report;
  for (const auto& p : params) {
    p.grad->fill(0.0);
  }
  Tape tape;
  tape.backward(loss(tape));

  auto evaluate = [&] {
    Tape t;
    return t.scalar(loss(t));
  };
  for (const auto& p : params) {
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      double& x = (*p.value)[i];
      const double saved = x;
      x = saved + eps;
      const double up = evaluate();
      x = saved - eps;
      const double down = evaluate();
      x = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = (*p.grad)[i];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), floor});
      ++report.checked;
      if (rel > report.max_rel_error || report.checked == 1) {
        report.max_rel_error = rel;
        report.worst_parameter = p.name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace nngs
