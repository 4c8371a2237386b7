#include "nngs/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "nngs/errors.hpp"
#include "nngs/rng.hpp"

namespace nngs {

namespace {

constexpr std::string_view kMagic = "nngs-model";
constexpr int kFormatVersion = 1;

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& cfg) {
  const std::size_t m = cfg.memory_dim;
  const std::size_t in = ModelConfig::kInputDim;
  if (m == 0) {
    throw DomainError("memory dimension must be positive");
  }
  ModelParams p;
  for (Tensor* w : {&p.w_i, &p.w_o, &p.w_u, &p.w_f}) {
    *w = Tensor(m, in);
  }
  for (std::size_t l = 0; l < 2; ++l) {
    p.u_i[l] = Tensor(m, m);
    p.u_o[l] = Tensor(m, m);
    p.u_u[l] = Tensor(m, m);
    for (std::size_t k = 0; k < 2; ++k) {
      p.u_f[k][l] = Tensor(m, m);
    }
  }
  for (Tensor* b : {&p.b_i, &p.b_o, &p.b_u, &p.b_f}) {
    *b = Tensor(m);
  }
  std::size_t prev = 2 * m;
  std::vector<std::size_t> sizes = cfg.hidden;
  sizes.push_back(ModelConfig::kClasses);
  for (std::size_t out : sizes) {
    if (out == 0) {
      throw DomainError("classifier layer sizes must be positive");
    }
    p.classifier.push_back({Tensor(out, prev), Tensor(out)});
    prev = out;
  }
  return p;
}

namespace {

template <class Params, class F>
void visit(Params& p, F&& f) {
  f("W_i", p.w_i);
  f("W_o", p.w_o);
  f("W_u", p.w_u);
  f("W_f", p.w_f);
  static constexpr const char* kU[3][2] = {{"U_i_1", "U_i_2"}, {"U_o_1", "U_o_2"}, {"U_u_1", "U_u_2"}};
  for (std::size_t l = 0; l < 2; ++l) {
    f(kU[0][l], p.u_i[l]);
  }
  for (std::size_t l = 0; l < 2; ++l) {
    f(kU[1][l], p.u_o[l]);
  }
  for (std::size_t l = 0; l < 2; ++l) {
    f(kU[2][l], p.u_u[l]);
  }
  static constexpr const char* kUf[2][2] = {{"U_f_11", "U_f_12"}, {"U_f_21", "U_f_22"}};
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t l = 0; l < 2; ++l) {
      f(kUf[k][l], p.u_f[k][l]);
    }
  }
  f("b_i", p.b_i);
  f("b_o", p.b_o);
  f("b_u", p.b_u);
  f("b_f", p.b_f);
  for (std::size_t i = 0; i < p.classifier.size(); ++i) {
    const std::string base = "fc" + std::to_string(i + 1);
    f(base + ".weight", p.classifier[i].weight);
    f(base + ".bias", p.classifier[i].bias);
  }
}

}  // namespace

void ModelParams::for_each(const std::function<void(std::string_view, Tensor&)>& f) {
  visit(*this, [&](std::string_view n, Tensor& t) { f(n, t); });
}

void ModelParams::for_each(const std::function<void(std::string_view, const Tensor&)>& f) const {
  visit(*this, [&](std::string_view n, const Tensor& t) { f(n, t); });
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const Tensor& t) { n += t.size(); });
  return n;
}

void ModelParams::fill(double v) {
  for_each([&](std::string_view, Tensor& t) { t.fill(v); });
}

namespace {

// out = out + W v, with W v formed first so the rounding matches the tape.
void add_matvec(const Tensor& w, std::span<const double> v, std::vector<double>& scratch,
                std::vector<double>& out) {
  scratch.resize(w.rows());
  kernels::matvec(w.data(), w.rows(), w.cols(), v, scratch);
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = out[r] + scratch[r];
  }
}

void add_vec(std::span<const double> b, std::vector<double>& out) {
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = out[r] + b[r];
  }
}

}  // namespace

NodeState tree_lstm_unit(std::span<const double> x, std::span<const NodeState* const> children,
                         const ModelParams& p) {
  const std::size_t m = p.b_i.size();
  if (x.size() != p.w_i.cols()) {
    throw ShapeMismatch("unit input has the wrong dimension");
  }
  if (children.size() > ModelConfig::kBranching) {
    throw ShapeMismatch("unit accepts at most two children");
  }
  for (const NodeState* ch : children) {
    if (ch && (ch->c.size() != m || ch->h.size() != m)) {
      throw ShapeMismatch("child state has the wrong dimension");
    }
  }
  std::vector<double> scratch(m);
  auto gate = [&](const Tensor& w, const std::array<const Tensor*, 2>& u, const Tensor& b) {
    std::vector<double> z(m);
    kernels::matvec(w.data(), m, w.cols(), x, z);
    for (std::size_t l = 0; l < children.size(); ++l) {
      if (children[l]) {
        add_matvec(*u[l], children[l]->h, scratch, z);
      }
    }
    add_vec(b.data(), z);
    return z;
  };

  std::vector<double> i = gate(p.w_i, {&p.u_i[0], &p.u_i[1]}, p.b_i);
  std::vector<double> o = gate(p.w_o, {&p.u_o[0], &p.u_o[1]}, p.b_o);
  std::vector<double> u = gate(p.w_u, {&p.u_u[0], &p.u_u[1]}, p.b_u);
  for (std::size_t r = 0; r < m; ++r) {
    i[r] = kernels::sigmoid(i[r]);
    o[r] = kernels::sigmoid(o[r]);
    u[r] = std::tanh(u[r]);
  }

  NodeState out;
  out.c.resize(m);
  for (std::size_t r = 0; r < m; ++r) {
    out.c[r] = i[r] * u[r];
  }
  for (std::size_t k = 0; k < children.size(); ++k) {
    if (!children[k]) {
      continue;
    }
    std::vector<double> f = gate(p.w_f, {&p.u_f[k][0], &p.u_f[k][1]}, p.b_f);
    for (std::size_t r = 0; r < m; ++r) {
      out.c[r] = out.c[r] + kernels::sigmoid(f[r]) * children[k]->c[r];
    }
  }
  out.h.resize(m);
  for (std::size_t r = 0; r < m; ++r) {
    out.h[r] = o[r] * std::tanh(out.c[r]);
  }
  return out;
}

Model::Model(ModelConfig cfg) : cfg_(std::move(cfg)), params_(ModelParams::zeros(cfg_)) {}

Model Model::initialized(ModelConfig cfg, std::uint64_t seed) {
  Model model(std::move(cfg));
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(model.cfg_.memory_dim));
  model.params_.for_each([&](std::string_view name, Tensor& t) {
    const bool is_bias = name.starts_with("b_") || name.ends_with(".bias");
    if (is_bias) {
      return;
    }
    for (double& v : t.data()) {
      v = rng.uniform(-bound, bound);
    }
  });
  return model;
}

namespace {

// Folds the unit over the prefix sequence starting at `pos`.
NodeState embed_at(const std::string& prefix, std::size_t& pos, const ModelParams& p) {
  const Symbol s = symbol_from_token(prefix[pos++]);
  const auto x = one_hot(s);
  const int k = arity(s);
  if (k == 0) {
    return tree_lstm_unit(x, {}, p);
  }
  NodeState left = embed_at(prefix, pos, p);
  if (k == 1) {
    const NodeState* kids[1] = {&left};
    return tree_lstm_unit(x, kids, p);
  }
  NodeState right = embed_at(prefix, pos, p);
  const NodeState* kids[2] = {&left, &right};
  return tree_lstm_unit(x, kids, p);
}

}  // namespace

std::vector<double> Model::embed(const Expr& e) const {
  std::size_t pos = 0;
  return embed_at(e.prefix(), pos, params_).h;
}

std::vector<std::vector<double>> Model::batch_embed(std::span<const Expr> exprs) const {
  BatchExecutor exec(*this, exprs);
  exec.run();
  return exec.results();
}

double Model::distance(std::span<const double> a, std::span<const double> b) const {
  if (a.size() != b.size()) {
    throw ShapeMismatch("embeddings differ in dimension");
  }
  return kernels::manhattan(a, b);
}

std::array<double, ModelConfig::kClasses> Model::logits(std::span<const double> a,
                                                        std::span<const double> b) const {
  std::vector<double> x(a.begin(), a.end());
  x.insert(x.end(), b.begin(), b.end());
  std::vector<double> y;
  for (std::size_t l = 0; l < params_.classifier.size(); ++l) {
    const DenseLayer& layer = params_.classifier[l];
    if (x.size() != layer.weight.cols()) {
      throw ShapeMismatch("classifier input has the wrong dimension");
    }
    y.assign(layer.weight.rows(), 0.0);
    kernels::matvec(layer.weight.data(), layer.weight.rows(), layer.weight.cols(), x, y);
    add_vec(layer.bias.data(), y);
    if (l + 1 < params_.classifier.size()) {
      for (double& v : y) {
        v = v >= 0.0 ? v : 0.0;
      }
    }
    x.swap(y);
  }
  std::array<double, ModelConfig::kClasses> out{};
  std::copy(x.begin(), x.end(), out.begin());
  return out;
}

double Model::predict_distance(const Expr& a, const Expr& b) const {
  return distance(embed(a), embed(b));
}

std::array<double, ModelConfig::kClasses> Model::predict_first_transformation(const Expr& a,
                                                                              const Expr& b) const {
  return logits(embed(a), embed(b));
}

BatchExecutor::BatchExecutor(const Model& model, std::span<const Expr> exprs) : model_(model) {
  lanes_.reserve(exprs.size());
  for (const Expr& e : exprs) {
    Lane lane;
    lane.seq = encode_postorder(e);
    steps_ = std::max(steps_, lane.seq.values.size());
    lanes_.push_back(std::move(lane));
  }
  for (Lane& lane : lanes_) {
    lane.start = steps_ - lane.seq.values.size();
    lane.reps.reserve(lane.seq.values.size());
  }
}

std::optional<Symbol> BatchExecutor::next_symbol(std::size_t lane) const {
  const Lane& l = lanes_[lane];
  if (done() || step_ < l.start) {
    return std::nullopt;
  }
  return l.seq.values[step_ - l.start];
}

void BatchExecutor::step() {
  if (done()) {
    return;
  }
  for (Lane& lane : lanes_) {
    if (step_ < lane.start) {
      continue;  // padding step: nothing is pushed
    }
    const std::size_t pos = step_ - lane.start;
    const Symbol s = lane.seq.values[pos];
    const std::size_t n = lane.seq.arities[pos];
    // The pointers to the n children sit on top of the pointer stack.
    std::array<const NodeState*, 2> kids{};
    for (std::size_t j = 0; j < n; ++j) {
      kids[j] = &lane.reps[lane.ptrs[lane.ptrs.size() - n + j]];
    }
    const auto x = one_hot(s);
    NodeState rep = tree_lstm_unit(x, std::span<const NodeState* const>(kids.data(), n),
                                   model_.params());
    lane.reps.push_back(std::move(rep));
    lane.ptrs.resize(lane.ptrs.size() - n);
    lane.ptrs.push_back(lane.reps.size() - 1);
  }
  ++step_;
}

void BatchExecutor::run() {
  while (!done()) {
    step();
  }
}

std::vector<std::vector<double>> BatchExecutor::results() const {
  std::vector<std::vector<double>> out;
  out.reserve(lanes_.size());
  for (const Lane& lane : lanes_) {
    if (!done() || lane.ptrs.size() != 1) {
      throw ShapeMismatch("batch execution has not finished");
    }
    out.push_back(lane.reps[lane.ptrs.back()].h);
  }
  return out;
}

TapeParams record_params(Tape& tape, const ModelParams& params, ModelParams* grads) {
  TapeParams tp;
  auto reg = [&](const Tensor& v, Tensor* g) { return tape.parameter(v, g); };
  auto g = [&](auto member) -> Tensor* { return grads ? &(grads->*member) : nullptr; };
  tp.w_i = reg(params.w_i, g(&ModelParams::w_i));
  tp.w_o = reg(params.w_o, g(&ModelParams::w_o));
  tp.w_u = reg(params.w_u, g(&ModelParams::w_u));
  tp.w_f = reg(params.w_f, g(&ModelParams::w_f));
  for (std::size_t l = 0; l < 2; ++l) {
    tp.u_i[l] = reg(params.u_i[l], grads ? &grads->u_i[l] : nullptr);
    tp.u_o[l] = reg(params.u_o[l], grads ? &grads->u_o[l] : nullptr);
    tp.u_u[l] = reg(params.u_u[l], grads ? &grads->u_u[l] : nullptr);
    for (std::size_t k = 0; k < 2; ++k) {
      tp.u_f[k][l] = reg(params.u_f[k][l], grads ? &grads->u_f[k][l] : nullptr);
    }
  }
  tp.b_i = reg(params.b_i, g(&ModelParams::b_i));
  tp.b_o = reg(params.b_o, g(&ModelParams::b_o));
  tp.b_u = reg(params.b_u, g(&ModelParams::b_u));
  tp.b_f = reg(params.b_f, g(&ModelParams::b_f));
  for (std::size_t i = 0; i < params.classifier.size(); ++i) {
    tp.classifier.emplace_back(
        reg(params.classifier[i].weight, grads ? &grads->classifier[i].weight : nullptr),
        reg(params.classifier[i].bias, grads ? &grads->classifier[i].bias : nullptr));
  }
  return tp;
}

namespace {

struct TapeState {
  Var c;
  Var h;
};

TapeState record_unit(Tape& tape, const TapeParams& p, Symbol s,
                      std::span<const TapeState> children) {
  const auto onehot = one_hot(s);
  const Var x = tape.constant(onehot);
  auto gate = [&](Var w, const std::array<Var, 2>& u, Var b) {
    Var z = tape.matvec(w, x);
    for (std::size_t l = 0; l < children.size(); ++l) {
      z = tape.add(z, tape.matvec(u[l], children[l].h));
    }
    return tape.add(z, b);
  };
  const Var i = tape.sigmoid(gate(p.w_i, p.u_i, p.b_i));
  const Var o = tape.sigmoid(gate(p.w_o, p.u_o, p.b_o));
  const Var u = tape.tanh(gate(p.w_u, p.u_u, p.b_u));
  Var c = tape.mul(i, u);
  for (std::size_t k = 0; k < children.size(); ++k) {
    const Var f = tape.sigmoid(gate(p.w_f, p.u_f[k], p.b_f));
    c = tape.add(c, tape.mul(f, children[k].c));
  }
  return {c, tape.mul(o, tape.tanh(c))};
}

TapeState record_at(Tape& tape, const TapeParams& p, const std::string& prefix, std::size_t& pos) {
  const Symbol s = symbol_from_token(prefix[pos++]);
  const int k = arity(s);
  std::array<TapeState, 2> kids{};
  for (int j = 0; j < k; ++j) {
    kids[static_cast<std::size_t>(j)] = record_at(tape, p, prefix, pos);
  }
  return record_unit(tape, p, s, std::span<const TapeState>(kids.data(), static_cast<std::size_t>(k)));
}

}  // namespace

Var record_embed(Tape& tape, const TapeParams& p, const Expr& e) {
  std::size_t pos = 0;
  return record_at(tape, p, e.prefix(), pos).h;
}

Var record_logits(Tape& tape, const TapeParams& p, Var a, Var b) {
  Var x = tape.concat(a, b);
  for (std::size_t l = 0; l < p.classifier.size(); ++l) {
    x = tape.add(tape.matvec(p.classifier[l].first, x), p.classifier[l].second);
    if (l + 1 < p.classifier.size()) {
      x = tape.relu(x);
    }
  }
  return x;
}

void save_model(const Model& model, std::ostream& out) {
  const ModelConfig& cfg = model.config();
  out << kMagic << " v" << kFormatVersion << '\n';
  out << "input_dim " << ModelConfig::kInputDim << '\n';
  out << "branching " << ModelConfig::kBranching << '\n';
  out << "memory_dim " << cfg.memory_dim << '\n';
  out << "hidden";
  for (std::size_t h : cfg.hidden) {
    out << ' ' << h;
  }
  out << '\n';
  out << "classes " << ModelConfig::kClasses << '\n';
  char buf[64];
  model.params().for_each([&](std::string_view name, const Tensor& t) {
    out << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
    for (std::size_t r = 0; r < t.rows(); ++r) {
      for (std::size_t c = 0; c < t.cols(); ++c) {
        auto res = std::to_chars(buf, buf + sizeof buf, t(r, c));
        if (c > 0) {
          out << ' ';
        }
        out.write(buf, res.ptr - buf);
      }
      out << '\n';
    }
  });
  out << "end\n";
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot write model file " + path);
  }
  save_model(model, out);
  if (!out) {
    throw FormatError("failed writing model file " + path);
  }
}

namespace {

std::string expect_word(std::istream& in, const char* what) {
  std::string w;
  if (!(in >> w)) {
    throw FormatError(std::string("truncated model file: expected ") + what);
  }
  return w;
}

std::size_t expect_size(std::istream& in, const char* what) {
  const std::string w = expect_word(in, what);
  std::size_t v = 0;
  auto res = std::from_chars(w.data(), w.data() + w.size(), v);
  if (res.ec != std::errc() || res.ptr != w.data() + w.size()) {
    throw FormatError(std::string("bad integer for ") + what + ": '" + w + "'");
  }
  return v;
}

void expect_key(std::istream& in, const char* key) {
  const std::string w = expect_word(in, key);
  if (w != key) {
    throw FormatError("expected '" + std::string(key) + "', got '" + w + "'");
  }
}

}  // namespace

Model load_model(std::istream& in) {
  if (expect_word(in, "magic") != kMagic) {
    throw FormatError("not a model file");
  }
  const std::string version = expect_word(in, "version");
  if (version != "v" + std::to_string(kFormatVersion)) {
    throw VersionMismatch("unsupported model format version " + version);
  }
  expect_key(in, "input_dim");
  if (expect_size(in, "input_dim") != ModelConfig::kInputDim) {
    throw FormatError("input_dim must be 6");
  }
  expect_key(in, "branching");
  if (expect_size(in, "branching") != ModelConfig::kBranching) {
    throw FormatError("branching must be 2");
  }
  ModelConfig cfg;
  expect_key(in, "memory_dim");
  cfg.memory_dim = expect_size(in, "memory_dim");
  expect_key(in, "hidden");
  cfg.hidden.clear();
  std::string line;
  std::getline(in, line);
  {
    std::istringstream hs(line);
    std::size_t h;
    while (hs >> h) {
      cfg.hidden.push_back(h);
    }
    if (!hs.eof()) {
      throw FormatError("bad hidden layer sizes");
    }
  }
  expect_key(in, "classes");
  if (expect_size(in, "classes") != ModelConfig::kClasses) {
    throw FormatError("classes must be 8");
  }
  Model model;
  try {
    model = Model(cfg);
  } catch (const DomainError& err) {
    throw FormatError(std::string("inconsistent header: ") + err.what());
  }
  model.params().for_each([&](std::string_view name, Tensor& t) {
    expect_key(in, "tensor");
    const std::string got = expect_word(in, "tensor name");
    if (got != name) {
      throw FormatError("expected tensor " + std::string(name) + ", got " + got);
    }
    const std::size_t rows = expect_size(in, "rows");
    const std::size_t cols = expect_size(in, "cols");
    if (rows != t.rows() || cols != t.cols()) {
      throw FormatError("tensor " + got + " has dimensions inconsistent with the header");
    }
    for (double& v : t.data()) {
      const std::string w = expect_word(in, "tensor value");
      auto res = std::from_chars(w.data(), w.data() + w.size(), v);
      if (res.ec != std::errc() || res.ptr != w.data() + w.size() || !std::isfinite(v)) {
        throw FormatError("bad value in tensor " + got + ": '" + w + "'");
      }
    }
  });
  expect_key(in, "end");
  return model;
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open model file " + path);
  }
  return load_model(in);
}

}  // namespace nngs
