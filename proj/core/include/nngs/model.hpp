#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nngs/expr.hpp"
#include "nngs/rewrite.hpp"
#include "nngs/tape.hpp"
#include "nngs/tensor.hpp"

namespace nngs {

struct ModelConfig {
  static constexpr std::size_t kInputDim = kSymbolCount;  // one-hot alphabet
  static constexpr std::size_t kBranching = 2;
  static constexpr std::size_t kClasses = kTransformationCount;

  std::size_t memory_dim = 32;
  std::vector<std::size_t> hidden = {128, 64, 32};

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct DenseLayer {
  Tensor weight;  // out x in
  Tensor bias;    // out
};

// One parameter set shared by both siamese branches.
//
// Input matrices are stored M x I so that W x is a plain matrix-vector
// product. u_f[k][l] maps the hidden state of child l into the forget gate of
// child k.
struct ModelParams {
  Tensor w_i, w_o, w_u, w_f;
  std::array<Tensor, 2> u_i, u_o, u_u;
  std::array<std::array<Tensor, 2>, 2> u_f;
  Tensor b_i, b_o, b_u, b_f;
  std::vector<DenseLayer> classifier;  // 2M -> hidden... -> classes

  // All-zero parameters shaped for cfg.
  static ModelParams zeros(const ModelConfig& cfg);

  // Visits every tensor with a stable name, in file order.
  void for_each(const std::function<void(std::string_view, Tensor&)>& f);
  void for_each(const std::function<void(std::string_view, const Tensor&)>& f) const;

  std::size_t parameter_count() const;
  void fill(double v);
};

struct NodeState {
  std::vector<double> c;
  std::vector<double> h;
};

// N-ary Tree-LSTM unit with N = 2. Missing children (leaves, or the second
// slot of a focus node) contribute zero (c, h) and their terms are skipped.
NodeState tree_lstm_unit(std::span<const double> x, std::span<const NodeState* const> children,
                         const ModelParams& params);

class Model {
 public:
  explicit Model(ModelConfig cfg = {});

  // Tree-LSTM and classifier weights uniform in [-1/sqrt(M), 1/sqrt(M)],
  // biases zero.
  static Model initialized(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return cfg_; }
  std::size_t memory_dim() const noexcept { return cfg_.memory_dim; }
  ModelParams& params() noexcept { return params_; }
  const ModelParams& params() const noexcept { return params_; }

  // Root hidden state of a bottom-up fold of the unit over the tree.
  std::vector<double> embed(const Expr& e) const;
  // Two-stack recurrent emulation across a batch; equal to embed() per tree.
  std::vector<std::vector<double>> batch_embed(std::span<const Expr> exprs) const;

  double distance(std::span<const double> a, std::span<const double> b) const;
  std::array<double, ModelConfig::kClasses> logits(std::span<const double> a,
                                                   std::span<const double> b) const;

  double predict_distance(const Expr& a, const Expr& b) const;
  std::array<double, ModelConfig::kClasses> predict_first_transformation(const Expr& a,
                                                                         const Expr& b) const;

 private:
  ModelConfig cfg_;
  ModelParams params_;
};

// Recurrent execution of the Tree-LSTM over post-order (value, arity)
// sequences. Each lane keeps a stack of node representations and a stack of
// pointers into it. Shorter sequences are padded at the front with inert
// steps, so all lanes finish on the same step.
class BatchExecutor {
 public:
  BatchExecutor(const Model& model, std::span<const Expr> exprs);

  bool done() const noexcept { return step_ == steps_; }
  std::size_t step_index() const noexcept { return step_; }
  std::size_t total_steps() const noexcept { return steps_; }
  void step();
  void run();

  // Symbol the lane processes on the next step, or nullopt for a padding step
  // or when finished.
  std::optional<Symbol> next_symbol(std::size_t lane) const;
  const std::vector<NodeState>& representations(std::size_t lane) const {
    return lanes_[lane].reps;
  }
  const std::vector<std::size_t>& pointers(std::size_t lane) const { return lanes_[lane].ptrs; }

  std::vector<std::vector<double>> results() const;

 private:
  struct Lane {
    PostOrderSeq seq;
    std::size_t start = 0;  // first non-padding step
    std::vector<NodeState> reps;
    std::vector<std::size_t> ptrs;
  };

  const Model& model_;
  std::vector<Lane> lanes_;
  std::size_t steps_ = 0;
  std::size_t step_ = 0;
};

// Parameters registered on a tape for one forward/backward pass.
struct TapeParams {
  Var w_i, w_o, w_u, w_f;
  std::array<Var, 2> u_i, u_o, u_u;
  std::array<std::array<Var, 2>, 2> u_f;
  Var b_i, b_o, b_u, b_f;
  std::vector<std::pair<Var, Var>> classifier;
};

// `grads` receives accumulated gradients (may be null for inference).
TapeParams record_params(Tape& tape, const ModelParams& params, ModelParams* grads);
Var record_embed(Tape& tape, const TapeParams& p, const Expr& e);
Var record_logits(Tape& tape, const TapeParams& p, Var a, Var b);

// Text format: header with format version and dimensions, then every tensor
// by name with shortest round-trip decimal values.
void save_model(const Model& model, std::ostream& out);
void save_model(const Model& model, const std::string& path);
Model load_model(std::istream& in);
Model load_model(const std::string& path);

}  // namespace nngs
