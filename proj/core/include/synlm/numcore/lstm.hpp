#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "synlm/numcore/parameters.hpp"
#include "synlm/numcore/tensor.hpp"

namespace synlm::num {

/// One LSTM cell. `weight` is [4H, I+H] acting on concat(x, h_prev), with
/// gate row blocks ordered input, forget, output, candidate.
struct LstmCellParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Var weight;
  Var bias;

  static LstmCellParams create(ParameterSet& params, const std::string& prefix,
                               std::size_t input_dim, std::size_t hidden_dim);
};

struct LstmCellOutput {
  Var h;
  Var c;
};

LstmCellOutput lstm_step(const LstmCellParams& params, const Var& x, const Var& h_prev,
                         const Var& c_prev);

/// Training-time dropout source; a null pointer means evaluation mode.
struct DropoutContext {
  double rate = 0.0;
  std::mt19937_64* rng = nullptr;
};

Var maybe_dropout(const Var& x, const DropoutContext* ctx);

/// Recurrent state of a multi-layer LSTM: one (h, c) pair per layer.
struct LstmState {
  std::vector<Var> h;
  std::vector<Var> c;
  const Var& output() const { return h.back(); }
};

/// Stacked LSTM. Dropout is applied to the input of every layer.
class StackedLstm {
 public:
  StackedLstm() = default;
  StackedLstm(ParameterSet& params, const std::string& prefix, std::size_t layers,
              std::size_t input_dim, std::size_t hidden_dim);

  LstmState initial_state() const;
  LstmState step(const LstmState& state, const Var& x, const DropoutContext* dropout) const;

  std::size_t hidden_dim() const { return hidden_dim_; }
  std::size_t layers() const { return cells_.size(); }

 private:
  std::vector<LstmCellParams> cells_;
  std::size_t hidden_dim_ = 0;
};

/// Bidirectional composition of a constituent, as performed on REDUCE.
struct ComposeParams {
  LstmCellParams forward;
  LstmCellParams backward;
  Var weight;  // [dim, 2*dim]
  Var bias;    // [dim]

  static ComposeParams create(ParameterSet& params, const std::string& prefix, std::size_t dim);
};

/// The forward cell reads [label, c_1, ..., c_n] and the backward cell reads
/// [label, c_n, ..., c_1]; both final states feed tanh(W [h_fwd; h_bwd] + b).
/// Throws InvalidReduceError on an empty child list.
Var bilstm_compose(const ComposeParams& params, std::span<const Var> children,
                   const Var& label_embedding, const DropoutContext* dropout = nullptr);

}  // namespace synlm::num
