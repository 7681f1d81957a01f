#include "synlm/numcore/lstm.hpp"

#include <array>

#include "synlm/errors.hpp"
#include "synlm/numcore/ops.hpp"

namespace synlm::num {

LstmCellParams LstmCellParams::create(ParameterSet& params, const std::string& prefix,
                                      std::size_t input_dim, std::size_t hidden_dim) {
  LstmCellParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.weight = params.add(prefix + ".weight", {4 * hidden_dim, input_dim + hidden_dim}, InitKind::kWeight);
  p.bias = params.add(prefix + ".bias", {4 * hidden_dim}, InitKind::kLstmBias);
  return p;
}

LstmCellOutput lstm_step(const LstmCellParams& params, const Var& x, const Var& h_prev,
                         const Var& c_prev) {
  auto check = [](const char* name, const Var& v, std::size_t dim) {
    if (v->shape.size() != 1 || v->size() != dim) {
      throw DimensionError(std::string("lstm_step: operand '") + name + "' has shape " +
                           shape_string(v->shape) + ", expected [" + std::to_string(dim) + "]");
    }
  };
  check("x", x, params.input_dim);
  check("h_prev", h_prev, params.hidden_dim);
  check("c_prev", c_prev, params.hidden_dim);
  const std::array<Var, 2> parts{x, h_prev};
  Var pre = affine(params.bias, {{params.weight, concat(parts)}});
  Var hc = lstm_gates(pre, c_prev);
  return {slice(hc, 0, params.hidden_dim), slice(hc, params.hidden_dim, params.hidden_dim)};
}

Var maybe_dropout(const Var& x, const DropoutContext* ctx) {
  if (ctx == nullptr || ctx->rng == nullptr || ctx->rate == 0.0) return x;
  return dropout(x, ctx->rate, *ctx->rng);
}

StackedLstm::StackedLstm(ParameterSet& params, const std::string& prefix, std::size_t layers,
                         std::size_t input_dim, std::size_t hidden_dim)
    : hidden_dim_(hidden_dim) {
  if (layers == 0) throw DimensionError("StackedLstm: need at least one layer");
  for (std::size_t l = 0; l < layers; ++l) {
    cells_.push_back(LstmCellParams::create(params, prefix + ".l" + std::to_string(l),
                                            l == 0 ? input_dim : hidden_dim, hidden_dim));
  }
}

LstmState StackedLstm::initial_state() const {
  LstmState s;
  Var zero = zeros({hidden_dim_});
  s.h.assign(cells_.size(), zero);
  s.c.assign(cells_.size(), zero);
  return s;
}

LstmState StackedLstm::step(const LstmState& state, const Var& x, const DropoutContext* dropout) const {
  LstmState next;
  next.h.reserve(cells_.size());
  next.c.reserve(cells_.size());
  Var input = x;
  for (std::size_t l = 0; l < cells_.size(); ++l) {
    LstmCellOutput out = lstm_step(cells_[l], maybe_dropout(input, dropout), state.h[l], state.c[l]);
    next.h.push_back(out.h);
    next.c.push_back(out.c);
    input = out.h;
  }
  return next;
}

ComposeParams ComposeParams::create(ParameterSet& params, const std::string& prefix, std::size_t dim) {
  ComposeParams p;
  p.forward = LstmCellParams::create(params, prefix + ".fwd", dim, dim);
  p.backward = LstmCellParams::create(params, prefix + ".bwd", dim, dim);
  p.weight = params.add(prefix + ".weight", {dim, 2 * dim}, InitKind::kWeight);
  p.bias = params.add(prefix + ".bias", {dim}, InitKind::kZero);
  return p;
}

Var bilstm_compose(const ComposeParams& params, std::span<const Var> children,
                   const Var& label_embedding, const DropoutContext* dropout) {
  if (children.empty()) throw InvalidReduceError("bilstm_compose: constituent has no children");
  const std::size_t dim = params.forward.hidden_dim;
  Var zero = zeros({dim});

  LstmCellOutput fwd = lstm_step(params.forward, label_embedding, zero, zero);
  for (const Var& child : children) fwd = lstm_step(params.forward, child, fwd.h, fwd.c);

  LstmCellOutput bwd = lstm_step(params.backward, label_embedding, zero, zero);
  for (auto it = children.rbegin(); it != children.rend(); ++it) {
    bwd = lstm_step(params.backward, *it, bwd.h, bwd.c);
  }

  const std::array<Var, 2> both{maybe_dropout(fwd.h, dropout), maybe_dropout(bwd.h, dropout)};
  return tanh(affine(params.bias, {{params.weight, concat(both)}}));
}

}  // namespace synlm::num
