#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "synlm/numcore/tensor.hpp"

namespace synlm::num {

// Elementwise arithmetic on same-shape operands.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);

Var sigmoid(const Var& x);
Var tanh(const Var& x);
Var relu(const Var& x);

/// W[rows, cols] * x[cols].
Var matvec(const Var& weight, const Var& x);

/// bias + sum_i W_i x_i, fused so that only one node lands on the tape.
Var affine(const Var& bias, const std::vector<std::pair<Var, Var>>& terms);

Var concat(std::span<const Var> parts);
Var slice(const Var& x, std::size_t offset, std::size_t length);

/// Sum of all entries, as a scalar.
Var sum(const Var& x);
/// Elementwise sum of any number of same-shape operands.
Var add_n(std::span<const Var> terms);

/// Row `row` of an embedding table [rows, dim].
Var lookup(const Var& table, std::size_t row);

/// Inverted dropout: survivors are scaled by 1/(1-rate). rate == 0 returns x.
Var dropout(const Var& x, double rate, std::mt19937_64& rng);

/// Log-softmax restricted to `legal` (when non-empty); illegal entries are -inf.
Var log_softmax(const Var& logits, std::span<const std::uint8_t> legal = {});

/// Plain-value counterpart of log_softmax used on inference paths.
std::vector<double> log_softmax_values(std::span<const double> logits,
                                       std::span<const std::uint8_t> legal = {});

Var pick(const Var& x, std::size_t index);

/// -log softmax(logits)[target], max-subtracted; optionally masked.
Var softmax_cross_entropy(const Var& logits, std::size_t target,
                          std::span<const std::uint8_t> legal = {});

/// Fused LSTM gate nonlinearity. `pre` holds [i, f, o, g] pre-activations
/// (4H); returns [h, c] (2H) with c = σ(f)⊙c_prev + σ(i)⊙tanh(g) and
/// h = σ(o)⊙tanh(c).
Var lstm_gates(const Var& pre, const Var& c_prev);

}  // namespace synlm::num
