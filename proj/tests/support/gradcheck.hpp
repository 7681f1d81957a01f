#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "synlm/numcore/lstm.hpp"
#include "synlm/numcore/ops.hpp"
#include "synlm/numcore/tape.hpp"

namespace synlm::testing {

using num::Var;
using ScalarFn = std::function<Var(const std::vector<Var>&)>;

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;
};

inline Var random_leaf(num::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(num::shape_size(shape));
  for (double& x : v) x = u(rng);
  Var t = num::make_tensor(std::move(shape), std::move(v));
  t->requires_grad = true;
  return t;
}

/// Reduces any output to a scalar through fixed random weights, so every
/// output entry contributes a distinct upstream gradient.
inline Var project(const Var& out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> w(out->size());
  for (double& x : w) x = u(rng);
  return num::sum(num::mul(out, num::make_tensor(out->shape, std::move(w))));
}

/// Central differences against the tape gradient. Relative error is
/// |analytic - numeric| / max(|analytic| + |numeric|, 1e-8).
inline GradCheck grad_check(const std::vector<Var>& inputs, const ScalarFn& f, double h = 1e-5) {
  for (const auto& in : inputs) {
    in->grad.clear();
    in->ensure_grad();
  }
  num::Tape tape;
  {
    num::TapeScope scope(tape);
    Var loss = f(inputs);
    tape.backward(loss);
  }
  GradCheck out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Var in = inputs[i];
    if (!in->requires_grad) continue;
    for (std::size_t j = 0; j < in->size(); ++j) {
      const double orig = in->values[j];
      in->values[j] = orig + h;
      const double up = f(inputs)->values[0];
      in->values[j] = orig - h;
      const double down = f(inputs)->values[0];
      in->values[j] = orig;
      const double numeric = (up - down) / (2 * h);
      const double analytic = in->grad[j];
      const double rel = std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-8);
      ++out.checked;
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = "input " + std::to_string(i) + "[" + std::to_string(j) + "]: analytic " +
                    std::to_string(analytic) + " numeric " + std::to_string(numeric);
      }
    }
  }
  return out;
}

/// One differentiable operation with a generator of random instances.
struct OpCase {
  std::string name;
  std::function<std::vector<Var>(std::mt19937_64&)> make_inputs;
  ScalarFn fn;
};

inline std::vector<Var> away_from_zero(std::vector<Var> xs) {
  for (auto& x : xs) {
    for (double& v : x->values) {
      if (std::abs(v) < 0.05) v = v < 0 ? -0.05 : 0.05;
    }
  }
  return xs;
}

/// Every differentiable numcore operation, including the composite LSTM
/// step and the bidirectional composition.
inline std::vector<OpCase> op_cases() {
  using num::Shape;
  std::vector<OpCase> cases;
  auto leaves = [](std::vector<Shape> shapes) {
    return [shapes](std::mt19937_64& rng) {
      std::vector<Var> out;
      for (const auto& s : shapes) out.push_back(random_leaf(s, rng));
      return out;
    };
  };
  cases.push_back({"add", leaves({{5}, {5}}), [](const auto& in) { return project(num::add(in[0], in[1]), 1); }});
  cases.push_back({"sub", leaves({{5}, {5}}), [](const auto& in) { return project(num::sub(in[0], in[1]), 2); }});
  cases.push_back({"mul", leaves({{5}, {5}}), [](const auto& in) { return project(num::mul(in[0], in[1]), 3); }});
  cases.push_back({"scale", leaves({{6}}), [](const auto& in) { return project(num::scale(in[0], -1.7), 4); }});
  cases.push_back({"sigmoid", leaves({{6}}), [](const auto& in) { return project(num::sigmoid(in[0]), 5); }});
  cases.push_back({"tanh", leaves({{6}}), [](const auto& in) { return project(num::tanh(in[0]), 6); }});
  cases.push_back({"relu", [](std::mt19937_64& rng) { return away_from_zero({random_leaf({6}, rng)}); },
                   [](const auto& in) { return project(num::relu(in[0]), 7); }});
  cases.push_back({"matvec", leaves({{3, 4}, {4}}), [](const auto& in) { return project(num::matvec(in[0], in[1]), 8); }});
  cases.push_back({"affine", leaves({{3}, {3, 4}, {4}, {3, 2}, {2}}), [](const auto& in) {
                     return project(num::affine(in[0], {{in[1], in[2]}, {in[3], in[4]}}), 9);
                   }});
  cases.push_back({"concat", leaves({{2}, {3}, {1}}), [](const auto& in) {
                     return project(num::concat(std::span<const Var>(in.data(), in.size())), 10);
                   }});
  cases.push_back({"slice", leaves({{7}}), [](const auto& in) { return project(num::slice(in[0], 2, 4), 11); }});
  cases.push_back({"sum", leaves({{5}}), [](const auto& in) { return num::scale(num::sum(in[0]), 0.3); }});
  cases.push_back({"add_n", leaves({{4}, {4}, {4}}), [](const auto& in) {
                     return project(num::add_n(std::span<const Var>(in.data(), in.size())), 12);
                   }});
  cases.push_back({"lookup", leaves({{4, 3}}), [](const auto& in) { return project(num::lookup(in[0], 2), 13); }});
  cases.push_back({"dropout", leaves({{8}}), [](const auto& in) {
                     std::mt19937_64 rng(99);  // same mask on every evaluation
                     return project(num::dropout(in[0], 0.4, rng), 14);
                   }});
  cases.push_back({"log_softmax", leaves({{5}}), [](const auto& in) { return project(num::log_softmax(in[0]), 15); }});
  cases.push_back({"log_softmax_masked", leaves({{5}}), [](const auto& in) {
                     const std::vector<std::uint8_t> mask{1, 0, 1, 1, 0};
                     Var ls = num::log_softmax(in[0], mask);
                     // Only legal entries are finite.
                     return num::add_n(std::vector<Var>{num::pick(ls, 0), num::scale(num::pick(ls, 2), 0.5),
                                                        num::scale(num::pick(ls, 3), -0.8)});
                   }});
  cases.push_back({"pick", leaves({{5}}), [](const auto& in) { return num::pick(in[0], 3); }});
  cases.push_back({"softmax_cross_entropy", leaves({{6}}),
                   [](const auto& in) { return num::softmax_cross_entropy(in[0], 4); }});
  cases.push_back({"softmax_cross_entropy_masked", leaves({{6}}), [](const auto& in) {
                     const std::vector<std::uint8_t> mask{1, 1, 0, 1, 0, 1};
                     return num::softmax_cross_entropy(in[0], 3, mask);
                   }});
  cases.push_back({"lstm_gates", leaves({{12}, {3}}), [](const auto& in) { return project(num::lstm_gates(in[0], in[1]), 16); }});
  cases.push_back({"lstm_step", leaves({{12, 7}, {12}, {4}, {3}, {3}}), [](const auto& in) {
                     num::LstmCellParams p{4, 3, in[0], in[1]};
                     const auto out = num::lstm_step(p, in[2], in[3], in[4]);
                     return num::add(project(out.h, 17), project(out.c, 18));
                   }});
  cases.push_back({"bilstm_compose", leaves({{12, 6}, {12}, {12, 6}, {12}, {3, 6}, {3}, {3}, {3}, {3}}),
                   [](const auto& in) {
                     num::ComposeParams p{{3, 3, in[0], in[1]}, {3, 3, in[2], in[3]}, in[4], in[5]};
                     const std::vector<Var> children{in[7], in[8]};
                     return project(num::bilstm_compose(p, children, in[6]), 19);
                   }});
  return cases;
}

}  // namespace synlm::testing
