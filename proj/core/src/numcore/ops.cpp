#include "synlm/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "synlm/errors.hpp"
#include "synlm/numcore/tape.hpp"

namespace synlm::num {

namespace {

Tape* recording_tape(std::initializer_list<const Var*> inputs) {
  Tape* tape = active_tape();
  if (tape == nullptr) return nullptr;
  for (const Var* v : inputs) {
    if ((*v)->requires_grad) return tape;
  }
  return nullptr;
}

Tape* recording_tape(std::span<const Var> inputs) {
  Tape* tape = active_tape();
  if (tape == nullptr) return nullptr;
  for (const Var& v : inputs) {
    if (v->requires_grad) return tape;
  }
  return nullptr;
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a->shape != b->shape) {
    throw DimensionError(std::string(op) + ": operand 'b' has shape " + shape_string(b->shape) +
                         ", expected " + shape_string(a->shape) + " to match operand 'a'");
  }
}

void require_vector(const char* op, const char* name, const Var& x) {
  if (x->shape.size() != 1) {
    throw DimensionError(std::string(op) + ": operand '" + name + "' must be a vector, got shape " +
                         shape_string(x->shape));
  }
}

void require_matrix(const char* op, const char* name, const Var& x) {
  if (x->shape.size() != 2) {
    throw DimensionError(std::string(op) + ": operand '" + name + "' must be a matrix, got shape " +
                         shape_string(x->shape));
  }
}

Var like(const Var& x) {
  auto t = std::make_shared<Tensor>();
  t->shape = x->shape;
  t->values.resize(x->size());
  return t;
}

Var with_shape(Shape shape) {
  auto t = std::make_shared<Tensor>();
  t->values.resize(shape_size(shape));
  t->shape = std::move(shape);
  return t;
}

void accumulate(const Var& target, std::size_t i, double g) {
  if (!target->requires_grad) return;
  target->ensure_grad();
  target->grad[i] += g;
}

template <typename Fn>
Var unary_map(const Var& x, Fn fn) {
  Var out = like(x);
  for (std::size_t i = 0; i < x->size(); ++i) out->values[i] = fn(x->values[i]);
  return out;
}

void check_mask(const char* op, const Var& logits, std::span<const std::uint8_t> legal) {
  if (!legal.empty() && legal.size() != logits->size()) {
    throw DimensionError(std::string(op) + ": mask has " + std::to_string(legal.size()) +
                         " entries for " + std::to_string(logits->size()) + " logits");
  }
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a, b);
  Var out = like(a);
  for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] + b->values[i];
  if (Tape* tape = recording_tape({&a, &b})) {
    tape->record(out, [a, b, out] {
      for (std::size_t i = 0; i < out->size(); ++i) {
        accumulate(a, i, out->grad[i]);
        accumulate(b, i, out->grad[i]);
      }
    });
  }
  return out;
}

Var sub(const Var& a, const Var& b) {
  require_same_shape("sub", a, b);
  Var out = like(a);
  for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] - b->values[i];
  if (Tape* tape = recording_tape({&a, &b})) {
    tape->record(out, [a, b, out] {
      for (std::size_t i = 0; i < out->size(); ++i) {
        accumulate(a, i, out->grad[i]);
        accumulate(b, i, -out->grad[i]);
      }
    });
  }
  return out;
}

Var mul(const Var& a, const Var& b) {
  require_same_shape("mul", a, b);
  Var out = like(a);
  for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] * b->values[i];
  if (Tape* tape = recording_tape({&a, &b})) {
    tape->record(out, [a, b, out] {
      for (std::size_t i = 0; i < out->size(); ++i) {
        accumulate(a, i, out->grad[i] * b->values[i]);
        accumulate(b, i, out->grad[i] * a->values[i]);
      }
    });
  }
  return out;
}

Var scale(const Var& a, double factor) {
  Var out = unary_map(a, [factor](double v) { return v * factor; });
  if (Tape* tape = recording_tape({&a})) {
    tape->record(out, [a, out, factor] {
      for (std::size_t i = 0; i < out->size(); ++i) accumulate(a, i, out->grad[i] * factor);
    });
  }
  return out;
}

Var sigmoid(const Var& x) {
  Var out = unary_map(x, [](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  if (Tape* tape = recording_tape({&x})) {
    tape->record(out, [x, out] {
      for (std::size_t i = 0; i < out->size(); ++i) {
        const double s = out->values[i];
        accumulate(x, i, out->grad[i] * s * (1.0 - s));
      }
    });
  }
  return out;
}

Var tanh(const Var& x) {
  Var out = unary_map(x, [](double v) { return std::tanh(v); });
  if (Tape* tape = recording_tape({&x})) {
    tape->record(out, [x, out] {
      for (std::size_t i = 0; i < out->size(); ++i) {
        const double t = out->values[i];
        accumulate(x, i, out->grad[i] * (1.0 - t * t));
      }
    });
  }
  return out;
}

Var relu(const Var& x) {
  Var out = unary_map(x, [](double v) { return v > 0 ? v : 0.0; });
  if (Tape* tape = recording_tape({&x})) {
    tape->record(out, [x, out] {
      for (std::size_t i = 0; i < out->size(); ++i) {
        if (x->values[i] > 0) accumulate(x, i, out->grad[i]);
      }
    });
  }
  return out;
}

Var matvec(const Var& weight, const Var& x) {
  require_matrix("matvec", "weight", weight);
  require_vector("matvec", "x", x);
  if (weight->shape[1] != x->size()) {
    throw DimensionError("matvec: operand 'x' has " + std::to_string(x->size()) + " entries, expected " +
                         std::to_string(weight->shape[1]) + " for weight " + shape_string(weight->shape));
  }
  return affine(zeros({weight->shape.empty() ? 1 : weight->shape[0]}), {{weight, x}});
}

Var affine(const Var& bias, const std::vector<std::pair<Var, Var>>& terms) {
  require_vector("affine", "bias", bias);
  const std::size_t rows = bias->size();
  for (const auto& [w, x] : terms) {
    require_matrix("affine", "weight", w);
    require_vector("affine", "x", x);
    if (w->shape[0] != rows) {
      throw DimensionError("affine: operand 'weight' has shape " + shape_string(w->shape) +
                           ", expected " + std::to_string(rows) + " rows to match bias");
    }
    if (w->shape[1] != x->size()) {
      throw DimensionError("affine: operand 'x' has shape " + shape_string(x->shape) +
                           ", expected [" + std::to_string(w->shape[1]) + "] to match weight " +
                           shape_string(w->shape));
    }
  }
  Var out = like(bias);
  double* y = out->values.data();
  std::copy(bias->values.begin(), bias->values.end(), y);
  for (const auto& [w, x] : terms) {
    const std::size_t cols = x->size();
    const double* wp = w->values.data();
    const double* xp = x->values.data();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* row = wp + r * cols;
      double acc = 0.0;
      for (std::size_t c = 0; c < cols; ++c) acc += row[c] * xp[c];
      y[r] += acc;
    }
  }

  Tape* tape = active_tape();
  bool record = tape != nullptr && bias->requires_grad;
  for (const auto& [w, x] : terms) record = record || (tape && (w->requires_grad || x->requires_grad));
  if (record) {
    tape->record(out, [bias, terms, out] {
      const double* gy = out->grad.data();
      const std::size_t rows = out->size();
      if (bias->requires_grad) {
        bias->ensure_grad();
        for (std::size_t r = 0; r < rows; ++r) bias->grad[r] += gy[r];
      }
      for (const auto& [w, x] : terms) {
        const std::size_t cols = x->size();
        if (w->requires_grad) {
          w->ensure_grad();
          double* gw = w->grad.data();
          for (std::size_t r = 0; r < rows; ++r) {
            const double g = gy[r];
            if (g == 0.0) continue;
            double* grow = gw + r * cols;
            for (std::size_t c = 0; c < cols; ++c) grow[c] += g * x->values[c];
          }
        }
        if (x->requires_grad) {
          x->ensure_grad();
          double* gx = x->grad.data();
          const double* wp = w->values.data();
          for (std::size_t r = 0; r < rows; ++r) {
            const double g = gy[r];
            if (g == 0.0) continue;
            const double* row = wp + r * cols;
            for (std::size_t c = 0; c < cols; ++c) gx[c] += g * row[c];
          }
        }
      }
    });
  }
  return out;
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat: no operands");
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_vector("concat", "part", p);
    total += p->size();
  }
  Var out = with_shape({total});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p->values.begin(), p->values.end(), out->values.begin() + offset);
    offset += p->size();
  }
  if (Tape* tape = recording_tape(parts)) {
    std::vector<Var> inputs(parts.begin(), parts.end());
    tape->record(out, [inputs, out] {
      std::size_t offset = 0;
      for (const Var& p : inputs) {
        if (p->requires_grad) {
          p->ensure_grad();
          for (std::size_t i = 0; i < p->size(); ++i) p->grad[i] += out->grad[offset + i];
        }
        offset += p->size();
      }
    });
  }
  return out;
}

Var slice(const Var& x, std::size_t offset, std::size_t length) {
  require_vector("slice", "x", x);
  if (length == 0 || offset + length > x->size()) {
    throw DimensionError("slice: range [" + std::to_string(offset) + ", " +
                         std::to_string(offset + length) + ") outside operand 'x' of shape " +
                         shape_string(x->shape));
  }
  Var out = with_shape({length});
  std::copy_n(x->values.begin() + static_cast<std::ptrdiff_t>(offset), length, out->values.begin());
  if (Tape* tape = recording_tape({&x})) {
    tape->record(out, [x, out, offset] {
      for (std::size_t i = 0; i < out->size(); ++i) accumulate(x, offset + i, out->grad[i]);
    });
  }
  return out;
}

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x->values) total += v;
  Var out = scalar(total);
  if (Tape* tape = recording_tape({&x})) {
    tape->record(out, [x, out] {
      for (std::size_t i = 0; i < x->size(); ++i) accumulate(x, i, out->grad[0]);
    });
  }
  return out;
}

Var add_n(std::span<const Var> terms) {
  if (terms.empty()) throw DimensionError("add_n: no operands");
  Var out = like(terms.front());
  for (const Var& t : terms) {
    require_same_shape("add_n", terms.front(), t);
    for (std::size_t i = 0; i < t->size(); ++i) out->values[i] += t->values[i];
  }
  if (Tape* tape = recording_tape(terms)) {
    std::vector<Var> inputs(terms.begin(), terms.end());
    tape->record(out, [inputs, out] {
      for (const Var& t : inputs) {
        if (!t->requires_grad) continue;
        t->ensure_grad();
        for (std::size_t i = 0; i < t->size(); ++i) t->grad[i] += out->grad[i];
      }
    });
  }
  return out;
}

Var lookup(const Var& table, std::size_t row) {
  require_matrix("lookup", "table", table);
  if (row >= table->shape[0]) {
    throw IndexError("lookup: row " + std::to_string(row) + " out of range for table of shape " +
                     shape_string(table->shape));
  }
  const std::size_t dim = table->shape[1];
  Var out = with_shape({dim});
  std::copy_n(table->values.begin() + static_cast<std::ptrdiff_t>(row * dim), dim,
              out->values.begin());
  if (Tape* tape = recording_tape({&table})) {
    tape->record(out, [table, out, row, dim] {
      table->ensure_grad();
      for (std::size_t i = 0; i < dim; ++i) table->grad[row * dim + i] += out->grad[i];
    });
  }
  return out;
}

Var dropout(const Var& x, double rate, std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) throw DimensionError("dropout: rate must lie in [0, 1)");
  if (rate == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  const double boost = 1.0 / (1.0 - rate);
  std::vector<double> mask(x->size());
  for (double& m : mask) m = keep(rng) ? boost : 0.0;
  Var out = like(x);
  for (std::size_t i = 0; i < x->size(); ++i) out->values[i] = x->values[i] * mask[i];
  if (Tape* tape = recording_tape({&x})) {
    tape->record(out, [x, out, mask = std::move(mask)] {
      for (std::size_t i = 0; i < out->size(); ++i) accumulate(x, i, out->grad[i] * mask[i]);
    });
  }
  return out;
}

std::vector<double> log_softmax_values(std::span<const double> logits, std::span<const std::uint8_t> legal) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double max_logit = kNegInf;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (legal.empty() || legal[i]) max_logit = std::max(max_logit, logits[i]);
  }
  std::vector<double> out(logits.size(), kNegInf);
  if (max_logit == kNegInf) return out;
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (legal.empty() || legal[i]) z += std::exp(logits[i] - max_logit);
  }
  const double log_z = max_logit + std::log(z);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (legal.empty() || legal[i]) out[i] = logits[i] - log_z;
  }
  return out;
}

Var log_softmax(const Var& logits, std::span<const std::uint8_t> legal) {
  require_vector("log_softmax", "logits", logits);
  check_mask("log_softmax", logits, legal);
  Var out = like(logits);
  out->values = log_softmax_values(logits->values, legal);
  if (Tape* tape = recording_tape({&logits})) {
    std::vector<std::uint8_t> mask(legal.begin(), legal.end());
    tape->record(out, [logits, out, mask = std::move(mask)] {
      // d/dx_j sum_i g_i (x_i - lse) = g_j - p_j * sum_i g_i, over legal entries.
      double gsum = 0.0;
      for (std::size_t i = 0; i < out->size(); ++i) {
        if (mask.empty() || mask[i]) gsum += out->grad[i];
      }
      for (std::size_t j = 0; j < out->size(); ++j) {
        if (!mask.empty() && !mask[j]) continue;
        accumulate(logits, j, out->grad[j] - std::exp(out->values[j]) * gsum);
      }
    });
  }
  return out;
}

Var pick(const Var& x, std::size_t index) {
  if (index >= x->size()) {
    throw IndexError("pick: index " + std::to_string(index) + " out of range for shape " +
                     shape_string(x->shape));
  }
  Var out = scalar(x->values[index]);
  if (Tape* tape = recording_tape({&x})) {
    tape->record(out, [x, out, index] { accumulate(x, index, out->grad[0]); });
  }
  return out;
}

Var softmax_cross_entropy(const Var& logits, std::size_t target, std::span<const std::uint8_t> legal) {
  require_vector("softmax_cross_entropy", "logits", logits);
  check_mask("softmax_cross_entropy", logits, legal);
  if (target >= logits->size()) {
    throw IndexError("softmax_cross_entropy: target " + std::to_string(target) +
                     " out of range for " + std::to_string(logits->size()) + " classes");
  }
  if (!legal.empty() && !legal[target]) {
    throw IndexError("softmax_cross_entropy: target " + std::to_string(target) + " is masked out");
  }
  std::vector<double> logp = log_softmax_values(logits->values, legal);
  Var out = scalar(-logp[target]);
  if (Tape* tape = recording_tape({&logits})) {
    tape->record(out, [logits, out, target, logp = std::move(logp)] {
      const double g = out->grad[0];
      for (std::size_t j = 0; j < logp.size(); ++j) {
        if (std::isinf(logp[j])) continue;
        const double p = std::exp(logp[j]);
        accumulate(logits, j, g * (p - (j == target ? 1.0 : 0.0)));
      }
    });
  }
  return out;
}

Var lstm_gates(const Var& pre, const Var& c_prev) {
  require_vector("lstm_gates", "pre", pre);
  require_vector("lstm_gates", "c_prev", c_prev);
  const std::size_t h = c_prev->size();
  if (pre->size() != 4 * h) {
    throw DimensionError("lstm_gates: operand 'pre' has shape " + shape_string(pre->shape) +
                         ", expected [" + std::to_string(4 * h) + "]");
  }
  auto sig = [](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  };
  // cache: i, f, o, g(tanh), tanh(c)
  std::vector<double> cache(5 * h);
  Var out = with_shape({2 * h});
  for (std::size_t k = 0; k < h; ++k) {
    const double i = sig(pre->values[k]);
    const double f = sig(pre->values[h + k]);
    const double o = sig(pre->values[2 * h + k]);
    const double g = std::tanh(pre->values[3 * h + k]);
    const double c = f * c_prev->values[k] + i * g;
    const double tc = std::tanh(c);
    out->values[k] = o * tc;
    out->values[h + k] = c;
    cache[k] = i;
    cache[h + k] = f;
    cache[2 * h + k] = o;
    cache[3 * h + k] = g;
    cache[4 * h + k] = tc;
  }
  if (Tape* tape = recording_tape({&pre, &c_prev})) {
    tape->record(out, [pre, c_prev, out, h, cache = std::move(cache)] {
      for (std::size_t k = 0; k < h; ++k) {
        const double i = cache[k], f = cache[h + k], o = cache[2 * h + k];
        const double g = cache[3 * h + k], tc = cache[4 * h + k];
        const double dh = out->grad[k];
        const double dc = out->grad[h + k] + dh * o * (1.0 - tc * tc);
        accumulate(pre, k, dc * g * i * (1.0 - i));
        accumulate(pre, h + k, dc * c_prev->values[k] * f * (1.0 - f));
        accumulate(pre, 2 * h + k, dh * tc * o * (1.0 - o));
        accumulate(pre, 3 * h + k, dc * i * (1.0 - g * g));
        accumulate(c_prev, k, dc * f);
      }
    });
  }
  return out;
}

}  // namespace synlm::num
