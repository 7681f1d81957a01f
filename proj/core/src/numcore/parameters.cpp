#include "synlm/numcore/parameters.hpp"

#include <algorithm>
#include <random>

#include "synlm/errors.hpp"

namespace synlm::num {

Var ParameterSet::add(std::string name, Shape shape, InitKind init) {
  for (const auto& p : params_) {
    if (p.name == name) throw DimensionError("duplicate parameter name '" + name + "'");
  }
  Var t = zeros(std::move(shape));
  t->requires_grad = true;
  params_.push_back(NamedParameter{std::move(name), t, init});
  return t;
}

const Var& ParameterSet::get(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.tensor;
  }
  throw IndexError("no parameter named '" + name + "'");
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor->size();
  return n;
}

void ParameterSet::initialize(std::uint64_t seed, double range) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-range, range);
  for (auto& p : params_) {
    auto& v = p.tensor->values;
    switch (p.init) {
      case InitKind::kWeight:
        for (double& x : v) x = uniform(rng);
        break;
      case InitKind::kZero:
        std::fill(v.begin(), v.end(), 0.0);
        break;
      case InitKind::kLstmBias: {
        // Gate blocks are laid out [input, forget, output, candidate].
        std::fill(v.begin(), v.end(), 0.0);
        const std::size_t h = v.size() / 4;
        std::fill(v.begin() + static_cast<std::ptrdiff_t>(h),
                  v.begin() + static_cast<std::ptrdiff_t>(2 * h), 1.0);
        break;
      }
    }
  }
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) {
    if (p.tensor->has_grad()) std::fill(p.tensor->grad.begin(), p.tensor->grad.end(), 0.0);
  }
}

void ParameterSet::fill(double value) {
  for (auto& p : params_) std::fill(p.tensor->values.begin(), p.tensor->values.end(), value);
}

std::vector<std::vector<double>> ParameterSet::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.tensor->values);
  return out;
}

void ParameterSet::restore(const std::vector<std::vector<double>>& values) {
  if (values.size() != params_.size()) throw DimensionError("restore: parameter count mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (values[i].size() != params_[i].tensor->size()) {
      throw DimensionError("restore: size mismatch for '" + params_[i].name + "'");
    }
    params_[i].tensor->values = values[i];
  }
}

}  // namespace synlm::num
