#include "synlm/numcore/optimizer.hpp"

#include <cmath>
#include <sstream>

#include "synlm/errors.hpp"

namespace synlm::num {

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::kSgd ? "sgd" : "adam"; }

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw Error(ErrorKind::kData, "unknown optimizer '" + name + "' (expected sgd or adam)");
}

Optimizer::Optimizer(ParameterSet& params, OptimizerConfig config)
    : params_(params), config_(config) {
  if (config_.kind == OptimizerKind::kAdam) {
    for (const auto& p : params_.all()) {
      first_moment_.emplace_back(p.tensor->size(), 0.0);
      second_moment_.emplace_back(p.tensor->size(), 0.0);
    }
  }
}

double Optimizer::step() {
  double sq = 0.0;
  for (const auto& p : params_.all()) {
    if (!p.tensor->has_grad()) continue;
    for (double g : p.tensor->grad) {
      if (!std::isfinite(g)) {
        std::ostringstream msg;
        msg << "non-finite gradient in parameter '" << p.name << "' (value " << g
            << ") at optimizer step " << steps_;
        throw NumericalError(msg.str());
      }
      sq += g * g;
    }
  }
  const double norm = std::sqrt(sq);
  const double factor = (config_.clip_norm > 0 && norm > config_.clip_norm) ? config_.clip_norm / norm : 1.0;
  ++steps_;

  const auto& all = params_.all();
  for (std::size_t k = 0; k < all.size(); ++k) {
    Tensor& t = *all[k].tensor;
    if (!t.has_grad()) continue;
    if (config_.kind == OptimizerKind::kSgd) {
      for (std::size_t i = 0; i < t.size(); ++i) t.values[i] -= config_.learning_rate * factor * t.grad[i];
    } else {
      auto& m = first_moment_[k];
      auto& v = second_moment_[k];
      const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
      const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double g = factor * t.grad[i];
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
        t.values[i] -= config_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
      }
    }
  }
  params_.zero_grad();
  return norm;
}

}  // namespace synlm::num
