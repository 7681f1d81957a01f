#pragma once

#include <string>
#include <vector>

#include "synlm/numcore/parameters.hpp"

namespace synlm::num {

enum class OptimizerKind { kSgd, kAdam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double learning_rate = 0.1;
  double clip_norm = 5.0;  // <= 0 disables clipping
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Applies one update from the gradients accumulated on `params`, then
/// zeroes them. Gradients are globally norm-clipped first when configured.
class Optimizer {
 public:
  Optimizer(ParameterSet& params, OptimizerConfig config);

  /// Returns the global gradient norm before clipping. Throws NumericalError
  /// naming the first offending parameter if any gradient is not finite.
  double step();

  double learning_rate() const { return config_.learning_rate; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  const OptimizerConfig& config() const { return config_; }

 private:
  ParameterSet& params_;
  OptimizerConfig config_;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
  long long steps_ = 0;
};

}  // namespace synlm::num
