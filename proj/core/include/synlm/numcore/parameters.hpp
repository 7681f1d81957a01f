#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synlm/numcore/tensor.hpp"

namespace synlm::num {

enum class InitKind {
  kWeight,    // uniform in [-range, range]
  kZero,      // biases
  kLstmBias,  // zero, except +1 on the forget-gate block
};

struct NamedParameter {
  std::string name;
  Var tensor;
  InitKind init = InitKind::kWeight;
};

/// Owns every learned tensor of a model. Registration order is the canonical
/// order used for checkpoints, so models must register deterministically.
class ParameterSet {
 public:
  Var add(std::string name, Shape shape, InitKind init = InitKind::kWeight);

  const std::vector<NamedParameter>& all() const { return params_; }
  const Var& get(const std::string& name) const;
  std::size_t scalar_count() const;

  void initialize(std::uint64_t seed, double range = 0.1);
  void zero_grad();
  void fill(double value);

  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

 private:
  std::vector<NamedParameter> params_;
};

}  // namespace synlm::num
