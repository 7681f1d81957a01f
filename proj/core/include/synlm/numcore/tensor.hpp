#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace synlm::num {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles. `grad` is allocated lazily, either for
/// parameters or for tape-recorded intermediates reached during backward.
struct Tensor {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;
  std::optional<std::size_t> tape_id;
  bool requires_grad = false;

  std::size_t size() const { return values.size(); }
  bool has_grad() const { return !grad.empty(); }
  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

/// Shared handle to a tensor. Forward ops produce fresh tensors and never
/// mutate their inputs, so handles can be freely shared between states.
using Var = std::shared_ptr<Tensor>;

Var make_tensor(Shape shape, std::vector<double> values);
Var zeros(Shape shape);
Var scalar(double value);
Var vector_of(std::vector<double> values);

}  // namespace synlm::num
