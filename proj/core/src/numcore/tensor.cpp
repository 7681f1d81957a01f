#include "synlm/numcore/tensor.hpp"

#include <sstream>

#include "synlm/errors.hpp"

namespace synlm::num {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
  out << ']';
  return out.str();
}

Var make_tensor(Shape shape, std::vector<double> values) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string(shape));
  }
  if (shape_size(shape) != values.size()) {
    throw DimensionError("tensor of shape " + shape_string(shape) + " given " +
                         std::to_string(values.size()) + " values");
  }
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->values = std::move(values);
  return t;
}

Var zeros(Shape shape) {
  const std::size_t n = shape_size(shape);
  return make_tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Var scalar(double value) { return make_tensor({1}, {value}); }

Var vector_of(std::vector<double> values) {
  const std::size_t n = values.size();
  return make_tensor({n}, std::move(values));
}

}  // namespace synlm::num
