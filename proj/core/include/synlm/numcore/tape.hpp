#pragma once

#include <functional>
#include <vector>

#include "synlm/numcore/tensor.hpp"

namespace synlm::num {

/// Records differentiable operations in forward-execution order so that
/// `backward` can replay their adjoint rules in exact reverse order.
class Tape {
 public:
  using BackwardRule = std::function<void()>;

  std::size_t record(const Var& output, BackwardRule rule);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every recorded input.
  /// `loss` must be a scalar produced while this tape was active.
  void backward(const Var& loss);

  void clear();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Var output;
    BackwardRule rule;
  };
  std::vector<Node> nodes_;
};

/// The tape that ops record onto in this thread, or nullptr.
Tape* active_tape();

/// Activates a tape for the enclosing scope.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

}  // namespace synlm::num
