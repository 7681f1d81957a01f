#include "synlm/numcore/tape.hpp"

#include "synlm/errors.hpp"

namespace synlm::num {

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape* active_tape() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

std::size_t Tape::record(const Var& output, BackwardRule rule) {
  const std::size_t id = nodes_.size();
  output->tape_id = id;
  output->requires_grad = true;
  nodes_.push_back(Node{output, std::move(rule)});
  return id;
}

void Tape::backward(const Var& loss) {
  if (!loss || loss->size() != 1) throw DimensionError("backward: loss must be a scalar");
  if (!loss->tape_id || *loss->tape_id >= nodes_.size() || nodes_[*loss->tape_id].output != loss) {
    throw DimensionError("backward: loss was not recorded on this tape");
  }
  loss->ensure_grad();
  loss->grad[0] += 1.0;
  for (std::size_t i = *loss->tape_id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.output->has_grad()) continue;  // not upstream of the loss
    node.rule();
  }
}

void Tape::clear() {
  for (Node& node : nodes_) node.output->tape_id.reset();
  nodes_.clear();
}

}  // namespace synlm::num
