#include <doctest.h>

#include <cmath>
#include <cstring>
#include <memory>
#include <numeric>
#include <sstream>

#include "support/gradcheck.hpp"
#include "synlm/errors.hpp"
#include "synlm/numcore/checkpoint.hpp"
#include "synlm/numcore/optimizer.hpp"

using namespace synlm;
using num::Var;

TEST_SUITE("numcore") {

TEST_CASE("every op passes finite differences on 20 random instances") {
  std::mt19937_64 rng(2024);
  for (const auto& op : testing::op_cases()) {
    for (int instance = 0; instance < 20; ++instance) {
      const auto inputs = op.make_inputs(rng);
      const auto r = testing::grad_check(inputs, op.fn);
      INFO(op.name << " instance " << instance << " worst " << r.worst);
      CHECK(r.checked > 0);
      CHECK(r.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("cross-entropy fixtures") {
  // Uniform logits over 8 classes: -log(1/8).
  CHECK(num::softmax_cross_entropy(num::zeros({8}), 5)->values[0] == doctest::Approx(std::log(8.0)).epsilon(1e-12));
  // logits [1,2,3], target 2: log(e^1+e^2+e^3) - 3.
  const double expected = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)) - 3.0;
  const double got = num::softmax_cross_entropy(num::vector_of({1, 2, 3}), 2)->values[0];
  CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  CHECK(got == doctest::Approx(0.4076).epsilon(1e-4));
}

TEST_CASE("large logits stay finite") {
  const Var logits = num::vector_of({1000.0, 999.0, -1000.0});
  const double ce = num::softmax_cross_entropy(logits, 1)->values[0];
  CHECK(std::isfinite(ce));
  CHECK(ce == doctest::Approx(1.0 + std::log1p(std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("masked log-softmax renormalizes over legal entries") {
  const std::vector<std::uint8_t> mask{0, 1, 1, 0, 1};
  const auto lp = num::log_softmax_values(std::vector<double>{0.3, -1.0, 2.0, 5.0, 0.1}, mask);
  double total = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    if (mask[i]) {
      total += std::exp(lp[i]);
    } else {
      CHECK(std::isinf(lp[i]));
    }
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(num::softmax_cross_entropy(num::zeros({5}), 0, mask), IndexError);
}

TEST_CASE("shape errors name the operand") {
  CHECK_THROWS_AS(num::add(num::zeros({3}), num::zeros({4})), DimensionError);
  CHECK_THROWS_AS(num::matvec(num::zeros({2, 3}), num::zeros({2})), DimensionError);
  CHECK_THROWS_AS(num::lookup(num::zeros({2, 3}), 2), IndexError);
  try {
    num::matvec(num::zeros({2, 3}), num::zeros({2}));
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("matvec") != std::string::npos);
  }
}

TEST_CASE("dropout keeps the expectation") {
  std::mt19937_64 rng(7);
  const Var x = num::make_tensor({100000}, std::vector<double>(100000, 2.0));
  const Var y = num::dropout(x, 0.3, rng);
  const double m = std::accumulate(y->values.begin(), y->values.end(), 0.0) / 1e5;
  // Each entry is 0 or 2/0.7; sd of the mean is about 2/0.7*sqrt(0.21)/316.
  CHECK(m == doctest::Approx(2.0).epsilon(0.02));
  std::size_t zeros = 0;
  for (double v : y->values) zeros += v == 0.0;
  CHECK(static_cast<double>(zeros) / 1e5 == doctest::Approx(0.3).epsilon(0.03));
  CHECK(num::dropout(x, 0.0, rng) == x);
}

TEST_CASE("lstm gates with zero input") {
  // i=f=o=sigmoid(0)=0.5, g=tanh(0)=0: c = 0.5 c_prev, h = 0.5 tanh(c).
  const Var out = num::lstm_gates(num::zeros({8}), num::vector_of({1.0, -2.0}));
  CHECK(out->values[2] == doctest::Approx(0.5));
  CHECK(out->values[3] == doctest::Approx(-1.0));
  CHECK(out->values[0] == doctest::Approx(0.5 * std::tanh(0.5)));
}

TEST_CASE("parameter initialization") {
  num::ParameterSet ps;
  ps.add("w", {3, 4});
  ps.add("b", {8}, num::InitKind::kLstmBias);
  ps.add("z", {2}, num::InitKind::kZero);
  CHECK_THROWS_AS(ps.add("w", {1}), DimensionError);
  ps.initialize(5);
  for (double v : ps.get("w")->values) CHECK(std::abs(v) <= 0.1);
  CHECK(ps.get("b")->values == std::vector<double>{0, 0, 1, 1, 0, 0, 0, 0});
  CHECK(ps.get("z")->values == std::vector<double>{0, 0});
  num::ParameterSet again;
  again.add("w", {3, 4});
  again.initialize(5);
  CHECK(again.get("w")->values == ps.get("w")->values);
  CHECK(ps.scalar_count() == 22);
}

TEST_CASE("sgd step and clipping") {
  num::ParameterSet ps;
  Var w = ps.add("w", {2});
  w->values = {1.0, 1.0};
  num::Optimizer sgd(ps, {num::OptimizerKind::kSgd, 0.5, 5.0});
  w->ensure_grad();
  w->grad = {0.2, -0.4};
  CHECK(sgd.step() == doctest::Approx(std::sqrt(0.2)));
  CHECK(w->values[0] == doctest::Approx(0.9));
  CHECK(w->values[1] == doctest::Approx(1.2));
  CHECK(w->grad == std::vector<double>{0.0, 0.0});

  // Norm 10 is clipped to 5, so the step halves.
  w->values = {0.0, 0.0};
  w->grad = {6.0, 8.0};
  CHECK(sgd.step() == doctest::Approx(10.0));
  CHECK(w->values[0] == doctest::Approx(-1.5));
  CHECK(w->values[1] == doctest::Approx(-2.0));
}

TEST_CASE("adam first step moves by the learning rate") {
  num::ParameterSet ps;
  Var w = ps.add("w", {2});
  num::Optimizer adam(ps, {num::OptimizerKind::kAdam, 0.01, 0.0});
  w->ensure_grad();
  w->grad = {3.0, -0.5};
  adam.step();
  CHECK(w->values[0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(w->values[1] == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("non-finite gradients raise a numerical error naming the parameter") {
  num::ParameterSet ps;
  Var w = ps.add("weights.bad", {2});
  num::Optimizer sgd(ps, {});
  w->ensure_grad();
  w->grad = {std::nan(""), 0.0};
  try {
    sgd.step();
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("weights.bad") != std::string::npos);
  }
}

TEST_CASE("optimizer names round trip") {
  CHECK(num::optimizer_kind_from_string(num::to_string(num::OptimizerKind::kAdam)) == num::OptimizerKind::kAdam);
  CHECK_THROWS(num::optimizer_kind_from_string("rmsprop"));
}

TEST_CASE("checkpoint round trip is bit exact") {
  num::ParameterSet ps;
  ps.add("a", {2, 3});
  ps.add("b", {4}, num::InitKind::kLstmBias);
  ps.initialize(11);
  ps.get("a")->values[0] = -0.0;
  ps.get("a")->values[1] = 1e-300;
  std::stringstream buf;
  num::write_checkpoint(buf, {{"architecture", "test"}}, ps);

  num::ParameterSet loaded;
  loaded.add("a", {2, 3});
  loaded.add("b", {4});
  const auto meta = num::read_checkpoint_metadata(buf);
  CHECK(meta.at("architecture") == "test");
  CHECK(meta.at("format_version") == num::kCheckpointFormatVersion);
  num::read_checkpoint_tensors(buf, meta, loaded);
  for (std::size_t i = 0; i < ps.all().size(); ++i) {
    CHECK(std::memcmp(ps.all()[i].tensor->values.data(), loaded.all()[i].tensor->values.data(),
                      ps.all()[i].tensor->size() * sizeof(double)) == 0);
  }
}

TEST_CASE("checkpoint mismatches are rejected") {
  num::ParameterSet ps;
  ps.add("a", {2, 3});
  std::stringstream buf;
  num::write_checkpoint(buf, {}, ps);
  const std::string bytes = buf.str();

  num::ParameterSet wrong_shape;
  wrong_shape.add("a", {3, 2});
  std::stringstream in1(bytes);
  const auto meta = num::read_checkpoint_metadata(in1);
  CHECK_THROWS(num::read_checkpoint_tensors(in1, meta, wrong_shape));

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  const auto meta2 = num::read_checkpoint_metadata(truncated);
  num::ParameterSet ok;
  ok.add("a", {2, 3});
  CHECK_THROWS(num::read_checkpoint_tensors(truncated, meta2, ok));

  std::stringstream garbage("not a checkpoint\n{}\n");
  CHECK_THROWS(num::read_checkpoint_metadata(garbage));
}

TEST_CASE("backward through shared subexpressions accumulates") {
  Var x = testing::random_leaf({3}, *std::make_unique<std::mt19937_64>(3));
  num::Tape tape;
  Var loss;
  {
    num::TapeScope scope(tape);
    Var y = num::mul(x, x);
    loss = num::sum(num::add(y, y));
  }
  x->grad.clear();
  tape.backward(loss);
  for (std::size_t i = 0; i < 3; ++i) CHECK(x->grad[i] == doctest::Approx(4 * x->values[i]));
}

TEST_CASE("no recording without an active tape") {
  Var x = num::vector_of({1.0, 2.0});
  x->requires_grad = true;
  Var y = num::tanh(x);
  CHECK_FALSE(y->tape_id.has_value());
}

}
