#include <random>

#include <benchmark/benchmark.h>

#include "synlm/numcore/lstm.hpp"
#include "synlm/numcore/ops.hpp"
#include "synlm/numcore/parameters.hpp"
#include "synlm/numcore/tape.hpp"

namespace {

using namespace synlm::num;

Var random_tensor(Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  std::vector<double> v(shape_size(shape));
  for (auto& x : v) x = u(rng);
  return make_tensor(std::move(shape), std::move(v));
}

void BM_Matvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const Var w = random_tensor({4 * n, n}, rng);
  const Var x = random_tensor({n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matvec(w, x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(4 * n * n));
}
BENCHMARK(BM_Matvec)->Arg(32)->Arg(128)->Arg(256);

void BM_LogSoftmax(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Var logits = random_tensor({static_cast<std::size_t>(state.range(0))}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(log_softmax(logits));
}
BENCHMARK(BM_LogSoftmax)->Arg(64)->Arg(10000);

// One training step of a two-layer LSTM over a short sequence: forward,
// cross-entropy at every position, backward.
void BM_LstmForwardBackward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  ParameterSet params;
  StackedLstm lstm(params, "lstm", 2, dim, dim);
  const Var out = params.add("out", {50, dim});
  const Var table = params.add("emb", {50, dim});
  params.initialize(3, 0.1);
  for (auto _ : state) {
    Tape tape;
    TapeScope scope(tape);
    params.zero_grad();
    auto s = lstm.initial_state();
    std::vector<Var> losses;
    for (std::size_t t = 0; t < 20; ++t) {
      s = lstm.step(s, lookup(table, t % 50), nullptr);
      losses.push_back(softmax_cross_entropy(matvec(out, s.output()), (t * 7) % 50));
    }
    tape.backward(add_n(losses));
  }
}
BENCHMARK(BM_LstmForwardBackward)->Arg(32)->Arg(128);

}  // namespace
