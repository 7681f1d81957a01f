#include <random>

#include <benchmark/benchmark.h>

#include "synlm/decode/surprisal.hpp"
#include "synlm/models/language_model.hpp"

namespace {

using namespace synlm;

std::unique_ptr<models::LanguageModel> model(models::Architecture arch, std::size_t dim) {
  std::vector<std::string> words;
  for (int i = 0; i < 40; ++i) words.push_back("w" + std::to_string(i));
  models::ModelConfig config;
  config.arch = arch;
  config.word_dim = dim;
  config.hidden_dim = dim;
  config.layers = 2;
  config.dropout = 0.0;
  auto m = models::make_model(config, tb::Vocabulary::from_tokens(words), {"S", "NP", "VP", "SBAR", "WHNP"});
  m->params().initialize(1, 0.1);
  return m;
}

std::vector<std::size_t> sentence(std::size_t length) {
  std::mt19937_64 rng(4);
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < length; ++i) ids.push_back(rng() % 40);
  return ids;
}

void BM_WordSyncBeam(benchmark::State& state, models::Architecture arch) {
  const auto m = model(arch, 32);
  const auto words = sentence(10);
  const decode::BeamConfig config{static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(decode::word_sync_beam_with_fallback(*m, words, config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(words.size()));
}
BENCHMARK_CAPTURE(BM_WordSyncBeam, rnng, models::Architecture::kRnng)->Args({10, 1})->Args({100, 10});
BENCHMARK_CAPTURE(BM_WordSyncBeam, action_lstm, models::Architecture::kActionLstm)->Args({100, 10});

void BM_LmSequence(benchmark::State& state) {
  const auto m = model(models::Architecture::kLstmLm, 32);
  const auto words = sentence(10);
  for (auto _ : state) benchmark::DoNotOptimize(decode::surprisal_direct(*m, words));
}
BENCHMARK(BM_LmSequence);

}  // namespace
