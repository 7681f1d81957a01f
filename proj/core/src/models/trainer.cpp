#include "synlm/models/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "synlm/errors.hpp"
#include "synlm/numcore/ops.hpp"
#include "synlm/numcore/tape.hpp"

namespace synlm::models {

namespace {

std::size_t word_count(const std::vector<Action>& events) {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [](const Action& a) { return a.kind == ActionKind::kGen; }));
}

bool trainable(const LanguageModel& model, const std::vector<Action>& events) {
  if (events.empty()) return false;
  if (!model.structured()) return true;
  TransitionCounters c;
  try {
    for (const Action& a : events) c = apply_action(c, a, model.config().caps);
  } catch (const TransitionError&) {
    return false;
  }
  return c.complete();
}

}  // namespace

std::size_t filter_trainable(const LanguageModel& model, EventCorpus& corpus) {
  const std::size_t before = corpus.size();
  std::erase_if(corpus, [&](const std::vector<Action>& e) { return !trainable(model, e); });
  return before - corpus.size();
}

double perplexity(const LanguageModel& model, const EventCorpus& corpus) {
  double nll = 0.0;
  std::size_t words = 0;
  for (const auto& events : corpus) {
    nll -= model.sequence_log_prob(events);
    words += word_count(events);
  }
  if (words == 0) return std::nan("");
  return std::exp(nll / static_cast<double>(words));
}

TrainResult train(LanguageModel& model, const EventCorpus& train_set, const EventCorpus& dev_set,
                  const TrainConfig& config, const std::function<void(const EpochRecord&)>& on_epoch) {
  TrainResult result;
  EventCorpus train_data = train_set;
  EventCorpus dev_data = dev_set;
  result.skipped = filter_trainable(model, train_data) + filter_trainable(model, dev_data);
  if (train_data.empty()) throw Error(ErrorKind::kData, "no trainable sentences in the training set");
  if (dev_data.empty()) throw Error(ErrorKind::kData, "no usable sentences in the development set");

  num::Optimizer optimizer(model.params(), config.optimizer);
  std::mt19937_64 rng(config.seed);
  num::DropoutContext dropout{model.config().dropout, &rng};
  const num::DropoutContext* drop = model.config().dropout > 0.0 ? &dropout : nullptr;

  result.best_dev_ppl = perplexity(model, dev_data);
  if (!std::isfinite(result.best_dev_ppl)) {
    result.diverged = true;
    result.divergence = "initial dev perplexity is not finite";
    return result;
  }
  auto best = model.params().snapshot();
  std::size_t stale = 0;
  std::vector<std::size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::max<std::size_t>(1, config.batch_size);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double train_nll = 0.0;
    std::size_t train_words = 0;
    try {
      model.params().zero_grad();
      for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& events = train_data[order[k]];
        num::Tape tape;
        num::Var loss;
        {
          num::TapeScope scope(tape);
          loss = model.sequence_loss(events, drop);
        }
        if (!std::isfinite(loss->values[0])) throw NumericalError("training loss is not finite");
        train_nll += loss->values[0];
        train_words += word_count(events);
        tape.backward(loss);
        if ((k + 1) % batch == 0 || k + 1 == order.size()) optimizer.step();
      }
    } catch (const NumericalError& e) {
      result.diverged = true;
      result.divergence = std::string("epoch ") + std::to_string(epoch) + ": " + e.what();
      break;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_ppl = std::exp(train_nll / static_cast<double>(train_words));
    rec.dev_ppl = perplexity(model, dev_data);
    rec.lr = optimizer.learning_rate();
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (!std::isfinite(rec.dev_ppl)) {
      result.diverged = true;
      result.divergence = "epoch " + std::to_string(epoch) + ": dev perplexity is not finite";
      break;
    }
    if (rec.dev_ppl < result.best_dev_ppl) {
      result.best_dev_ppl = rec.dev_ppl;
      result.best_epoch = epoch;
      best = model.params().snapshot();
      stale = 0;
    } else {
      optimizer.set_learning_rate(optimizer.learning_rate() * config.lr_decay);
      if (++stale >= config.patience) break;
    }
  }
  model.params().restore(best);
  return result;
}

}  // namespace synlm::models
