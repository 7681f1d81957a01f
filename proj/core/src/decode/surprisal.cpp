#include "synlm/decode/surprisal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "synlm/errors.hpp"

namespace synlm::decode {

using models::Action;
using models::ActionKind;
using models::NextDistribution;

namespace {

double log_sum_exp(const std::vector<double>& xs) {
  double m = models::kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == models::kNegInf) return m;
  double z = 0.0;
  for (double x : xs) z += std::exp(x - m);
  return m + std::log(z);
}

struct Entry {
  ScorerState state;
  std::size_t structural = 0;
};

struct Candidate {
  double score;
  std::size_t rank;  // position in the fixed action order
  std::size_t entry;
  Action action;
};

}  // namespace

std::vector<double> surprisal_direct(const LanguageModel& model, const std::vector<std::size_t>& words) {
  if (model.structured()) {
    throw Error(ErrorKind::kData, "direct surprisal needs a word-level model; use beam search for " +
                                      models::to_string(model.arch()));
  }
  std::vector<double> out;
  ScorerState state = model.initial_state();
  for (std::size_t w : words) {
    const ScorerState next = model.advance(state, Action::gen(w));
    out.push_back((state.log_prob - next.log_prob) / std::numbers::ln2);
    state = next;
  }
  return out;
}

void BeamConfig::validate() const {
  if (action_beam == 0 || word_beam == 0) throw Error(ErrorKind::kData, "beam sizes must be positive");
  if (word_beam > action_beam) {
    throw Error(ErrorKind::kData, "word beam (" + std::to_string(word_beam) + ") exceeds action beam (" +
                                      std::to_string(action_beam) + ")");
  }
}

BeamResult word_sync_beam(const LanguageModel& model, const std::vector<std::size_t>& words,
                          const BeamConfig& config) {
  config.validate();
  if (!model.structured()) throw Error(ErrorKind::kData, "beam search needs a structured model");
  if (words.empty()) throw Error(ErrorKind::kData, "beam search needs a non-empty sentence");

  const std::size_t labels = model.labels().size();
  // Action ranks: GEN first, then NT by label string, then REDUCE.
  std::vector<std::size_t> nt_rank(labels);
  {
    std::vector<std::size_t> order(labels);
    for (std::size_t i = 0; i < labels; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return model.labels()[a] < model.labels()[b]; });
    for (std::size_t r = 0; r < labels; ++r) nt_rank[order[r]] = r + 1;
  }
  const std::size_t reduce_rank = labels + 1;

  BeamResult result;
  std::vector<Entry> beam{Entry{model.initial_state(), 0}};
  double previous_mass = 0.0;

  for (std::size_t i = 0; i < words.size(); ++i) {
    const Action target = Action::gen(words[i]);
    std::vector<Entry> completed;
    std::vector<Entry> in_progress = std::move(beam);

    while (!in_progress.empty()) {
      std::vector<NextDistribution> dists;
      dists.reserve(in_progress.size());
      std::vector<Candidate> candidates;
      for (std::size_t e = 0; e < in_progress.size(); ++e) {
        const Entry& entry = in_progress[e];
        const models::LegalMask mask = model.legal(entry.state);
        dists.push_back(model.next(entry.state));
        const NextDistribution& d = dists.back();
        const double base = entry.state.log_prob;
        if (mask.gen) {
          const double lp = d.log_prob(target);
          if (lp > models::kNegInf) candidates.push_back({base + lp, 0, e, target});
        }
        if (entry.structural >= config.max_structural) continue;
        if (mask.nt) {
          for (std::size_t l = 0; l < labels; ++l) {
            if (d.nt[l] > models::kNegInf) candidates.push_back({base + d.nt[l], nt_rank[l], e, Action::nt(l)});
          }
        }
        if (mask.reduce && d.reduce > models::kNegInf) {
          candidates.push_back({base + d.reduce, reduce_rank, e, Action::reduce()});
        }
      }
      std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.rank < b.rank;
      });
      if (candidates.size() > config.action_beam) candidates.resize(config.action_beam);

      std::vector<Entry> next_progress;
      for (const Candidate& c : candidates) {
        const Entry& from = in_progress[c.entry];
        ScorerState s = model.advance(from.state, c.action, dists[c.entry]);
        if (c.action.kind == ActionKind::kGen) {
          completed.push_back(Entry{std::move(s), 0});
        } else {
          next_progress.push_back(Entry{std::move(s), from.structural + 1});
        }
      }
      in_progress = std::move(next_progress);

      if (completed.size() >= config.word_beam && !in_progress.empty()) {
        std::vector<double> scores;
        for (const Entry& c : completed) scores.push_back(c.state.log_prob);
        std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(config.word_beam - 1),
                         scores.end(), std::greater<>());
        const double kth = scores[config.word_beam - 1];
        double best_open = models::kNegInf;
        for (const Entry& p : in_progress) best_open = std::max(best_open, p.state.log_prob);
        if (best_open <= kth) break;
      }
    }

    if (completed.empty()) {
      throw BeamFailure("beam search found no continuation generating word " + std::to_string(i), i);
    }
    std::vector<double> scores;
    for (const Entry& c : completed) scores.push_back(c.state.log_prob);
    const double mass = log_sum_exp(scores);
    result.prefix_log_mass.push_back(mass);
    result.surprisal_bits.push_back((previous_mass - mass) / std::numbers::ln2);
    previous_mass = mass;

    std::stable_sort(completed.begin(), completed.end(),
                     [](const Entry& a, const Entry& b) { return a.state.log_prob > b.state.log_prob; });
    if (completed.size() > config.word_beam) completed.resize(config.word_beam);
    std::vector<ScorerState> kept;
    for (const Entry& c : completed) kept.push_back(c.state);
    result.word_beams.push_back(std::move(kept));
    beam = std::move(completed);
  }
  return result;
}

BeamResult word_sync_beam_with_fallback(const LanguageModel& model, const std::vector<std::size_t>& words,
                                        const BeamConfig& config) {
  try {
    return word_sync_beam(model, words, config);
  } catch (const BeamFailure&) {
    if (config.fallback_factor == 0) throw;
    BeamConfig wider = config;
    wider.action_beam *= config.fallback_factor;
    BeamResult r = word_sync_beam(model, words, wider);
    r.retried = true;
    return r;
  }
}

std::vector<GoldOnBeam> verify_gold_on_beam(const LanguageModel& model, const std::vector<Action>& gold,
                                            const BeamConfig& config) {
  std::vector<std::size_t> words;
  std::vector<std::size_t> gen_positions;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    if (gold[k].kind == ActionKind::kGen) {
      words.push_back(gold[k].id);
      gen_positions.push_back(k);
    }
  }
  std::vector<GoldOnBeam> out(words.size());
  BeamResult beam;
  try {
    beam = word_sync_beam(model, words, config);
  } catch (const BeamFailure&) {
    return out;  // nothing survives from the failing word on
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto prefix_end = gold.begin() + static_cast<std::ptrdiff_t>(gen_positions[i] + 1);
    const std::vector<Action> prefix(gold.begin(), prefix_end);
    for (std::size_t r = 0; r < beam.word_beams[i].size(); ++r) {
      if (beam.word_beams[i][r].actions() == prefix) {
        out[i] = GoldOnBeam{true, r + 1};
        break;
      }
    }
  }
  return out;
}

SentenceScore score_sentence(const LanguageModel& model, const std::vector<std::size_t>& words,
                             const BeamConfig& config) {
  SentenceScore s;
  if (words.empty()) return s;
  try {
    if (!model.structured()) {
      s.surprisal_bits = surprisal_direct(model, words);
    } else {
      BeamResult r = word_sync_beam_with_fallback(model, words, config);
      s.surprisal_bits = std::move(r.surprisal_bits);
      s.retried = r.retried;
    }
  } catch (const BeamFailure& e) {
    s.ok = false;
    s.retried = config.fallback_factor != 0;
    s.failure = e.what();
  }
  for (double v : s.surprisal_bits) {
    if (!std::isfinite(v)) throw NumericalError("non-finite surprisal");
  }
  return s;
}

std::vector<SentenceScore> score_sentences(const LanguageModel& model,
                                           const std::vector<std::vector<std::size_t>>& sentences,
                                           const BeamConfig& config, std::size_t threads) {
  std::vector<SentenceScore> out(sentences.size());
  std::vector<std::exception_ptr> errors(sentences.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t k = cursor++; k < sentences.size(); k = cursor++) {
      try {
        out[k] = score_sentence(model, sentences[k], config);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, sentences.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace synlm::decode
