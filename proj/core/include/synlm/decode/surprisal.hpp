#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "synlm/models/language_model.hpp"

namespace synlm::decode {

using models::LanguageModel;
using models::ScorerState;

/// Per-token surprisal in bits from the softmax chain of a word-level model.
std::vector<double> surprisal_direct(const LanguageModel& model, const std::vector<std::size_t>& words);

struct BeamConfig {
  std::size_t action_beam = 100;
  std::size_t word_beam = 10;
  std::size_t max_structural = 8;  // consecutive NT/REDUCE actions between words
  std::size_t fallback_factor = 4; // action-beam multiplier for the single retry; 0 disables it

  void validate() const;
};

struct BeamResult {
  std::vector<double> surprisal_bits;
  /// Word beam kept after each word, best first.
  std::vector<std::vector<ScorerState>> word_beams;
  /// log of the summed forward probability of every entry that generated
  /// each word, before word-beam pruning (nats).
  std::vector<double> prefix_log_mass;
  bool retried = false;
};

/// Word-synchronous beam search over structured models.
///
/// Between words, in-progress entries are expanded fringe by fringe. Every
/// candidate (entry, action) is scored by the entry's forward log probability
/// plus the action's; candidates are ranked by score, then GEN < NT (label
/// string order) < REDUCE, then creation order, and the best `action_beam`
/// survive. Survivors that took GEN(x_i) complete word i. Expansion stops when
/// nothing is in progress, or when at least `word_beam` entries completed and
/// no in-progress entry scores above the word_beam-th best completed one.
///
/// With C_i the log-sum-exp over all entries completing word i (C_0 = 0),
/// S(x_i) = (C_{i-1} - C_i) / ln 2. The completed set is then cut to
/// `word_beam` entries to seed word i+1. Throws BeamFailure naming the word
/// when nothing completes it.
BeamResult word_sync_beam(const LanguageModel& model, const std::vector<std::size_t>& words,
                          const BeamConfig& config);

/// word_sync_beam, retried once with a widened action beam after a
/// BeamFailure.
BeamResult word_sync_beam_with_fallback(const LanguageModel& model, const std::vector<std::size_t>& words,
                                        const BeamConfig& config);

struct GoldOnBeam {
  bool present = false;
  std::size_t rank = 0;  // 1-based; 0 when absent
};

/// For every word, whether the gold incremental parse (gold events up to and
/// including that word's GEN) survived in the word beam, and at which rank.
std::vector<GoldOnBeam> verify_gold_on_beam(const LanguageModel& model, const std::vector<models::Action>& gold,
                                            const BeamConfig& config);

/// Surprisal for any model: direct for the word-level model, beam search
/// with fallback otherwise. Failures are reported, not thrown.
struct SentenceScore {
  std::vector<double> surprisal_bits;
  bool ok = true;
  bool retried = false;
  std::string failure;
};

SentenceScore score_sentence(const LanguageModel& model, const std::vector<std::size_t>& words,
                             const BeamConfig& config);

/// Scores independent sentences on `threads` workers; results keep input order.
std::vector<SentenceScore> score_sentences(const LanguageModel& model,
                                           const std::vector<std::vector<std::size_t>>& sentences,
                                           const BeamConfig& config, std::size_t threads);

}  // namespace synlm::decode
