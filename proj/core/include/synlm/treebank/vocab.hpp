#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace synlm::tb {

inline constexpr const char* kUnknownToken = "UNK";

/// Word inventory with signature-based unknown-word classes. Ids are dense
/// and assigned in lexicographic order of the tokens.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Words seen fewer than `min_count` times are replaced by their
  /// signature class; the signatures and "UNK" join the inventory.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus, std::size_t min_count);
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::size_t id) const;
  std::optional<std::size_t> find(const std::string& token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Id for `word` at sentence position `position` (0-based), falling back
  /// to the closest available signature class and finally to "UNK".
  std::size_t unkify(const std::string& word, std::size_t position) const;
  std::string map_token(const std::string& word, std::size_t position) const { return token(unkify(word, position)); }
  std::vector<std::size_t> encode(const std::vector<std::string>& sentence) const;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t> ids_;
};

/// Unknown-word signature: UNK plus capitalization (position-aware), digit,
/// dash and common-suffix markers, e.g. "UNK-INITC-KNOWNLC", "UNK-LC-ing".
/// `known` decides the KNOWNLC marker for sentence-initial capitals.
template <typename KnownFn>
std::string word_signature(const std::string& word, std::size_t position, KnownFn known);

std::string word_signature(const std::string& word, std::size_t position, const Vocabulary& vocab);

}  // namespace synlm::tb

#include "synlm/treebank/detail/signature.ipp"
