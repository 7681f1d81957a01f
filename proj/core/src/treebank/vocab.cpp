#include "synlm/treebank/vocab.hpp"

#include <set>

#include "synlm/errors.hpp"

namespace synlm::tb {

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& sentence : corpus) {
    for (const auto& w : sentence) ++counts[w];
  }
  std::set<std::string> frequent;
  for (const auto& [w, c] : counts) {
    if (c >= min_count) frequent.insert(w);
  }
  auto known = [&](const std::string& w) { return frequent.count(w) != 0; };
  std::set<std::string> tokens(frequent.begin(), frequent.end());
  tokens.insert(kUnknownToken);
  for (const auto& sentence : corpus) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (!known(sentence[i])) tokens.insert(word_signature(sentence[i], i, known));
    }
  }
  return from_tokens(std::vector<std::string>(tokens.begin(), tokens.end()));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  for (auto& t : tokens) {
    if (v.ids_.count(t)) throw IndexError("duplicate vocabulary token '" + t + "'");
    v.ids_[t] = v.tokens_.size();
    v.tokens_.push_back(std::move(t));
  }
  return v;
}

const std::string& Vocabulary::token(std::size_t id) const {
  if (id >= tokens_.size()) {
    throw IndexError("word id " + std::to_string(id) + " out of range for vocabulary of size " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::optional<std::size_t> Vocabulary::find(const std::string& token) const {
  const auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::unkify(const std::string& word, std::size_t position) const {
  if (auto id = find(word)) return *id;
  std::string sig = word_signature(word, position, *this);
  for (;;) {
    if (auto id = find(sig)) return *id;
    const auto cut = sig.rfind('-');
    if (cut == std::string::npos) break;
    sig.erase(cut);
  }
  if (auto id = find(kUnknownToken)) return *id;
  throw IndexError("word '" + word + "' is unknown and the vocabulary has no UNK class");
}

std::vector<std::size_t> Vocabulary::encode(const std::vector<std::string>& sentence) const {
  std::vector<std::size_t> out;
  out.reserve(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) out.push_back(unkify(sentence[i], i));
  return out;
}

std::string word_signature(const std::string& word, std::size_t position, const Vocabulary& vocab) {
  return word_signature(word, position, [&](const std::string& w) { return vocab.find(w).has_value(); });
}

}  // namespace synlm::tb
