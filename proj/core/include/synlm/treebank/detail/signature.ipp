#pragma once

#include <cctype>

namespace synlm::tb {

template <typename KnownFn>
std::string word_signature(const std::string& word, std::size_t position, KnownFn known) {
  if (word.empty()) return kUnknownToken;
  int caps = 0;
  bool digit = false, dash = false, has_lower = false;
  std::string lower;
  lower.reserve(word.size());
  for (char ch : word) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isdigit(c)) {
      digit = true;
    } else if (ch == '-') {
      dash = true;
    } else if (std::isalpha(c)) {
      if (std::islower(c)) has_lower = true;
      if (std::isupper(c)) ++caps;
    }
    lower.push_back(static_cast<char>(std::tolower(c)));
  }

  std::string sig = kUnknownToken;
  const auto first = static_cast<unsigned char>(word.front());
  if (std::isupper(first)) {
    if (caps == 1 && position == 0) {
      sig += "-INITC";
      if (known(lower)) sig += "-KNOWNLC";
    } else if (caps == 1) {
      sig += "-CAP";
    } else {
      sig += "-CAPS";
    }
  } else if (!std::isalpha(first) && caps > 0) {
    sig += "-CAPS";
  } else if (has_lower) {
    sig += "-LC";
  }
  if (digit) sig += "-NUM";
  if (dash) sig += "-DASH";

  auto ends = [&](const char* suffix) {
    const std::string s(suffix);
    return lower.size() >= s.size() && lower.compare(lower.size() - s.size(), s.size(), s) == 0;
  };
  if (lower.back() == 's' && lower.size() >= 3) {
    const char c2 = lower[lower.size() - 2];
    if (c2 != 's' && c2 != 'i' && c2 != 'u') sig += "-s";
  } else if (lower.size() >= 5 && !dash && !(digit && caps > 0)) {
    for (const char* suffix : {"ed", "ing", "ion", "er", "est", "ly", "ity", "y", "al"}) {
      if (ends(suffix)) {
        sig += std::string("-") + suffix;
        break;
      }
    }
  }
  return sig;
}

}  // namespace synlm::tb
