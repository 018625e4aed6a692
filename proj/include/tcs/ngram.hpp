#pragma once

// Character n-gram extraction and top-k frequency profiles.
//
// N-grams are taken per word (text is split on the single spaces left by
// normalization; no gram spans a word boundary) and are measured in code
// points, not bytes. Language profiles keep the k most frequent grams pooled
// across all configured orders, ranked by (count desc, gram lexicographic
// asc); the tie rule is part of the dump format contract.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tcs/common.hpp"
#include "tcs/text.hpp"

namespace tcs {

struct NgramSpec {
  std::vector<int> orders{1, 2, 3, 4};
  int k = 10000;

  friend bool operator==(const NgramSpec&, const NgramSpec&) = default;

  void validate() const {
    if (orders.empty()) throw ValidationError("ngram spec: orders must not be empty");
    for (int n : orders) {
      if (n < 1) throw ValidationError("ngram spec: every order must be >= 1");
    }
    if (k < 1) throw ValidationError("ngram spec: k must be >= 1");
  }

  // Sorted, deduplicated copy; parsing and config loading normalize with this.
  static std::vector<int> normalized_orders(std::vector<int> orders) {
    std::sort(orders.begin(), orders.end());
    orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
    return orders;
  }

  std::string orders_str() const {
    std::string out;
    for (std::size_t i = 0; i < orders.size(); ++i) {
      if (i > 0) out += ',';
      out += std::to_string(orders[i]);
    }
    return out;
  }
};

using NgramCounts = std::unordered_map<std::string, uint64_t, StringHash, std::equal_to<>>;
using NgramSet = std::unordered_set<std::string, StringHash, std::equal_to<>>;

namespace detail {

template <typename WordFn>
inline void for_each_word(std::string_view t, WordFn&& fn) {
  std::size_t pos = 0;
  while (pos < t.size()) {
    std::size_t sp = t.find(' ', pos);
    if (sp == std::string_view::npos) sp = t.size();
    if (sp > pos) fn(t.substr(pos, sp - pos));
    pos = sp + 1;
  }
}

// Grams are substrings of the original UTF-8 buffer; code point boundaries
// are located once per word so no re-encoding happens.
template <typename GramFn>
inline void for_each_gram(std::string_view t, std::span<const int> orders, GramFn&& fn) {
  std::vector<std::size_t> bounds;
  for_each_word(t, [&](std::string_view word) {
    bounds.clear();
    for (std::size_t j = 0; j < word.size(); ++j) {
      if ((static_cast<unsigned char>(word[j]) & 0xC0) != 0x80) bounds.push_back(j);
    }
    bounds.push_back(word.size());
    const std::size_t cp_count = bounds.size() - 1;
    for (int order : orders) {
      if (order < 1 || static_cast<std::size_t>(order) > cp_count) continue;
      const std::size_t width = static_cast<std::size_t>(order);
      for (std::size_t s = 0; s + width <= cp_count; ++s) {
        fn(word.substr(bounds[s], bounds[s + width] - bounds[s]));
      }
    }
  });
}

inline void bump(NgramCounts& counts, std::string_view gram) {
  auto it = counts.find(gram);
  if (it == counts.end()) {
    counts.emplace(std::string(gram), 1);
  } else {
    ++it->second;
  }
}

}  // namespace detail

// Multiset of per-word character n-grams of a normalized sentence.
inline NgramCounts extract_ngrams(std::string_view text, std::span<const int> orders) {
  NgramCounts counts;
  detail::for_each_gram(text, orders, [&](std::string_view gram) { detail::bump(counts, gram); });
  return counts;
}

enum class ProfileKind { language_top_k, sentence_set };

struct NgramProfile {
  NgramSpec spec;
  ProfileKind kind = ProfileKind::language_top_k;
  // Rank order for language profiles, lexicographic for sentence sets.
  std::vector<std::string> grams;
  // Aligned with grams; language profiles only.
  std::vector<uint64_t> counts;
  NgramSet gram_set;

  std::size_t size() const { return grams.size(); }
  bool contains(std::string_view gram) const {
    return gram_set.find(gram) != gram_set.end();
  }
};

// Pools counts over a corpus side and keeps the top k grams. An empty side
// yields an empty profile and a warning (when a sink is provided).
inline NgramProfile build_language_profile(std::span<const std::string> sentences,
                                           const NgramSpec& spec,
                                           std::vector<std::string>* warnings = nullptr,
                                           std::string_view label = {}) {
  spec.validate();
  NgramProfile profile;
  profile.spec = spec;
  profile.kind = ProfileKind::language_top_k;

  NgramCounts acc;
  for (const std::string& sentence : sentences) {
    detail::for_each_gram(sentence, spec.orders,
                          [&](std::string_view gram) { detail::bump(acc, gram); });
  }

  if (warnings != nullptr && acc.empty()) {
    std::string who = label.empty() ? std::string("corpus side") : std::string(label);
    warnings->push_back(sentences.empty()
                            ? who + ": empty corpus side, profile is empty"
                            : who + ": no n-grams extracted, profile is empty");
  }

  std::vector<std::pair<std::string_view, uint64_t>> ranked;
  ranked.reserve(acc.size());
  for (const auto& [gram, count] : acc) ranked.emplace_back(gram, count);
  const auto by_rank = [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  };
  const std::size_t cut = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(spec.k));
  if (cut < ranked.size()) {
    std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(cut),
                     ranked.end(), by_rank);
    ranked.resize(cut);
  }
  std::sort(ranked.begin(), ranked.end(), by_rank);

  profile.grams.reserve(ranked.size());
  profile.counts.reserve(ranked.size());
  profile.gram_set.reserve(ranked.size());
  for (const auto& [gram, count] : ranked) {
    profile.grams.emplace_back(gram);
    profile.counts.push_back(count);
    profile.gram_set.insert(profile.grams.back());
  }
  return profile;
}

// Deduplicated gram set of one sentence; no top-k truncation.
inline NgramProfile build_sentence_profile(std::string_view sentence, const NgramSpec& spec) {
  spec.validate();
  NgramProfile profile;
  profile.spec = spec;
  profile.kind = ProfileKind::sentence_set;
  detail::for_each_gram(sentence, spec.orders, [&](std::string_view gram) {
    if (profile.gram_set.find(gram) == profile.gram_set.end()) {
      profile.gram_set.insert(std::string(gram));
    }
  });
  profile.grams.assign(profile.gram_set.begin(), profile.gram_set.end());
  std::sort(profile.grams.begin(), profile.grams.end());
  return profile;
}

// ---------------------------------------------------------------------------
// Profile dump: "#ngram-profile v1 lang=<id> k=<k> orders=<list>" then
// "gram<TAB>count" rows in rank order.
// ---------------------------------------------------------------------------

inline void write_ngram_profile(std::ostream& out, const NgramProfile& profile,
                                std::string_view lang_code,
                                const Provenance* prov = nullptr) {
  if (profile.kind != ProfileKind::language_top_k) {
    throw ValidationError("only language profiles have a dump format");
  }
  HeaderFields fields{{"lang", std::string(lang_code)},
                      {"k", std::to_string(profile.spec.k)},
                      {"orders", profile.spec.orders_str()}};
  out << make_header("ngram-profile", fields, prov);
  for (std::size_t i = 0; i < profile.grams.size(); ++i) {
    out << profile.grams[i] << '\t' << profile.counts[i] << '\n';
  }
}

inline NgramProfile read_ngram_profile(const std::vector<std::string>& lines,
                                       std::string& lang_code,
                                       std::string_view file = "ngram-profile") {
  if (lines.empty()) throw ParseError(file, 1, "empty profile file");
  HeaderInfo header = parse_header(lines[0], "ngram-profile", file);
  lang_code = require_field(header, "lang", file);

  NgramProfile profile;
  profile.kind = ProfileKind::language_top_k;
  auto k = try_parse_i64(require_field(header, "k", file));
  if (!k || *k < 1) throw ParseError(file, 1, "bad k");
  profile.spec.k = static_cast<int>(*k);
  profile.spec.orders.clear();
  for (std::string_view tok : split(require_field(header, "orders", file), ',')) {
    auto n = try_parse_i64(tok);
    if (!n || *n < 1) throw ParseError(file, 1, "bad orders list");
    profile.spec.orders.push_back(static_cast<int>(*n));
  }
  profile.spec.orders = NgramSpec::normalized_orders(profile.spec.orders);
  profile.spec.validate();

  uint64_t prev_count = UINT64_MAX;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = split(lines[i], '\t');
    if (cols.size() != 2) throw ParseError(file, i + 1, "expected 'gram<TAB>count'");
    auto count = try_parse_u64(cols[1]);
    if (!count || *count == 0) throw ParseError(file, i + 1, "bad count");
    if (*count > prev_count) throw ParseError(file, i + 1, "counts not in rank order");
    prev_count = *count;
    if (cols[0].empty()) throw ParseError(file, i + 1, "empty gram");
    profile.grams.emplace_back(cols[0]);
    profile.counts.push_back(*count);
    if (!profile.gram_set.insert(profile.grams.back()).second) {
      throw ParseError(file, i + 1, "duplicate gram");
    }
  }
  if (profile.grams.size() > static_cast<std::size_t>(profile.spec.k)) {
    throw ParseError(file, lines.size(), "more grams than k");
  }
  return profile;
}

}  // namespace tcs
