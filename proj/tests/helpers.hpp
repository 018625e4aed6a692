#pragma once

// Shared test scaffolding: scratch directories, corpus fixture builders, and
// independent brute-force oracles. The oracles deliberately reimplement
// n-gram enumeration, top-k ranking and entropy from scratch (ASCII inputs
// only) so they exercise none of the library code paths they check.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

#include "tcs/common.hpp"
#include "tcs/corpus.hpp"

namespace tcs_test {

class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<uint64_t> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tcs-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_lines_file(const std::filesystem::path& path,
                             const std::vector<std::string>& lines) {
  std::string content;
  for (const std::string& line : lines) {
    content += line;
    content += '\n';
  }
  tcs::write_text_file(path, content);
}

// ---------------------------------------------------------------------------
// Fixture builders
// ---------------------------------------------------------------------------

struct PairSpec {
  std::string lang;
  std::string source;
  std::string target;
};

// Builds a corpus directly from (lang, source, target) triples; line numbers
// are assigned per language in order of appearance.
inline tcs::MultiParallelCorpus corpus_from_pairs(const std::vector<std::string>& lang_codes,
                                                  const std::string& lrl,
                                                  const std::vector<PairSpec>& pairs,
                                                  tcs::IngestReport* report = nullptr) {
  std::vector<tcs::LanguageId> languages;
  for (const std::string& code : lang_codes) languages.push_back({code});
  std::vector<std::vector<tcs::SentencePair>> by_language(languages.size());
  for (const PairSpec& pair : pairs) {
    bool found = false;
    for (std::size_t i = 0; i < languages.size(); ++i) {
      if (languages[i].code == pair.lang) {
        by_language[i].push_back({pair.source, pair.target,
                                  static_cast<uint32_t>(by_language[i].size() + 1)});
        found = true;
        break;
      }
    }
    if (!found) throw tcs::ValidationError("fixture: unknown language " + pair.lang);
  }
  return tcs::build_index(languages, std::move(by_language), {lrl}, report);
}

// ---------------------------------------------------------------------------
// Brute-force oracles (ASCII inputs only: byte == code point)
// ---------------------------------------------------------------------------

inline std::map<std::string, uint64_t> oracle_ngram_counts(const std::string& text,
                                                           const std::vector<int>& orders) {
  std::map<std::string, uint64_t> counts;
  std::vector<std::string> words;
  std::string word;
  for (char c : text) {
    if (c == ' ') {
      if (!word.empty()) words.push_back(word);
      word.clear();
    } else {
      word.push_back(c);
    }
  }
  if (!word.empty()) words.push_back(word);
  for (const std::string& w : words) {
    for (int n : orders) {
      if (n < 1 || static_cast<std::size_t>(n) > w.size()) continue;
      for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= w.size(); ++i) {
        ++counts[w.substr(i, static_cast<std::size_t>(n))];
      }
    }
  }
  return counts;
}

inline std::map<std::string, uint64_t> oracle_side_counts(
    const std::vector<std::string>& sentences, const std::vector<int>& orders) {
  std::map<std::string, uint64_t> counts;
  for (const std::string& sentence : sentences) {
    for (const auto& [gram, count] : oracle_ngram_counts(sentence, orders)) {
      counts[gram] += count;
    }
  }
  return counts;
}

// Exact top-k under (count desc, gram lexicographic asc) via full sort.
inline std::set<std::string> oracle_top_k(const std::map<std::string, uint64_t>& counts,
                                          int k) {
  std::vector<std::pair<std::string, uint64_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::set<std::string> top;
  for (std::size_t i = 0; i < items.size() && i < static_cast<std::size_t>(k); ++i) {
    top.insert(items[i].first);
  }
  return top;
}

inline double oracle_vocab_lang(const std::vector<std::string>& lrl_side,
                                const std::vector<std::string>& other_side,
                                const std::vector<int>& orders, int k) {
  const std::set<std::string> a = oracle_top_k(oracle_side_counts(lrl_side, orders), k);
  const std::set<std::string> b = oracle_top_k(oracle_side_counts(other_side, orders), k);
  std::size_t shared = 0;
  for (const std::string& gram : a) shared += b.count(gram);
  return static_cast<double>(shared) / static_cast<double>(k);
}

inline double oracle_vocab_sent(const std::vector<std::string>& lrl_side,
                                const std::string& sentence,
                                const std::vector<int>& orders, int k) {
  const std::set<std::string> top = oracle_top_k(oracle_side_counts(lrl_side, orders), k);
  std::set<std::string> grams;
  for (const auto& [gram, count] : oracle_ngram_counts(sentence, orders)) grams.insert(gram);
  std::size_t shared = 0;
  for (const std::string& gram : grams) shared += top.count(gram);
  return static_cast<double>(shared) / static_cast<double>(k);
}

// Per-symbol entropy (nats) of the corpus character distribution, counting
// one end-of-sentence event per sentence.
inline double oracle_corpus_entropy(const std::vector<std::string>& sentences) {
  std::map<int, uint64_t> counts;
  uint64_t total = 0;
  for (const std::string& sentence : sentences) {
    for (char c : sentence) {
      ++counts[static_cast<unsigned char>(c)];
      ++total;
    }
    ++counts[-1];  // end of sentence
    ++total;
  }
  double h = 0.0;
  for (const auto& [sym, count] : counts) {
    const double p = static_cast<double>(count) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace tcs_test
