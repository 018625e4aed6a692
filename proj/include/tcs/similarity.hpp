#pragma once

// Similarity between the low-resource language and candidate sentences, at
// two granularities and under two measures:
//
//   vocab-lang   |top-k grams of lrl  ∩  top-k grams of s_i| / k
//   vocab-sent   |top-k grams of lrl  ∩  grams of sentence | / k
//   lm-lang      exp(-sum NLL / sum chars) over s_i's corpus side
//   lm-sent      exp(-per-char NLL) of the sentence (length-normalized)
//
// LM scores exponentiate the *negated* average NLL: the result is the
// per-character geometric-mean likelihood under the low-resource model, a
// value in (0, 1] that grows with similarity. Language-level scores are
// assigned to every sentence of the language; sentence-level scores are
// keyed by (language, line number). A table with measure "external" can be
// imported from outside but never built here.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tcs/char_lm.hpp"
#include "tcs/common.hpp"
#include "tcs/corpus.hpp"
#include "tcs/ngram.hpp"

namespace tcs {

enum class SimKind { vocab, lm, external };
enum class SimGranularity { language, sentence };

struct SimilarityMeasure {
  SimKind kind = SimKind::vocab;
  SimGranularity granularity = SimGranularity::language;

  friend bool operator==(const SimilarityMeasure&, const SimilarityMeasure&) = default;

  std::string str() const {
    if (kind == SimKind::external) return "external";
    std::string out = kind == SimKind::vocab ? "vocab" : "lm";
    out += granularity == SimGranularity::language ? "-lang" : "-sent";
    return out;
  }

  static SimilarityMeasure parse(std::string_view token) {
    if (token == "vocab-lang") return {SimKind::vocab, SimGranularity::language};
    if (token == "vocab-sent") return {SimKind::vocab, SimGranularity::sentence};
    if (token == "lm-lang") return {SimKind::lm, SimGranularity::language};
    if (token == "lm-sent") return {SimKind::lm, SimGranularity::sentence};
    if (token == "external") return {SimKind::external, SimGranularity::sentence};
    throw ValidationError("unknown similarity measure '" + std::string(token) +
                          "' (expected vocab-lang, vocab-sent, lm-lang, lm-sent or external)");
  }
};

struct SimilarityTable {
  SimilarityMeasure measure;
  // Present iff granularity == language.
  std::map<LanguageId, double> language_scores;
  // Present iff granularity == sentence; keyed by (language code, line_no).
  std::map<std::pair<std::string, uint32_t>, double> sentence_scores;

  std::optional<double> score_for(const LanguageId& lang, uint32_t line_no) const {
    if (measure.granularity == SimGranularity::language) {
      auto it = language_scores.find(lang);
      if (it == language_scores.end()) return std::nullopt;
      return it->second;
    }
    auto it = sentence_scores.find({lang.code, line_no});
    if (it == sentence_scores.end()) return std::nullopt;
    return it->second;
  }
};

// ---------------------------------------------------------------------------
// The four measures
// ---------------------------------------------------------------------------

inline double sim_vocab_lang(const NgramProfile& lrl_profile, const NgramProfile& other,
                             int k) {
  if (lrl_profile.kind != ProfileKind::language_top_k ||
      other.kind != ProfileKind::language_top_k) {
    throw ValidationError("sim_vocab_lang expects two language profiles");
  }
  if (!(lrl_profile.spec == other.spec) || lrl_profile.spec.k != k) {
    throw ValidationError("sim_vocab_lang: mismatched n-gram specs");
  }
  const NgramProfile& small = lrl_profile.size() <= other.size() ? lrl_profile : other;
  const NgramProfile& large = lrl_profile.size() <= other.size() ? other : lrl_profile;
  std::size_t shared = 0;
  for (const std::string& gram : small.grams) {
    if (large.contains(gram)) ++shared;
  }
  return static_cast<double>(shared) / static_cast<double>(k);
}

inline double sim_vocab_sent(const NgramProfile& lrl_profile,
                             const NgramProfile& sentence_profile, int k) {
  if (lrl_profile.kind != ProfileKind::language_top_k ||
      sentence_profile.kind != ProfileKind::sentence_set) {
    throw ValidationError("sim_vocab_sent expects a language profile and a sentence profile");
  }
  std::size_t shared = 0;
  for (const std::string& gram : sentence_profile.grams) {
    if (lrl_profile.contains(gram)) ++shared;
  }
  return static_cast<double>(shared) / static_cast<double>(k);
}

inline double sim_lm_lang(const CharLm& lm, std::span<const std::string> corpus_side) {
  if (corpus_side.empty()) throw ValidationError("sim_lm_lang: empty corpus side");
  double total_nll = 0.0;
  uint64_t total_chars = 0;
  for (const std::string& sentence : corpus_side) {
    const NllScore score = lm.score(sentence);
    total_nll += score.total_nll;
    total_chars += score.char_count;
  }
  return std::exp(-total_nll / static_cast<double>(total_chars));
}

inline double sim_lm_sent(const CharLm& lm, std::string_view sentence,
                          bool length_norm = true) {
  const NllScore score = lm.score(sentence);
  return std::exp(-(length_norm ? score.per_char() : score.total_nll));
}

// ---------------------------------------------------------------------------
// Table construction
// ---------------------------------------------------------------------------

struct SimilarityInputs {
  std::optional<NgramSpec> ngram;  // vocab measures
  const CharLm* lm = nullptr;      // lm measures (trained on the lrl side)
  bool lm_length_norm = true;
};

// Top-k profiles for every language with at least one candidate.
inline std::map<LanguageId, NgramProfile> build_language_profiles(
    const MultiParallelCorpus& corpus, const NgramSpec& spec,
    std::vector<std::string>* warnings = nullptr) {
  std::map<LanguageId, NgramProfile> profiles;
  for (uint32_t i = 0; i < corpus.languages().size(); ++i) {
    if (corpus.candidate_counts()[i] == 0) continue;
    const std::vector<std::string> side = corpus.language_side(i);
    profiles.emplace(corpus.languages()[i],
                     build_language_profile(side, spec, warnings, corpus.languages()[i].code));
  }
  return profiles;
}

inline SimilarityTable build_similarity_table(
    const MultiParallelCorpus& corpus, SimilarityMeasure measure,
    const SimilarityInputs& inputs, std::vector<std::string>* warnings = nullptr,
    const std::map<LanguageId, NgramProfile>* prebuilt_profiles = nullptr) {
  SimilarityTable table;
  table.measure = measure;

  const auto language_has_candidates = [&](uint32_t i) {
    return corpus.candidate_counts()[i] > 0;
  };

  switch (measure.kind) {
    case SimKind::vocab: {
      if (!inputs.ngram.has_value()) {
        throw ValidationError("measure " + measure.str() +
                              ": missing n-gram spec (profiles cannot be built)");
      }
      const NgramSpec& spec = *inputs.ngram;
      const auto profile_for = [&](uint32_t i) -> NgramProfile {
        const LanguageId& lang = corpus.languages()[i];
        if (prebuilt_profiles != nullptr) {
          auto it = prebuilt_profiles->find(lang);
          if (it == prebuilt_profiles->end()) {
            throw ValidationError("missing n-gram profile for language " + lang.code);
          }
          return it->second;
        }
        return build_language_profile(corpus.language_side(i), spec, warnings, lang.code);
      };

      const NgramProfile lrl_profile = profile_for(corpus.lrl_index());
      if (measure.granularity == SimGranularity::language) {
        for (uint32_t i = 0; i < corpus.languages().size(); ++i) {
          if (!language_has_candidates(i)) continue;
          // The low-resource language is maximally similar to itself by
          // definition, even when its profile holds fewer than k grams.
          const double score = (i == corpus.lrl_index())
                                   ? 1.0
                                   : sim_vocab_lang(lrl_profile, profile_for(i), spec.k);
          table.language_scores.emplace(corpus.languages()[i], score);
        }
      } else {
        for (const TargetGroup& group : corpus.groups()) {
          for (const Candidate& cand : group.candidates) {
            const NgramProfile sp = build_sentence_profile(cand.source, spec);
            table.sentence_scores.emplace(
                std::pair(corpus.languages()[cand.lang].code, cand.line_no),
                sim_vocab_sent(lrl_profile, sp, spec.k));
          }
        }
      }
      return table;
    }
    case SimKind::lm: {
      if (inputs.lm == nullptr) {
        throw ValidationError("measure " + measure.str() +
                              ": missing trained character LM");
      }
      if (measure.granularity == SimGranularity::language) {
        for (uint32_t i = 0; i < corpus.languages().size(); ++i) {
          if (!language_has_candidates(i)) continue;
          const std::vector<std::string> side = corpus.language_side(i);
          table.language_scores.emplace(corpus.languages()[i], sim_lm_lang(*inputs.lm, side));
        }
      } else {
        for (const TargetGroup& group : corpus.groups()) {
          for (const Candidate& cand : group.candidates) {
            table.sentence_scores.emplace(
                std::pair(corpus.languages()[cand.lang].code, cand.line_no),
                sim_lm_sent(*inputs.lm, cand.source, inputs.lm_length_norm));
          }
        }
      }
      return table;
    }
    case SimKind::external:
      throw ValidationError("external similarity tables are imported, not built");
  }
  throw ValidationError("unreachable similarity measure");
}

// ---------------------------------------------------------------------------
// Table dump: "#simtable v1 measure=<kind>-<granularity>", rows
// "lang<TAB>score" or "lang<TAB>line_no<TAB>score", scores at 9 decimals.
// ---------------------------------------------------------------------------

inline void write_similarity_table(std::ostream& out, const SimilarityTable& table,
                                   const Provenance* prov = nullptr) {
  HeaderFields fields{{"measure", table.measure.str()}};
  out << make_header("simtable", fields, prov);
  if (table.measure.granularity == SimGranularity::language) {
    for (const auto& [lang, score] : table.language_scores) {
      out << lang.code << '\t' << fixed9(score) << '\n';
    }
  } else {
    for (const auto& [key, score] : table.sentence_scores) {
      out << key.first << '\t' << key.second << '\t' << fixed9(score) << '\n';
    }
  }
}

inline SimilarityTable read_similarity_table(const std::vector<std::string>& lines,
                                             std::string_view file = "simtable") {
  if (lines.empty()) throw ParseError(file, 1, "empty similarity table");
  HeaderInfo header = parse_header(lines[0], "simtable", file);
  SimilarityTable table;
  table.measure = SimilarityMeasure::parse(require_field(header, "measure", file));

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = split(lines[i], '\t');
    if (table.measure.granularity == SimGranularity::language) {
      if (cols.size() != 2) throw ParseError(file, i + 1, "expected 'lang<TAB>score'");
      validate_language_code(cols[0]);
      auto score = try_parse_double(cols[1]);
      if (!score || !std::isfinite(*score)) throw ParseError(file, i + 1, "bad score");
      if (!table.language_scores.emplace(LanguageId{std::string(cols[0])}, *score).second) {
        throw ParseError(file, i + 1, "duplicate language row");
      }
    } else {
      if (cols.size() != 3) {
        throw ParseError(file, i + 1, "expected 'lang<TAB>line_no<TAB>score'");
      }
      validate_language_code(cols[0]);
      auto line_no = try_parse_u64(cols[1]);
      if (!line_no || *line_no == 0 || *line_no > UINT32_MAX) {
        throw ParseError(file, i + 1, "bad line number");
      }
      auto score = try_parse_double(cols[2]);
      if (!score || !std::isfinite(*score)) throw ParseError(file, i + 1, "bad score");
      const auto key = std::pair(std::string(cols[0]), static_cast<uint32_t>(*line_no));
      if (!table.sentence_scores.emplace(key, *score).second) {
        throw ParseError(file, i + 1, "duplicate sentence row");
      }
    }
  }
  return table;
}

}  // namespace tcs
