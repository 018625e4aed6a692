#pragma once

// Parallel corpus ingestion and the target-keyed candidate index.
//
// Ingestion reads line-aligned source/target files (or a single TSV),
// normalizes both sides and drops pairs that are empty after normalization.
// build_index groups the surviving pairs by exact normalized target string;
// within a group candidates are ordered by (configured language order,
// line number) and identical (language, source, target) triples are
// deduplicated. Groups are stored sorted by target, so serialization is
// byte-deterministic for identical inputs.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tcs/common.hpp"
#include "tcs/text.hpp"

namespace tcs {

struct LanguageId {
  std::string code;

  friend auto operator<=>(const LanguageId&, const LanguageId&) = default;
};

// Codes appear in TSV columns, headers and comma lists, so keep them plain.
inline void validate_language_code(std::string_view code) {
  if (code.empty()) throw ValidationError("language code must not be empty");
  for (char c : code) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) {
      throw ValidationError("language code '" + std::string(code) +
                            "' contains unsupported characters");
    }
  }
}

struct SentencePair {
  std::string source;  // normalized
  std::string target;  // normalized
  uint32_t line_no = 0;  // 1-based position in the input file
};

struct Candidate {
  uint32_t lang = 0;  // index into MultiParallelCorpus::languages()
  uint32_t line_no = 0;
  std::string source;
};

struct TargetGroup {
  std::string target;
  std::vector<Candidate> candidates;
};

struct IngestReport {
  struct SkippedLine {
    std::string lang;
    std::string file;
    uint32_t line_no = 0;
  };

  std::vector<SkippedLine> skipped;
  std::map<std::string, uint64_t> ingested_pairs;  // per language, post-skip
  uint64_t duplicates_dropped = 0;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

inline std::string normalize_line(const std::string& raw, const text::NormalizePolicy& policy,
                                  const std::filesystem::path& file, std::size_t line_no) {
  try {
    return text::normalize_text(raw, policy);
  } catch (const ValidationError& e) {
    throw ParseError(file.string(), line_no, e.what());
  }
}

// Line-aligned pair files (layout A). Both files must have the same line
// count; pairs empty on either side after normalization are skipped and
// reported.
inline std::vector<SentencePair> ingest_pair_files(const LanguageId& lang,
                                                   const std::filesystem::path& source_path,
                                                   const std::filesystem::path& target_path,
                                                   const text::NormalizePolicy& policy,
                                                   IngestReport& report) {
  validate_language_code(lang.code);
  const std::vector<std::string> src_lines = read_lines(source_path);
  const std::vector<std::string> tgt_lines = read_lines(target_path);
  if (src_lines.size() != tgt_lines.size()) {
    throw ValidationError(lang.code + ": line count mismatch " +
                          std::to_string(src_lines.size()) + " vs " +
                          std::to_string(tgt_lines.size()) + " (" + source_path.string() +
                          " vs " + target_path.string() + ")");
  }

  std::vector<SentencePair> pairs;
  pairs.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    const uint32_t line_no = static_cast<uint32_t>(i + 1);
    std::string source = normalize_line(src_lines[i], policy, source_path, line_no);
    std::string target = normalize_line(tgt_lines[i], policy, target_path, line_no);
    if (source.empty() || target.empty()) {
      report.skipped.push_back(
          {lang.code, (source.empty() ? source_path : target_path).string(), line_no});
      continue;
    }
    pairs.push_back({std::move(source), std::move(target), line_no});
  }
  report.ingested_pairs[lang.code] = pairs.size();
  return pairs;
}

// Single-file layout B: "lang<TAB>source<TAB>target", one pair per line.
// Returns pair lists aligned with the configured language order.
inline std::vector<std::vector<SentencePair>> ingest_tsv(
    const std::filesystem::path& tsv_path, const std::vector<LanguageId>& languages,
    const text::NormalizePolicy& policy, IngestReport& report) {
  std::unordered_map<std::string, uint32_t, StringHash, std::equal_to<>> lang_index;
  for (uint32_t i = 0; i < languages.size(); ++i) {
    validate_language_code(languages[i].code);
    lang_index.emplace(languages[i].code, i);
  }

  std::vector<std::vector<SentencePair>> pairs(languages.size());
  const std::vector<std::string> lines = read_lines(tsv_path);
  const std::string file = tsv_path.string();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto cols = split(lines[i], '\t');
    if (cols.size() != 3) {
      throw ParseError(file, line_no,
                       "expected 3 tab-separated fields (lang, source, target), got " +
                           std::to_string(cols.size()));
    }
    const auto it = lang_index.find(cols[0]);
    if (it == lang_index.end()) {
      throw ParseError(file, line_no,
                       "language '" + std::string(cols[0]) + "' not listed in config");
    }
    std::string source = normalize_line(std::string(cols[1]), policy, tsv_path, line_no);
    std::string target = normalize_line(std::string(cols[2]), policy, tsv_path, line_no);
    if (source.empty() || target.empty()) {
      report.skipped.push_back({std::string(cols[0]), file, static_cast<uint32_t>(line_no)});
      continue;
    }
    pairs[it->second].push_back(
        {std::move(source), std::move(target), static_cast<uint32_t>(line_no)});
  }
  for (std::size_t i = 0; i < languages.size(); ++i) {
    report.ingested_pairs[languages[i].code] = pairs[i].size();
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// MultiParallelCorpus
// ---------------------------------------------------------------------------

class MultiParallelCorpus {
 public:
  MultiParallelCorpus() = default;

  const std::vector<LanguageId>& languages() const { return languages_; }
  uint32_t lrl_index() const { return lrl_; }
  const LanguageId& lrl() const { return languages_[lrl_]; }
  const std::vector<TargetGroup>& groups() const { return groups_; }
  // Candidate counts per language, aligned with languages().
  const std::vector<uint64_t>& candidate_counts() const { return counts_; }

  std::optional<uint32_t> language_index(std::string_view code) const {
    for (uint32_t i = 0; i < languages_.size(); ++i) {
      if (languages_[i].code == code) return i;
    }
    return std::nullopt;
  }

  // All source sentences of one language, in group order.
  std::vector<std::string> language_side(uint32_t lang) const {
    std::vector<std::string> side;
    side.reserve(counts_.empty() ? 0 : static_cast<std::size_t>(counts_[lang]));
    for (const TargetGroup& group : groups_) {
      for (const Candidate& cand : group.candidates) {
        if (cand.lang == lang) side.push_back(cand.source);
      }
    }
    return side;
  }

  uint64_t total_candidates() const {
    uint64_t total = 0;
    for (uint64_t c : counts_) total += c;
    return total;
  }

  friend MultiParallelCorpus build_index(const std::vector<LanguageId>&,
                                         std::vector<std::vector<SentencePair>>,
                                         const LanguageId&, IngestReport*);
  friend MultiParallelCorpus read_index(const std::vector<std::string>&, std::string_view);

 private:
  std::vector<LanguageId> languages_;
  uint32_t lrl_ = 0;
  std::vector<TargetGroup> groups_;
  std::vector<uint64_t> counts_;
};

inline MultiParallelCorpus build_index(const std::vector<LanguageId>& languages,
                                       std::vector<std::vector<SentencePair>> pairs_by_language,
                                       const LanguageId& lrl,
                                       IngestReport* report = nullptr) {
  if (languages.empty()) throw ValidationError("build_index: no languages");
  if (pairs_by_language.size() != languages.size()) {
    throw ValidationError("build_index: pair lists do not match language list");
  }
  {
    std::set<std::string_view> seen;
    for (const LanguageId& lang : languages) {
      validate_language_code(lang.code);
      if (!seen.insert(lang.code).second) {
        throw ValidationError("duplicate language '" + lang.code + "'");
      }
    }
  }

  MultiParallelCorpus corpus;
  corpus.languages_ = languages;
  bool lrl_found = false;
  for (uint32_t i = 0; i < languages.size(); ++i) {
    if (languages[i] == lrl) {
      corpus.lrl_ = i;
      lrl_found = true;
      break;
    }
  }
  if (!lrl_found) {
    throw ValidationError("low-resource language '" + lrl.code +
                          "' is not among the configured languages");
  }

  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> group_of;
  for (uint32_t lang = 0; lang < pairs_by_language.size(); ++lang) {
    for (SentencePair& pair : pairs_by_language[lang]) {
      auto it = group_of.find(pair.target);
      std::size_t idx;
      if (it == group_of.end()) {
        idx = corpus.groups_.size();
        corpus.groups_.push_back({pair.target, {}});
        group_of.emplace(std::move(pair.target), idx);
      } else {
        idx = it->second;
      }
      corpus.groups_[idx].candidates.push_back({lang, pair.line_no, std::move(pair.source)});
    }
  }

  uint64_t duplicates = 0;
  for (TargetGroup& group : corpus.groups_) {
    std::sort(group.candidates.begin(), group.candidates.end(),
              [](const Candidate& a, const Candidate& b) {
                if (a.lang != b.lang) return a.lang < b.lang;
                return a.line_no < b.line_no;
              });
    // Decide keep/drop before any move; the set holds views into intact
    // candidate strings.
    std::set<std::pair<uint32_t, std::string_view>> seen;
    std::vector<bool> keep(group.candidates.size());
    for (std::size_t c = 0; c < group.candidates.size(); ++c) {
      keep[c] = seen.emplace(group.candidates[c].lang,
                             std::string_view(group.candidates[c].source))
                    .second;
    }
    std::vector<Candidate> kept;
    kept.reserve(group.candidates.size());
    for (std::size_t c = 0; c < group.candidates.size(); ++c) {
      if (keep[c]) {
        kept.push_back(std::move(group.candidates[c]));
      } else {
        ++duplicates;
      }
    }
    group.candidates = std::move(kept);
  }
  if (report != nullptr) report->duplicates_dropped += duplicates;

  std::sort(corpus.groups_.begin(), corpus.groups_.end(),
            [](const TargetGroup& a, const TargetGroup& b) { return a.target < b.target; });

  corpus.counts_.assign(languages.size(), 0);
  for (const TargetGroup& group : corpus.groups_) {
    for (const Candidate& cand : group.candidates) ++corpus.counts_[cand.lang];
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Index serialization
//
// #tcs-index v1 lrl=<code> languages=<c1,c2,...> groups=<G>
// lang<TAB><code><TAB><candidate count>     (one per language, config order)
// group<TAB><target>                        (groups sorted by target)
// cand<TAB><code><TAB><line_no><TAB><source>
// ---------------------------------------------------------------------------

inline void write_index(std::ostream& out, const MultiParallelCorpus& corpus,
                        const Provenance* prov = nullptr) {
  std::string langs;
  for (std::size_t i = 0; i < corpus.languages().size(); ++i) {
    if (i > 0) langs += ',';
    langs += corpus.languages()[i].code;
  }
  HeaderFields fields{{"lrl", corpus.lrl().code},
                      {"languages", langs},
                      {"groups", std::to_string(corpus.groups().size())}};
  out << make_header("tcs-index", fields, prov);
  for (std::size_t i = 0; i < corpus.languages().size(); ++i) {
    out << "lang\t" << corpus.languages()[i].code << '\t' << corpus.candidate_counts()[i]
        << '\n';
  }
  for (const TargetGroup& group : corpus.groups()) {
    out << "group\t" << group.target << '\n';
    for (const Candidate& cand : group.candidates) {
      out << "cand\t" << corpus.languages()[cand.lang].code << '\t' << cand.line_no << '\t'
          << cand.source << '\n';
    }
  }
}

inline MultiParallelCorpus read_index(const std::vector<std::string>& lines,
                                      std::string_view file = "tcs-index") {
  if (lines.empty()) throw ParseError(file, 1, "empty index file");
  HeaderInfo header = parse_header(lines[0], "tcs-index", file);

  MultiParallelCorpus corpus;
  for (std::string_view code : split(require_field(header, "languages", file), ',')) {
    validate_language_code(code);
    corpus.languages_.push_back({std::string(code)});
  }
  const std::string& lrl_code = require_field(header, "lrl", file);
  auto lrl_idx = corpus.language_index(lrl_code);
  if (!lrl_idx) throw ParseError(file, 1, "lrl '" + lrl_code + "' not in languages");
  corpus.lrl_ = *lrl_idx;
  auto group_count = try_parse_u64(require_field(header, "groups", file));
  if (!group_count) throw ParseError(file, 1, "bad groups count");

  std::vector<uint64_t> declared_counts;
  std::size_t i = 1;
  for (; i < lines.size() && lines[i].starts_with("lang\t"); ++i) {
    const auto cols = split(lines[i], '\t');
    if (cols.size() != 3) throw ParseError(file, i + 1, "bad lang row");
    const std::size_t idx = declared_counts.size();
    if (idx >= corpus.languages_.size() || cols[1] != corpus.languages_[idx].code) {
      throw ParseError(file, i + 1, "lang rows do not match header language list");
    }
    auto count = try_parse_u64(cols[2]);
    if (!count) throw ParseError(file, i + 1, "bad candidate count");
    declared_counts.push_back(*count);
  }
  if (declared_counts.size() != corpus.languages_.size()) {
    throw ParseError(file, i + 1, "expected one lang row per language");
  }

  TargetGroup* current = nullptr;
  for (; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.starts_with("group\t")) {
      std::string target = line.substr(6);
      if (target.empty()) throw ParseError(file, i + 1, "empty group target");
      if (!corpus.groups_.empty()) {
        if (corpus.groups_.back().candidates.empty()) {
          throw ParseError(file, i + 1, "group without candidates");
        }
        if (target <= corpus.groups_.back().target) {
          throw ParseError(file, i + 1, "groups not sorted by target");
        }
      }
      corpus.groups_.push_back({std::move(target), {}});
      current = &corpus.groups_.back();
    } else if (line.starts_with("cand\t")) {
      if (current == nullptr) throw ParseError(file, i + 1, "candidate before any group");
      const auto cols = split(line, '\t');
      if (cols.size() != 4) throw ParseError(file, i + 1, "bad cand row");
      auto lang = corpus.language_index(cols[1]);
      if (!lang) throw ParseError(file, i + 1, "unknown language '" + std::string(cols[1]) + "'");
      auto line_no = try_parse_u64(cols[2]);
      if (!line_no || *line_no == 0 || *line_no > UINT32_MAX) {
        throw ParseError(file, i + 1, "bad line number");
      }
      if (cols[3].empty()) throw ParseError(file, i + 1, "empty candidate source");
      Candidate cand{*lang, static_cast<uint32_t>(*line_no), std::string(cols[3])};
      if (!current->candidates.empty()) {
        const Candidate& prev = current->candidates.back();
        if (std::pair(cand.lang, cand.line_no) <= std::pair(prev.lang, prev.line_no)) {
          throw ParseError(file, i + 1, "candidates not sorted by (language, line)");
        }
      }
      current->candidates.push_back(std::move(cand));
    } else {
      throw ParseError(file, i + 1, "unexpected row '" + line.substr(0, 32) + "'");
    }
  }
  if (!corpus.groups_.empty() && corpus.groups_.back().candidates.empty()) {
    throw ParseError(file, lines.size(), "group without candidates");
  }
  if (corpus.groups_.size() != *group_count) {
    throw ParseError(file, lines.size(),
                     "expected " + std::to_string(*group_count) + " groups, found " +
                         std::to_string(corpus.groups_.size()));
  }

  corpus.counts_.assign(corpus.languages_.size(), 0);
  for (const TargetGroup& group : corpus.groups_) {
    for (const Candidate& cand : group.candidates) ++corpus.counts_[cand.lang];
  }
  if (corpus.counts_ != declared_counts) {
    throw ParseError(file, lines.size(), "lang row counts do not match candidates");
  }
  return corpus;
}

}  // namespace tcs
