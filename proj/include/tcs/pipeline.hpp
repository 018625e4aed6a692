#pragma once

// The four commands behind the CLI: index, sim, select, stats. Each one is a
// plain function over RunConfig so tests can drive the full pipeline without
// spawning processes. All artifacts land in the configured output directory:
//
//   corpus.idx          target-keyed candidate index
//   index_report.json   ingestion summary (pairs, skips, duplicates)
//   simtable.tsv        similarity table for the configured measure
//   profile.<lang>.tsv  top-k n-gram profiles      (sim --artifacts)
//   charlm.tsv          character LM counts        (sim --artifacts)
//   plan.tsv            per-group conditional distributions
//   plan_stats.json     entropy / expected-mass summary
//   selections.tsv      epoch selections            (format A)
//   epoch<N>.{src,tgt,lang}                         (format B)

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcs/char_lm.hpp"
#include "tcs/common.hpp"
#include "tcs/config.hpp"
#include "tcs/corpus.hpp"
#include "tcs/ngram.hpp"
#include "tcs/sampler.hpp"
#include "tcs/similarity.hpp"

namespace tcs {

struct CommandOptions {
  bool quiet = false;
  bool artifacts = false;       // sim: also dump profiles / LM counts
  std::ostream* log = nullptr;  // defaults to std::cout
  // select: read corpus.idx/simtable.tsv from here instead of the output
  // directory (used by the tau sweep, which writes into per-tau subdirs).
  std::filesystem::path input_dir;
};

struct PipelinePaths {
  std::filesystem::path out_dir;
  std::filesystem::path index;
  std::filesystem::path index_report;
  std::filesystem::path simtable;
  std::filesystem::path plan;
  std::filesystem::path plan_stats;
  std::filesystem::path selections;

  static PipelinePaths from(const RunConfig& config) {
    PipelinePaths paths;
    paths.out_dir = config.out_dir;
    paths.index = paths.out_dir / "corpus.idx";
    paths.index_report = paths.out_dir / "index_report.json";
    paths.simtable = paths.out_dir / "simtable.tsv";
    paths.plan = paths.out_dir / "plan.tsv";
    paths.plan_stats = paths.out_dir / "plan_stats.json";
    paths.selections = paths.out_dir / "selections.tsv";
    return paths;
  }
};

namespace detail {

inline std::ostream& log_stream(const CommandOptions& options) {
  return options.log != nullptr ? *options.log : std::cout;
}

inline void ensure_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

inline void require_artifact(const std::filesystem::path& path, std::string_view producer) {
  if (!std::filesystem::exists(path)) {
    throw ValidationError(path.string() + " not found; run `tcs " + std::string(producer) +
                          "` first");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// index
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const IngestReport& report,
                                     const MultiParallelCorpus& corpus) {
  nlohmann::json langs = nlohmann::json::array();
  for (std::size_t i = 0; i < corpus.languages().size(); ++i) {
    const std::string& code = corpus.languages()[i].code;
    uint64_t skipped = 0;
    for (const auto& skip : report.skipped) {
      if (skip.lang == code) ++skipped;
    }
    const auto pairs_it = report.ingested_pairs.find(code);
    langs.push_back({{"code", code},
                     {"pairs", pairs_it == report.ingested_pairs.end() ? 0 : pairs_it->second},
                     {"skipped", skipped},
                     {"candidates", corpus.candidate_counts()[i]}});
  }
  nlohmann::json skipped_lines = nlohmann::json::array();
  for (const auto& skip : report.skipped) {
    skipped_lines.push_back({{"lang", skip.lang}, {"file", skip.file}, {"line", skip.line_no}});
  }
  return {{"languages", std::move(langs)},
          {"lrl", corpus.lrl().code},
          {"groups", corpus.groups().size()},
          {"duplicates_dropped", report.duplicates_dropped},
          {"skipped_lines", std::move(skipped_lines)},
          {"warnings", report.warnings}};
}

struct IndexResult {
  MultiParallelCorpus corpus;
  IngestReport report;
};

inline IndexResult cmd_index(const RunConfig& config, const CommandOptions& options = {}) {
  config.validate();
  config.validate_input_paths();
  const PipelinePaths paths = PipelinePaths::from(config);
  detail::ensure_out_dir(paths.out_dir);
  const Provenance prov{"index", config.config_hash()};

  IngestReport report;
  std::vector<LanguageId> languages;
  languages.reserve(config.languages.size());
  for (const LanguageSpec& spec : config.languages) languages.push_back(spec.id);

  std::vector<std::vector<SentencePair>> pairs;
  if (!config.tsv_path.empty()) {
    pairs = ingest_tsv(config.tsv_path, languages, config.normalize_policy(), report);
  } else {
    pairs.reserve(config.languages.size());
    for (const LanguageSpec& spec : config.languages) {
      pairs.push_back(ingest_pair_files(spec.id, spec.src_path, spec.tgt_path,
                                        config.normalize_policy(), report));
    }
  }
  for (const LanguageSpec& spec : config.languages) {
    if (report.ingested_pairs[spec.id.code] == 0) {
      report.warnings.push_back("language " + spec.id.code + " has no usable pairs");
    }
  }

  MultiParallelCorpus corpus = build_index(languages, std::move(pairs), config.lrl, &report);

  std::ostringstream index_out;
  write_index(index_out, corpus, &prov);
  write_text_file(paths.index, index_out.str());
  write_text_file(paths.index_report, report_to_json(report, corpus).dump(2) + "\n");

  if (!options.quiet) {
    std::ostream& log = detail::log_stream(options);
    log << "language\tpairs\tskipped\tcandidates\n";
    for (std::size_t i = 0; i < corpus.languages().size(); ++i) {
      const std::string& code = corpus.languages()[i].code;
      uint64_t skipped = 0;
      for (const auto& skip : report.skipped) {
        if (skip.lang == code) ++skipped;
      }
      log << code << '\t' << report.ingested_pairs[code] << '\t' << skipped << '\t'
          << corpus.candidate_counts()[i] << '\n';
    }
    log << "groups\t" << corpus.groups().size() << '\n';
    log << "duplicates dropped\t" << report.duplicates_dropped << '\n';
    log << "wrote " << paths.index.string() << '\n';
  }
  return {std::move(corpus), std::move(report)};
}

// ---------------------------------------------------------------------------
// sim
// ---------------------------------------------------------------------------

inline SimilarityTable cmd_sim(const RunConfig& config, const CommandOptions& options = {}) {
  config.validate();
  const PipelinePaths paths = PipelinePaths::from(config);
  detail::require_artifact(paths.index, "index");
  detail::ensure_out_dir(paths.out_dir);
  const Provenance prov{"sim", config.config_hash()};

  const MultiParallelCorpus corpus = read_index(read_lines(paths.index), paths.index.string());

  SimilarityInputs inputs;
  inputs.lm_length_norm = config.lm_length_norm;
  std::vector<std::string> warnings;
  std::map<LanguageId, NgramProfile> profiles;
  CharLm lm;

  if (config.measure.kind == SimKind::vocab) {
    inputs.ngram = config.ngram;
    if (config.measure.granularity == SimGranularity::language) {
      profiles = build_language_profiles(corpus, config.ngram, &warnings);
    } else {
      const uint32_t lrl = corpus.lrl_index();
      profiles.emplace(corpus.lrl(),
                       build_language_profile(corpus.language_side(lrl), config.ngram,
                                              &warnings, corpus.lrl().code));
    }
  } else {
    const std::vector<std::string> lrl_side = corpus.language_side(corpus.lrl_index());
    if (lrl_side.empty()) {
      throw ValidationError("cannot train character LM: language " + corpus.lrl().code +
                            " has no sentences");
    }
    lm = CharLm::train(lrl_side, config.lm_order, config.lm_alpha);
    inputs.lm = &lm;
  }

  const SimilarityTable table = build_similarity_table(
      corpus, config.measure, inputs, &warnings,
      config.measure.kind == SimKind::vocab ? &profiles : nullptr);

  std::ostringstream table_out;
  write_similarity_table(table_out, table, &prov);
  write_text_file(paths.simtable, table_out.str());

  if (options.artifacts) {
    for (const auto& [lang, profile] : profiles) {
      std::ostringstream profile_out;
      write_ngram_profile(profile_out, profile, lang.code, &prov);
      write_text_file(paths.out_dir / ("profile." + lang.code + ".tsv"), profile_out.str());
    }
    if (config.measure.kind == SimKind::lm) {
      std::ostringstream lm_out;
      lm.write(lm_out, &prov);
      write_text_file(paths.out_dir / "charlm.tsv", lm_out.str());
    }
  }

  if (!options.quiet) {
    std::ostream& log = detail::log_stream(options);
    for (const std::string& warning : warnings) log << "warning: " << warning << '\n';
    const std::size_t rows = config.measure.granularity == SimGranularity::language
                                 ? table.language_scores.size()
                                 : table.sentence_scores.size();
    log << "measure " << config.measure.str() << ": " << rows << " rows\n";
    log << "wrote " << paths.simtable.string() << '\n';
  }
  return table;
}

// ---------------------------------------------------------------------------
// select
// ---------------------------------------------------------------------------

inline std::string render_stats_text(const PlanStats& stats) {
  std::ostringstream out;
  out << "plan: " << stats.group_count << " groups, measure=" << stats.measure.str()
      << " mode=" << mode_str(stats.mode) << " tau=" << g17(stats.tau)
      << " seed=" << stats.seed << " iid=" << (stats.iid ? 1 : 0) << '\n';
  out << "entropy (nats): mean=" << fixed9(stats.mean_entropy)
      << " min=" << fixed9(stats.min_entropy) << " max=" << fixed9(stats.max_entropy) << '\n';
  out << "expected selection mass per language:\n";
  for (const auto& [lang, mass] : stats.expected_mass) {
    out << "  " << lang << '\t' << fixed9(mass) << '\n';
  }
  out << "group size histogram:\n";
  for (const auto& [size, count] : stats.group_size_histogram) {
    out << "  " << size << '\t' << count << '\n';
  }
  return out.str();
}

inline nlohmann::json stats_to_json(const PlanStats& stats) {
  nlohmann::json histogram = nlohmann::json::object();
  for (const auto& [size, count] : stats.group_size_histogram) {
    histogram[std::to_string(size)] = count;
  }
  return {{"groups", stats.group_count},
          {"measure", stats.measure.str()},
          {"mode", std::string(mode_str(stats.mode))},
          {"tau", stats.tau},
          {"seed", stats.seed},
          {"iid", stats.iid},
          {"entropy", {{"mean", stats.mean_entropy},
                       {"min", stats.min_entropy},
                       {"max", stats.max_entropy}}},
          {"expected_mass", stats.expected_mass},
          {"group_size_histogram", std::move(histogram)}};
}

inline PlanStats cmd_select(const RunConfig& config, const CommandOptions& options = {}) {
  config.validate();
  const PipelinePaths paths = PipelinePaths::from(config);
  const std::filesystem::path index_path =
      options.input_dir.empty() ? paths.index : options.input_dir / "corpus.idx";
  const std::filesystem::path simtable_path =
      options.input_dir.empty() ? paths.simtable : options.input_dir / "simtable.tsv";
  detail::require_artifact(index_path, "index");
  detail::require_artifact(simtable_path, "sim");
  detail::ensure_out_dir(paths.out_dir);
  const Provenance prov{"select", config.config_hash()};

  const MultiParallelCorpus corpus = read_index(read_lines(index_path), index_path.string());
  const SimilarityTable table =
      read_similarity_table(read_lines(simtable_path), simtable_path.string());

  if (!options.quiet && table.measure != config.measure) {
    detail::log_stream(options) << "note: table measure " << table.measure.str()
                                << " differs from configured " << config.measure.str()
                                << "; the table wins\n";
  }

  const SamplingPlan plan =
      build_plan(corpus, table, config.tau, config.mode, config.seed, config.iid);
  const PlanDump dump = make_plan_dump(plan, corpus);

  std::ostringstream plan_out;
  write_plan(plan_out, dump, &prov);
  write_text_file(paths.plan, plan_out.str());

  std::vector<Selection> selections;
  selections.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    selections.push_back(sample_epoch(plan, corpus, static_cast<uint32_t>(epoch)));
  }
  if (config.selection_format == SelectionFormat::tsv) {
    std::ostringstream sel_out;
    write_selections_tsv(sel_out, selections, corpus, &prov);
    write_text_file(paths.selections, sel_out.str());
  } else {
    for (const Selection& selection : selections) {
      write_selection_parallel(paths.out_dir, selection, corpus, &prov);
    }
  }

  const PlanStats stats = plan_stats(dump);
  write_text_file(paths.plan_stats, stats_to_json(stats).dump(2) + "\n");

  if (!options.quiet) {
    std::ostream& log = detail::log_stream(options);
    log << render_stats_text(stats);
    log << "wrote " << paths.plan.string() << " and " << config.epochs << " epoch selection"
        << (config.epochs == 1 ? "" : "s") << '\n';
  }
  return stats;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

inline PlanStats cmd_stats(const std::filesystem::path& plan_path, bool json_output,
                           std::ostream& out) {
  const PlanDump dump = read_plan(read_lines(plan_path), plan_path.string());
  const PlanStats stats = plan_stats(dump);
  if (json_output) {
    out << stats_to_json(stats).dump(2) << '\n';
  } else {
    out << render_stats_text(stats);
  }
  return stats;
}

}  // namespace tcs
