#pragma once

// Run configuration: one JSON file describing the corpus layout, the
// similarity measure and its parameters, and the sampling setup. The
// effective config (defaults materialized, CLI overrides applied) has a
// stable hash that is embedded in every output header, so artifacts are
// self-describing. Output location does not change the experiment, so the
// "output" section and the tau sweep list are excluded from the hash.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tcs/common.hpp"
#include "tcs/corpus.hpp"
#include "tcs/ngram.hpp"
#include "tcs/sampler.hpp"
#include "tcs/similarity.hpp"

namespace tcs {

struct LanguageSpec {
  LanguageId id;
  std::string src_path;  // layout A only
  std::string tgt_path;  // layout A only
};

enum class SelectionFormat { tsv, parallel };

inline std::string_view selection_format_str(SelectionFormat f) {
  return f == SelectionFormat::tsv ? "tsv" : "parallel";
}

inline SelectionFormat parse_selection_format(std::string_view token) {
  if (token == "tsv") return SelectionFormat::tsv;
  if (token == "parallel") return SelectionFormat::parallel;
  throw ValidationError("unknown selection format '" + std::string(token) +
                        "' (expected tsv or parallel)");
}

struct RunConfig {
  std::vector<LanguageSpec> languages;
  LanguageId lrl;
  std::string tsv_path;  // layout B when non-empty

  SimilarityMeasure measure{SimKind::vocab, SimGranularity::language};
  NgramSpec ngram;
  int lm_order = 5;
  double lm_alpha = 0.01;
  bool lm_length_norm = true;

  double tau = 0.1;
  SamplingMode mode = SamplingMode::stochastic;
  uint64_t seed = 1;
  int epochs = 1;
  bool lowercase = false;
  bool iid = false;
  std::vector<double> tau_sweep{0.01, 0.02, 0.1};

  std::string out_dir = "out";
  SelectionFormat selection_format = SelectionFormat::tsv;

  text::NormalizePolicy normalize_policy() const { return {lowercase}; }

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  std::string config_hash() const;
  void validate() const;
  void validate_input_paths() const;
};

// ---------------------------------------------------------------------------
// JSON binding
// ---------------------------------------------------------------------------

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ValidationError("config: missing required field '" + std::string(key) + "'");
  }
  return *it;
}

template <typename T>
inline T as(const nlohmann::json& j, std::string_view key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config: field '" + std::string(key) + "' has the wrong type");
  }
}

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<std::string_view> allowed,
                                std::string_view where) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (std::string_view a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ValidationError("config: unknown field '" + key + "' in " + std::string(where));
    }
  }
}

}  // namespace detail

inline RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config: top level must be a JSON object");
  detail::reject_unknown_keys(
      j,
      {"languages", "lrl", "tsv", "measure", "ngram", "lm", "tau", "mode", "seed",
       "epochs", "lowercase", "iid", "tau_sweep", "output"},
      "top level");

  RunConfig config;

  const nlohmann::json& langs = detail::require_key(j, "languages");
  if (!langs.is_array() || langs.empty()) {
    throw ValidationError("config: 'languages' must be a non-empty array");
  }
  const bool layout_tsv = j.contains("tsv");
  if (layout_tsv) config.tsv_path = detail::as<std::string>(j.at("tsv"), "tsv");
  for (const nlohmann::json& entry : langs) {
    if (!entry.is_object()) {
      throw ValidationError("config: every 'languages' entry must be an object");
    }
    detail::reject_unknown_keys(entry, {"code", "src", "tgt"}, "languages entry");
    LanguageSpec spec;
    spec.id.code = detail::as<std::string>(detail::require_key(entry, "code"), "code");
    if (layout_tsv) {
      if (entry.contains("src") || entry.contains("tgt")) {
        throw ValidationError(
            "config: language '" + spec.id.code +
            "' must not list src/tgt paths when a tsv corpus is configured");
      }
    } else {
      spec.src_path = detail::as<std::string>(detail::require_key(entry, "src"), "src");
      spec.tgt_path = detail::as<std::string>(detail::require_key(entry, "tgt"), "tgt");
    }
    config.languages.push_back(std::move(spec));
  }

  config.lrl.code = detail::as<std::string>(detail::require_key(j, "lrl"), "lrl");

  if (j.contains("measure")) {
    config.measure = SimilarityMeasure::parse(detail::as<std::string>(j.at("measure"), "measure"));
  }
  if (j.contains("ngram")) {
    const nlohmann::json& ngram = j.at("ngram");
    detail::reject_unknown_keys(ngram, {"orders", "k"}, "'ngram'");
    if (ngram.contains("orders")) {
      config.ngram.orders = NgramSpec::normalized_orders(
          detail::as<std::vector<int>>(ngram.at("orders"), "ngram.orders"));
    }
    if (ngram.contains("k")) config.ngram.k = detail::as<int>(ngram.at("k"), "ngram.k");
  }
  if (j.contains("lm")) {
    const nlohmann::json& lm = j.at("lm");
    detail::reject_unknown_keys(lm, {"order", "alpha", "length_norm"}, "'lm'");
    if (lm.contains("order")) config.lm_order = detail::as<int>(lm.at("order"), "lm.order");
    if (lm.contains("alpha")) config.lm_alpha = detail::as<double>(lm.at("alpha"), "lm.alpha");
    if (lm.contains("length_norm")) {
      config.lm_length_norm = detail::as<bool>(lm.at("length_norm"), "lm.length_norm");
    }
  }
  if (j.contains("tau")) config.tau = detail::as<double>(j.at("tau"), "tau");
  if (j.contains("mode")) {
    config.mode = parse_mode(detail::as<std::string>(j.at("mode"), "mode"));
  }
  if (j.contains("seed")) config.seed = detail::as<uint64_t>(j.at("seed"), "seed");
  if (j.contains("epochs")) config.epochs = detail::as<int>(j.at("epochs"), "epochs");
  if (j.contains("lowercase")) {
    config.lowercase = detail::as<bool>(j.at("lowercase"), "lowercase");
  }
  if (j.contains("iid")) config.iid = detail::as<bool>(j.at("iid"), "iid");
  if (j.contains("tau_sweep")) {
    config.tau_sweep = detail::as<std::vector<double>>(j.at("tau_sweep"), "tau_sweep");
  }
  if (j.contains("output")) {
    const nlohmann::json& output = j.at("output");
    detail::reject_unknown_keys(output, {"dir", "selection_format"}, "'output'");
    if (output.contains("dir")) {
      config.out_dir = detail::as<std::string>(output.at("dir"), "output.dir");
    }
    if (output.contains("selection_format")) {
      config.selection_format = parse_selection_format(
          detail::as<std::string>(output.at("selection_format"), "output.selection_format"));
    }
  }
  return config;
}

inline RunConfig RunConfig::load(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  RunConfig config = from_json(j);
  config.validate();
  return config;
}

inline nlohmann::json RunConfig::to_json() const {
  nlohmann::json langs = nlohmann::json::array();
  for (const LanguageSpec& spec : languages) {
    nlohmann::json entry{{"code", spec.id.code}};
    if (tsv_path.empty()) {
      entry["src"] = spec.src_path;
      entry["tgt"] = spec.tgt_path;
    }
    langs.push_back(std::move(entry));
  }
  nlohmann::json j{
      {"languages", std::move(langs)},
      {"lrl", lrl.code},
      {"measure", measure.str()},
      {"ngram", {{"orders", ngram.orders}, {"k", ngram.k}}},
      {"lm", {{"order", lm_order}, {"alpha", lm_alpha}, {"length_norm", lm_length_norm}}},
      {"tau", tau},
      {"mode", std::string(mode_str(mode))},
      {"seed", seed},
      {"epochs", epochs},
      {"lowercase", lowercase},
      {"iid", iid},
      {"tau_sweep", tau_sweep},
      {"output",
       {{"dir", out_dir}, {"selection_format", std::string(selection_format_str(selection_format))}}},
  };
  if (!tsv_path.empty()) j["tsv"] = tsv_path;
  return j;
}

inline std::string RunConfig::config_hash() const {
  nlohmann::json j = to_json();
  j.erase("output");
  j.erase("tau_sweep");
  return hex16(fnv1a64(j.dump()));
}

inline void RunConfig::validate() const {
  if (languages.empty()) throw ValidationError("config: no languages configured");
  {
    std::vector<std::string_view> codes;
    for (const LanguageSpec& spec : languages) {
      validate_language_code(spec.id.code);
      for (std::string_view seen : codes) {
        if (seen == spec.id.code) {
          throw ValidationError("config: duplicate language '" + spec.id.code + "'");
        }
      }
      codes.push_back(spec.id.code);
    }
  }
  bool lrl_listed = false;
  for (const LanguageSpec& spec : languages) lrl_listed |= spec.id == lrl;
  if (!lrl_listed) {
    throw ValidationError("config: lrl '" + lrl.code + "' is not among the languages");
  }
  if (measure.kind == SimKind::external) {
    throw ValidationError(
        "config: measure 'external' cannot be built; import a similarity table instead");
  }
  ngram.validate();
  if (lm_order < 1) throw ValidationError("config: lm.order must be >= 1");
  if (!(lm_alpha > 0.0)) throw ValidationError("config: lm.alpha must be > 0");
  if (!(tau >= 0.0)) throw ValidationError("config: tau must be >= 0");
  if (mode == SamplingMode::stochastic && !(tau > 0.0)) {
    throw ValidationError("config: stochastic mode requires tau > 0");
  }
  if (epochs < 1) throw ValidationError("config: epochs must be >= 1");
  for (double t : tau_sweep) {
    if (!(t > 0.0)) throw ValidationError("config: tau_sweep values must be > 0");
  }
  if (out_dir.empty()) throw ValidationError("config: output.dir must not be empty");
}

inline void RunConfig::validate_input_paths() const {
  std::vector<std::string> missing;
  if (!tsv_path.empty()) {
    if (!std::filesystem::exists(tsv_path)) missing.push_back(tsv_path);
  } else {
    for (const LanguageSpec& spec : languages) {
      if (!std::filesystem::exists(spec.src_path)) missing.push_back(spec.src_path);
      if (!std::filesystem::exists(spec.tgt_path)) missing.push_back(spec.tgt_path);
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing input files:";
    for (const std::string& path : missing) msg += " " + path;
    throw ValidationError(msg);
  }
}

}  // namespace tcs
