#pragma once

// Sampling plans and epoch selection.
//
// A plan holds one conditional distribution over candidates per target
// group. Stochastic plans put softmax(sim / tau) mass on each candidate;
// deterministic plans are the tau -> 0 limit, a one-hot at the argmax with
// ties broken by candidate order (language order, then line number).
//
// An epoch selection visits every group exactly once in a seeded shuffled
// order (the uniform target distribution realized as one sweep per epoch)
// and draws one candidate per visit. Draw streams are keyed by
// (seed, epoch, group index), so results are independent of visit order and
// identical (plan, epoch) inputs always reproduce the same selection. The
// iid flag switches the sweep to with-replacement group draws for ablation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcs/common.hpp"
#include "tcs/corpus.hpp"
#include "tcs/rng.hpp"
#include "tcs/similarity.hpp"

namespace tcs {

enum class SamplingMode { deterministic, stochastic };

inline std::string_view mode_str(SamplingMode mode) {
  return mode == SamplingMode::deterministic ? "deterministic" : "stochastic";
}

inline SamplingMode parse_mode(std::string_view token) {
  if (token == "deterministic") return SamplingMode::deterministic;
  if (token == "stochastic") return SamplingMode::stochastic;
  throw ValidationError("unknown sampling mode '" + std::string(token) + "'");
}

struct ConditionalDistribution {
  std::vector<double> probs;  // aligned with the group's candidates
};

struct SamplingPlan {
  SimilarityMeasure measure;
  double tau = 0.0;  // 0 in deterministic mode
  SamplingMode mode = SamplingMode::deterministic;
  uint64_t seed = 0;
  bool iid = false;
  std::vector<ConditionalDistribution> distributions;  // one per corpus group
};

struct SelectionRecord {
  uint32_t group = 0;      // index into corpus.groups()
  uint32_t candidate = 0;  // index into that group's candidates
};

struct Selection {
  uint32_t epoch = 0;
  std::vector<SelectionRecord> records;  // visit order
};

// ---------------------------------------------------------------------------
// Conditional distributions
// ---------------------------------------------------------------------------

// softmax(sims / tau) with max-subtraction; sums to 1 within 1e-9.
inline std::vector<double> softmax_conditional(std::span<const double> sims, double tau) {
  if (sims.empty()) throw ValidationError("softmax over an empty candidate list");
  if (!(tau > 0.0)) {
    throw ValidationError("tau must be positive (use deterministic mode for tau = 0)");
  }
  const double peak = *std::max_element(sims.begin(), sims.end());
  std::vector<double> probs(sims.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    probs[i] = std::exp((sims[i] - peak) / tau);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

// Index of the maximum; ties resolve to the first (candidate order).
inline std::size_t argmax_conditional(std::span<const double> sims) {
  if (sims.empty()) throw ValidationError("argmax over an empty candidate list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < sims.size(); ++i) {
    if (sims[i] > sims[best]) best = i;
  }
  return best;
}

inline double entropy_nats(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Plan construction and sampling
// ---------------------------------------------------------------------------

inline SamplingPlan build_plan(const MultiParallelCorpus& corpus,
                               const SimilarityTable& table, double tau,
                               SamplingMode mode, uint64_t seed, bool iid = false) {
  if (mode == SamplingMode::stochastic && !(tau > 0.0)) {
    throw ValidationError("stochastic sampling requires tau > 0");
  }
  SamplingPlan plan;
  plan.measure = table.measure;
  plan.mode = mode;
  plan.tau = mode == SamplingMode::deterministic ? 0.0 : tau;
  plan.seed = seed;
  plan.iid = iid;
  plan.distributions.reserve(corpus.groups().size());

  std::vector<double> sims;
  for (const TargetGroup& group : corpus.groups()) {
    sims.clear();
    for (const Candidate& cand : group.candidates) {
      const auto score = table.score_for(corpus.languages()[cand.lang], cand.line_no);
      if (!score.has_value()) {
        throw ValidationError("no similarity score for candidate (" +
                              corpus.languages()[cand.lang].code + ", line " +
                              std::to_string(cand.line_no) + ")");
      }
      sims.push_back(*score);
    }
    ConditionalDistribution dist;
    if (mode == SamplingMode::deterministic) {
      dist.probs.assign(sims.size(), 0.0);
      dist.probs[argmax_conditional(sims)] = 1.0;
    } else {
      dist.probs = softmax_conditional(sims, tau);
    }
    plan.distributions.push_back(std::move(dist));
  }
  return plan;
}

namespace detail {
inline constexpr uint64_t kShuffleStream = 1;
inline constexpr uint64_t kDrawStream = 2;
}  // namespace detail

inline Selection sample_epoch(const SamplingPlan& plan, const MultiParallelCorpus& corpus,
                              uint32_t epoch) {
  if (plan.distributions.size() != corpus.groups().size()) {
    throw ValidationError("sampling plan does not match the corpus group count");
  }
  const std::size_t group_count = plan.distributions.size();
  Selection selection;
  selection.epoch = epoch;
  selection.records.reserve(group_count);
  if (group_count == 0) return selection;

  std::vector<uint32_t> order(group_count);
  rng::StreamRng order_rng(rng::mix({plan.seed, detail::kShuffleStream, epoch}));
  if (plan.iid) {
    for (uint32_t& g : order) g = static_cast<uint32_t>(order_rng.next_below(group_count));
  } else {
    for (std::size_t i = 0; i < group_count; ++i) order[i] = static_cast<uint32_t>(i);
    rng::shuffle(order, order_rng);
  }

  if (plan.mode == SamplingMode::deterministic) {
    for (uint32_t g : order) {
      const auto& probs = plan.distributions[g].probs;
      selection.records.push_back(
          {g, static_cast<uint32_t>(argmax_conditional(probs))});
    }
    return selection;
  }

  if (plan.iid) {
    // Repeat visits to a group continue its stream, one draw per visit.
    std::map<uint32_t, rng::StreamRng> streams;
    for (uint32_t g : order) {
      auto [it, inserted] = streams.try_emplace(
          g, rng::StreamRng(rng::mix({plan.seed, detail::kDrawStream, epoch, g})));
      const double u = it->second.next_double();
      selection.records.push_back(
          {g, static_cast<uint32_t>(rng::categorical(plan.distributions[g].probs, u))});
    }
  } else {
    for (uint32_t g : order) {
      rng::StreamRng draw_rng(rng::mix({plan.seed, detail::kDrawStream, epoch, g}));
      const double u = draw_rng.next_double();
      selection.records.push_back(
          {g, static_cast<uint32_t>(rng::categorical(plan.distributions[g].probs, u))});
    }
  }
  return selection;
}

// ---------------------------------------------------------------------------
// Plan dump
//
// #tcs-plan v1 seed=<u64> tau=<t> mode=<mode> measure=<m> iid=<0|1> groups=<G>
// g<TAB><group index><TAB><candidate count>
// c<TAB><candidate index><TAB><lang><TAB><line_no><TAB><probability>
//
// Probabilities are written at 9 decimals. The dump carries candidate
// languages so selection statistics can be computed from the file alone.
// ---------------------------------------------------------------------------

struct PlanCandidate {
  std::string lang;
  uint32_t line_no = 0;
  double prob = 0.0;
};

struct PlanGroup {
  std::vector<PlanCandidate> candidates;
};

struct PlanDump {
  SimilarityMeasure measure;
  double tau = 0.0;
  SamplingMode mode = SamplingMode::deterministic;
  uint64_t seed = 0;
  bool iid = false;
  std::vector<PlanGroup> groups;
};

inline PlanDump make_plan_dump(const SamplingPlan& plan, const MultiParallelCorpus& corpus) {
  if (plan.distributions.size() != corpus.groups().size()) {
    throw ValidationError("sampling plan does not match the corpus group count");
  }
  PlanDump dump;
  dump.measure = plan.measure;
  dump.tau = plan.tau;
  dump.mode = plan.mode;
  dump.seed = plan.seed;
  dump.iid = plan.iid;
  dump.groups.reserve(plan.distributions.size());
  for (std::size_t g = 0; g < plan.distributions.size(); ++g) {
    PlanGroup group;
    const auto& candidates = corpus.groups()[g].candidates;
    const auto& probs = plan.distributions[g].probs;
    group.candidates.reserve(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      group.candidates.push_back({corpus.languages()[candidates[c].lang].code,
                                  candidates[c].line_no, probs[c]});
    }
    dump.groups.push_back(std::move(group));
  }
  return dump;
}

inline void write_plan(std::ostream& out, const PlanDump& dump,
                       const Provenance* prov = nullptr) {
  HeaderFields fields{{"seed", std::to_string(dump.seed)},
                      {"tau", g17(dump.tau)},
                      {"mode", std::string(mode_str(dump.mode))},
                      {"measure", dump.measure.str()},
                      {"iid", dump.iid ? "1" : "0"},
                      {"groups", std::to_string(dump.groups.size())}};
  out << make_header("tcs-plan", fields, prov);
  for (std::size_t g = 0; g < dump.groups.size(); ++g) {
    const PlanGroup& group = dump.groups[g];
    out << "g\t" << g << '\t' << group.candidates.size() << '\n';
    for (std::size_t c = 0; c < group.candidates.size(); ++c) {
      const PlanCandidate& cand = group.candidates[c];
      out << "c\t" << c << '\t' << cand.lang << '\t' << cand.line_no << '\t'
          << fixed9(cand.prob) << '\n';
    }
  }
}

inline PlanDump read_plan(const std::vector<std::string>& lines,
                          std::string_view file = "tcs-plan") {
  if (lines.empty()) throw ParseError(file, 1, "empty plan file");
  HeaderInfo header = parse_header(lines[0], "tcs-plan", file);

  PlanDump dump;
  auto seed = try_parse_u64(require_field(header, "seed", file));
  if (!seed) throw ParseError(file, 1, "bad seed");
  dump.seed = *seed;
  auto tau = try_parse_double(require_field(header, "tau", file));
  if (!tau || !(*tau >= 0.0)) throw ParseError(file, 1, "bad tau");
  dump.tau = *tau;
  dump.mode = parse_mode(require_field(header, "mode", file));
  dump.measure = SimilarityMeasure::parse(require_field(header, "measure", file));
  const std::string& iid = require_field(header, "iid", file);
  if (iid != "0" && iid != "1") throw ParseError(file, 1, "bad iid flag");
  dump.iid = iid == "1";
  auto group_count = try_parse_u64(require_field(header, "groups", file));
  if (!group_count) throw ParseError(file, 1, "bad groups count");

  std::size_t i = 1;
  for (std::size_t g = 0; g < *group_count; ++g) {
    if (i >= lines.size()) {
      throw ParseError(file, lines.size() + 1,
                       "unexpected end of file: expected group " + std::to_string(g));
    }
    auto cols = split(lines[i], '\t');
    if (cols.size() != 3 || cols[0] != "g") {
      throw ParseError(file, i + 1, "expected group row 'g<TAB>index<TAB>count'");
    }
    auto index = try_parse_u64(cols[1]);
    auto count = try_parse_u64(cols[2]);
    if (!index || *index != g) throw ParseError(file, i + 1, "group index out of order");
    if (!count || *count == 0) throw ParseError(file, i + 1, "bad candidate count");
    ++i;

    PlanGroup group;
    group.candidates.reserve(*count);
    for (std::size_t c = 0; c < *count; ++c, ++i) {
      if (i >= lines.size()) {
        throw ParseError(file, lines.size() + 1,
                         "unexpected end of file: group " + std::to_string(g) +
                             " is missing candidates");
      }
      cols = split(lines[i], '\t');
      if (cols.size() != 5 || cols[0] != "c") {
        throw ParseError(file, i + 1,
                         "expected candidate row 'c<TAB>index<TAB>lang<TAB>line<TAB>prob'");
      }
      auto cand_index = try_parse_u64(cols[1]);
      if (!cand_index || *cand_index != c) {
        throw ParseError(file, i + 1, "candidate index out of order");
      }
      validate_language_code(cols[2]);
      auto line_no = try_parse_u64(cols[3]);
      if (!line_no || *line_no == 0 || *line_no > UINT32_MAX) {
        throw ParseError(file, i + 1, "bad line number");
      }
      auto prob = try_parse_double(cols[4]);
      if (!prob || !(*prob >= 0.0) || !(*prob <= 1.0)) {
        throw ParseError(file, i + 1, "probability out of [0, 1]");
      }
      group.candidates.push_back(
          {std::string(cols[2]), static_cast<uint32_t>(*line_no), *prob});
    }
    dump.groups.push_back(std::move(group));
  }
  if (i != lines.size()) throw ParseError(file, i + 1, "trailing content after last group");
  return dump;
}

// ---------------------------------------------------------------------------
// Plan statistics
// ---------------------------------------------------------------------------

struct PlanStats {
  SimilarityMeasure measure;
  double tau = 0.0;
  SamplingMode mode = SamplingMode::deterministic;
  uint64_t seed = 0;
  bool iid = false;
  std::size_t group_count = 0;
  // Expected selections per language over one epoch sweep.
  std::map<std::string, double> expected_mass;
  double mean_entropy = 0.0;
  double min_entropy = 0.0;
  double max_entropy = 0.0;
  std::map<std::size_t, std::size_t> group_size_histogram;
};

inline PlanStats plan_stats(const PlanDump& dump) {
  PlanStats stats;
  stats.measure = dump.measure;
  stats.tau = dump.tau;
  stats.mode = dump.mode;
  stats.seed = dump.seed;
  stats.iid = dump.iid;
  stats.group_count = dump.groups.size();

  double entropy_sum = 0.0;
  bool first = true;
  std::vector<double> probs;
  for (const PlanGroup& group : dump.groups) {
    ++stats.group_size_histogram[group.candidates.size()];
    probs.clear();
    for (const PlanCandidate& cand : group.candidates) {
      probs.push_back(cand.prob);
      stats.expected_mass[cand.lang] += cand.prob;
    }
    const double h = entropy_nats(probs);
    entropy_sum += h;
    if (first) {
      stats.min_entropy = stats.max_entropy = h;
      first = false;
    } else {
      stats.min_entropy = std::min(stats.min_entropy, h);
      stats.max_entropy = std::max(stats.max_entropy, h);
    }
  }
  if (!dump.groups.empty()) {
    stats.mean_entropy = entropy_sum / static_cast<double>(dump.groups.size());
  }
  return stats;
}

inline PlanStats plan_stats(const SamplingPlan& plan, const MultiParallelCorpus& corpus) {
  return plan_stats(make_plan_dump(plan, corpus));
}

// ---------------------------------------------------------------------------
// Selection output
//
// Format A: one TSV with rows "epoch<TAB>lang<TAB>source<TAB>target".
// Format B: per-epoch line-aligned files epoch<N>.src / .tgt / .lang, each
// starting with its own header line.
// ---------------------------------------------------------------------------

inline void write_selections_tsv(std::ostream& out, std::span<const Selection> selections,
                                 const MultiParallelCorpus& corpus,
                                 const Provenance* prov = nullptr) {
  HeaderFields fields{{"epochs", std::to_string(selections.size())},
                      {"groups", std::to_string(corpus.groups().size())}};
  out << make_header("tcs-selection", fields, prov);
  for (const Selection& selection : selections) {
    for (const SelectionRecord& rec : selection.records) {
      const TargetGroup& group = corpus.groups()[rec.group];
      const Candidate& cand = group.candidates[rec.candidate];
      out << selection.epoch << '\t' << corpus.languages()[cand.lang].code << '\t'
          << cand.source << '\t' << group.target << '\n';
    }
  }
}

inline void write_selection_parallel(const std::filesystem::path& dir,
                                     const Selection& selection,
                                     const MultiParallelCorpus& corpus,
                                     const Provenance* prov = nullptr) {
  const std::string stem = "epoch" + std::to_string(selection.epoch);
  const auto header = [&](std::string_view column) {
    HeaderFields fields{{"epoch", std::to_string(selection.epoch)},
                        {"column", std::string(column)}};
    return make_header("tcs-epoch", fields, prov);
  };
  std::string src = header("src");
  std::string tgt = header("tgt");
  std::string lang = header("lang");
  for (const SelectionRecord& rec : selection.records) {
    const TargetGroup& group = corpus.groups()[rec.group];
    const Candidate& cand = group.candidates[rec.candidate];
    src += cand.source;
    src += '\n';
    tgt += group.target;
    tgt += '\n';
    lang += corpus.languages()[cand.lang].code;
    lang += '\n';
  }
  write_text_file(dir / (stem + ".src"), src);
  write_text_file(dir / (stem + ".tgt"), tgt);
  write_text_file(dir / (stem + ".lang"), lang);
}

}  // namespace tcs
