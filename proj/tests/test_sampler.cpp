#include "tcs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "tcs/rng.hpp"

namespace {

using tcs::argmax_conditional;
using tcs::build_plan;
using tcs::make_plan_dump;
using tcs::MultiParallelCorpus;
using tcs::plan_stats;
using tcs::sample_epoch;
using tcs::SamplingMode;
using tcs::SamplingPlan;
using tcs::Selection;
using tcs::SimGranularity;
using tcs::SimilarityTable;
using tcs::SimKind;
using tcs::softmax_conditional;
using tcs_test::corpus_from_pairs;
using tcs_test::PairSpec;

// Random sims with a guaranteed pairwise gap, for tau -> 0 limit checks.
std::vector<double> sims_with_min_gap(tcs::rng::StreamRng& rng, std::size_t n, double gap) {
  for (;;) {
    std::vector<double> sims(n);
    for (double& s : sims) s = rng.next_double();
    std::vector<double> sorted = sims;
    std::sort(sorted.begin(), sorted.end());
    bool ok = true;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] - sorted[i - 1] < gap) {
        ok = false;
        break;
      }
    }
    if (ok) return sims;
  }
}

TEST(SoftmaxConditional, KnownValues) {
  const std::vector<double> equal{0.5, 0.5};
  for (double tau : {0.01, 0.1, 1.0}) {
    const auto probs = softmax_conditional(equal, tau);
    EXPECT_DOUBLE_EQ(probs[0], 0.5);
    EXPECT_DOUBLE_EQ(probs[1], 0.5);
  }

  const auto singleton = softmax_conditional(std::vector<double>{1.0}, 0.02);
  ASSERT_EQ(singleton.size(), 1u);
  EXPECT_DOUBLE_EQ(singleton[0], 1.0);

  // softmax([0.5, 0.3] / 0.1) = [1/(1+e^-2), e^-2/(1+e^-2)]
  const auto probs = softmax_conditional(std::vector<double>{0.5, 0.3}, 0.1);
  EXPECT_NEAR(probs[0], 0.8808, 1e-4);
  EXPECT_NEAR(probs[1], 0.1192, 1e-4);
  EXPECT_NEAR(probs[0] + probs[1], 1.0, 1e-15);
}

TEST(SoftmaxConditional, RejectsBadInput) {
  EXPECT_THROW(softmax_conditional({}, 0.1), tcs::ValidationError);
  const std::vector<double> sims{0.1, 0.2};
  EXPECT_THROW(softmax_conditional(sims, 0.0), tcs::ValidationError);
  EXPECT_THROW(softmax_conditional(sims, -1.0), tcs::ValidationError);
}

TEST(SoftmaxConditional, NormalizesOnRandomGroups) {
  tcs::rng::StreamRng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.next_below(20);
    std::vector<double> sims(n);
    for (double& s : sims) s = rng.next_double();
    for (double tau : {0.01, 0.02, 0.1}) {
      const auto probs = softmax_conditional(sims, tau);
      double sum = 0.0;
      for (double p : probs) {
        ASSERT_GE(p, 0.0);
        sum += p;
      }
      ASSERT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(SoftmaxConditional, ShiftInvariantWithinTolerance) {
  tcs::rng::StreamRng rng(43);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + rng.next_below(12);
    std::vector<double> sims(n), shifted(n);
    const double shift = rng.next_double() * 2.0 - 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      sims[i] = rng.next_double();
      shifted[i] = sims[i] + shift;
    }
    for (double tau : {0.01, 0.1, 1.0}) {
      const auto a = softmax_conditional(sims, tau);
      const auto b = softmax_conditional(shifted, tau);
      for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(a[i], b[i], 1e-12);
    }
  }
}

TEST(SoftmaxConditional, TauLimitRecoversArgmax) {
  tcs::rng::StreamRng rng(44);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.next_below(10);
    const auto sims = sims_with_min_gap(rng, n, 1e-3);
    const auto probs = softmax_conditional(sims, 1e-6);
    const std::size_t best = argmax_conditional(sims);
    ASSERT_EQ(argmax_conditional(probs), best);
    ASSERT_GE(probs[best], 1.0 - 1e-6);
  }
}

TEST(SoftmaxConditional, EntropyNonDecreasingInTau) {
  tcs::rng::StreamRng rng(45);
  const std::vector<double> taus{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.next_below(12);
    std::vector<double> sims(n);
    for (double& s : sims) s = rng.next_double();
    double prev = -1.0;
    for (double tau : taus) {
      const double h = tcs::entropy_nats(softmax_conditional(sims, tau));
      ASSERT_GE(h, prev);  // non-strict, no tolerance
      prev = h;
    }
  }
}

TEST(SoftmaxConditional, MonotoneInOwnSim) {
  // Strict monotonicity is only observable while the probability is still
  // representable below 1, so taus stay large enough not to saturate.
  tcs::rng::StreamRng rng(46);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.next_below(8);
    std::vector<double> sims(n);
    for (double& s : sims) s = rng.next_double();
    const std::size_t target = rng.next_below(n);
    for (double tau : {0.1, 0.5, 1.0}) {
      const auto before = softmax_conditional(sims, tau);
      std::vector<double> raised = sims;
      raised[target] += 0.05 + rng.next_double() * 0.5;
      const auto after = softmax_conditional(raised, tau);
      ASSERT_GT(after[target], before[target]);
    }
  }
}

TEST(ArgmaxConditional, FirstMaximalWins) {
  EXPECT_EQ(argmax_conditional(std::vector<double>{0.1, 0.9}), 1u);
  EXPECT_EQ(argmax_conditional(std::vector<double>{0.5, 0.5}), 0u);
  EXPECT_EQ(argmax_conditional(std::vector<double>{0.3, 0.7, 0.7}), 1u);
  EXPECT_EQ(argmax_conditional(std::vector<double>{2.0}), 0u);
  EXPECT_THROW(argmax_conditional({}), tcs::ValidationError);
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

MultiParallelCorpus two_language_corpus() {
  return corpus_from_pairs({"lpa", "hpb"}, "lpa",
                           {{"lpa", "aa", "t1"},
                            {"hpb", "zz", "t1"},
                            {"lpa", "ab", "t2"},
                            {"hpb", "zy", "t2"},
                            {"hpb", "yy", "t3"}});
}

SimilarityTable language_table(double lrl_score, double hrl_score) {
  SimilarityTable table;
  table.measure = {SimKind::vocab, SimGranularity::language};
  table.language_scores[{"lpa"}] = lrl_score;
  table.language_scores[{"hpb"}] = hrl_score;
  return table;
}

TEST(BuildPlan, DeterministicPlansAreOneHot) {
  const auto corpus = two_language_corpus();
  const auto plan =
      build_plan(corpus, language_table(1.0, 0.6), 0.0, SamplingMode::deterministic, 9);
  ASSERT_EQ(plan.distributions.size(), 3u);
  EXPECT_DOUBLE_EQ(plan.tau, 0.0);
  for (const auto& dist : plan.distributions) {
    double sum = 0.0;
    std::size_t ones = 0;
    for (double p : dist.probs) {
      sum += p;
      if (p == 1.0) ++ones;
    }
    EXPECT_DOUBLE_EQ(sum, 1.0);
    EXPECT_EQ(ones, 1u);
  }
  // lpa outranks hpb in both two-candidate groups
  EXPECT_DOUBLE_EQ(plan.distributions[0].probs[0], 1.0);
  EXPECT_DOUBLE_EQ(plan.distributions[1].probs[0], 1.0);
}

TEST(BuildPlan, StochasticMatchesHandSoftmax) {
  // scores {lpa: 1.0, hpb: 0.6}, tau 0.1: softmax([4, 0]) = [0.9820, 0.0180]
  const auto corpus = two_language_corpus();
  const auto plan =
      build_plan(corpus, language_table(1.0, 0.6), 0.1, SamplingMode::stochastic, 9);
  for (std::size_t g = 0; g < 2; ++g) {
    ASSERT_EQ(plan.distributions[g].probs.size(), 2u);
    EXPECT_NEAR(plan.distributions[g].probs[0], 0.9820, 1e-4);
    EXPECT_NEAR(plan.distributions[g].probs[1], 0.0180, 1e-4);
  }
  // single-candidate group gets probability 1 regardless of tau
  EXPECT_DOUBLE_EQ(plan.distributions[2].probs[0], 1.0);
}

TEST(BuildPlan, RebuildIsBitIdentical) {
  const auto corpus = two_language_corpus();
  const auto a = build_plan(corpus, language_table(1.0, 0.4), 0.02, SamplingMode::stochastic, 9);
  const auto b = build_plan(corpus, language_table(1.0, 0.4), 0.02, SamplingMode::stochastic, 9);
  ASSERT_EQ(a.distributions.size(), b.distributions.size());
  for (std::size_t g = 0; g < a.distributions.size(); ++g) {
    EXPECT_EQ(a.distributions[g].probs, b.distributions[g].probs);
  }
}

TEST(BuildPlan, MissingScoreNamesCandidate) {
  const auto corpus = two_language_corpus();
  SimilarityTable table;
  table.measure = {SimKind::vocab, SimGranularity::sentence};
  table.sentence_scores[{"lpa", 1}] = 1.0;
  table.sentence_scores[{"hpb", 1}] = 0.5;
  table.sentence_scores[{"lpa", 2}] = 1.0;
  // (hpb, 2) and (hpb, 3) missing
  try {
    build_plan(corpus, table, 0.1, SamplingMode::stochastic, 9);
    FAIL() << "expected ValidationError";
  } catch (const tcs::ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("hpb"), std::string::npos) << what;
    EXPECT_NE(what.find("line 2"), std::string::npos) << what;
  }
  EXPECT_THROW(build_plan(corpus, table, 0.0, SamplingMode::stochastic, 9),
               tcs::ValidationError);  // stochastic needs tau > 0
}

// ---------------------------------------------------------------------------
// Epoch sampling
// ---------------------------------------------------------------------------

TEST(SampleEpoch, DeterministicPlanAlwaysPicksArgmax) {
  const auto corpus = two_language_corpus();
  const auto plan =
      build_plan(corpus, language_table(1.0, 0.6), 0.0, SamplingMode::deterministic, 5);
  for (uint32_t epoch = 0; epoch < 5; ++epoch) {
    const Selection sel = sample_epoch(plan, corpus, epoch);
    ASSERT_EQ(sel.records.size(), corpus.groups().size());
    for (const auto& rec : sel.records) {
      EXPECT_EQ(rec.candidate, argmax_conditional(plan.distributions[rec.group].probs));
    }
  }
}

TEST(SampleEpoch, ReproducibleForSamePlanAndEpoch) {
  const auto corpus = two_language_corpus();
  const auto plan =
      build_plan(corpus, language_table(1.0, 0.8), 0.1, SamplingMode::stochastic, 77);
  for (uint32_t epoch : {0u, 1u, 31u}) {
    const Selection a = sample_epoch(plan, corpus, epoch);
    const Selection b = sample_epoch(plan, corpus, epoch);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      EXPECT_EQ(a.records[i].group, b.records[i].group);
      EXPECT_EQ(a.records[i].candidate, b.records[i].candidate);
    }
  }
}

TEST(SampleEpoch, VisitsEveryGroupOncePerEpoch) {
  std::vector<PairSpec> pairs;
  for (int i = 0; i < 40; ++i) {
    pairs.push_back({"lpa", "s" + std::to_string(i), "t" + std::to_string(i)});
    pairs.push_back({"hpb", "x" + std::to_string(i), "t" + std::to_string(i)});
  }
  const auto corpus = corpus_from_pairs({"lpa", "hpb"}, "lpa", pairs);
  const auto plan =
      build_plan(corpus, language_table(1.0, 0.7), 0.1, SamplingMode::stochastic, 3);
  for (uint32_t epoch = 0; epoch < 100; ++epoch) {
    const Selection sel = sample_epoch(plan, corpus, epoch);
    std::set<uint32_t> seen;
    for (const auto& rec : sel.records) seen.insert(rec.group);
    ASSERT_EQ(seen.size(), corpus.groups().size());
  }
}

TEST(SampleEpoch, ShuffleOrderVariesAcrossEpochs) {
  std::vector<PairSpec> pairs;
  for (int i = 0; i < 30; ++i) {
    pairs.push_back({"lpa", "s" + std::to_string(i), "t" + std::to_string(i)});
  }
  const auto corpus = corpus_from_pairs({"lpa"}, "lpa", pairs);
  SimilarityTable table;
  table.measure = {SimKind::vocab, SimGranularity::language};
  table.language_scores[{"lpa"}] = 1.0;
  const auto plan = build_plan(corpus, table, 0.1, SamplingMode::stochastic, 12);
  const Selection e0 = sample_epoch(plan, corpus, 0);
  const Selection e1 = sample_epoch(plan, corpus, 1);
  std::vector<uint32_t> order0, order1;
  for (const auto& rec : e0.records) order0.push_back(rec.group);
  for (const auto& rec : e1.records) order1.push_back(rec.group);
  EXPECT_NE(order0, order1);
}

TEST(SampleEpoch, EmpiricalFrequencyMatchesBinomialBound) {
  // One group with probs [0.8808, 0.1192]; over 1e5 epochs the frequency of
  // candidate 0 stays within 3 sigma (+-0.0031) of its probability.
  const auto corpus = corpus_from_pairs(
      {"lpa", "hpb"}, "lpa", {{"lpa", "aa", "t"}, {"hpb", "zz", "t"}});
  const auto plan =
      build_plan(corpus, language_table(0.5, 0.3), 0.1, SamplingMode::stochastic, 2025);
  ASSERT_NEAR(plan.distributions[0].probs[0], 0.8808, 1e-4);
  uint64_t first = 0;
  const int epochs = 100000;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const Selection sel = sample_epoch(plan, corpus, static_cast<uint32_t>(epoch));
    if (sel.records[0].candidate == 0) ++first;
  }
  const double freq = static_cast<double>(first) / epochs;
  EXPECT_GE(freq, 0.8778);
  EXPECT_LE(freq, 0.8838);
}

TEST(SampleEpoch, IidModeDrawsWithReplacement) {
  std::vector<PairSpec> pairs;
  for (int i = 0; i < 12; ++i) {
    pairs.push_back({"lpa", "s" + std::to_string(i), "t" + std::to_string(i)});
  }
  const auto corpus = corpus_from_pairs({"lpa"}, "lpa", pairs);
  SimilarityTable table;
  table.measure = {SimKind::vocab, SimGranularity::language};
  table.language_scores[{"lpa"}] = 1.0;
  const auto plan = build_plan(corpus, table, 0.1, SamplingMode::stochastic, 5, true);
  const Selection a = sample_epoch(plan, corpus, 0);
  const Selection b = sample_epoch(plan, corpus, 0);
  ASSERT_EQ(a.records.size(), corpus.groups().size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].group, b.records[i].group);  // still reproducible
  }
  // regularly revisits some group within one epoch (12 distinct draws of 12
  // values collide with probability ~ 1 - 12!/12^12)
  std::set<uint32_t> seen;
  for (const auto& rec : a.records) seen.insert(rec.group);
  EXPECT_LT(seen.size(), corpus.groups().size());
}

// ---------------------------------------------------------------------------
// Plan dump and stats
// ---------------------------------------------------------------------------

TEST(PlanDump, GoldenFormatAndRoundTrip) {
  const auto corpus = corpus_from_pairs(
      {"lpa", "hpb"}, "lpa", {{"lpa", "aa", "t"}, {"hpb", "zz", "t"}});
  const auto plan =
      build_plan(corpus, language_table(1.0, 0.6), 0.0, SamplingMode::deterministic, 7);
  const auto dump = make_plan_dump(plan, corpus);
  std::ostringstream out;
  tcs::write_plan(out, dump);
  EXPECT_EQ(out.str(),
            "#tcs-plan v1 seed=7 tau=0 mode=deterministic measure=vocab-lang iid=0 groups=1\n"
            "g\t0\t2\n"
            "c\t0\tlpa\t1\t1.000000000\n"
            "c\t1\thpb\t1\t0.000000000\n");

  const auto parsed = tcs::read_plan({"#tcs-plan v1 seed=7 tau=0 mode=deterministic "
                                      "measure=vocab-lang iid=0 groups=1",
                                      "g\t0\t2", "c\t0\tlpa\t1\t1.000000000",
                                      "c\t1\thpb\t1\t0.000000000"});
  EXPECT_EQ(parsed.seed, 7u);
  EXPECT_EQ(parsed.mode, SamplingMode::deterministic);
  ASSERT_EQ(parsed.groups.size(), 1u);
  ASSERT_EQ(parsed.groups[0].candidates.size(), 2u);
  EXPECT_EQ(parsed.groups[0].candidates[0].lang, "lpa");
  EXPECT_DOUBLE_EQ(parsed.groups[0].candidates[0].prob, 1.0);
}

TEST(PlanDump, TruncationNamesOffendingLine) {
  const std::vector<std::string> truncated{
      "#tcs-plan v1 seed=7 tau=0.1 mode=stochastic measure=vocab-lang iid=0 groups=2",
      "g\t0\t2", "c\t0\tlpa\t1\t0.900000000", "c\t1\thpb\t1\t0.100000000", "g\t1\t1"};
  try {
    tcs::read_plan(truncated, "plan.tsv");
    FAIL() << "expected ParseError";
  } catch (const tcs::ParseError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("plan.tsv:6"), std::string::npos) << what;
  }
  EXPECT_THROW(
      tcs::read_plan({"#tcs-plan v1 seed=7 tau=0.1 mode=stochastic measure=vocab-lang "
                      "iid=0 groups=1",
                      "g\t0\t1", "c\t0\tlpa\t1\t1.500000000"}),
      tcs::ParseError);  // probability out of range
  EXPECT_THROW(
      tcs::read_plan({"#tcs-plan v1 seed=7 tau=0.1 mode=stochastic measure=vocab-lang "
                      "iid=0 groups=1",
                      "g\t1\t1", "c\t0\tlpa\t1\t1.000000000"}),
      tcs::ParseError);  // group index out of order
}

TEST(PlanStats, DeterministicPlanHasZeroEntropy) {
  const auto corpus = two_language_corpus();
  const auto plan =
      build_plan(corpus, language_table(1.0, 0.6), 0.0, SamplingMode::deterministic, 7);
  const auto stats = plan_stats(plan, corpus);
  EXPECT_DOUBLE_EQ(stats.mean_entropy, 0.0);
  EXPECT_DOUBLE_EQ(stats.min_entropy, 0.0);
  EXPECT_DOUBLE_EQ(stats.max_entropy, 0.0);
  EXPECT_EQ(stats.group_count, 3u);
  // all three argmax picks are lpa where present: groups t1, t2 -> lpa; t3 -> hpb
  EXPECT_DOUBLE_EQ(stats.expected_mass.at("lpa"), 2.0);
  EXPECT_DOUBLE_EQ(stats.expected_mass.at("hpb"), 1.0);
  EXPECT_EQ(stats.group_size_histogram.at(2), 2u);
  EXPECT_EQ(stats.group_size_histogram.at(1), 1u);
}

TEST(PlanStats, UniformTwoCandidateGroupsHitLogTwo) {
  const auto corpus = corpus_from_pairs(
      {"lpa", "hpb"}, "lpa",
      {{"lpa", "aa", "t1"}, {"hpb", "zz", "t1"}, {"lpa", "ab", "t2"}, {"hpb", "zy", "t2"}});
  const auto plan =
      build_plan(corpus, language_table(0.5, 0.5), 0.1, SamplingMode::stochastic, 7);
  const auto stats = plan_stats(plan, corpus);
  EXPECT_NEAR(stats.mean_entropy, std::log(2.0), 1e-12);
  EXPECT_NEAR(stats.expected_mass.at("lpa"), 1.0, 1e-12);
}

TEST(PlanStats, ExpectedMassMatchesHandSums) {
  const auto corpus = two_language_corpus();
  const auto plan =
      build_plan(corpus, language_table(1.0, 0.6), 0.1, SamplingMode::stochastic, 7);
  const auto stats = plan_stats(plan, corpus);
  const double p = 1.0 / (1.0 + std::exp(-4.0));  // lpa prob in both 2-way groups
  EXPECT_NEAR(stats.expected_mass.at("lpa"), 2.0 * p, 1e-9);
  EXPECT_NEAR(stats.expected_mass.at("hpb"), 2.0 * (1.0 - p) + 1.0, 1e-9);
}

// ---------------------------------------------------------------------------
// Selection writers
// ---------------------------------------------------------------------------

TEST(SelectionWriters, TsvGolden) {
  const auto corpus = corpus_from_pairs(
      {"lpa", "hpb"}, "lpa", {{"lpa", "aa", "t"}, {"hpb", "zz", "t"}});
  const auto plan =
      build_plan(corpus, language_table(1.0, 0.6), 0.0, SamplingMode::deterministic, 7);
  const Selection sel = sample_epoch(plan, corpus, 0);
  std::ostringstream out;
  tcs::write_selections_tsv(out, std::vector<Selection>{sel}, corpus);
  EXPECT_EQ(out.str(),
            "#tcs-selection v1 epochs=1 groups=1\n"
            "0\tlpa\taa\tt\n");
}

TEST(SelectionWriters, ParallelFilesAreAligned) {
  tcs_test::ScratchDir dir;
  const auto corpus = corpus_from_pairs({"lpa", "hpb"}, "lpa",
                                        {{"lpa", "aa", "t1"},
                                         {"hpb", "zz", "t1"},
                                         {"lpa", "ab", "t2"}});
  const auto plan =
      build_plan(corpus, language_table(1.0, 0.6), 0.0, SamplingMode::deterministic, 7);
  const Selection sel = sample_epoch(plan, corpus, 3);
  tcs::write_selection_parallel(dir.path(), sel, corpus);

  const auto src = tcs::read_lines(dir.file("epoch3.src"));
  const auto tgt = tcs::read_lines(dir.file("epoch3.tgt"));
  const auto lang = tcs::read_lines(dir.file("epoch3.lang"));
  ASSERT_EQ(src.size(), sel.records.size() + 1);  // header + rows
  ASSERT_EQ(src.size(), tgt.size());
  ASSERT_EQ(src.size(), lang.size());
  EXPECT_EQ(src[0], "#tcs-epoch v1 epoch=3 column=src");
  EXPECT_EQ(tgt[0], "#tcs-epoch v1 epoch=3 column=tgt");
  for (std::size_t i = 1; i < src.size(); ++i) {
    EXPECT_EQ(lang[i] == "lpa" ? "lpa" : "hpb", lang[i]);
    EXPECT_FALSE(src[i].empty());
    EXPECT_FALSE(tgt[i].empty());
  }
}

}  // namespace
