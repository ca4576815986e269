#include <gtest/gtest.h>

#include <algorithm>

#include "qrelgauge/metrics.hpp"
#include "qrelgauge/rankstats.hpp"
#include "qrelgauge/synth.hpp"

using namespace qrelgauge;

TEST(Synth, DeterministicInSeed) {
    SynthConfig cfg;
    cfg.n_systems = 3;
    cfg.n_queries = 10;
    cfg.corpus_size = 1000;
    const auto a = synth_generate(cfg);
    const auto b = synth_generate(cfg);
    EXPECT_EQ(a.qrels, b.qrels);
    EXPECT_EQ(a.runs, b.runs);
    EXPECT_EQ(a.meta, b.meta);
    cfg.seed = 2;
    EXPECT_NE(synth_generate(cfg).runs, a.runs);
}

TEST(Synth, ShapeFollowsConfig) {
    SynthConfig cfg;
    cfg.n_systems = 4;
    cfg.n_queries = 25;
    cfg.corpus_size = 5000;
    cfg.depth = 50;
    const auto d = synth_generate(cfg);
    EXPECT_EQ(d.runs.size(), 4u);
    EXPECT_EQ(d.qrels.queries().size(), 25u);
    for (const auto& q : d.qrels.queries()) {
        const auto n = d.qrels.num_relevant(q);
        EXPECT_GE(n, cfg.evidence_min);
        EXPECT_LE(n, cfg.evidence_max);
        for (const auto& r : d.runs)
            EXPECT_EQ(r.list(q).size(), 50u);
    }
    for (const auto& r : d.runs)
        EXPECT_EQ(canonicalize(r), r);
    for (const auto& [doc, info] : d.meta) {
        EXPECT_GE(info.popularity, 0);
        EXPECT_GE(info.length, 0);
    }
}

TEST(Synth, NoiselessLargeGapsGiveQualityOrder) {
    SynthConfig cfg;
    cfg.n_systems = 6;
    cfg.n_queries = 40;
    cfg.corpus_size = 4000;
    cfg.noise = 0.0;
    // without noise every relevant document moves up with quality
    cfg.qualities = {0, 1, 2, 3, 4, 5};
    cfg.distractor_mean = 2.5;
    cfg.strict_ordering = true;
    const auto d = synth_generate(cfg);
    const auto m = evaluate(RunSet(d.runs), d.qrels, MetricSpec(MetricKind::Recall, 20));
    EXPECT_EQ(m.ranking().order(), d.quality_order());
}

TEST(Synth, InfeasibleConfigsRejected) {
    SynthConfig cfg;
    cfg.corpus_size = 100;
    cfg.evidence_max = 200;
    try {
        synth_generate(cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ConfigError);
    }
    SynthConfig dup;
    dup.n_systems = 2;
    dup.qualities = {1.0, 1.0};
    dup.strict_ordering = true;
    EXPECT_THROW(synth_generate(dup), Error);
    SynthConfig zero;
    zero.n_queries = 0;
    EXPECT_THROW(synth_generate(zero), Error);
}

// Two systems of equal quality: the paired t-test p-value must be uniform
// under the null. Kolmogorov-Smirnov distance over 500 replicates, compared
// with the 0.1% critical value 1.95/sqrt(n).
TEST(Synth, EqualQualityPValuesUniform) {
    std::vector<double> ps;
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        SynthConfig cfg;
        cfg.n_systems = 2;
        cfg.n_queries = 200;
        cfg.corpus_size = 3000;
        cfg.evidence_median = 10;
        cfg.evidence_max = 40;
        cfg.distractors = 40;
        cfg.depth = 30;
        cfg.qualities = {1.0, 1.0};
        cfg.seed = seed;
        const auto d = synth_generate(cfg);
        const auto m = evaluate(RunSet(d.runs), d.qrels, MetricSpec(MetricKind::Ndcg, 20));
        ps.push_back(paired_t_test(m.values[0], m.values[1]).p);
    }
    std::sort(ps.begin(), ps.end());
    double dmax = 0.0;
    const double n = static_cast<double>(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i)
        dmax = std::max({dmax, std::fabs((i + 1) / n - ps[i]), std::fabs(ps[i] - i / n)});
    EXPECT_LT(dmax, 1.95 / std::sqrt(n));
}
