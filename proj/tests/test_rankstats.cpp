#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qrelgauge/rankstats.hpp"
#include "qrelgauge/rng.hpp"

using namespace qrelgauge;

namespace {

SystemRanking order(std::vector<SystemId> ids) { return SystemRanking::from_order(ids); }

MetricMatrix matrix(std::vector<SystemId> systems, std::vector<std::vector<double>> values) {
    MetricMatrix m;
    m.systems = std::move(systems);
    for (std::size_t q = 0; q < values.front().size(); ++q)
        m.queries.push_back("q" + std::to_string(q));
    m.values = std::move(values);
    return m;
}

} // namespace

TEST(KendallTau, Examples) {
    EXPECT_DOUBLE_EQ(kendall_tau(order({"A", "B", "C"}), order({"A", "B", "C"})), 1.0);
    EXPECT_DOUBLE_EQ(kendall_tau(order({"A", "B", "C"}), order({"C", "B", "A"})), -1.0);
    EXPECT_DOUBLE_EQ(kendall_tau(order({"A", "B", "C", "D"}), order({"A", "C", "B", "D"})), 4.0 / 6.0);
}

TEST(KendallTau, MatchesPairEnumeration) {
    Xoshiro256 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(10);
        std::vector<SystemId> a;
        for (std::size_t i = 0; i < n; ++i)
            a.push_back("s" + std::to_string(i));
        auto b = a;
        rng.shuffle(a);
        rng.shuffle(b);
        const auto o = oracle::kendall_pairs(a, b);
        const auto agreement = kendall_agreement(order(a), order(b));
        EXPECT_EQ(agreement.concordant, static_cast<std::size_t>(o.concordant));
        EXPECT_EQ(agreement.discordant, static_cast<std::size_t>(o.discordant));
        const double pairs = n * (n - 1) / 2.0;
        EXPECT_DOUBLE_EQ(agreement.tau(), (o.concordant - o.discordant) / pairs);
        EXPECT_NEAR(error_rate(agreement.tau()), 100.0 * o.discordant / pairs, 1e-12);
        EXPECT_DOUBLE_EQ(kendall_tau(order(a), order(b)), kendall_tau(order(b), order(a)));
    }
}

TEST(KendallTau, TiesCountAsNeither) {
    SystemRanking tied({{"A", 1.0}, {"B", 1.0}, {"C", 0.0}});
    const auto agreement = kendall_agreement(tied, order({"A", "B", "C"}));
    EXPECT_EQ(agreement.concordant, 2u);
    EXPECT_EQ(agreement.discordant, 0u);
    EXPECT_EQ(agreement.tied, 1u);
    EXPECT_DOUBLE_EQ(agreement.tau(), 2.0 / 3.0);

    SystemRanking flat({{"A", 0.5}, {"B", 0.5}, {"C", 0.5}});
    const auto all = kendall_agreement(flat, order({"A", "B", "C"}));
    EXPECT_TRUE(all.all_ties());
    EXPECT_DOUBLE_EQ(all.tau(), 0.0);
}

TEST(KendallTau, Errors) {
    try {
        kendall_tau(order({"A", "B"}), order({"A", "C"}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MismatchedSystems);
    }
    try {
        kendall_tau(order({"A"}), order({"A"}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TooFewSystems);
    }
}

TEST(ErrorRate, Examples) {
    EXPECT_DOUBLE_EQ(error_rate(1.0), 0.0);
    EXPECT_NEAR(error_rate(0.936), 3.2, 1e-12);
    EXPECT_NEAR(error_rate(0.697), 15.15, 1e-12);
    EXPECT_DOUBLE_EQ(error_rate(-1.0), 100.0);
    EXPECT_THROW(error_rate(1.5), Error);
    EXPECT_THROW(error_rate(std::nan("")), Error);
}

TEST(TTest, KnownVector) {
    const std::vector<double> d{1, -1, 2, 0, 1};
    const auto r = paired_t_test(d);
    EXPECT_NEAR(r.t, 1.1766968108291043, 1e-12);
    EXPECT_EQ(r.df, 4.0);
    EXPECT_NEAR(r.p, oracle::t_two_sided_p(r.t, 4.0), 1e-10);
    EXPECT_NEAR(r.t, oracle::t_statistic(d), 1e-12);
}

TEST(TTest, MatchesQuadratureOracle) {
    Xoshiro256 rng(5);
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = 3 + rng.below(60);
        std::vector<double> d(n);
        const double shift = rng.uniform(-0.6, 0.6);
        for (auto& v : d)
            v = shift + rng.normal();
        const auto r = paired_t_test(d);
        EXPECT_NEAR(r.p, oracle::t_two_sided_p(r.t, r.df), 1e-9) << "n=" << n << " t=" << r.t;
    }
}

TEST(TTest, DegenerateCases) {
    const std::vector<double> zeros(7, 0.0);
    auto r = paired_t_test(zeros);
    EXPECT_EQ(r.p, 1.0);
    EXPECT_EQ(r.t, 0.0);
    EXPECT_TRUE(r.degenerate);

    const std::vector<double> constant(50, 0.2);
    r = paired_t_test(constant);
    EXPECT_EQ(r.p, 0.0);
    EXPECT_TRUE(std::isinf(r.t) && r.t > 0);

    const std::vector<double> negative(4, -1.0);
    EXPECT_TRUE(std::isinf(paired_t_test(negative).t) && paired_t_test(negative).t < 0);

    const std::vector<double> one{1.0};
    try {
        paired_t_test(one);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TooFewQueries);
    }
}

TEST(TTest, ScaleInvariant) {
    const std::vector<double> d{0.3, -0.1, 0.25, 0.05, 0.4, -0.2};
    std::vector<double> scaled;
    for (double v : d)
        scaled.push_back(v * 7.5);
    EXPECT_NEAR(paired_t_test(d).p, paired_t_test(scaled).p, 1e-14);
}

TEST(IncompleteBeta, KnownValues) {
    EXPECT_NEAR(incomplete_beta(1.0, 1.0, 0.3), 0.3, 1e-15);
    EXPECT_NEAR(incomplete_beta(2.0, 3.0, 0.4), 0.5248, 1e-14);
    EXPECT_EQ(incomplete_beta(2.0, 3.0, 0.0), 0.0);
    EXPECT_EQ(incomplete_beta(2.0, 3.0, 1.0), 1.0);
    // df = 1 is the Cauchy distribution: P(|T| > 1) = 1/2
    EXPECT_NEAR(student_t_two_sided_p(1.0, 1.0), 0.5, 1e-14);
}

TEST(Buckets, ContainmentAndParsing) {
    const auto b = default_buckets();
    EXPECT_TRUE(b[0].contains(0.0));
    EXPECT_FALSE(b[0].contains(0.01));
    EXPECT_TRUE(b[1].contains(0.01));
    EXPECT_TRUE(b[2].contains(0.05));
    EXPECT_TRUE(b[2].contains(1.0));
    EXPECT_EQ(parse_bucket_edges("0,0.01,0.05,1"), b);
    EXPECT_EQ(b[0].label(), "[0,0.01)");
    EXPECT_THROW(parse_bucket_edges("0"), Error);
    EXPECT_THROW(parse_bucket_edges("0,abc"), Error);
    EXPECT_THROW(PairBucket(0.5, 0.2), Error);
    EXPECT_THROW(validate_buckets({{0.0, 0.5}, {0.4, 1.0}}), Error);
}

TEST(ClassifyPairs, IdenticalRowsAndConstantGap) {
    std::vector<double> base(50), shifted(50);
    for (int q = 0; q < 50; ++q) {
        base[q] = 0.3 + 0.01 * (q % 7);
        shifted[q] = base[q] + 0.25;
    }
    const auto m = matrix({"A", "B", "C"}, {base, base, shifted});
    const auto pc = classify_pairs(m, default_buckets());
    const auto& ab = pc.find({"A", "B"});
    EXPECT_FALSE(ab.better.has_value());
    EXPECT_EQ(ab.test.p, 1.0);
    EXPECT_EQ(ab.bucket, 2u);
    const auto& ac = pc.find({"A", "C"});
    EXPECT_EQ(ac.better, "C");
    EXPECT_EQ(ac.test.p, 0.0);
    EXPECT_EQ(ac.bucket, 0u);
}

TEST(ClassifyPairs, SwappingRowsSwapsBetterKeepsP) {
    const std::vector<double> x{0.1, 0.5, 0.3, 0.9, 0.2, 0.4};
    const std::vector<double> y{0.2, 0.3, 0.3, 0.5, 0.1, 0.2};
    const auto p1 = classify_pairs(matrix({"A", "B"}, {x, y}), default_buckets()).pairs[0];
    const auto p2 = classify_pairs(matrix({"A", "B"}, {y, x}), default_buckets()).pairs[0];
    EXPECT_EQ(p1.better, "A");
    EXPECT_EQ(p2.better, "B");
    EXPECT_EQ(p1.test.p, p2.test.p);
}

TEST(PartialTau, ReducesToKendall) {
    const auto a = order({"A", "B", "C", "D"});
    const auto b = order({"B", "A", "D", "C"});
    std::vector<SystemPair> all;
    for (const auto* x : {"A", "B", "C", "D"})
        for (const auto* y : {"A", "B", "C", "D"})
            if (std::string(x) < y)
                all.emplace_back(x, y);
    EXPECT_DOUBLE_EQ(partial_kendall_tau(a, b, all), kendall_tau(a, b));
    EXPECT_DOUBLE_EQ(partial_kendall_tau(a, b, {{"A", "C"}}), 1.0);
    EXPECT_DOUBLE_EQ(partial_kendall_tau(a, b, {{"A", "B"}}), -1.0);
    try {
        partial_kendall_tau(a, b, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptyBucket);
    }
}

TEST(Concordance, SpecExample) {
    const auto p1 = SignificanceRelation::from_pairs({"A", "B", "C"}, {{"A", "B"}});
    const auto p2 = SignificanceRelation::from_pairs({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}});
    EXPECT_EQ(concordance(p1, p2), 5.0 / 6.0);
    EXPECT_EQ(concordance(p1, p1), 1.0);
    EXPECT_EQ(concordance(p2, p1), concordance(p1, p2));
}

TEST(Concordance, MatchesEnumeration) {
    Xoshiro256 rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.below(4);
        std::vector<SystemId> ids;
        for (std::size_t i = 0; i < n; ++i)
            ids.push_back(std::string(1, static_cast<char>('A' + i)));
        std::set<std::pair<int, int>> wa, wb;
        std::vector<std::pair<SystemId, SystemId>> la, lb;
        for (int i = 0; i < static_cast<int>(n); ++i)
            for (int j = i + 1; j < static_cast<int>(n); ++j) {
                for (auto* side : {&wa, &wb}) {
                    const auto roll = rng.below(3);
                    if (roll == 1)
                        side->insert({i, j});
                    else if (roll == 2)
                        side->insert({j, i});
                }
            }
        for (auto [i, j] : wa)
            la.emplace_back(ids[i], ids[j]);
        for (auto [i, j] : wb)
            lb.emplace_back(ids[i], ids[j]);
        const auto ra = SignificanceRelation::from_pairs(ids, la);
        const auto rb = SignificanceRelation::from_pairs(ids, lb);
        EXPECT_DOUBLE_EQ(concordance(ra, rb), oracle::concordance(n, wa, wb));
        EXPECT_EQ(concordance(ra, ra), 1.0);
    }
}

TEST(SignificanceRelation, FromMatrix) {
    std::vector<double> a(30), b(30);
    for (int q = 0; q < 30; ++q) {
        a[q] = 0.5 + 0.05 * ((q * 7) % 5);
        b[q] = a[q] - 0.4 + 0.01 * (q % 3);
    }
    const auto huge = significance_relation(matrix({"A", "B"}, {a, b}));
    EXPECT_TRUE(huge("A", "B"));
    EXPECT_FALSE(huge("B", "A"));
    EXPECT_FALSE(huge("A", "A"));
    const auto same = significance_relation(matrix({"A", "B"}, {a, a}));
    EXPECT_FALSE(same("A", "B"));
    EXPECT_FALSE(same("B", "A"));
    EXPECT_THROW(significance_relation(matrix({"A", "B"}, {a, b}), 1.0), Error);
}

TEST(SignificanceRelation, RejectsInconsistentFacts) {
    EXPECT_THROW(SignificanceRelation::from_pairs({"A", "B"}, {{"A", "B"}, {"B", "A"}}), Error);
    EXPECT_THROW(SignificanceRelation::from_pairs({"A", "B"}, {{"A", "A"}}), Error);
    const auto r1 = SignificanceRelation::from_pairs({"A", "B"}, {});
    const auto r2 = SignificanceRelation::from_pairs({"A", "C"}, {});
    EXPECT_THROW(concordance(r1, r2), Error);
}
