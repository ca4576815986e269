#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "qrelgauge/metrics.hpp"

using namespace qrelgauge;

namespace {

std::vector<std::string> docs_of(const Run& r, const QueryId& q) {
    std::vector<std::string> out;
    for (const auto& sd : r.list(q))
        out.push_back(sd.doc);
    return out;
}

std::set<std::string> rel_of(const Qrels& qrels, const QueryId& q) {
    auto v = qrels.relevant(q);
    return {v.begin(), v.end()};
}

} // namespace

TEST(Metrics, HandValues) {
    fixture::MetricFixture f;
    EXPECT_NEAR(ndcg_at_k(f.a, f.qrels, "q1", 10), 1.0 / std::log2(3.0), 1e-15);
    EXPECT_NEAR(ndcg_at_k(f.a, f.qrels, "q1", 2), 0.630929753571457, 1e-12);
    EXPECT_DOUBLE_EQ(average_precision_at_k(f.a, f.qrels, "q2", 10), 0.5);
    EXPECT_NEAR(average_precision_at_k(f.a, f.qrels, "q3", 5), 0.4166666666666667, 1e-15);
    EXPECT_DOUBLE_EQ(r_precision(f.a, f.qrels, "q3"), 0.5);
    EXPECT_DOUBLE_EQ(r_precision(f.b, f.qrels, "q3"), 0.25);
    EXPECT_DOUBLE_EQ(recall_at_k(f.a, f.qrels, "q3", 3), 0.5);
    EXPECT_DOUBLE_EQ(recall_at_k(f.b, f.qrels, "q2", 20), 0.0);
    EXPECT_DOUBLE_EQ(ndcg_at_k(f.b, f.qrels, "q1", 5), 1.0);
    EXPECT_DOUBLE_EQ(ndcg_at_k(f.b, f.qrels, "q2", 5), 0.0);
}

TEST(Metrics, SpecExamples) {
    Qrels q;
    for (const char* d : {"a", "b", "c", "d"})
        q.insert("q", d, 1);
    auto all = fixture::ranked("s", {{"q", {"a", "n1", "b", "c", "d"}}});
    EXPECT_DOUBLE_EQ(recall_at_k(all, q, "q", 20), 1.0);
    auto half = fixture::ranked("s", {{"q", {"a", "b", "n1", "n2", "c", "d"}}});
    EXPECT_DOUBLE_EQ(recall_at_k(half, q, "q", 4), 0.5);

    Qrels two;
    two.insert("q", "a", 1);
    two.insert("q", "b", 1);
    auto top = fixture::ranked("s", {{"q", {"a", "b", "c"}}});
    EXPECT_DOUBLE_EQ(average_precision_at_k(top, two, "q", 10), 1.0);

    Qrels three;
    for (const char* d : {"a", "b", "c"})
        three.insert("q", d, 1);
    EXPECT_DOUBLE_EQ(r_precision(fixture::ranked("s", {{"q", {"c", "a", "b"}}}), three, "q"), 1.0);
}

TEST(Metrics, MatchDirectFormulaOracle) {
    fixture::MetricFixture f;
    for (const auto* run : {&f.a, &f.b})
        for (const auto& q : f.qrels.queries())
            for (std::size_t k : {1, 2, 3, 4, 5, 8, 10, 20, 100}) {
                const auto o = oracle::direct_metrics(docs_of(*run, q), rel_of(f.qrels, q), k);
                EXPECT_NEAR(recall_at_k(*run, f.qrels, q, k), o.recall, 1e-12);
                EXPECT_NEAR(ndcg_at_k(*run, f.qrels, q, k), o.ndcg, 1e-12);
                EXPECT_NEAR(average_precision_at_k(*run, f.qrels, q, k), o.ap, 1e-12);
                EXPECT_NEAR(r_precision(*run, f.qrels, q), o.rprec, 1e-12);
            }
}

TEST(Metrics, MonotoneInCutoffAndBounded) {
    fixture::MetricFixture f;
    for (const auto* run : {&f.a, &f.b})
        for (const auto& q : f.qrels.queries())
            for (std::size_t k = 1; k < 12; ++k) {
                const double r1 = recall_at_k(*run, f.qrels, q, k), r2 = recall_at_k(*run, f.qrels, q, k + 1);
                const double a1 = average_precision_at_k(*run, f.qrels, q, k);
                const double a2 = average_precision_at_k(*run, f.qrels, q, k + 1);
                EXPECT_LE(r1, r2);
                EXPECT_LE(a1, a2);
                for (double v : {r1, a1, ndcg_at_k(*run, f.qrels, q, k)}) {
                    EXPECT_GE(v, 0.0);
                    EXPECT_LE(v, 1.0);
                }
            }
}

TEST(Metrics, NdcgIsOneIffTopPositionsRelevant) {
    Qrels q;
    for (const char* d : {"a", "b", "c"})
        q.insert("q", d, 1);
    EXPECT_DOUBLE_EQ(ndcg_at_k(fixture::ranked("s", {{"q", {"b", "a", "x", "c"}}}), q, "q", 2), 1.0);
    EXPECT_LT(ndcg_at_k(fixture::ranked("s", {{"q", {"b", "a", "x", "c"}}}), q, "q", 3), 1.0);
    EXPECT_DOUBLE_EQ(ndcg_at_k(fixture::ranked("s", {{"q", {"b", "a", "c", "x"}}}), q, "q", 10), 1.0);
}

TEST(Metrics, NoRelevantThrows) {
    Qrels q;
    q.insert("q", "a", 0);
    auto r = fixture::ranked("s", {{"q", {"a"}}});
    try {
        recall_at_k(r, q, "q", 5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NoRelevant);
    }
}

TEST(Metrics, SpecParsing) {
    EXPECT_EQ(MetricSpec::parse("recall@20"), MetricSpec(MetricKind::Recall, 20));
    EXPECT_EQ(MetricSpec::parse("ndcg@5").name(), "ndcg@5");
    EXPECT_EQ(MetricSpec::parse("rprec").kind, MetricKind::RPrecision);
    EXPECT_THROW(MetricSpec::parse("recall@0"), Error);
    EXPECT_THROW(MetricSpec::parse("mrr@10"), Error);
    EXPECT_THROW(MetricSpec::parse("recall"), Error);
}

TEST(Evaluate, MatrixAndMeans) {
    fixture::MetricFixture f;
    RunSet rs({f.a, f.b});
    const auto m = evaluate(rs, f.qrels, MetricSpec(MetricKind::Recall, 20));
    EXPECT_EQ(m.systems, (std::vector<SystemId>{"A", "B"}));
    EXPECT_EQ(m.queries, (std::vector<QueryId>{"q1", "q2", "q3"}));
    for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t q = 0; q < 3; ++q)
            EXPECT_DOUBLE_EQ(m.values[s][q], recall_at_k(rs.runs()[s], f.qrels, m.queries[q], 20));
    EXPECT_DOUBLE_EQ(m.mean(0), 1.0);
    EXPECT_DOUBLE_EQ(m.mean(1), (1.0 + 0.0 + 0.25) / 3.0);
    EXPECT_EQ(m.ranking().order(), (std::vector<SystemId>{"A", "B"}));
}

TEST(Evaluate, SingleCellEqualsRecall) {
    Qrels q;
    q.insert("q", "a", 1);
    q.insert("q", "b", 1);
    auto r = fixture::ranked("s", {{"q", {"x", "a"}}});
    const auto m = evaluate(RunSet({r}), q, MetricSpec(MetricKind::Recall, 20));
    ASSERT_EQ(m.values.size(), 1u);
    ASSERT_EQ(m.values[0].size(), 1u);
    EXPECT_DOUBLE_EQ(m.values[0][0], recall_at_k(r, q, "q", 20));
}

TEST(Evaluate, OrderIndependent) {
    fixture::MetricFixture f;
    const MetricSpec spec(MetricKind::Ndcg, 5);
    const auto m1 = evaluate(RunSet({f.a, f.b}), f.qrels, spec);
    const auto m2 = evaluate(RunSet({f.b, f.a}), f.qrels, spec);
    EXPECT_EQ(m1.values[0], m2.values[1]);
    EXPECT_EQ(m1.values[1], m2.values[0]);
}

TEST(Evaluate, ZeroRelevantQueries) {
    fixture::MetricFixture f;
    auto qrels = f.qrels;
    qrels.insert("q4", "n1", 0);
    auto a = f.a;
    auto b = f.b;
    a.rankings["q4"] = {{"n1", 1.0}};
    b.rankings["q4"] = {{"n1", 1.0}};
    RunSet rs({a, b});
    const MetricSpec spec(MetricKind::Recall, 20);
    EXPECT_THROW(evaluate(rs, qrels, spec), Error);
    const auto m = evaluate(rs, qrels, spec, Mode::Lenient);
    EXPECT_EQ(m.queries.size(), 3u);
    EXPECT_EQ(m.skipped, (std::vector<QueryId>{"q4"}));
    EXPECT_DOUBLE_EQ(m.mean(0), 1.0);
}

TEST(Evaluate, NoCommonQueries) {
    fixture::MetricFixture f;
    Qrels other;
    other.insert("zz", "a", 1);
    try {
        evaluate(RunSet({f.a}), other, MetricSpec(MetricKind::Recall, 20));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NoCommonQueries);
    }
}

TEST(Evaluate, ConstantHalfMatrixMean) {
    Qrels q;
    auto r = fixture::ranked("s", {{"q1", {"a", "x"}}, {"q2", {"c", "y"}}});
    q.insert("q1", "a", 1);
    q.insert("q1", "b", 1);
    q.insert("q2", "c", 1);
    q.insert("q2", "d", 1);
    const auto m = evaluate(RunSet({r}), q, MetricSpec(MetricKind::Recall, 10));
    EXPECT_DOUBLE_EQ(m.mean(0), 0.5);
}
