#pragma once

// Small hand-built collections shared by the unit and acceptance tests.

#include <string>
#include <vector>

#include "qrelgauge/model.hpp"

namespace fixture {

/// A run whose list for each query is given best-first; scores descend.
inline qrelgauge::Run ranked(const std::string& system,
                             const std::vector<std::pair<std::string, std::vector<std::string>>>& lists) {
    qrelgauge::Run r;
    r.system = system;
    for (const auto& [q, docs] : lists) {
        auto& out = r.rankings[q];
        for (std::size_t i = 0; i < docs.size(); ++i)
            out.push_back({docs[i], static_cast<double>(docs.size() - i)});
    }
    return qrelgauge::canonicalize(std::move(r));
}

/// Three queries, two systems.
///   q1: one relevant doc; A finds it at rank 2, B at rank 1.
///   q2: two relevant docs; A finds them at ranks 2 and 4, B at neither.
///   q3: four relevant docs; A finds them at ranks 1, 3, 6, 8; B returns a
///       list shorter than R with one relevant doc at rank 2.
struct MetricFixture {
    qrelgauge::Qrels qrels;
    qrelgauge::Run a;
    qrelgauge::Run b;

    MetricFixture() {
        qrels.insert("q1", "r1", 1);
        qrels.insert("q1", "n1", 0);
        qrels.insert("q2", "x", 1);
        qrels.insert("q2", "y", 2);
        for (const char* d : {"a", "b", "c", "d"})
            qrels.insert("q3", d, 1);
        qrels.insert("q3", "z", 0);
        a = ranked("A", {{"q1", {"n1", "r1", "n2", "n3"}},
                         {"q2", {"n1", "x", "n2", "y", "n3"}},
                         {"q3", {"a", "z", "b", "n1", "n2", "c", "n3", "d", "n4"}}});
        b = ranked("B", {{"q1", {"r1", "n1"}}, {"q2", {"n1", "n2", "n3"}}, {"q3", {"z", "c", "n1"}}});
    }
};

} // namespace fixture
