#pragma once

// Per-query retrieval metrics with binary relevance and trec_eval
// conventions, and their aggregation into a system x query matrix.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qrelgauge/error.hpp"
#include "qrelgauge/model.hpp"

namespace qrelgauge {

enum class MetricKind { Recall, Ndcg, Map, RPrecision };

struct MetricSpec {
    MetricKind kind = MetricKind::Recall;
    std::size_t k = 20; // unused for RPrecision

    MetricSpec() = default;
    MetricSpec(MetricKind kind_, std::size_t k_ = 0) : kind(kind_), k(k_) {
        if (kind != MetricKind::RPrecision && k < 1)
            throw Error(Errc::RangeError, "metric cutoff must be >= 1");
    }

    std::string name() const {
        switch (kind) {
        case MetricKind::Recall: return "recall@" + std::to_string(k);
        case MetricKind::Ndcg: return "ndcg@" + std::to_string(k);
        case MetricKind::Map: return "map@" + std::to_string(k);
        case MetricKind::RPrecision: return "rprec";
        }
        return "?";
    }

    /// Parses `recall@20`, `ndcg@5`, `map@100`, `rprec` (or `r-precision`).
    static MetricSpec parse(const std::string& text) {
        if (text == "rprec" || text == "r-precision" || text == "r_precision")
            return MetricSpec(MetricKind::RPrecision);
        const auto at = text.find('@');
        if (at == std::string::npos)
            throw Error(Errc::ConfigError, "metric '" + text + "' must look like recall@20");
        const auto kind_name = text.substr(0, at);
        std::size_t k = 0;
        try {
            std::size_t used = 0;
            const auto v = std::stoll(text.substr(at + 1), &used);
            if (used != text.size() - at - 1 || v < 1)
                throw Error(Errc::ConfigError, "bad cutoff in '" + text + "'");
            k = static_cast<std::size_t>(v);
        } catch (const std::logic_error&) {
            throw Error(Errc::ConfigError, "bad cutoff in '" + text + "'");
        }
        if (kind_name == "recall")
            return MetricSpec(MetricKind::Recall, k);
        if (kind_name == "ndcg")
            return MetricSpec(MetricKind::Ndcg, k);
        if (kind_name == "map")
            return MetricSpec(MetricKind::Map, k);
        throw Error(Errc::ConfigError, "unknown metric '" + kind_name + "'");
    }

    friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

/// Where the relevant documents of one query sit in one ranked list:
/// ascending 1-based ranks of the retrieved ones plus the total relevant count.
struct RelevantRanks {
    std::vector<std::size_t> ranks;
    std::size_t num_relevant = 0;
};

/// All four metrics are functions of the relevant ranks alone.
inline double metric_value(const MetricSpec& spec, const RelevantRanks& rr) {
    const auto R = rr.num_relevant;
    if (R == 0)
        throw Error(Errc::NoRelevant, "query has no relevant documents");
    const auto& ranks = rr.ranks;
    switch (spec.kind) {
    case MetricKind::Recall: {
        const auto hits = std::upper_bound(ranks.begin(), ranks.end(), spec.k) - ranks.begin();
        return static_cast<double>(hits) / static_cast<double>(R);
    }
    case MetricKind::RPrecision: {
        const auto hits = std::upper_bound(ranks.begin(), ranks.end(), R) - ranks.begin();
        return static_cast<double>(hits) / static_cast<double>(R);
    }
    case MetricKind::Ndcg: {
        double dcg = 0.0;
        for (auto r : ranks) {
            if (r > spec.k)
                break;
            dcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
        }
        double idcg = 0.0;
        const auto ideal = std::min(R, spec.k);
        for (std::size_t i = 1; i <= ideal; ++i)
            idcg += 1.0 / std::log2(static_cast<double>(i) + 1.0);
        return dcg / idcg;
    }
    case MetricKind::Map: {
        // denominator is |E_q|, as in trec_eval map_cut
        double sum = 0.0;
        std::size_t found = 0;
        for (auto r : ranks) {
            if (r > spec.k)
                break;
            ++found;
            sum += static_cast<double>(found) / static_cast<double>(r);
        }
        return sum / static_cast<double>(R);
    }
    }
    return 0.0;
}

inline RelevantRanks relevant_ranks(const Run& run, const Qrels& qrels, const QueryId& q) {
    const auto& docs = run.list(q);
    const auto& judged = qrels.judgments(q);
    RelevantRanks rr;
    rr.num_relevant = qrels.num_relevant(q);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        auto it = judged.find(docs[i].doc);
        if (it != judged.end() && it->second > 0)
            rr.ranks.push_back(i + 1);
    }
    return rr;
}

inline double recall_at_k(const Run& run, const Qrels& qrels, const QueryId& q, std::size_t k) {
    return metric_value(MetricSpec(MetricKind::Recall, k), relevant_ranks(run, qrels, q));
}

inline double ndcg_at_k(const Run& run, const Qrels& qrels, const QueryId& q, std::size_t k) {
    return metric_value(MetricSpec(MetricKind::Ndcg, k), relevant_ranks(run, qrels, q));
}

inline double average_precision_at_k(const Run& run, const Qrels& qrels, const QueryId& q, std::size_t k) {
    return metric_value(MetricSpec(MetricKind::Map, k), relevant_ranks(run, qrels, q));
}

inline double r_precision(const Run& run, const Qrels& qrels, const QueryId& q) {
    return metric_value(MetricSpec(MetricKind::RPrecision), relevant_ranks(run, qrels, q));
}

/// values[s][q] for every system s and evaluated query q.
struct MetricMatrix {
    std::vector<SystemId> systems;
    std::vector<QueryId> queries;
    std::vector<std::vector<double>> values;
    MetricSpec spec;
    std::vector<QueryId> skipped; // lenient mode: queries without relevant documents

    std::size_t system_index(const SystemId& id) const {
        for (std::size_t i = 0; i < systems.size(); ++i)
            if (systems[i] == id)
                return i;
        throw Error(Errc::MismatchedSystems, "system '" + id + "' not in matrix");
    }

    /// Mean over queries, summed in query order.
    double mean(std::size_t s) const {
        double sum = 0.0;
        for (double v : values.at(s))
            sum += v;
        return values[s].empty() ? 0.0 : sum / static_cast<double>(values[s].size());
    }

    std::vector<double> means() const {
        std::vector<double> out;
        for (std::size_t s = 0; s < systems.size(); ++s)
            out.push_back(mean(s));
        return out;
    }

    SystemRanking ranking() const {
        std::vector<RankedSystem> entries;
        for (std::size_t s = 0; s < systems.size(); ++s)
            entries.push_back({systems[s], mean(s)});
        return SystemRanking(std::move(entries));
    }
};

/// Precomputes doc -> rank lookups for every (system, query) so that many
/// alternative judgment sets can be scored cheaply against the same runs.
class Evaluator {
public:
    explicit Evaluator(const RunSet& runs) : runs_(&runs) {
        const auto& qs = runs.queries();
        for (std::size_t i = 0; i < qs.size(); ++i)
            query_pos_.emplace(qs[i], i);
        positions_.resize(runs.size());
        for (std::size_t s = 0; s < runs.size(); ++s) {
            positions_[s].resize(qs.size());
            for (std::size_t i = 0; i < qs.size(); ++i) {
                const auto& docs = runs.runs()[s].list(qs[i]);
                auto& pos = positions_[s][i];
                pos.reserve(docs.size());
                for (std::size_t r = 0; r < docs.size(); ++r)
                    pos.emplace(docs[r].doc, static_cast<std::uint32_t>(r + 1));
            }
        }
    }

    const RunSet& runs() const noexcept { return *runs_; }

    /// 1-based rank of doc in system s for query q, 0 when not retrieved.
    std::size_t rank_of(std::size_t s, const QueryId& q, const DocId& d) const {
        const auto& pos = positions_.at(s).at(query_index(q));
        auto it = pos.find(d);
        return it == pos.end() ? 0 : it->second;
    }

    std::size_t query_index(const QueryId& q) const {
        auto it = query_pos_.find(q);
        if (it == query_pos_.end())
            throw Error(Errc::MissingQuery, "query '" + q + "' not in run set");
        return it->second;
    }

    RelevantRanks ranks(std::size_t s, std::size_t query_idx, const std::vector<DocId>& relevant) const {
        RelevantRanks rr;
        rr.num_relevant = relevant.size();
        const auto& pos = positions_[s][query_idx];
        for (const auto& d : relevant)
            if (auto it = pos.find(d); it != pos.end())
                rr.ranks.push_back(it->second);
        std::sort(rr.ranks.begin(), rr.ranks.end());
        return rr;
    }

    /// Scores explicit relevant lists; `relevant[i]` belongs to `queries[i]`
    /// and must be non-empty.
    MetricMatrix evaluate_sets(const std::vector<QueryId>& queries, const std::vector<std::vector<DocId>>& relevant,
                               const MetricSpec& spec, const std::vector<std::size_t>* systems = nullptr) const {
        MetricMatrix m;
        m.spec = spec;
        m.queries = queries;
        std::vector<std::size_t> idx;
        for (const auto& q : queries)
            idx.push_back(query_index(q));
        std::vector<std::size_t> all;
        if (!systems) {
            for (std::size_t s = 0; s < runs_->size(); ++s)
                all.push_back(s);
            systems = &all;
        }
        for (auto s : *systems) {
            m.systems.push_back(runs_->runs()[s].system);
            std::vector<double> row(queries.size());
            for (std::size_t i = 0; i < queries.size(); ++i)
                row[i] = metric_value(spec, ranks(s, idx[i], relevant[i]));
            m.values.push_back(std::move(row));
        }
        return m;
    }

    MetricMatrix evaluate(const Qrels& qrels, const MetricSpec& spec, Mode mode = Mode::Strict) const {
        std::vector<QueryId> queries;
        std::vector<std::vector<DocId>> relevant;
        std::vector<QueryId> skipped;
        for (const auto& q : runs_->queries()) {
            if (!qrels.contains(q))
                continue;
            auto rel = qrels.relevant(q);
            if (rel.empty()) {
                if (mode == Mode::Strict)
                    throw Error(Errc::NoRelevant, "query '" + q + "' has no relevant documents");
                skipped.push_back(q);
                continue;
            }
            queries.push_back(q);
            relevant.push_back(std::move(rel));
        }
        if (queries.empty())
            throw Error(Errc::NoCommonQueries, "runs and qrels share no evaluable query");
        auto m = evaluate_sets(queries, relevant, spec);
        m.skipped = std::move(skipped);
        return m;
    }

private:
    const RunSet* runs_;
    std::unordered_map<QueryId, std::size_t> query_pos_;
    std::vector<std::vector<std::unordered_map<DocId, std::uint32_t>>> positions_;
};

inline MetricMatrix evaluate(const RunSet& runs, const Qrels& qrels, const MetricSpec& spec,
                             Mode mode = Mode::Strict) {
    if (runs.size() == 0)
        throw Error(Errc::ConfigError, "no runs to evaluate");
    return Evaluator(runs).evaluate(qrels, spec, mode);
}

} // namespace qrelgauge
