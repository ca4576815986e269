#pragma once

// In-memory data model shared by every analysis: judgments, runs, run sets,
// document metadata and system rankings. All types are plain values and are
// not mutated once an analysis starts, so concurrent readers are safe.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qrelgauge/error.hpp"

namespace qrelgauge {

using QueryId = std::string;
using DocId = std::string;
using SystemId = std::string;

/// Relevance judgments. A document is relevant iff its grade is > 0.
class Qrels {
public:
    using Judgments = std::map<DocId, int>;

    /// Inserts a judgment. Returns false (and leaves the entry untouched) when
    /// the pair already exists; callers decide whether that is a conflict.
    bool insert(const QueryId& q, const DocId& d, int grade) {
        if (grade < 0)
            throw Error(Errc::RangeError, "negative grade for " + q + "/" + d);
        return entries_[q].emplace(d, grade).second;
    }

    bool contains(const QueryId& q) const { return entries_.count(q) != 0; }

    const Judgments& judgments(const QueryId& q) const {
        auto it = entries_.find(q);
        if (it == entries_.end())
            throw Error(Errc::MissingQuery, "query '" + q + "' not in qrels");
        return it->second;
    }

    /// Grade of (q, d), or -1 when unjudged.
    int grade(const QueryId& q, const DocId& d) const {
        auto it = entries_.find(q);
        if (it == entries_.end())
            return -1;
        auto jt = it->second.find(d);
        return jt == it->second.end() ? -1 : jt->second;
    }

    bool is_relevant(const QueryId& q, const DocId& d) const { return grade(q, d) > 0; }

    /// The relevant set of q in doc-id order.
    std::vector<DocId> relevant(const QueryId& q) const {
        std::vector<DocId> out;
        for (const auto& [d, g] : judgments(q))
            if (g > 0)
                out.push_back(d);
        return out;
    }

    std::size_t num_relevant(const QueryId& q) const {
        std::size_t n = 0;
        for (const auto& [d, g] : judgments(q))
            n += g > 0;
        return n;
    }

    std::vector<QueryId> queries() const {
        std::vector<QueryId> out;
        out.reserve(entries_.size());
        for (const auto& [q, _] : entries_)
            out.push_back(q);
        return out;
    }

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const std::map<QueryId, Judgments>& entries() const noexcept { return entries_; }

    friend bool operator==(const Qrels&, const Qrels&) = default;

private:
    std::map<QueryId, Judgments> entries_;
};

struct ScoredDoc {
    DocId doc;
    double score = 0.0;

    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// trec_eval order: score descending, ties by doc-id descending.
inline bool canonical_before(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score)
        return a.score > b.score;
    return a.doc > b.doc;
}

struct Run {
    SystemId system;
    std::map<QueryId, std::vector<ScoredDoc>> rankings;

    const std::vector<ScoredDoc>& list(const QueryId& q) const {
        auto it = rankings.find(q);
        if (it == rankings.end())
            throw Error(Errc::MissingQuery, "query '" + q + "' not in run '" + system + "'");
        return it->second;
    }

    bool contains(const QueryId& q) const { return rankings.count(q) != 0; }

    friend bool operator==(const Run&, const Run&) = default;
};

/// Sorts every ranked list into canonical order. Idempotent.
inline Run canonicalize(Run run) {
    for (auto& [q, docs] : run.rankings) {
        std::sort(docs.begin(), docs.end(), canonical_before);
        std::set<std::string_view> seen;
        for (const auto& sd : docs)
            if (!seen.insert(sd.doc).second)
                throw Error(Errc::DuplicateDoc,
                            "doc '" + sd.doc + "' repeated in query '" + q + "' of run '" + run.system + "'");
    }
    return run;
}

/// E_{q,s}: relevant documents among the first min(k, |list|) entries of the
/// canonical list.
inline std::set<DocId> top_k_relevant(const Run& run, const Qrels& qrels, const QueryId& q, std::size_t k) {
    const auto& docs = run.list(q);
    const auto& judged = qrels.judgments(q);
    std::set<DocId> out;
    const std::size_t depth = std::min(k, docs.size());
    for (std::size_t i = 0; i < depth; ++i) {
        auto it = judged.find(docs[i].doc);
        if (it != judged.end() && it->second > 0)
            out.insert(docs[i].doc);
    }
    return out;
}

/// An ordered collection of canonical runs over a common query universe.
class RunSet {
public:
    RunSet() = default;

    /// Strict mode rejects runs whose query sets differ; lenient mode keeps the
    /// intersection.
    explicit RunSet(std::vector<Run> runs, Mode mode = Mode::Strict) {
        std::set<SystemId> ids;
        for (auto& r : runs) {
            if (!ids.insert(r.system).second)
                throw Error(Errc::ConfigError, "duplicate system id '" + r.system + "'");
            r = canonicalize(std::move(r));
        }
        runs_ = std::move(runs);
        if (runs_.empty())
            return;

        std::set<QueryId> universe;
        for (const auto& [q, _] : runs_.front().rankings)
            universe.insert(q);
        for (std::size_t i = 1; i < runs_.size(); ++i) {
            std::set<QueryId> mine;
            for (const auto& [q, _] : runs_[i].rankings)
                mine.insert(q);
            if (mine != universe) {
                if (mode == Mode::Strict)
                    throw Error(Errc::MismatchedQueries, "run '" + runs_[i].system +
                                                             "' covers a different query set than '" +
                                                             runs_.front().system + "'");
                std::set<QueryId> both;
                std::set_intersection(universe.begin(), universe.end(), mine.begin(), mine.end(),
                                      std::inserter(both, both.begin()));
                universe = std::move(both);
            }
        }
        queries_.assign(universe.begin(), universe.end());
    }

    const std::vector<Run>& runs() const noexcept { return runs_; }
    const std::vector<QueryId>& queries() const noexcept { return queries_; }
    std::size_t size() const noexcept { return runs_.size(); }

    std::vector<SystemId> systems() const {
        std::vector<SystemId> out;
        for (const auto& r : runs_)
            out.push_back(r.system);
        return out;
    }

    const Run& run(const SystemId& id) const {
        for (const auto& r : runs_)
            if (r.system == id)
                return r;
        throw Error(Errc::MismatchedSystems, "no run for system '" + id + "'");
    }

    std::size_t index_of(const SystemId& id) const {
        for (std::size_t i = 0; i < runs_.size(); ++i)
            if (runs_[i].system == id)
                return i;
        throw Error(Errc::MismatchedSystems, "no run for system '" + id + "'");
    }

    /// Same universe, restricted to the given member systems (in this set's order).
    RunSet subset(const std::vector<std::size_t>& indices) const {
        RunSet out;
        for (auto i : indices)
            out.runs_.push_back(runs_.at(i));
        out.queries_ = queries_;
        return out;
    }

private:
    std::vector<Run> runs_;
    std::vector<QueryId> queries_;
};

struct DocInfo {
    std::int64_t popularity = 0;
    std::int64_t length = 0;

    friend bool operator==(const DocInfo&, const DocInfo&) = default;
};

using DocMeta = std::map<DocId, DocInfo>;

struct RankedSystem {
    SystemId system;
    double score = 0.0;

    friend bool operator==(const RankedSystem&, const RankedSystem&) = default;
};

/// Systems ordered by mean score, descending; equal scores ordered by id.
class SystemRanking {
public:
    SystemRanking() = default;

    explicit SystemRanking(std::vector<RankedSystem> entries) : entries_(std::move(entries)) {
        std::sort(entries_.begin(), entries_.end(), [](const RankedSystem& a, const RankedSystem& b) {
            if (a.score != b.score)
                return a.score > b.score;
            return a.system < b.system;
        });
        std::set<SystemId> ids;
        for (const auto& e : entries_)
            if (!ids.insert(e.system).second)
                throw Error(Errc::MismatchedSystems, "duplicate system '" + e.system + "' in ranking");
    }

    /// Best-first order with no ties: the first system gets score n, the last 1.
    static SystemRanking from_order(const std::vector<SystemId>& order) {
        std::vector<RankedSystem> entries;
        const auto n = static_cast<double>(order.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            entries.push_back({order[i], n - static_cast<double>(i)});
        return SystemRanking(std::move(entries));
    }

    const std::vector<RankedSystem>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    std::vector<SystemId> order() const {
        std::vector<SystemId> out;
        for (const auto& e : entries_)
            out.push_back(e.system);
        return out;
    }

    /// Score of a system; throws MismatchedSystems when absent.
    double score(const SystemId& id) const {
        for (const auto& e : entries_)
            if (e.system == id)
                return e.score;
        throw Error(Errc::MismatchedSystems, "system '" + id + "' not in ranking");
    }

    bool contains(const SystemId& id) const {
        return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.system == id; });
    }

    /// Drops the given system (used when a selector system is excluded).
    SystemRanking without(const SystemId& id) const {
        std::vector<RankedSystem> kept;
        for (const auto& e : entries_)
            if (e.system != id)
                kept.push_back(e);
        return SystemRanking(std::move(kept));
    }

private:
    std::vector<RankedSystem> entries_;
};

} // namespace qrelgauge
