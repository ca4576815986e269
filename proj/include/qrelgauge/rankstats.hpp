#pragma once

// Ranking comparison statistics: Kendall-tau and its error-rate, paired
// t-tests, p-value buckets, partial Kendall-tau over a pair subset, and the
// significance-relation concordance metric.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrelgauge/error.hpp"
#include "qrelgauge/metrics.hpp"
#include "qrelgauge/model.hpp"
#include "qrelgauge/special.hpp"

namespace qrelgauge {

/// Unordered system pair stored with `first < second`.
struct SystemPair {
    SystemId first;
    SystemId second;

    SystemPair() = default;
    SystemPair(SystemId a, SystemId b) : first(std::move(a)), second(std::move(b)) {
        if (second < first)
            std::swap(first, second);
    }

    friend auto operator<=>(const SystemPair&, const SystemPair&) = default;
};

struct PairAgreement {
    std::size_t concordant = 0;
    std::size_t discordant = 0;
    std::size_t tied = 0; // tied in at least one ranking
    std::size_t total = 0;
    std::vector<SystemPair> discordant_pairs;

    double tau() const {
        return total == 0 ? 0.0
                          : (static_cast<double>(concordant) - static_cast<double>(discordant)) /
                                static_cast<double>(total);
    }
    /// True when no pair is decided in both rankings.
    bool all_ties() const { return concordant + discordant == 0; }
};

namespace detail {

inline int sign(double x) { return (x > 0) - (x < 0); }

inline void check_same_systems(const SystemRanking& a, const SystemRanking& b) {
    auto x = a.order();
    auto y = b.order();
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    if (x != y)
        throw Error(Errc::MismatchedSystems, "rankings cover different systems");
}

inline void tally(PairAgreement& out, const SystemPair& p, double c1, double c2, double r1, double r2) {
    ++out.total;
    const int s = sign(c1 - c2) * sign(r1 - r2);
    if (s > 0) {
        ++out.concordant;
    } else if (s < 0) {
        ++out.discordant;
        out.discordant_pairs.push_back(p);
    } else {
        ++out.tied;
    }
}

} // namespace detail

/// Pair-by-pair comparison over all (n choose 2) pairs. A pair tied in either
/// ranking counts as neither concordant nor discordant but stays in the total.
inline PairAgreement kendall_agreement(const SystemRanking& a, const SystemRanking& b) {
    detail::check_same_systems(a, b);
    if (a.size() < 2)
        throw Error(Errc::TooFewSystems, "Kendall-tau needs at least 2 systems");
    auto ids = a.order();
    std::sort(ids.begin(), ids.end());
    std::vector<double> sa, sb;
    for (const auto& id : ids) {
        sa.push_back(a.score(id));
        sb.push_back(b.score(id));
    }
    PairAgreement out;
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j)
            detail::tally(out, SystemPair(ids[i], ids[j]), sa[i], sa[j], sb[i], sb[j]);
    return out;
}

inline double kendall_tau(const SystemRanking& a, const SystemRanking& b) { return kendall_agreement(a, b).tau(); }

/// Percentage of discordant pairs implied by tau: 100 * (1 - tau) / 2.
inline double error_rate(double tau) {
    if (!(tau >= -1.0 - 1e-12 && tau <= 1.0 + 1e-12))
        throw Error(Errc::RangeError, "tau outside [-1, 1]");
    return 100.0 * (1.0 - std::clamp(tau, -1.0, 1.0)) / 2.0;
}

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
    bool degenerate = false; // zero variance; t and p follow the fixed rule
};

/// Two-sided one-sample t-test on paired differences (mean = 0 null).
/// Zero variance gives t = 0, p = 1 for a zero mean, and t = +/-inf, p = 0
/// otherwise.
inline TTestResult paired_t_test(std::span<const double> diffs) {
    const std::size_t n = diffs.size();
    if (n < 2)
        throw Error(Errc::TooFewQueries, "t-test needs at least 2 observations");
    TTestResult r;
    r.df = static_cast<double>(n - 1);
    const bool constant = std::all_of(diffs.begin(), diffs.end(), [&](double d) { return d == diffs[0]; });
    if (constant) {
        r.degenerate = true;
        if (diffs[0] == 0.0) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = diffs[0] > 0 ? INFINITY : -INFINITY;
            r.p = 0.0;
        }
        return r;
    }
    double sum = 0.0;
    for (double d : diffs)
        sum += d;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double d : diffs)
        ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    r.p = student_t_two_sided_p(r.t, r.df);
    return r;
}

/// Paired t-test between two systems' per-query scores (a - b).
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(Errc::MismatchedQueries, "paired samples differ in length");
    std::vector<double> diffs(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        diffs[i] = a[i] - b[i];
    return paired_t_test(diffs);
}

/// Half-open p-value interval [p_min, p_max). A bucket ending at 1 also
/// admits p = 1, so identical systems still land in the top bucket.
struct PairBucket {
    double p_min = 0.0;
    double p_max = 1.0;

    PairBucket() = default;
    PairBucket(double lo, double hi) : p_min(lo), p_max(hi) {
        if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
            throw Error(Errc::RangeError, "bucket must satisfy 0 <= p_min < p_max <= 1");
    }

    bool contains(double p) const { return (p >= p_min && p < p_max) || (p_max == 1.0 && p == 1.0); }

    std::string label() const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "[%g,%g)", p_min, p_max);
        return buf;
    }

    friend bool operator==(const PairBucket&, const PairBucket&) = default;
};

inline std::vector<PairBucket> default_buckets() { return {{0.0, 0.01}, {0.01, 0.05}, {0.05, 1.0}}; }

inline void validate_buckets(const std::vector<PairBucket>& buckets) {
    auto sorted = buckets;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.p_min < b.p_min; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].p_min < sorted[i - 1].p_max)
            throw Error(Errc::RangeError, "buckets " + sorted[i - 1].label() + " and " + sorted[i].label() +
                                              " overlap");
}

/// Parses "0,0.01,0.05,1" into consecutive buckets.
inline std::vector<PairBucket> parse_bucket_edges(const std::string& text) {
    std::vector<double> edges;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string::npos)
            comma = text.size();
        const auto tok = text.substr(start, comma - start);
        try {
            std::size_t used = 0;
            edges.push_back(std::stod(tok, &used));
            if (used != tok.size())
                throw std::invalid_argument(tok);
        } catch (const std::logic_error&) {
            throw Error(Errc::ConfigError, "bad bucket edge '" + tok + "'");
        }
        start = comma + 1;
    }
    if (edges.size() < 2)
        throw Error(Errc::ConfigError, "need at least two bucket edges");
    std::vector<PairBucket> out;
    for (std::size_t i = 1; i < edges.size(); ++i)
        out.emplace_back(edges[i - 1], edges[i]);
    return out;
}

struct PairInfo {
    SystemPair pair;
    std::optional<SystemId> better; // strictly larger mean
    double mean_first = 0.0;
    double mean_second = 0.0;
    TTestResult test;
    std::optional<std::size_t> bucket;
};

struct PairClassification {
    std::vector<PairBucket> buckets;
    std::vector<PairInfo> pairs;

    std::vector<SystemPair> pairs_in(std::size_t bucket) const {
        std::vector<SystemPair> out;
        for (const auto& p : pairs)
            if (p.bucket == bucket)
                out.push_back(p.pair);
        return out;
    }

    const PairInfo& find(const SystemPair& pair) const {
        for (const auto& p : pairs)
            if (p.pair == pair)
                return p;
        throw Error(Errc::MismatchedSystems, "pair " + pair.first + "/" + pair.second + " not classified");
    }
};

/// Tests every unordered system pair on its per-query differences and files
/// it into the bucket containing its p-value (if any).
inline PairClassification classify_pairs(const MetricMatrix& m, const std::vector<PairBucket>& buckets) {
    validate_buckets(buckets);
    PairClassification out;
    out.buckets = buckets;
    const auto means = m.means();
    for (std::size_t i = 0; i < m.systems.size(); ++i)
        for (std::size_t j = i + 1; j < m.systems.size(); ++j) {
            PairInfo info;
            info.pair = SystemPair(m.systems[i], m.systems[j]);
            const bool swapped = info.pair.first != m.systems[i];
            const std::size_t a = swapped ? j : i;
            const std::size_t b = swapped ? i : j;
            info.mean_first = means[a];
            info.mean_second = means[b];
            if (means[a] > means[b])
                info.better = m.systems[a];
            else if (means[b] > means[a])
                info.better = m.systems[b];
            info.test = paired_t_test(m.values[a], m.values[b]);
            for (std::size_t k = 0; k < buckets.size(); ++k)
                if (buckets[k].contains(info.test.p)) {
                    info.bucket = k;
                    break;
                }
            out.pairs.push_back(std::move(info));
        }
    return out;
}

/// Kendall-style agreement counted only over `pairs`; the denominator is |pairs|.
inline PairAgreement partial_agreement(const SystemRanking& candidate, const SystemRanking& reference,
                                       const std::vector<SystemPair>& pairs) {
    if (pairs.empty())
        throw Error(Errc::EmptyBucket, "no system pairs to compare");
    PairAgreement out;
    for (const auto& p : pairs)
        detail::tally(out, p, candidate.score(p.first), candidate.score(p.second), reference.score(p.first),
                      reference.score(p.second));
    return out;
}

inline double partial_kendall_tau(const SystemRanking& candidate, const SystemRanking& reference,
                                  const std::vector<SystemPair>& pairs) {
    return partial_agreement(candidate, reference, pairs).tau();
}

/// better[i][j] == "systems[i] is significantly better than systems[j]".
struct SignificanceRelation {
    std::vector<SystemId> systems; // sorted
    std::vector<std::vector<bool>> better;
    double alpha = 0.05;

    std::size_t index(const SystemId& id) const {
        auto it = std::lower_bound(systems.begin(), systems.end(), id);
        if (it == systems.end() || *it != id)
            throw Error(Errc::MismatchedSystems, "system '" + id + "' not in relation");
        return static_cast<std::size_t>(it - systems.begin());
    }

    bool operator()(const SystemId& a, const SystemId& b) const { return better[index(a)][index(b)]; }

    /// Builds a relation from explicit "a beats b" facts.
    static SignificanceRelation from_pairs(std::vector<SystemId> systems,
                                           const std::vector<std::pair<SystemId, SystemId>>& wins,
                                           double alpha = 0.05) {
        SignificanceRelation r;
        std::sort(systems.begin(), systems.end());
        r.systems = std::move(systems);
        r.alpha = alpha;
        r.better.assign(r.systems.size(), std::vector<bool>(r.systems.size(), false));
        for (const auto& [a, b] : wins) {
            const auto i = r.index(a), j = r.index(b);
            if (i == j || r.better[j][i])
                throw Error(Errc::ConfigError, "relation must be irreflexive and antisymmetric");
            r.better[i][j] = true;
        }
        return r;
    }
};

inline SignificanceRelation significance_relation(const PairClassification& pc, std::vector<SystemId> systems,
                                                  double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(Errc::RangeError, "alpha must lie in (0, 1)");
    std::vector<std::pair<SystemId, SystemId>> wins;
    for (const auto& p : pc.pairs)
        if (p.better && p.test.p < alpha)
            wins.emplace_back(*p.better, *p.better == p.pair.first ? p.pair.second : p.pair.first);
    return SignificanceRelation::from_pairs(std::move(systems), wins, alpha);
}

inline SignificanceRelation significance_relation(const MetricMatrix& m, double alpha = 0.05) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(Errc::RangeError, "alpha must lie in (0, 1)");
    return significance_relation(classify_pairs(m, {}), m.systems, alpha);
}

/// Fraction of ordered pairs (s1 != s2) on which both relations agree.
inline double concordance(const SignificanceRelation& a, const SignificanceRelation& b) {
    if (a.systems != b.systems)
        throw Error(Errc::MismatchedSystems, "relations cover different systems");
    const auto n = a.systems.size();
    if (n < 2)
        throw Error(Errc::TooFewSystems, "concordance needs at least 2 systems");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                agree += a.better[i][j] == b.better[i][j];
    return static_cast<double>(agree) / static_cast<double>(n * (n - 1));
}

/// Concordance over both orientations of the given unordered pairs only.
inline double concordance(const SignificanceRelation& a, const SignificanceRelation& b,
                          const std::vector<SystemPair>& pairs) {
    if (pairs.empty())
        throw Error(Errc::EmptyBucket, "no system pairs to compare");
    std::size_t agree = 0;
    for (const auto& p : pairs) {
        agree += a(p.first, p.second) == b(p.first, p.second);
        agree += a(p.second, p.first) == b(p.second, p.first);
    }
    return static_cast<double>(agree) / static_cast<double>(2 * pairs.size());
}

} // namespace qrelgauge
