#pragma once

// TREC-style pooling analysis: the union of relevant documents found in each
// system's top-k, how much of the judged relevant set it covers, its expected
// value over random system subsets, and logarithmic extrapolation to more
// systems or deeper pools.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <utility>
#include <vector>

#include "qrelgauge/error.hpp"
#include "qrelgauge/model.hpp"
#include "qrelgauge/parallel.hpp"
#include "qrelgauge/rng.hpp"

namespace qrelgauge {

/// J_q(S): relevant documents in the top-k of at least one system.
inline std::set<DocId> pool_union(const RunSet& runs, const Qrels& qrels, const QueryId& q, std::size_t k) {
    std::set<DocId> out;
    for (const auto& r : runs.runs()) {
        auto found = top_k_relevant(r, qrels, q, k);
        out.insert(found.begin(), found.end());
    }
    return out;
}

/// Per-query bitsets of which relevant documents each system finds in its
/// top-k; coverage of any system subset is then a bitwise OR.
class CoverageTable {
public:
    CoverageTable(const RunSet& runs, const Qrels& qrels, std::size_t k, Mode mode = Mode::Strict) {
        n_systems_ = runs.size();
        for (const auto& q : runs.queries()) {
            if (!qrels.contains(q))
                continue;
            const auto rel = qrels.relevant(q);
            if (rel.empty()) {
                if (mode == Mode::Strict)
                    throw Error(Errc::NoRelevant, "query '" + q + "' has no relevant documents");
                skipped_.push_back(q);
                continue;
            }
            std::unordered_map<DocId, std::size_t> slot;
            for (std::size_t i = 0; i < rel.size(); ++i)
                slot.emplace(rel[i], i);
            const std::size_t words = (rel.size() + 63) / 64;
            Query entry{q, rel.size(), words, std::vector<std::uint64_t>(n_systems_ * words, 0)};
            for (std::size_t s = 0; s < n_systems_; ++s) {
                const auto& docs = runs.runs()[s].list(q);
                const auto depth = std::min(k, docs.size());
                for (std::size_t r = 0; r < depth; ++r)
                    if (auto it = slot.find(docs[r].doc); it != slot.end())
                        entry.bits[s * words + it->second / 64] |= std::uint64_t{1} << (it->second % 64);
            }
            queries_.push_back(std::move(entry));
        }
        if (queries_.empty())
            throw Error(Errc::NoCommonQueries, "runs and qrels share no query with relevant documents");
    }

    std::size_t num_systems() const noexcept { return n_systems_; }
    std::size_t num_queries() const noexcept { return queries_.size(); }
    const std::vector<QueryId>& skipped() const noexcept { return skipped_; }

    /// C_Q(S') for the system indices in `subset`, summed in query order.
    double coverage(const std::vector<std::size_t>& subset) const {
        double sum = 0.0;
        std::vector<std::uint64_t> acc;
        for (const auto& q : queries_) {
            acc.assign(q.words, 0);
            for (auto s : subset)
                for (std::size_t w = 0; w < q.words; ++w)
                    acc[w] |= q.bits[s * q.words + w];
            std::size_t found = 0;
            for (auto w : acc)
                found += static_cast<std::size_t>(std::popcount(w));
            sum += static_cast<double>(found) / static_cast<double>(q.relevant);
        }
        return sum / static_cast<double>(queries_.size());
    }

private:
    struct Query {
        QueryId id;
        std::size_t relevant;
        std::size_t words;
        std::vector<std::uint64_t> bits; // [system][word]
    };
    std::size_t n_systems_ = 0;
    std::vector<Query> queries_;
    std::vector<QueryId> skipped_;
};

/// C_Q(S) = mean over queries of |J_q(S)| / |E_q|.
inline double coverage(const RunSet& runs, const Qrels& qrels, std::size_t k, Mode mode = Mode::Strict) {
    CoverageTable table(runs, qrels, k, mode);
    std::vector<std::size_t> all(runs.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    return table.coverage(all);
}

inline constexpr double kExactSubsetBudget = 1e5;

/// C(n, t) as a double (exact for the sizes that matter here).
inline double binomial(std::size_t n, std::size_t t) {
    if (t > n)
        return 0.0;
    t = std::min(t, n - t);
    double r = 1.0;
    for (std::size_t i = 1; i <= t; ++i)
        r = r * static_cast<double>(n - t + i) / static_cast<double>(i);
    return std::round(r);
}

struct ExactMode {};
struct MonteCarloMode {
    std::size_t samples = 10000;
    std::uint64_t seed = 0;
};

struct ExpectedCoverage {
    double mean = 0.0;
    double std = 0.0; // spread of subset coverages (population sd for exact)
    std::size_t subsets = 0;
    bool exact = false;

    double standard_error() const { return subsets > 0 ? std / std::sqrt(static_cast<double>(subsets)) : 0.0; }
};

/// C*_Q(S, t) by enumerating every t-subset.
inline ExpectedCoverage expected_coverage_exact(const CoverageTable& table, std::size_t t) {
    const auto n = table.num_systems();
    if (t < 1 || t > n)
        throw Error(Errc::RangeError, "subset size t must lie in [1, " + std::to_string(n) + "]");
    if (binomial(n, t) > kExactSubsetBudget)
        throw Error(Errc::BudgetExceeded, "C(" + std::to_string(n) + ", " + std::to_string(t) +
                                              ") subsets exceed the exact budget; use monte_carlo mode");
    std::vector<std::size_t> subset(t);
    for (std::size_t i = 0; i < t; ++i)
        subset[i] = i;
    double sum = 0.0, sq = 0.0;
    std::size_t count = 0;
    for (;;) {
        const double c = table.coverage(subset);
        sum += c;
        sq += c * c;
        ++count;
        // next combination in lexicographic order
        std::size_t i = t;
        while (i > 0 && subset[i - 1] == n - t + i - 1)
            --i;
        if (i == 0)
            break;
        ++subset[i - 1];
        for (std::size_t j = i; j < t; ++j)
            subset[j] = subset[j - 1] + 1;
    }
    ExpectedCoverage out;
    out.mean = sum / static_cast<double>(count);
    out.std = std::sqrt(std::max(0.0, sq / static_cast<double>(count) - out.mean * out.mean));
    out.subsets = count;
    out.exact = true;
    return out;
}

/// C*_Q(S, t) estimated from uniformly sampled t-subsets.
inline ExpectedCoverage expected_coverage_mc(const CoverageTable& table, std::size_t t, const MonteCarloMode& mc,
                                             std::size_t jobs = 1) {
    const auto n = table.num_systems();
    if (t < 1 || t > n)
        throw Error(Errc::RangeError, "subset size t must lie in [1, " + std::to_string(n) + "]");
    if (mc.samples < 2)
        throw Error(Errc::ConfigError, "monte_carlo mode needs at least 2 samples");
    std::vector<double> values(mc.samples);
    parallel_for(mc.samples, jobs, [&](std::size_t i) {
        Xoshiro256 rng(derive_seed(mc.seed, {t, i}));
        values[i] = table.coverage(rng.sample_indices(n, t));
    });
    double sum = 0.0;
    for (double v : values)
        sum += v;
    ExpectedCoverage out;
    out.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values)
        ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    out.subsets = values.size();
    return out;
}

inline ExpectedCoverage expected_coverage(const RunSet& runs, const Qrels& qrels, std::size_t k, std::size_t t,
                                          const std::variant<ExactMode, MonteCarloMode>& mode = ExactMode{},
                                          std::size_t jobs = 1) {
    CoverageTable table(runs, qrels, k);
    if (const auto* mc = std::get_if<MonteCarloMode>(&mode))
        return expected_coverage_mc(table, t, *mc, jobs);
    return expected_coverage_exact(table, t);
}

struct LogFit {
    double a = 0.0;
    double b = 0.0;
    double rmse = 0.0;
    double max_error = 0.0;

    double operator()(double x) const { return a + b * std::log(x); }
};

/// Least squares for y = a + b ln(x).
inline LogFit fit_log(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2)
        throw Error(Errc::DegenerateFit, "need at least 2 points");
    for (const auto& [x, y] : points) {
        if (!(x >= 1.0))
            throw Error(Errc::RangeError, "fit requires x >= 1");
        if (!std::isfinite(y))
            throw Error(Errc::NumericalError, "non-finite observation");
    }
    const auto n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : points) {
        mx += std::log(x);
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (y - my);
    }
    if (sxx == 0.0)
        throw Error(Errc::DegenerateFit, "all x values are equal");
    LogFit fit;
    fit.b = sxy / sxx;
    fit.a = my - fit.b * mx;
    double ss = 0.0;
    for (const auto& [x, y] : points) {
        const double r = y - fit(x);
        ss += r * r;
        fit.max_error = std::max(fit.max_error, std::fabs(r));
    }
    fit.rmse = std::sqrt(ss / n);
    return fit;
}

struct CoverageCurve {
    std::vector<std::pair<std::size_t, double>> points;
    LogFit fit;
    std::vector<std::pair<std::size_t, double>> extrapolated;
    bool exact = true; // all points computed by enumeration
};

inline CoverageCurve fit_curve(std::vector<std::pair<std::size_t, double>> points, std::size_t extrapolate_to) {
    CoverageCurve curve;
    std::vector<std::pair<double, double>> xy;
    for (const auto& [x, y] : points)
        if (x >= 1)
            xy.emplace_back(static_cast<double>(x), y);
    curve.fit = fit_log(xy);
    const std::size_t last = points.empty() ? 0 : points.back().first;
    for (std::size_t x = last + 1; x <= extrapolate_to; ++x)
        curve.extrapolated.emplace_back(x, curve.fit(static_cast<double>(x)));
    curve.points = std::move(points);
    return curve;
}

struct SystemsExtrapolationOptions {
    MonteCarloMode fallback{}; // used for subset sizes beyond the exact budget
    std::size_t jobs = 1;
    Mode mode = Mode::Strict;
};

/// C*(t) for t = 1..|S|, a log fit, and predictions for t = |S|+1..t_max.
inline CoverageCurve extrapolate_systems(const RunSet& runs, const Qrels& qrels, std::size_t k, std::size_t t_max,
                                         const SystemsExtrapolationOptions& opt = {}) {
    const auto n = runs.size();
    if (n < 2)
        throw Error(Errc::TooFewSystems, "need at least 2 systems to fit a curve");
    if (t_max <= n)
        throw Error(Errc::RangeError, "t_max must exceed the number of systems");
    CoverageTable table(runs, qrels, k, opt.mode);
    std::vector<std::pair<std::size_t, double>> points;
    bool exact = true;
    for (std::size_t t = 1; t <= n; ++t) {
        if (binomial(n, t) <= kExactSubsetBudget) {
            points.emplace_back(t, expected_coverage_exact(table, t).mean);
        } else {
            exact = false;
            points.emplace_back(t, expected_coverage_mc(table, t, opt.fallback, opt.jobs).mean);
        }
    }
    auto curve = fit_curve(std::move(points), t_max);
    curve.exact = exact;
    return curve;
}

struct DepthAnalysis {
    std::vector<std::size_t> depths;
    std::vector<std::size_t> identified;
    std::vector<std::size_t> fresh; // identified but absent from the known judgments
    std::optional<CoverageCurve> identified_curve;
    std::optional<CoverageCurve> fresh_curve;
    std::size_t unjudged = 0; // pooled documents without any judgment (lenient mode)
};

/// Gives every relevant pooled document its best rank over all systems and
/// counts, per depth d, how many have best rank <= d and how many of those
/// were missing from `known`. Pool judgments take precedence; documents the
/// pool did not judge fall back to `known`.
inline DepthAnalysis depth_analysis(const RunSet& runs, const Qrels& known, const Qrels& pool,
                                    const std::vector<std::size_t>& depths, std::size_t extrapolate_to,
                                    Mode mode = Mode::Strict) {
    if (depths.empty())
        throw Error(Errc::ConfigError, "no depths given");
    for (std::size_t i = 1; i < depths.size(); ++i)
        if (depths[i] <= depths[i - 1])
            throw Error(Errc::RangeError, "depths must be strictly ascending");
    const auto max_depth = depths.back();

    DepthAnalysis out;
    out.depths = depths;
    std::vector<std::size_t> best_ranks; // relevant + pooled
    std::vector<bool> is_fresh;
    for (const auto& q : runs.queries()) {
        if (!pool.contains(q) && !known.contains(q))
            continue;
        std::unordered_map<DocId, std::size_t> best;
        for (const auto& r : runs.runs()) {
            const auto& docs = r.list(q);
            const auto depth = std::min(max_depth, docs.size());
            for (std::size_t i = 0; i < depth; ++i) {
                auto [it, inserted] = best.emplace(docs[i].doc, i + 1);
                if (!inserted)
                    it->second = std::min(it->second, i + 1);
            }
        }
        std::vector<std::pair<DocId, std::size_t>> ordered(best.begin(), best.end());
        std::sort(ordered.begin(), ordered.end());
        for (const auto& [d, rank] : ordered) {
            int g = pool.grade(q, d);
            if (g < 0)
                g = known.grade(q, d);
            if (g < 0) {
                if (mode == Mode::Strict)
                    throw Error(Errc::ConfigError, "pooled doc '" + d + "' of query '" + q + "' is unjudged");
                ++out.unjudged;
                continue;
            }
            if (g == 0)
                continue;
            best_ranks.push_back(rank);
            is_fresh.push_back(!known.is_relevant(q, d));
        }
    }
    for (auto depth : depths) {
        std::size_t ident = 0, fresh = 0;
        for (std::size_t i = 0; i < best_ranks.size(); ++i)
            if (best_ranks[i] <= depth) {
                ++ident;
                fresh += is_fresh[i];
            }
        out.identified.push_back(ident);
        out.fresh.push_back(fresh);
    }
    std::vector<std::pair<std::size_t, double>> ip, fp;
    for (std::size_t i = 0; i < depths.size(); ++i)
        if (depths[i] >= 1) {
            ip.emplace_back(depths[i], static_cast<double>(out.identified[i]));
            fp.emplace_back(depths[i], static_cast<double>(out.fresh[i]));
        }
    if (ip.size() >= 2) {
        out.identified_curve = fit_curve(std::move(ip), extrapolate_to);
        out.fresh_curve = fit_curve(std::move(fp), extrapolate_to);
    }
    return out;
}

} // namespace qrelgauge
