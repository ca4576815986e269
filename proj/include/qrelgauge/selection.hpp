#pragma once

// Simulation of partially annotated judgment sets. A selection policy keeps
// exactly one relevant document per query (random, most popular, longest,
// shortest, or the first relevant document a given system retrieves); the
// studies then compare the resulting system rankings against the ranking
// obtained with the full judgments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qrelgauge/error.hpp"
#include "qrelgauge/metrics.hpp"
#include "qrelgauge/model.hpp"
#include "qrelgauge/parallel.hpp"
#include "qrelgauge/rankstats.hpp"
#include "qrelgauge/rng.hpp"

namespace qrelgauge {

struct RandomSelection {
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
};
struct MostPopularSelection {};
struct LongestSelection {};
struct ShortestSelection {};
/// An empty selector means "each system of the run set in turn" in a study.
struct SystemBasedSelection {
    SystemId selector;
};

using SelectionPolicy =
    std::variant<RandomSelection, MostPopularSelection, LongestSelection, ShortestSelection, SystemBasedSelection>;

inline std::string policy_name(const SelectionPolicy& p) {
    struct {
        std::string operator()(const RandomSelection&) const { return "random"; }
        std::string operator()(const MostPopularSelection&) const { return "most_popular"; }
        std::string operator()(const LongestSelection&) const { return "longest"; }
        std::string operator()(const ShortestSelection&) const { return "shortest"; }
        std::string operator()(const SystemBasedSelection& s) const {
            return s.selector.empty() ? "system_based" : "system_based:" + s.selector;
        }
    } visitor;
    return std::visit(visitor, p);
}

/// What SystemBased does when the selector retrieves no relevant document.
enum class Fallback { SmallestRelevant, SkipQuery };

struct SelectionResult {
    Qrels qrels; // exactly one relevant document per retained query
    std::size_t fallbacks = 0;
    std::vector<QueryId> skipped;
};

namespace detail {

/// Relevant lists for the queries of `qrels`, failing on queries with none.
inline std::vector<std::pair<QueryId, std::vector<DocId>>> relevant_lists(const Qrels& qrels) {
    std::vector<std::pair<QueryId, std::vector<DocId>>> out;
    for (const auto& q : qrels.queries()) {
        auto rel = qrels.relevant(q);
        if (rel.empty())
            throw Error(Errc::NoRelevant, "query '" + q + "' has no relevant document to select");
        out.emplace_back(q, std::move(rel));
    }
    return out;
}

template <typename Key>
DocId pick_by_meta(const QueryId& q, const std::vector<DocId>& rel, const DocMeta& meta, Key key) {
    // rel is in doc-id order, so keeping the first maximum breaks ties by smallest id
    std::optional<std::int64_t> best;
    const DocId* chosen = nullptr;
    for (const auto& d : rel) {
        auto it = meta.find(d);
        if (it == meta.end())
            throw Error(Errc::MissingMeta, "no metadata for relevant doc '" + d + "' of query '" + q + "'");
        const auto v = key(it->second);
        if (!best || v > *best) {
            best = v;
            chosen = &d;
        }
    }
    return *chosen;
}

inline std::optional<DocId> first_relevant(const Run& run, const QueryId& q, const std::vector<DocId>& rel) {
    if (!run.contains(q))
        return std::nullopt;
    for (const auto& sd : run.list(q))
        if (std::binary_search(rel.begin(), rel.end(), sd.doc))
            return sd.doc;
    return std::nullopt;
}

} // namespace detail

/// Keeps one relevant document per query according to `policy`. For
/// RandomSelection, `trial` picks an independent substream.
inline SelectionResult select_single(const Qrels& full, const SelectionPolicy& policy, const DocMeta* meta = nullptr,
                                     const RunSet* runs = nullptr, Fallback fallback = Fallback::SmallestRelevant,
                                     std::size_t trial = 0) {
    const auto lists = detail::relevant_lists(full);
    SelectionResult out;
    const bool needs_meta = std::holds_alternative<MostPopularSelection>(policy) ||
                            std::holds_alternative<LongestSelection>(policy) ||
                            std::holds_alternative<ShortestSelection>(policy);
    if (needs_meta && !meta)
        throw Error(Errc::MissingMeta, policy_name(policy) + " selection needs document metadata");
    const Run* selector = nullptr;
    if (const auto* sb = std::get_if<SystemBasedSelection>(&policy)) {
        if (!runs)
            throw Error(Errc::ConfigError, "system-based selection needs the selector's run");
        selector = &runs->run(sb->selector);
    }
    for (std::size_t qi = 0; qi < lists.size(); ++qi) {
        const auto& [q, rel] = lists[qi];
        DocId chosen;
        if (const auto* r = std::get_if<RandomSelection>(&policy)) {
            Xoshiro256 rng(derive_seed(r->seed, {trial, qi}));
            chosen = rel[rng.below(rel.size())];
        } else if (std::holds_alternative<MostPopularSelection>(policy)) {
            chosen = detail::pick_by_meta(q, rel, *meta, [](const DocInfo& i) { return i.popularity; });
        } else if (std::holds_alternative<LongestSelection>(policy)) {
            chosen = detail::pick_by_meta(q, rel, *meta, [](const DocInfo& i) { return i.length; });
        } else if (std::holds_alternative<ShortestSelection>(policy)) {
            chosen = detail::pick_by_meta(q, rel, *meta, [](const DocInfo& i) { return -i.length; });
        } else {
            auto hit = detail::first_relevant(*selector, q, rel);
            if (hit) {
                chosen = *hit;
            } else if (fallback == Fallback::SmallestRelevant) {
                chosen = rel.front();
                ++out.fallbacks;
            } else {
                out.skipped.push_back(q);
                continue;
            }
        }
        out.qrels.insert(q, chosen, 1);
    }
    return out;
}

struct BucketOutcome {
    PairBucket bucket;
    std::size_t pairs = 0;              // pairs of the reference classification in this bucket
    std::optional<double> tau;          // mean partial tau; empty when no sample had pairs
    std::optional<double> error_rate;   // error_rate(mean partial tau)
    std::optional<double> concordance;  // mean concordance over the bucket's pairs
    std::size_t samples = 0;
};

struct SelectorOutcome {
    SystemId selector;
    double tau = 0.0;
    double error_rate = 0.0;
    bool all_ties = false;
    std::size_t fallbacks = 0;
    std::size_t skipped = 0;
};

struct PolicyOutcome {
    std::string name;
    double tau = 0.0; // mean over trials / selectors
    double tau_std = 0.0;
    double error_rate = 0.0;
    std::size_t samples = 0;
    bool all_ties = false; // every sample had no decided pair
    std::size_t fallbacks = 0;
    std::vector<BucketOutcome> buckets;
    std::vector<SelectorOutcome> selectors; // system-based only
};

/// Per-system mean score on the judgments built by one selector (or on the
/// full judgments for selector "full").
struct SwapPoint {
    std::string selection;
    SystemId system;
    double score = 0.0;
    bool is_selector = false;
};

struct StudyOptions {
    const DocMeta* meta = nullptr;
    Fallback fallback = Fallback::SmallestRelevant;
    std::size_t jobs = 1;
    double alpha = 0.05;
};

struct SingleRelevantStudy {
    MetricSpec spec;
    SystemRanking reference;
    PairClassification classes;
    std::vector<PolicyOutcome> policies;
    std::vector<SwapPoint> swap_plot;
};

namespace detail {

/// One comparison of a candidate ranking against the reference.
struct Sample {
    PairAgreement overall;
    std::vector<std::optional<double>> bucket_tau;
    std::vector<std::optional<double>> bucket_conc;
    std::size_t fallbacks = 0;
    std::size_t skipped = 0;
    std::vector<double> means;
};

struct StudyContext {
    const RunSet& runs;
    const Evaluator& eval;
    MetricSpec spec;
    std::vector<QueryId> queries;
    MetricMatrix reference_matrix;
    SystemRanking reference;
    PairClassification classes;
    SignificanceRelation reference_relation;
    double alpha;

    std::vector<std::size_t> systems_except(std::optional<std::size_t> excluded) const {
        std::vector<std::size_t> out;
        for (std::size_t s = 0; s < runs.size(); ++s)
            if (s != excluded)
                out.push_back(s);
        return out;
    }

    /// Scores a judgment set (relevant list per query of `qs`) and compares
    /// it against the reference over `systems`.
    Sample compare(const std::vector<QueryId>& qs, const std::vector<std::vector<DocId>>& rel,
                   const std::vector<std::size_t>& systems) const {
        auto m = eval.evaluate_sets(qs, rel, spec, &systems);
        Sample out;
        out.means = m.means();
        const auto cand = m.ranking();
        std::vector<RankedSystem> kept;
        for (auto s : systems)
            kept.push_back({runs.runs()[s].system, reference.score(runs.runs()[s].system)});
        const SystemRanking ref(std::move(kept));
        out.overall = kendall_agreement(cand, ref);

        std::optional<SignificanceRelation> cand_rel;
        const auto n_buckets = classes.buckets.size();
        out.bucket_tau.resize(n_buckets);
        out.bucket_conc.resize(n_buckets);
        for (std::size_t b = 0; b < n_buckets; ++b) {
            std::vector<SystemPair> pairs;
            for (const auto& p : classes.pairs_in(b))
                if (cand.contains(p.first) && cand.contains(p.second))
                    pairs.push_back(p);
            if (pairs.empty())
                continue;
            out.bucket_tau[b] = partial_agreement(cand, ref, pairs).tau();
            if (!cand_rel && m.queries.size() >= 2)
                cand_rel = significance_relation(m, alpha);
            if (cand_rel)
                out.bucket_conc[b] = concordance(*cand_rel, reference_relation, pairs);
        }
        return out;
    }
};

inline std::vector<std::vector<DocId>> singleton_lists(const Qrels& single, const std::vector<QueryId>& qs) {
    std::vector<std::vector<DocId>> out;
    for (const auto& q : qs)
        out.push_back(single.relevant(q));
    return out;
}

inline void summarize(PolicyOutcome& out, const std::vector<Sample>& samples, const PairClassification& classes) {
    out.samples = samples.size();
    double sum = 0.0;
    out.all_ties = true;
    for (const auto& s : samples) {
        sum += s.overall.tau();
        out.all_ties = out.all_ties && s.overall.all_ties();
        out.fallbacks += s.fallbacks;
    }
    out.tau = samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
    double ss = 0.0;
    for (const auto& s : samples)
        ss += (s.overall.tau() - out.tau) * (s.overall.tau() - out.tau);
    out.tau_std = samples.size() > 1 ? std::sqrt(ss / static_cast<double>(samples.size() - 1)) : 0.0;
    out.error_rate = error_rate(out.tau);
    for (std::size_t b = 0; b < classes.buckets.size(); ++b) {
        BucketOutcome bo;
        bo.bucket = classes.buckets[b];
        bo.pairs = classes.pairs_in(b).size();
        double tsum = 0.0, csum = 0.0;
        std::size_t tn = 0, cn = 0;
        for (const auto& s : samples) {
            if (s.bucket_tau[b]) {
                tsum += *s.bucket_tau[b];
                ++tn;
            }
            if (s.bucket_conc[b]) {
                csum += *s.bucket_conc[b];
                ++cn;
            }
        }
        bo.samples = tn;
        if (tn) {
            bo.tau = tsum / static_cast<double>(tn);
            bo.error_rate = error_rate(*bo.tau);
        }
        if (cn)
            bo.concordance = csum / static_cast<double>(cn);
        out.buckets.push_back(bo);
    }
}

inline StudyContext make_context(const RunSet& runs, const Evaluator& eval, const Qrels& full,
                                 const MetricSpec& spec, const std::vector<PairBucket>& buckets, double alpha) {
    if (runs.size() < 2)
        throw Error(Errc::TooFewSystems, "a ranking study needs at least 2 systems");
    auto ref_matrix = eval.evaluate(full, spec, Mode::Strict);
    auto classes = classify_pairs(ref_matrix, buckets);
    auto ref_rel = significance_relation(classes, ref_matrix.systems, alpha);
    auto ranking = ref_matrix.ranking();
    auto queries = ref_matrix.queries;
    return StudyContext{runs,
                        eval,
                        spec,
                        std::move(queries),
                        std::move(ref_matrix),
                        std::move(ranking),
                        std::move(classes),
                        std::move(ref_rel),
                        alpha};
}

} // namespace detail

/// Builds single-relevant judgments under every policy and compares the
/// resulting system ranking with the full-judgment ranking. Random policies
/// report mean and standard deviation over trials; system-based policies
/// exclude the selector system from each comparison and average over
/// selectors.
inline SingleRelevantStudy single_relevant_study(const RunSet& runs, const Qrels& full,
                                                 const std::vector<SelectionPolicy>& policies,
                                                 const MetricSpec& spec, const std::vector<PairBucket>& buckets,
                                                 const StudyOptions& opt = {}) {
    const Evaluator eval(runs);
    // only queries that the runs cover take part
    Qrels judged;
    for (const auto& q : runs.queries())
        if (full.contains(q))
            for (const auto& [d, g] : full.judgments(q))
                judged.insert(q, d, g);
    const auto ctx = detail::make_context(runs, eval, judged, spec, buckets, opt.alpha);

    SingleRelevantStudy study;
    study.spec = spec;
    study.reference = ctx.reference;
    study.classes = ctx.classes;
    const auto ref_means = ctx.reference_matrix.means();
    for (std::size_t s = 0; s < runs.size(); ++s)
        study.swap_plot.push_back({"full", runs.runs()[s].system, ref_means[s], false});

    for (const auto& policy : policies) {
        PolicyOutcome outcome;
        outcome.name = policy_name(policy);
        std::vector<detail::Sample> samples;

        if (const auto* r = std::get_if<RandomSelection>(&policy)) {
            if (r->trials < 1)
                throw Error(Errc::ConfigError, "random selection needs at least one trial");
            samples.resize(r->trials);
            const auto all = ctx.systems_except(std::nullopt);
            parallel_for(r->trials, opt.jobs, [&](std::size_t t) {
                auto sel = select_single(judged, policy, nullptr, nullptr, opt.fallback, t);
                samples[t] = ctx.compare(ctx.queries, detail::singleton_lists(sel.qrels, ctx.queries), all);
            });
        } else if (const auto* sb = std::get_if<SystemBasedSelection>(&policy)) {
            std::vector<std::size_t> selectors;
            if (sb->selector.empty())
                selectors = ctx.systems_except(std::nullopt);
            else
                selectors.push_back(runs.index_of(sb->selector));
            if (runs.size() < 3)
                throw Error(Errc::TooFewSystems, "system-based study needs 3+ systems (selector is excluded)");
            samples.resize(selectors.size());
            parallel_for(selectors.size(), opt.jobs, [&](std::size_t i) {
                const auto s = selectors[i];
                auto sel = select_single(judged, SystemBasedSelection{runs.runs()[s].system}, nullptr, &runs,
                                         opt.fallback);
                std::vector<QueryId> qs;
                for (const auto& q : ctx.queries)
                    if (sel.qrels.contains(q))
                        qs.push_back(q);
                if (qs.empty())
                    throw Error(Errc::NoCommonQueries, "selector '" + runs.runs()[s].system + "' kept no query");
                samples[i] = ctx.compare(qs, detail::singleton_lists(sel.qrels, qs), ctx.systems_except(s));
                samples[i].fallbacks = sel.fallbacks;
                samples[i].skipped = sel.skipped.size();
                // swap-plot scores include the selector itself
                auto everyone = ctx.systems_except(std::nullopt);
                samples[i].means = eval.evaluate_sets(qs, detail::singleton_lists(sel.qrels, qs), spec, &everyone)
                                       .means();
            });
            for (std::size_t i = 0; i < selectors.size(); ++i) {
                const auto& sys = runs.runs()[selectors[i]].system;
                const auto& smp = samples[i];
                outcome.selectors.push_back({sys, smp.overall.tau(), error_rate(smp.overall.tau()),
                                             smp.overall.all_ties(), smp.fallbacks, smp.skipped});
                for (std::size_t s = 0; s < runs.size(); ++s)
                    study.swap_plot.push_back(
                        {outcome.name + ":" + sys, runs.runs()[s].system, smp.means[s], s == selectors[i]});
            }
        } else {
            const auto all = ctx.systems_except(std::nullopt);
            auto sel = select_single(judged, policy, opt.meta, &runs, opt.fallback);
            samples.push_back(ctx.compare(ctx.queries, detail::singleton_lists(sel.qrels, ctx.queries), all));
            for (std::size_t s = 0; s < runs.size(); ++s)
                study.swap_plot.push_back({outcome.name, runs.runs()[s].system, samples.back().means[s], false});
        }
        detail::summarize(outcome, samples, ctx.classes);
        study.policies.push_back(std::move(outcome));
    }
    return study;
}

/// Number of annotated documents kept at fraction f of n relevant: ceil(f*n),
/// at least one, with products within 1e-9 of an integer treated as exact.
inline std::size_t annotation_quota(double fraction, std::size_t n) {
    const double x = fraction * static_cast<double>(n);
    const double r = std::round(x);
    double q = std::fabs(x - r) <= 1e-9 * std::max(1.0, x) ? r : std::ceil(x);
    auto out = static_cast<std::size_t>(q);
    return std::clamp<std::size_t>(out, 1, n);
}

struct CurvePoint {
    std::optional<double> tau;
    std::optional<double> error_rate;
    std::optional<double> concordance;
    std::size_t samples = 0;
};

struct StabilityCurve {
    MetricSpec spec;
    std::vector<double> fractions;
    std::vector<PairBucket> buckets;
    std::vector<std::size_t> bucket_pairs;
    std::vector<std::vector<CurvePoint>> points; // [fraction][bucket]
    std::vector<double> overall_tau;             // all pairs, [fraction]
    std::vector<std::size_t> annotated;          // judged documents per selector, [fraction]
    std::size_t selectors = 0;
    std::size_t repetitions = 0;
    std::uint64_t seed = 0;
};

struct IncrementalOptions {
    std::size_t repetitions = 1;
    Fallback fallback = Fallback::SmallestRelevant;
    bool exclude_selector = true;
    std::size_t jobs = 1;
    double alpha = 0.05;
};

inline std::vector<double> default_fractions() {
    return {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

/// Starting from each system's single-relevant selection, adds uniformly
/// sampled relevant documents until ceil(f * |E_q|) are annotated per query.
/// The additions follow one random order per (selector, repetition, query), so
/// the annotated sets are nested across fractions. Results are averaged over
/// selectors and repetitions per (fraction, bucket).
inline StabilityCurve incremental_study(const RunSet& runs, const Qrels& full, const std::vector<double>& fractions,
                                        const std::vector<PairBucket>& buckets, const MetricSpec& spec,
                                        std::uint64_t seed, const IncrementalOptions& opt = {}) {
    if (fractions.empty())
        throw Error(Errc::ConfigError, "no annotation fractions given");
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (!(fractions[i] > 0.0 && fractions[i] <= 1.0))
            throw Error(Errc::RangeError, "fractions must lie in (0, 1]");
        if (i && !(fractions[i] > fractions[i - 1]))
            throw Error(Errc::RangeError, "fractions must be strictly ascending");
    }
    if (opt.repetitions < 1)
        throw Error(Errc::ConfigError, "repetitions must be >= 1");
    if (opt.exclude_selector && runs.size() < 3)
        throw Error(Errc::TooFewSystems, "incremental study needs 3+ systems when the selector is excluded");

    const Evaluator eval(runs);
    Qrels judged;
    for (const auto& q : runs.queries())
        if (full.contains(q))
            for (const auto& [d, g] : full.judgments(q))
                judged.insert(q, d, g);
    const auto ctx = detail::make_context(runs, eval, judged, spec, buckets, opt.alpha);

    const auto n_sel = runs.size();
    const auto n_units = n_sel * opt.repetitions;
    // samples[unit][fraction]
    std::vector<std::vector<detail::Sample>> samples(n_units);
    std::vector<std::vector<std::size_t>> annotated(n_units, std::vector<std::size_t>(fractions.size(), 0));

    parallel_for(n_units, opt.jobs, [&](std::size_t unit) {
        const auto s = unit / opt.repetitions;
        const auto rep = unit % opt.repetitions;
        auto sel = select_single(judged, SystemBasedSelection{runs.runs()[s].system}, nullptr, &runs, opt.fallback);
        std::vector<QueryId> qs;
        std::vector<std::vector<DocId>> order; // seed first, then the random additions
        for (std::size_t qi = 0; qi < ctx.queries.size(); ++qi) {
            const auto& q = ctx.queries[qi];
            if (!sel.qrels.contains(q))
                continue;
            const auto seed_doc = sel.qrels.relevant(q).front();
            std::vector<DocId> rest;
            for (auto& d : judged.relevant(q))
                if (d != seed_doc)
                    rest.push_back(std::move(d));
            Xoshiro256 rng(derive_seed(seed, {s, rep, qi}));
            rng.shuffle(rest);
            std::vector<DocId> seq{seed_doc};
            seq.insert(seq.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
            qs.push_back(q);
            order.push_back(std::move(seq));
        }
        if (qs.empty())
            throw Error(Errc::NoCommonQueries, "selector '" + runs.runs()[s].system + "' kept no query");
        const auto systems = ctx.systems_except(opt.exclude_selector ? std::optional<std::size_t>(s) : std::nullopt);
        for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
            std::vector<std::vector<DocId>> rel;
            for (const auto& seq : order) {
                const auto m = annotation_quota(fractions[fi], seq.size());
                std::vector<DocId> kept(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(m));
                std::sort(kept.begin(), kept.end());
                annotated[unit][fi] += m;
                rel.push_back(std::move(kept));
            }
            samples[unit].push_back(ctx.compare(qs, rel, systems));
        }
    });

    StabilityCurve curve;
    curve.spec = spec;
    curve.fractions = fractions;
    curve.buckets = buckets;
    curve.selectors = n_sel;
    curve.repetitions = opt.repetitions;
    curve.seed = seed;
    for (std::size_t b = 0; b < buckets.size(); ++b)
        curve.bucket_pairs.push_back(ctx.classes.pairs_in(b).size());
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        std::vector<detail::Sample> at_f;
        for (std::size_t u = 0; u < n_units; ++u)
            at_f.push_back(samples[u][fi]);
        PolicyOutcome summary;
        detail::summarize(summary, at_f, ctx.classes);
        curve.overall_tau.push_back(summary.tau);
        curve.annotated.push_back(annotated[0][fi]);
        std::vector<CurvePoint> row;
        for (const auto& bo : summary.buckets)
            row.push_back({bo.tau, bo.error_rate, bo.concordance, bo.samples});
        curve.points.push_back(std::move(row));
    }
    return curve;
}

} // namespace qrelgauge
