#pragma once

// Synthetic judged collections with known system quality, for oracle tests
// and demos. Each system scores every candidate document of a query; a
// relevant document d gets quality_s - difficulty_d + query_offset_q + noise,
// a distractor gets its shared base score + noise. Higher quality therefore
// pushes relevant documents up the list for every query.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qrelgauge/error.hpp"
#include "qrelgauge/model.hpp"
#include "qrelgauge/rng.hpp"

namespace qrelgauge {

struct SynthConfig {
    std::size_t n_systems = 12;
    std::size_t n_queries = 200;
    std::size_t corpus_size = 20000;
    // evidence per query: log-normal around the median, clamped to [min, max]
    std::size_t evidence_min = 5;
    std::size_t evidence_median = 22;
    std::size_t evidence_max = 200;
    double evidence_sigma = 0.8;
    std::size_t distractors = 300; // non-relevant candidates per query
    std::size_t depth = 100;       // length of each ranked list
    std::vector<double> qualities; // one per system; empty = evenly spaced in [0, 2]
    bool strict_ordering = false;  // require distinct qualities
    double noise = 1.0;            // per (system, doc) score noise
    double difficulty_sd = 1.0;    // spread of per-document difficulty
    double query_sd = 0.5;         // spread of per-query offsets
    double distractor_sd = 1.0;
    double distractor_mean = 1.5;
    double popularity_bias = 0.6;  // correlation between popularity and ease of retrieval
    std::uint64_t seed = 1;
};

struct SynthData {
    Qrels qrels;
    std::vector<Run> runs;
    DocMeta meta;
    std::vector<double> qualities;

    /// System ids by decreasing quality (ties by id).
    std::vector<SystemId> quality_order() const {
        std::vector<std::size_t> idx(runs.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
            if (qualities[a] != qualities[b])
                return qualities[a] > qualities[b];
            return runs[a].system < runs[b].system;
        });
        std::vector<SystemId> out;
        for (auto i : idx)
            out.push_back(runs[i].system);
        return out;
    }
};

namespace detail {

inline std::string padded(const char* prefix, std::size_t i, int width) {
    auto digits = std::to_string(i);
    if (static_cast<int>(digits.size()) < width)
        digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    return prefix + digits;
}

inline int digits(std::size_t n) {
    int d = 1;
    while (n >= 10) {
        n /= 10;
        ++d;
    }
    return d;
}

enum SynthStream : std::uint64_t { kEvidence = 1, kDoc = 2, kQuery = 3, kScores = 4 };

} // namespace detail

inline void validate(const SynthConfig& c) {
    if (c.n_systems < 1 || c.n_queries < 1 || c.corpus_size < 1 || c.depth < 1)
        throw Error(Errc::ConfigError, "counts must be >= 1");
    if (c.evidence_min < 1 || c.evidence_min > c.evidence_max || c.evidence_median < c.evidence_min ||
        c.evidence_median > c.evidence_max)
        throw Error(Errc::ConfigError, "evidence bounds must satisfy 1 <= min <= median <= max");
    if (c.evidence_max > c.corpus_size)
        throw Error(Errc::ConfigError, "evidence per query (" + std::to_string(c.evidence_max) +
                                           ") exceeds corpus size (" + std::to_string(c.corpus_size) + ")");
    if (!c.qualities.empty() && c.qualities.size() != c.n_systems)
        throw Error(Errc::ConfigError, "need one quality per system");
    if (c.noise < 0 || c.difficulty_sd < 0 || c.query_sd < 0 || c.distractor_sd < 0 || c.evidence_sigma < 0)
        throw Error(Errc::ConfigError, "spreads must be non-negative");
    if (c.popularity_bias < -1 || c.popularity_bias > 1)
        throw Error(Errc::ConfigError, "popularity_bias must lie in [-1, 1]");
    if (c.strict_ordering) {
        auto q = c.qualities;
        std::sort(q.begin(), q.end());
        if (std::adjacent_find(q.begin(), q.end()) != q.end())
            throw Error(Errc::ConfigError, "strict ordering requires distinct qualities");
    }
}

/// Deterministic in the seed: identical configs give identical data.
inline SynthData synth_generate(const SynthConfig& c) {
    validate(c);
    SynthData out;
    out.qualities = c.qualities;
    if (out.qualities.empty())
        for (std::size_t s = 0; s < c.n_systems; ++s)
            out.qualities.push_back(c.n_systems == 1 ? 1.0
                                                     : 2.0 * static_cast<double>(s) /
                                                           static_cast<double>(c.n_systems - 1));

    const int dw = detail::digits(c.corpus_size - 1);
    const int qw = detail::digits(c.n_queries - 1);
    const int sw = detail::digits(c.n_systems - 1);

    // per-document latent difficulty and metadata
    std::vector<double> difficulty(c.corpus_size);
    for (std::size_t d = 0; d < c.corpus_size; ++d) {
        Xoshiro256 rng(derive_seed(c.seed, {detail::kDoc, d}));
        const double z = rng.normal();
        difficulty[d] = c.difficulty_sd * z;
        const double zp = -c.popularity_bias * z + std::sqrt(1.0 - c.popularity_bias * c.popularity_bias) * rng.normal();
        const auto popularity = static_cast<std::int64_t>(std::floor(std::exp(3.0 + 1.2 * zp)));
        const auto length = static_cast<std::int64_t>(20 + std::floor(std::exp(4.0 + 0.6 * rng.normal())));
        out.meta.emplace(detail::padded("d", d, dw), DocInfo{popularity, length});
    }

    out.runs.resize(c.n_systems);
    for (std::size_t s = 0; s < c.n_systems; ++s)
        out.runs[s].system = detail::padded("sys", s, sw);

    const double log_median = std::log(static_cast<double>(c.evidence_median));
    for (std::size_t qi = 0; qi < c.n_queries; ++qi) {
        const auto q = detail::padded("q", qi, qw);
        Xoshiro256 qrng(derive_seed(c.seed, {detail::kQuery, qi}));
        const double drawn = std::exp(log_median + c.evidence_sigma * qrng.normal());
        const auto n_rel = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(drawn)), c.evidence_min,
                                                   c.evidence_max);
        const auto n_dis = std::min(c.distractors, c.corpus_size - n_rel);
        auto picked = qrng.sample_indices(c.corpus_size, n_rel + n_dis);
        qrng.shuffle(picked);
        std::vector<std::size_t> rel(picked.begin(), picked.begin() + static_cast<std::ptrdiff_t>(n_rel));
        std::vector<std::size_t> dis(picked.begin() + static_cast<std::ptrdiff_t>(n_rel), picked.end());
        std::sort(rel.begin(), rel.end());
        std::sort(dis.begin(), dis.end());
        const double offset = c.query_sd * qrng.normal();
        std::vector<double> dis_base(dis.size());
        for (auto& b : dis_base)
            b = c.distractor_mean + c.distractor_sd * qrng.normal();
        for (auto d : rel)
            out.qrels.insert(q, detail::padded("d", d, dw), 1);

        for (std::size_t s = 0; s < c.n_systems; ++s) {
            Xoshiro256 rng(derive_seed(c.seed, {detail::kScores, s, qi}));
            std::vector<ScoredDoc> docs;
            docs.reserve(rel.size() + dis.size());
            for (auto d : rel)
                docs.push_back({detail::padded("d", d, dw),
                                out.qualities[s] - difficulty[d] + offset + c.noise * rng.normal()});
            for (std::size_t j = 0; j < dis.size(); ++j)
                docs.push_back({detail::padded("d", dis[j], dw), dis_base[j] + c.noise * rng.normal()});
            std::sort(docs.begin(), docs.end(), canonical_before);
            if (docs.size() > c.depth)
                docs.resize(c.depth);
            out.runs[s].rankings.emplace(q, std::move(docs));
        }
    }
    return out;
}

} // namespace qrelgauge
