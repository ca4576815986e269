#pragma once

// Command-line front end. `run` takes the argument list (without the program
// name) and the two output streams, so the test suite can drive it directly.
// Every subcommand computes all of its outputs in memory first and writes
// files only once nothing can fail any more.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "qrelgauge.hpp"

namespace qrelgauge::cli {

namespace fs = std::filesystem;

struct Common {
    std::vector<std::string> runs;
    std::string qrels;
    std::string out = ".";
    std::string format = "both";
    std::string jobs = "1";
    bool lenient = false;
    bool full_precision = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

/// Files and console text produced by one subcommand.
struct Output {
    std::vector<std::pair<fs::path, std::string>> files;
    std::string console;
};

namespace detail {

inline std::string message_of(const Error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(errc_name(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0)
        msg.erase(0, prefix.size());
    return msg;
}

inline Mode parse_mode(bool lenient) {
    if (const char* env = std::getenv("QRELGAUGE_STRICT"); env && std::string(env) == "1")
        return Mode::Strict;
    return lenient ? Mode::Lenient : Mode::Strict;
}

inline std::size_t parse_jobs(const std::string& text) {
    if (text == "max")
        return 0;
    try {
        std::size_t used = 0;
        const long v = std::stol(text, &used);
        if (used == text.size() && v >= 0)
            return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
    }
    throw Error(Errc::ConfigError, "--jobs expects a non-negative integer or 'max', got '" + text + "'");
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open '" + path + "'");
    return in;
}

template <typename T, typename Parser>
T load(const std::string& path, Mode mode, std::ostream& err, Parser parser) {
    auto in = open_input(path);
    try {
        auto parsed = parser(in, mode);
        for (const auto& w : parsed.diagnostics.warnings)
            err << "warning: " << path << (w.line ? ":" + std::to_string(w.line) : std::string()) << ": "
                << w.message << '\n';
        return std::move(parsed.value);
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + message_of(e));
    }
}

inline std::vector<std::string> expand_runs(const std::vector<std::string>& paths) {
    std::vector<std::string> out;
    for (const auto& p : paths) {
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            std::vector<std::string> files;
            for (const auto& entry : fs::directory_iterator(p))
                if (entry.is_regular_file())
                    files.push_back(entry.path().string());
            std::sort(files.begin(), files.end());
            out.insert(out.end(), files.begin(), files.end());
        } else {
            out.push_back(p);
        }
    }
    if (out.empty())
        throw Error(Errc::ConfigError, "no run files found");
    return out;
}

inline RunSet load_runs(const Common& c, Mode mode, std::ostream& err) {
    std::vector<Run> runs;
    for (const auto& path : expand_runs(c.runs))
        runs.push_back(load<Run>(path, mode, err, [](std::istream& in, Mode m) { return parse_run(in, m); }));
    return RunSet(std::move(runs), mode);
}

inline Qrels load_qrels(const std::string& path, Mode mode, std::ostream& err) {
    if (path.empty())
        throw Error(Errc::ConfigError, "--qrels is required");
    return load<Qrels>(path, mode, err, [](std::istream& in, Mode m) { return parse_qrels(in, m); });
}

inline std::vector<MetricSpec> metric_specs(const std::vector<std::string>& names, const std::vector<std::size_t>& ks) {
    std::vector<MetricSpec> out;
    for (const auto& name : names) {
        if (name.find('@') != std::string::npos || name == "rprec" || name == "r_precision" || name == "r-precision") {
            out.push_back(MetricSpec::parse(name));
            continue;
        }
        for (auto k : ks)
            out.push_back(MetricSpec::parse(name + "@" + std::to_string(k)));
    }
    if (out.empty())
        throw Error(Errc::ConfigError, "no metric requested");
    return out;
}

inline Cell opt_cell(const std::optional<double>& v) {
    if (!v)
        return std::monostate{};
    return number_cell(*v);
}

inline std::string buckets_label(const std::vector<PairBucket>& buckets) {
    std::string out;
    for (const auto& b : buckets)
        out += (out.empty() ? "" : " ") + b.label();
    return out;
}

inline std::string format_double(double v) { return format_number(v, Precision::Full); }

inline std::uint64_t resolve_seed(const Common& c, std::ostream& err) {
    if (c.seed_given)
        return c.seed;
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    err << "note: no --seed given, using seed " << seed << '\n';
    return seed;
}

inline void add_report(Output& out, const Common& c, const Report& report) {
    const auto precision = c.full_precision ? Precision::Full : Precision::Significant6;
    if (c.format == "json" || c.format == "both")
        out.files.emplace_back(fs::path(c.out) / (report.name + ".json"), emit_json(report, precision));
    if (c.format == "csv" || c.format == "both")
        for (const auto& t : report.tables)
            out.files.emplace_back(fs::path(c.out) / (t.name + ".csv"), emit_csv(t, precision));
}

inline void write_all(const Output& out) {
    for (const auto& [path, text] : out.files) {
        std::error_code ec;
        if (path.has_parent_path())
            fs::create_directories(path.parent_path(), ec);
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f)
            throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
        f << text;
        if (!f.flush())
            throw Error(Errc::IoError, "failed writing '" + path.string() + "'");
    }
}

inline Fallback parse_fallback(const std::string& s) {
    if (s == "smallest")
        return Fallback::SmallestRelevant;
    if (s == "skip")
        return Fallback::SkipQuery;
    throw Error(Errc::ConfigError, "--fallback must be 'smallest' or 'skip'");
}

} // namespace detail

struct EvaluateArgs {
    std::vector<std::string> metrics{"recall", "ndcg", "map", "rprec"};
    std::vector<std::size_t> ks{20};
};

inline Output cmd_evaluate(const Common& c, const EvaluateArgs& a, std::ostream& err) {
    const auto mode = detail::parse_mode(c.lenient);
    const auto specs = detail::metric_specs(a.metrics, a.ks);
    const auto qrels = detail::load_qrels(c.qrels, mode, err);
    const auto runs = detail::load_runs(c, mode, err);

    const Evaluator eval(runs);
    std::vector<MetricMatrix> matrices;
    for (const auto& spec : specs)
        matrices.push_back(eval.evaluate(qrels, spec, mode));
    for (const auto& q : matrices.front().skipped)
        err << "warning: query '" << q << "' has no relevant documents and is skipped\n";

    Report report;
    report.name = "evaluate";
    report.set_meta("queries", std::to_string(matrices.front().queries.size()));
    report.set_meta("skipped_queries", std::to_string(matrices.front().skipped.size()));
    Table t{"metrics", {"system"}, {}};
    for (const auto& spec : specs)
        t.columns.push_back(spec.name());
    for (std::size_t s = 0; s < runs.size(); ++s) {
        std::vector<Cell> row{runs.runs()[s].system};
        for (const auto& m : matrices)
            row.push_back(number_cell(m.mean(s)));
        t.add_row(std::move(row));
    }
    report.tables.push_back(std::move(t));
    Output out;
    detail::add_report(out, c, report);
    return out;
}

struct CompareArgs {
    std::string candidate;
    std::string metric = "recall@20";
    std::string buckets = "0,0.01,0.05,1";
    double alpha = 0.05;
};

inline Output cmd_rank_compare(const Common& c, const CompareArgs& a, std::ostream& err) {
    const auto mode = detail::parse_mode(c.lenient);
    const auto spec = MetricSpec::parse(a.metric);
    const auto buckets = parse_bucket_edges(a.buckets);
    validate_buckets(buckets);
    if (!(a.alpha > 0.0 && a.alpha < 1.0))
        throw Error(Errc::RangeError, "--alpha must lie in (0, 1)");
    const auto reference_qrels = detail::load_qrels(c.qrels, mode, err);
    if (a.candidate.empty())
        throw Error(Errc::ConfigError, "--candidate is required");
    const auto candidate_qrels = detail::load_qrels(a.candidate, mode, err);
    const auto runs = detail::load_runs(c, mode, err);

    const Evaluator eval(runs);
    const auto ref = eval.evaluate(reference_qrels, spec, mode);
    const auto cand = eval.evaluate(candidate_qrels, spec, mode);
    const auto ref_rank = ref.ranking();
    const auto cand_rank = cand.ranking();
    const auto agreement = kendall_agreement(cand_rank, ref_rank);
    const auto classes = classify_pairs(ref, buckets);
    const auto ref_rel = significance_relation(classes, ref.systems, a.alpha);
    const auto cand_rel = significance_relation(cand, a.alpha);

    Report report;
    report.name = "rank_compare";
    report.set_meta("metric", spec.name());
    report.set_meta("buckets", detail::buckets_label(buckets));
    report.set_meta("alpha", detail::format_double(a.alpha));
    report.set_meta("reference_queries", std::to_string(ref.queries.size()));
    report.set_meta("candidate_queries", std::to_string(cand.queries.size()));

    Table summary{"rank_compare",
                  {"systems", "pairs", "concordant", "discordant", "tied", "tau", "error_rate_pct", "concordance"},
                  {}};
    summary.add_row({static_cast<std::int64_t>(runs.size()), static_cast<std::int64_t>(agreement.total),
                     static_cast<std::int64_t>(agreement.concordant), static_cast<std::int64_t>(agreement.discordant),
                     static_cast<std::int64_t>(agreement.tied), number_cell(agreement.tau()),
                     number_cell(error_rate(agreement.tau())), number_cell(concordance(cand_rel, ref_rel))});

    Table per_bucket{"rank_compare_buckets",
                     {"bucket", "p_min", "p_max", "pairs", "status", "partial_tau", "error_rate_pct", "concordance"},
                     {}};
    for (std::size_t b = 0; b < buckets.size(); ++b) {
        const auto pairs = classes.pairs_in(b);
        std::vector<Cell> row{buckets[b].label(), number_cell(buckets[b].p_min), number_cell(buckets[b].p_max),
                              static_cast<std::int64_t>(pairs.size())};
        if (pairs.empty()) {
            row.insert(row.end(), {std::string("empty"), std::monostate{}, std::monostate{}, std::monostate{}});
        } else {
            const double tau = partial_kendall_tau(cand_rank, ref_rank, pairs);
            row.insert(row.end(), {std::string("ok"), number_cell(tau), number_cell(error_rate(tau)),
                                   number_cell(concordance(cand_rel, ref_rel, pairs))});
        }
        per_bucket.add_row(std::move(row));
    }

    Table discordant{"discordant_pairs",
                     {"system_a", "system_b", "reference_a", "reference_b", "candidate_a", "candidate_b", "p_value",
                      "bucket"},
                     {}};
    for (const auto& p : agreement.discordant_pairs) {
        const auto& info = classes.find(p);
        discordant.add_row({p.first, p.second, number_cell(ref_rank.score(p.first)),
                            number_cell(ref_rank.score(p.second)), number_cell(cand_rank.score(p.first)),
                            number_cell(cand_rank.score(p.second)), number_cell(info.test.p),
                            info.bucket ? Cell(buckets[*info.bucket].label()) : Cell(std::monostate{})});
    }

    Table rankings{"rankings", {"system", "reference_rank", "reference_score", "candidate_rank", "candidate_score"}, {}};
    const auto ref_order = ref_rank.order();
    const auto cand_order = cand_rank.order();
    for (std::size_t i = 0; i < ref_order.size(); ++i) {
        const auto& s = ref_order[i];
        const auto ci = std::find(cand_order.begin(), cand_order.end(), s) - cand_order.begin();
        rankings.add_row({s, static_cast<std::int64_t>(i + 1), number_cell(ref_rank.score(s)),
                          static_cast<std::int64_t>(ci + 1), number_cell(cand_rank.score(s))});
    }

    report.tables = {std::move(summary), std::move(per_bucket), std::move(discordant), std::move(rankings)};
    Output out;
    detail::add_report(out, c, report);
    return out;
}

struct SelectionArgs {
    std::string meta;
    std::vector<std::string> policies;
    std::size_t trials = 1000;
    std::string metric = "recall@20";
    std::string buckets = "0,0.01,0.05,1";
    std::string fallback = "smallest";
    double alpha = 0.05;
};

inline SelectionPolicy parse_policy(const std::string& name, std::size_t trials, std::uint64_t seed) {
    if (name == "random")
        return RandomSelection{trials, seed};
    if (name == "most_popular")
        return MostPopularSelection{};
    if (name == "longest")
        return LongestSelection{};
    if (name == "shortest")
        return ShortestSelection{};
    if (name == "system_based")
        return SystemBasedSelection{};
    if (name.rfind("system_based:", 0) == 0)
        return SystemBasedSelection{name.substr(13)};
    throw Error(Errc::ConfigError, "unknown selection policy '" + name + "'");
}

inline Output cmd_simulate_selection(const Common& c, const SelectionArgs& a, std::ostream& err) {
    const auto mode = detail::parse_mode(c.lenient);
    const auto spec = MetricSpec::parse(a.metric);
    const auto buckets = parse_bucket_edges(a.buckets);
    validate_buckets(buckets);
    if (a.trials < 1)
        throw Error(Errc::ConfigError, "--trials must be >= 1");
    auto names = a.policies;
    if (names.empty()) {
        names = {"random"};
        if (!a.meta.empty())
            names.insert(names.end(), {"most_popular", "longest", "shortest"});
        names.push_back("system_based");
    }
    const auto jobs = detail::parse_jobs(c.jobs);
    const auto qrels = detail::load_qrels(c.qrels, mode, err);
    std::optional<DocMeta> meta;
    if (!a.meta.empty())
        meta = detail::load<DocMeta>(a.meta, mode, err,
                                     [](std::istream& in, Mode m) { return parse_doc_meta(in, m); });
    const auto runs = detail::load_runs(c, mode, err);
    const bool random = std::find(names.begin(), names.end(), "random") != names.end();
    const std::uint64_t seed = random ? detail::resolve_seed(c, err) : c.seed;
    std::vector<SelectionPolicy> policies;
    for (const auto& n : names)
        policies.push_back(parse_policy(n, a.trials, seed));

    StudyOptions opt;
    opt.meta = meta ? &*meta : nullptr;
    opt.fallback = detail::parse_fallback(a.fallback);
    opt.jobs = jobs;
    opt.alpha = a.alpha;
    const auto study = single_relevant_study(runs, qrels, policies, spec, buckets, opt);

    Report report;
    report.name = "selection";
    report.set_meta("metric", spec.name());
    report.set_meta("buckets", detail::buckets_label(buckets));
    report.set_meta("alpha", detail::format_double(a.alpha));
    if (random) {
        report.set_meta("seed", std::to_string(seed));
        report.set_meta("trials", std::to_string(a.trials));
    }
    report.set_meta("fallback", a.fallback);

    Table tau{"selection", {"selection", "tau", "error_rate_pct"}, {}};
    Table detail_t{"selection_detail",
                   {"selection", "tau", "tau_std", "error_rate_pct", "samples", "all_ties", "fallbacks"},
                   {}};
    Table selectors{"selection_selectors",
                    {"selection", "selector", "tau", "error_rate_pct", "all_ties", "fallbacks", "skipped"},
                    {}};
    Table per_bucket{"selection_buckets",
                     {"selection", "bucket", "pairs", "partial_tau", "error_rate_pct", "concordance", "samples"},
                     {}};
    for (const auto& p : study.policies) {
        tau.add_row({p.name, number_cell(p.tau), number_cell(p.error_rate)});
        detail_t.add_row({p.name, number_cell(p.tau), number_cell(p.tau_std), number_cell(p.error_rate),
                          static_cast<std::int64_t>(p.samples), std::string(p.all_ties ? "true" : "false"),
                          static_cast<std::int64_t>(p.fallbacks)});
        for (const auto& s : p.selectors)
            selectors.add_row({p.name, s.selector, number_cell(s.tau), number_cell(s.error_rate),
                               std::string(s.all_ties ? "true" : "false"), static_cast<std::int64_t>(s.fallbacks),
                               static_cast<std::int64_t>(s.skipped)});
        for (const auto& b : p.buckets)
            per_bucket.add_row({p.name, b.bucket.label(), static_cast<std::int64_t>(b.pairs), detail::opt_cell(b.tau),
                                detail::opt_cell(b.error_rate), detail::opt_cell(b.concordance),
                                static_cast<std::int64_t>(b.samples)});
    }
    Table swap{"swap_plot", {"selection", "system", "score", "is_selector"}, {}};
    for (const auto& pt : study.swap_plot)
        swap.add_row({pt.selection, pt.system, number_cell(pt.score), static_cast<std::int64_t>(pt.is_selector)});

    report.tables = {std::move(tau), std::move(detail_t), std::move(selectors), std::move(per_bucket),
                     std::move(swap)};
    Output out;
    detail::add_report(out, c, report);
    return out;
}

struct IncrementalArgs {
    std::vector<double> fractions = default_fractions();
    std::string metric = "recall@20";
    std::string buckets = "0,0.01,0.05,1";
    std::string fallback = "smallest";
    std::size_t repetitions = 1;
    bool include_selector = false;
    double alpha = 0.05;
};

inline Output cmd_simulate_incremental(const Common& c, const IncrementalArgs& a, std::ostream& err) {
    const auto mode = detail::parse_mode(c.lenient);
    const auto spec = MetricSpec::parse(a.metric);
    const auto buckets = parse_bucket_edges(a.buckets);
    validate_buckets(buckets);
    const auto jobs = detail::parse_jobs(c.jobs);
    IncrementalOptions opt;
    opt.repetitions = a.repetitions;
    opt.fallback = detail::parse_fallback(a.fallback);
    opt.exclude_selector = !a.include_selector;
    opt.jobs = jobs;
    opt.alpha = a.alpha;
    const auto qrels = detail::load_qrels(c.qrels, mode, err);
    const auto runs = detail::load_runs(c, mode, err);
    const auto seed = detail::resolve_seed(c, err);
    const auto curve = incremental_study(runs, qrels, a.fractions, buckets, spec, seed, opt);

    Report report;
    report.name = "incremental";
    report.set_meta("metric", spec.name());
    report.set_meta("buckets", detail::buckets_label(buckets));
    report.set_meta("seed", std::to_string(seed));
    report.set_meta("repetitions", std::to_string(a.repetitions));
    report.set_meta("selector_excluded", a.include_selector ? "false" : "true");
    report.set_meta("alpha", detail::format_double(a.alpha));

    Table buckets_t{"incremental_buckets", {"bucket", "p_min", "p_max", "pairs"}, {}};
    for (std::size_t b = 0; b < buckets.size(); ++b)
        buckets_t.add_row({buckets[b].label(), number_cell(buckets[b].p_min), number_cell(buckets[b].p_max),
                           static_cast<std::int64_t>(curve.bucket_pairs[b])});
    Table curve_t{"incremental_curve",
                  {"fraction", "bucket", "partial_tau", "error_rate_pct", "concordance", "samples"},
                  {}};
    Table overall{"incremental_overall", {"fraction", "tau", "error_rate_pct", "annotated"}, {}};
    for (std::size_t f = 0; f < curve.fractions.size(); ++f) {
        for (std::size_t b = 0; b < buckets.size(); ++b) {
            const auto& pt = curve.points[f][b];
            curve_t.add_row({number_cell(curve.fractions[f]), buckets[b].label(), detail::opt_cell(pt.tau),
                             detail::opt_cell(pt.error_rate), detail::opt_cell(pt.concordance),
                             static_cast<std::int64_t>(pt.samples)});
        }
        overall.add_row({number_cell(curve.fractions[f]), number_cell(curve.overall_tau[f]),
                         number_cell(error_rate(curve.overall_tau[f])), static_cast<std::int64_t>(curve.annotated[f])});
    }
    report.tables = {std::move(buckets_t), std::move(curve_t), std::move(overall)};
    Output out;
    detail::add_report(out, c, report);
    return out;
}

struct PoolingArgs {
    std::size_t k = 10;
    std::size_t t_max = 100;
    std::size_t mc_samples = 10000;
    std::string pool_qrels;
    std::vector<std::size_t> depths{1, 2, 5, 10, 20};
    std::size_t extrapolate_depth = 100;
};

inline void add_curve_rows(Table& t, const CoverageCurve& curve) {
    for (const auto& [x, y] : curve.points) {
        const double fitted = curve.fit(static_cast<double>(x));
        t.add_row({static_cast<std::int64_t>(x), number_cell(y), number_cell(fitted), number_cell(y - fitted)});
    }
}

inline Output cmd_pooling(const Common& c, const PoolingArgs& a, std::ostream& err) {
    const auto mode = detail::parse_mode(c.lenient);
    const auto jobs = detail::parse_jobs(c.jobs);
    if (a.k < 1)
        throw Error(Errc::ConfigError, "--k must be >= 1");
    const auto qrels = detail::load_qrels(c.qrels, mode, err);
    std::optional<Qrels> pool;
    if (!a.pool_qrels.empty())
        pool = detail::load_qrels(a.pool_qrels, mode, err);
    const auto runs = detail::load_runs(c, mode, err);
    const bool needs_mc = [&] {
        for (std::size_t t = 1; t <= runs.size(); ++t)
            if (binomial(runs.size(), t) > kExactSubsetBudget)
                return true;
        return false;
    }();
    const std::uint64_t seed = needs_mc ? detail::resolve_seed(c, err) : c.seed;

    SystemsExtrapolationOptions opt;
    opt.fallback = MonteCarloMode{a.mc_samples, seed};
    opt.jobs = jobs;
    opt.mode = mode;
    const auto curve = extrapolate_systems(runs, qrels, a.k, a.t_max, opt);

    Report report;
    report.name = "pooling";
    report.set_meta("k", std::to_string(a.k));
    report.set_meta("systems", std::to_string(runs.size()));
    report.set_meta("coverage", detail::format_double(curve.points.back().second));
    report.set_meta("exact", curve.exact ? "true" : "false");
    if (needs_mc)
        report.set_meta("seed", std::to_string(seed));

    Table cov{"coverage", {"x", "y", "fitted", "residual"}, {}};
    add_curve_rows(cov, curve);
    Table fit{"coverage_fit", {"curve", "a", "b", "rmse", "max_error"}, {}};
    fit.add_row({std::string("systems"), number_cell(curve.fit.a), number_cell(curve.fit.b),
                 number_cell(curve.fit.rmse), number_cell(curve.fit.max_error)});
    Table ext{"coverage_extrapolated", {"x", "y_hat"}, {}};
    for (const auto& [x, y] : curve.extrapolated)
        ext.add_row({static_cast<std::int64_t>(x), number_cell(y)});
    report.tables = {std::move(cov), std::move(fit), std::move(ext)};

    if (pool) {
        const auto depth = depth_analysis(runs, qrels, *pool, a.depths, a.extrapolate_depth, mode);
        if (depth.unjudged)
            err << "warning: " << depth.unjudged << " pooled documents have no judgment\n";
        report.set_meta("depth_extrapolated_to", std::to_string(a.extrapolate_depth));
        Table d{"depth", {"depth", "identified", "new", "identified_fitted", "new_fitted"}, {}};
        for (std::size_t i = 0; i < depth.depths.size(); ++i) {
            const auto x = static_cast<double>(depth.depths[i]);
            const bool fitted = depth.identified_curve && x >= 1.0;
            d.add_row({static_cast<std::int64_t>(depth.depths[i]), static_cast<std::int64_t>(depth.identified[i]),
                       static_cast<std::int64_t>(depth.fresh[i]),
                       fitted ? number_cell(depth.identified_curve->fit(x)) : Cell(std::monostate{}),
                       fitted ? number_cell(depth.fresh_curve->fit(x)) : Cell(std::monostate{})});
        }
        report.tables.push_back(std::move(d));
        if (depth.identified_curve) {
            Table dfit{"depth_fit", {"curve", "a", "b", "rmse", "max_error"}, {}};
            for (const auto& [name, cv] : {std::pair{"identified", &*depth.identified_curve},
                                           std::pair{"new", &*depth.fresh_curve}})
                dfit.add_row({std::string(name), number_cell(cv->fit.a), number_cell(cv->fit.b),
                              number_cell(cv->fit.rmse), number_cell(cv->fit.max_error)});
            Table dext{"depth_extrapolated", {"depth", "identified_hat", "new_hat"}, {}};
            for (std::size_t i = 0; i < depth.identified_curve->extrapolated.size(); ++i)
                dext.add_row({static_cast<std::int64_t>(depth.identified_curve->extrapolated[i].first),
                              number_cell(depth.identified_curve->extrapolated[i].second),
                              number_cell(depth.fresh_curve->extrapolated[i].second)});
            report.tables.push_back(std::move(dfit));
            report.tables.push_back(std::move(dext));
        } else {
            err << "warning: fewer than two positive depths, no depth curve fitted\n";
        }
    }
    Output out;
    detail::add_report(out, c, report);
    return out;
}

inline Output cmd_synth(const Common& c, SynthConfig config) {
    if (c.seed_given)
        config.seed = c.seed;
    const auto data = synth_generate(config);
    Output out;
    const fs::path dir(c.out);
    out.files.emplace_back(dir / "qrels.txt", emit_qrels(data.qrels));
    out.files.emplace_back(dir / "meta.tsv", emit_doc_meta(data.meta));
    std::string quality = "system\tquality\n";
    for (std::size_t s = 0; s < data.runs.size(); ++s) {
        out.files.emplace_back(dir / "runs" / (data.runs[s].system + ".run"), emit_run(data.runs[s]));
        quality += data.runs[s].system + "\t" + detail::format_double(data.qualities[s]) + "\n";
    }
    out.files.emplace_back(dir / "quality.tsv", quality);
    out.console = "seed " + std::to_string(config.seed) + "\nground-truth order (best first):\n";
    for (const auto& s : data.quality_order())
        out.console += "  " + s + "\n";
    return out;
}

inline Output cmd_ingest(const Common& c, const std::string& dmerit, std::ostream& err) {
    const auto mode = detail::parse_mode(c.lenient);
    if (dmerit.empty())
        throw Error(Errc::ConfigError, "--dmerit is required");
    const auto data =
        detail::load<DmeritData>(dmerit, mode, err, [](std::istream& in, Mode m) { return ingest_dmerit(in, m); });
    const auto st = evidence_stats(data.qrels);
    Report report;
    report.name = "ingest";
    Table t{"evidence_stats", {"queries", "evidence", "min", "median", "max"}, {}};
    t.add_row({static_cast<std::int64_t>(st.queries), static_cast<std::int64_t>(st.total),
               static_cast<std::int64_t>(st.min), number_cell(st.median), static_cast<std::int64_t>(st.max)});
    Table q{"queries", {"query_id", "evidence", "query"}, {}};
    for (const auto& [id, text] : data.query_text)
        q.add_row({id, static_cast<std::int64_t>(data.qrels.contains(id) ? data.qrels.num_relevant(id) : 0), text});
    report.tables = {std::move(t), std::move(q)};
    Output out;
    out.files.emplace_back(fs::path(c.out) / "qrels.txt", emit_qrels(data.qrels));
    detail::add_report(out, c, report);
    char buf[160];
    std::snprintf(buf, sizeof buf, "queries %zu\nevidence %zu\nmin %zu\nmedian %g\nmax %zu\n", st.queries, st.total,
                  st.min, st.median, st.max);
    out.console = buf;
    return out;
}

/// Runs one command line; returns the process exit code (0 ok, 2 input or
/// configuration error, 3 numerical failure).
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"qrelgauge: retrieval evaluation and ranking-stability analysis under partial annotation"};
    app.name("qrelgauge");
    app.require_subcommand(1);

    Common common;
    auto add_io = [&](CLI::App* sub, bool runs, bool qrels) {
        if (runs)
            sub->add_option("--runs", common.runs, "Run files or directories of run files")->required();
        if (qrels)
            sub->add_option("--qrels", common.qrels, "Reference qrels file")->required();
        sub->add_option("--out", common.out, "Output directory")->capture_default_str();
        sub->add_option("--format", common.format, "Report format")
            ->check(CLI::IsMember({"csv", "json", "both"}))
            ->capture_default_str();
        sub->add_flag("--lenient", common.lenient, "Skip malformed lines with a warning instead of failing");
        sub->add_flag("--full-precision", common.full_precision, "Write numbers with 17 significant digits");
    };
    auto add_jobs = [&](CLI::App* sub) {
        sub->add_option("--jobs", common.jobs, "Worker threads (integer, or 'max')")->capture_default_str();
    };
    auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "Random seed (chosen and reported if omitted)");
    };

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Per-system mean metrics");
    add_io(evaluate, true, true);
    evaluate->add_option("--metric", ev.metrics, "Metrics: recall, ndcg, map, rprec, or name@k")
        ->delimiter(',')
        ->capture_default_str();
    evaluate->add_option("--k", ev.ks, "Cutoffs for metrics given without @k")->delimiter(',')->capture_default_str();

    CompareArgs cmp;
    auto* compare = app.add_subcommand("rank-compare", "Compare system rankings under two sets of judgments");
    add_io(compare, true, true);
    compare->add_option("--candidate", cmp.candidate, "Alternative qrels file")->required();
    compare->add_option("--metric", cmp.metric, "Metric, e.g. recall@20")->capture_default_str();
    compare->add_option("--buckets", cmp.buckets, "p-value bucket edges")->capture_default_str();
    compare->add_option("--alpha", cmp.alpha, "Significance level")->capture_default_str();

    SelectionArgs sel;
    auto* selection = app.add_subcommand("simulate-selection", "Single-relevant selection study");
    add_io(selection, true, true);
    add_jobs(selection);
    add_seed(selection);
    selection->add_option("--meta", sel.meta, "Document metadata TSV (popularity, length)");
    selection->add_option("--policies", sel.policies,
                          "random, most_popular, longest, shortest, system_based, system_based:<id>")
        ->delimiter(',');
    selection->add_option("--trials", sel.trials, "Random selection trials")->capture_default_str();
    selection->add_option("--metric", sel.metric, "Metric, e.g. recall@20")->capture_default_str();
    selection->add_option("--buckets", sel.buckets, "p-value bucket edges")->capture_default_str();
    selection->add_option("--alpha", sel.alpha, "Significance level")->capture_default_str();
    selection->add_option("--fallback", sel.fallback, "System-based fallback: smallest or skip")
        ->capture_default_str();

    IncrementalArgs inc;
    auto* incremental = app.add_subcommand("simulate-incremental", "Incremental annotation stability curves");
    add_io(incremental, true, true);
    add_jobs(incremental);
    add_seed(incremental);
    incremental->add_option("--fractions", inc.fractions, "Annotation fractions in (0, 1]")->delimiter(',');
    incremental->add_option("--metric", inc.metric, "Metric, e.g. recall@20")->capture_default_str();
    incremental->add_option("--buckets", inc.buckets, "p-value bucket edges")->capture_default_str();
    incremental->add_option("--alpha", inc.alpha, "Significance level")->capture_default_str();
    incremental->add_option("--repetitions", inc.repetitions, "Random orders per selector")->capture_default_str();
    incremental->add_option("--fallback", inc.fallback, "Seed fallback: smallest or skip")->capture_default_str();
    incremental->add_flag("--include-selector", inc.include_selector, "Keep the selector system in its own ranking");

    PoolingArgs pl;
    auto* pooling = app.add_subcommand("pooling", "Pool coverage and extrapolation");
    add_io(pooling, true, true);
    add_jobs(pooling);
    add_seed(pooling);
    pooling->add_option("--k", pl.k, "Pool depth per system")->capture_default_str();
    pooling->add_option("--t-max", pl.t_max, "Extrapolate coverage up to this many systems")->capture_default_str();
    pooling->add_option("--mc-samples", pl.mc_samples, "Monte Carlo subsets beyond the exact budget")
        ->capture_default_str();
    pooling->add_option("--pool-qrels", pl.pool_qrels, "Judgments of the pooled documents (enables depth analysis)");
    pooling->add_option("--depths", pl.depths, "Pool depths for the depth analysis")->delimiter(',');
    pooling->add_option("--extrapolate-depth", pl.extrapolate_depth, "Extrapolate depth curves up to this depth")
        ->capture_default_str();

    SynthConfig sc;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic collection with known system quality");
    add_io(synth, false, false);
    add_seed(synth);
    synth->add_option("--systems", sc.n_systems)->capture_default_str();
    synth->add_option("--queries", sc.n_queries)->capture_default_str();
    synth->add_option("--corpus", sc.corpus_size)->capture_default_str();
    synth->add_option("--evidence-min", sc.evidence_min)->capture_default_str();
    synth->add_option("--evidence-median", sc.evidence_median)->capture_default_str();
    synth->add_option("--evidence-max", sc.evidence_max)->capture_default_str();
    synth->add_option("--distractors", sc.distractors)->capture_default_str();
    synth->add_option("--depth", sc.depth, "Length of every ranked list")->capture_default_str();
    synth->add_option("--qualities", sc.qualities, "One quality per system")->delimiter(',');
    synth->add_flag("--strict-ordering", sc.strict_ordering, "Require distinct qualities");
    synth->add_option("--noise", sc.noise)->capture_default_str();

    std::string dmerit;
    auto* ingest = app.add_subcommand("ingest", "Load D-MERIT JSONL and report evidence statistics");
    add_io(ingest, false, false);
    ingest->add_option("--dmerit", dmerit, "D-MERIT JSONL file")->required();

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (!app.get_subcommands().empty())
            err << "run with " << app.get_subcommands().front()->get_name() << " --help for usage\n";
        return 2;
    }
    auto* active = app.get_subcommands().front();
    common.seed_given = active->get_option_no_throw("--seed") != nullptr && active->count("--seed") > 0;

    try {
        Output result;
        if (evaluate->parsed())
            result = cmd_evaluate(common, ev, err);
        else if (compare->parsed())
            result = cmd_rank_compare(common, cmp, err);
        else if (selection->parsed())
            result = cmd_simulate_selection(common, sel, err);
        else if (incremental->parsed())
            result = cmd_simulate_incremental(common, inc, err);
        else if (pooling->parsed())
            result = cmd_pooling(common, pl, err);
        else if (synth->parsed())
            result = cmd_synth(common, sc);
        else
            result = cmd_ingest(common, dmerit, err);
        detail::write_all(result);
        out << result.console;
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return is_numeric_failure(e.code()) ? 3 : 2;
    } catch (const fs::filesystem_error& e) {
        err << "error: IoError: " << e.what() << '\n';
        return 2;
    }
}

} // namespace qrelgauge::cli
