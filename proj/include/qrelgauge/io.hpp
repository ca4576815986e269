#pragma once

// Readers and writers for the external text formats: TREC runs
// (`qid Q0 docid rank score tag`), qrels (`qid iter docid grade`), document
// metadata TSV (`docid popularity length`) and D-MERIT style JSONL. All
// readers are streaming, accept \n or \r\n line ends, ignore blank lines and
// trailing whitespace, and report what they skipped in ParseDiagnostics.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qrelgauge/error.hpp"
#include "qrelgauge/model.hpp"

namespace qrelgauge {

struct ParseWarning {
    std::size_t line = 0;
    std::string message;
};

struct ParseDiagnostics {
    std::vector<ParseWarning> warnings;
    std::size_t lines_read = 0;
    std::size_t lines_skipped = 0;
    std::size_t lines_accepted = 0;

    void warn(std::size_t line, std::string message) { warnings.push_back({line, std::move(message)}); }
};

template <typename T>
struct Parsed {
    T value;
    ParseDiagnostics diagnostics;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\v\f";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
            ++i;
        if (i >= s.size())
            break;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t')
            ++j;
        out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
    if (!token.empty() && token.front() == '+')
        token.remove_prefix(1);
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        return false;
    if constexpr (std::is_floating_point_v<T>)
        return std::isfinite(out);
    return true;
}

/// Drives a line-oriented parse: counts lines, skips blanks, and routes
/// malformed lines to an error (strict) or a warning (lenient).
template <typename Handler>
ParseDiagnostics for_each_line(std::istream& in, Mode mode, Handler&& handle) {
    ParseDiagnostics diag;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        ++diag.lines_read;
        const auto text = trim(line);
        if (text.empty()) {
            ++diag.lines_skipped;
            continue;
        }
        // handler returns an empty string on success, a message when the line is malformed
        std::string problem = handle(lineno, text, diag);
        if (problem.empty()) {
            ++diag.lines_accepted;
            continue;
        }
        if (mode == Mode::Strict)
            throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": " + problem);
        ++diag.lines_skipped;
        diag.warn(lineno, problem);
    }
    return diag;
}

/// %.17g round-trips every finite double.
inline std::string format_exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline Parsed<Run> parse_run(std::istream& in, Mode mode = Mode::Strict) {
    Run run;
    bool have_tag = false;
    std::set<std::pair<std::string, std::string>> seen;
    auto diag = detail::for_each_line(in, mode, [&](std::size_t lineno, std::string_view text, ParseDiagnostics&) -> std::string {
        const auto f = detail::split_ws(text);
        if (f.size() != 6)
            return "expected 6 fields, found " + std::to_string(f.size());
        double score = 0;
        if (!detail::parse_number(f[4], score))
            return "score '" + std::string(f[4]) + "' is not a finite number";
        std::string tag(f[5]);
        if (!have_tag) {
            run.system = tag;
            have_tag = true;
        } else if (tag != run.system) {
            throw Error(Errc::MixedRunTags, "line " + std::to_string(lineno) + ": tag '" + tag +
                                                "' differs from '" + run.system + "'");
        }
        std::string q(f[0]), d(f[2]);
        if (!seen.emplace(q, d).second)
            throw Error(Errc::DuplicateDoc,
                        "line " + std::to_string(lineno) + ": doc '" + d + "' repeated in query '" + q + "'");
        run.rankings[q].push_back({std::move(d), score});
        return std::string{};
    });
    if (!have_tag)
        diag.warn(0, "run contains no entries");
    return {canonicalize(std::move(run)), std::move(diag)};
}

inline Parsed<Qrels> parse_qrels(std::istream& in, Mode mode = Mode::Strict) {
    Qrels qrels;
    auto diag = detail::for_each_line(in, mode, [&](std::size_t lineno, std::string_view text, ParseDiagnostics& d) -> std::string {
        const auto f = detail::split_ws(text);
        if (f.size() != 4)
            return "expected 4 fields, found " + std::to_string(f.size());
        int grade = 0;
        if (!detail::parse_number(f[3], grade))
            return "grade '" + std::string(f[3]) + "' is not an integer";
        if (grade < 0)
            return "negative grade " + std::to_string(grade);
        std::string q(f[0]), doc(f[2]);
        const int existing = qrels.grade(q, doc);
        if (existing >= 0) {
            if (existing != grade)
                throw Error(Errc::ConflictingGrade, "line " + std::to_string(lineno) + ": " + q + "/" + doc +
                                                        " judged " + std::to_string(existing) + " and " +
                                                        std::to_string(grade));
            d.warn(lineno, "duplicate judgment " + q + "/" + doc + " ignored");
            return std::string{};
        }
        qrels.insert(q, doc, grade);
        return std::string{};
    });
    if (qrels.empty())
        diag.warn(0, "qrels contain no judgments");
    return {std::move(qrels), std::move(diag)};
}

inline Parsed<DocMeta> parse_doc_meta(std::istream& in, Mode mode = Mode::Strict) {
    DocMeta meta;
    bool first = true;
    auto diag = detail::for_each_line(in, mode, [&](std::size_t lineno, std::string_view text, ParseDiagnostics& d) -> std::string {
        const auto f = detail::split_ws(text);
        const bool was_first = std::exchange(first, false);
        if (f.size() != 3)
            return "expected 3 fields, found " + std::to_string(f.size());
        std::int64_t pop = 0, len = 0;
        const bool pop_ok = detail::parse_number(f[1], pop);
        const bool len_ok = detail::parse_number(f[2], len);
        if (!pop_ok || !len_ok) {
            if (was_first) {
                if (!(f[0] == "docid" && f[1] == "popularity" && f[2] == "length"))
                    d.warn(lineno, "header line skipped");
                return std::string{};
            }
            return "non-integer popularity or length";
        }
        if (pop < 0 || len < 0)
            throw Error(Errc::RangeError, "line " + std::to_string(lineno) + ": negative popularity or length");
        std::string doc(f[0]);
        DocInfo info{pop, len};
        auto [it, inserted] = meta.emplace(doc, info);
        if (!inserted) {
            if (!(it->second == info))
                throw Error(Errc::ConflictingMeta,
                            "line " + std::to_string(lineno) + ": conflicting metadata for '" + doc + "'");
            d.warn(lineno, "duplicate metadata for '" + doc + "' ignored");
        }
        return std::string{};
    });
    return {std::move(meta), std::move(diag)};
}

struct DmeritData {
    Qrels qrels;
    std::map<QueryId, std::string> query_text;
};

/// Loads one JSON object per line with `query_id`, `query` and `evidence`
/// (array of passage ids); each evidence passage becomes a grade-1 judgment.
inline Parsed<DmeritData> ingest_dmerit(std::istream& in, Mode mode = Mode::Strict) {
    DmeritData data;
    auto diag = detail::for_each_line(in, mode, [&](std::size_t lineno, std::string_view text, ParseDiagnostics& d) -> std::string {
        const std::string where = "line " + std::to_string(lineno) + ": ";
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            return std::string("invalid JSON (") + e.what() + ")";
        }
        auto schema_problem = [&](const std::string& msg) -> std::string {
            if (mode == Mode::Strict)
                throw Error(Errc::SchemaError, where + msg);
            return msg;
        };
        if (!obj.is_object())
            return schema_problem("record is not a JSON object");
        for (const char* field : {"query_id", "query", "evidence"})
            if (!obj.contains(field))
                return schema_problem(std::string("missing required field '") + field + "'");
        if (!obj["query_id"].is_string() || !obj["query"].is_string() || !obj["evidence"].is_array())
            return schema_problem("field has the wrong type");
        const auto q = obj["query_id"].get<std::string>();
        if (data.query_text.count(q))
            return schema_problem("duplicate query_id '" + q + "'");
        std::vector<std::string> evidence;
        for (const auto& e : obj["evidence"]) {
            if (!e.is_string())
                return schema_problem("evidence entries must be strings");
            evidence.push_back(e.get<std::string>());
        }
        data.query_text[q] = obj["query"].get<std::string>();
        std::size_t distinct = 0;
        for (const auto& p : evidence) {
            if (data.qrels.insert(q, p, 1))
                ++distinct;
            else
                d.warn(lineno, "repeated evidence '" + p + "' for query '" + q + "'");
        }
        if (distinct == 0)
            d.warn(lineno, "query '" + q + "' has no evidence and is dropped");
        else if (distinct < 5)
            d.warn(lineno, "query '" + q + "' has only " + std::to_string(distinct) + " evidence");
        return std::string{};
    });
    return {std::move(data), std::move(diag)};
}

struct EvidenceStats {
    std::size_t queries = 0;
    std::size_t total = 0;
    std::size_t min = 0;
    double median = 0.0;
    std::size_t max = 0;
};

inline EvidenceStats evidence_stats(const Qrels& qrels) {
    std::vector<std::size_t> counts;
    for (const auto& q : qrels.queries())
        if (auto n = qrels.num_relevant(q); n > 0)
            counts.push_back(n);
    EvidenceStats st;
    if (counts.empty())
        return st;
    std::sort(counts.begin(), counts.end());
    st.queries = counts.size();
    for (auto c : counts)
        st.total += c;
    st.min = counts.front();
    st.max = counts.back();
    const auto mid = counts.size() / 2;
    st.median = counts.size() % 2 ? static_cast<double>(counts[mid])
                                  : 0.5 * static_cast<double>(counts[mid - 1] + counts[mid]);
    return st;
}

/// Writes a run in canonical order with recomputed 1-based ranks.
inline std::string emit_run(const Run& run) {
    const Run canon = canonicalize(run);
    std::string out;
    for (const auto& [q, docs] : canon.rankings)
        for (std::size_t i = 0; i < docs.size(); ++i) {
            out += q;
            out += " Q0 ";
            out += docs[i].doc;
            out += ' ';
            out += std::to_string(i + 1);
            out += ' ';
            out += detail::format_exact(docs[i].score);
            out += ' ';
            out += canon.system;
            out += '\n';
        }
    return out;
}

inline std::string emit_qrels(const Qrels& qrels) {
    std::string out;
    for (const auto& [q, judged] : qrels.entries())
        for (const auto& [d, g] : judged)
            out += q + " 0 " + d + " " + std::to_string(g) + "\n";
    return out;
}

inline std::string emit_doc_meta(const DocMeta& meta) {
    std::string out = "docid\tpopularity\tlength\n";
    for (const auto& [d, info] : meta)
        out += d + "\t" + std::to_string(info.popularity) + "\t" + std::to_string(info.length) + "\n";
    return out;
}

} // namespace qrelgauge
