#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

struct PairCounts {
    long concordant = 0;
    long discordant = 0;
};

/// Enumerates every pair of items and compares their relative order in two
/// best-first orderings of the same items.
inline PairCounts kendall_pairs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::string, long> pa, pb;
    for (long i = 0; i < static_cast<long>(a.size()); ++i)
        pa[a[i]] = i;
    for (long i = 0; i < static_cast<long>(b.size()); ++i)
        pb[b[i]] = i;
    PairCounts out;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (i >= j)
                continue;
            const auto& x = a[i];
            const auto& y = a[j];
            const bool first = pa[x] < pa[y];
            const bool second = pb[x] < pb[y];
            if (first == second)
                ++out.concordant;
            else
                ++out.discordant;
        }
    return out;
}

/// Metrics by walking the ranked list position by position.
struct DirectMetrics {
    double recall, ndcg, ap, rprec;
};

inline DirectMetrics direct_metrics(const std::vector<std::string>& ranked, const std::set<std::string>& relevant,
                                    std::size_t k) {
    const double R = static_cast<double>(relevant.size());
    double hits_k = 0, dcg = 0, ap_sum = 0, hits_r = 0, running = 0;
    for (std::size_t pos = 1; pos <= ranked.size(); ++pos) {
        const bool rel = relevant.count(ranked[pos - 1]) > 0;
        if (!rel)
            continue;
        running += 1;
        if (pos <= k) {
            hits_k += 1;
            dcg += 1.0 / std::log2(pos + 1.0);
            ap_sum += running / static_cast<double>(pos);
        }
        if (static_cast<double>(pos) <= R)
            hits_r += 1;
    }
    double idcg = 0;
    for (std::size_t i = 1; i <= std::min<std::size_t>(relevant.size(), k); ++i)
        idcg += 1.0 / std::log2(i + 1.0);
    return {hits_k / R, dcg / idcg, ap_sum / R, hits_r / R};
}

/// Two-sided tail of Student's t by quadrature of the density.
inline double t_two_sided_p(double t, double df) {
    using boost::math::quadrature::exp_sinh;
    using boost::math::quadrature::tanh_sinh;
    const long double nu = df;
    const long double log_c = std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5L * std::log(nu * M_PIl);
    auto density = [&](long double x) { return std::exp(log_c - (nu + 1) / 2 * std::log1p(x * x / nu)); };
    const long double at = std::fabs(static_cast<long double>(t));
    if (at < 1.0L) {
        tanh_sinh<long double> integrator;
        const long double inner = integrator.integrate(density, 0.0L, at, 1e-18L);
        return static_cast<double>(1.0L - 2.0L * inner);
    }
    exp_sinh<long double> integrator;
    const long double tail = integrator.integrate([&](long double u) { return density(at + u); },
                                                  0.0L, std::numeric_limits<long double>::infinity(), 1e-18L);
    return static_cast<double>(2.0L * tail);
}

inline double t_statistic(const std::vector<double>& d) {
    long double n = d.size(), mean = 0, ss = 0;
    for (double v : d)
        mean += v;
    mean /= n;
    for (double v : d)
        ss += (v - mean) * (v - mean);
    return static_cast<double>(mean / std::sqrt(ss / (n - 1) / n));
}

/// XNOR agreement over all ordered pairs, relations given as sets of wins.
inline double concordance(std::size_t n, const std::set<std::pair<int, int>>& a, const std::set<std::pair<int, int>>& b) {
    long agree = 0, total = 0;
    for (int i = 0; i < static_cast<int>(n); ++i)
        for (int j = 0; j < static_cast<int>(n); ++j) {
            if (i == j)
                continue;
            ++total;
            agree += a.count({i, j}) == b.count({i, j});
        }
    return static_cast<double>(agree) / static_cast<double>(total);
}

} // namespace oracle
