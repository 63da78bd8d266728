#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "obe/errors.hpp"

namespace obe {

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw InsufficientData("mean_of: empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Unbiased sample variance (n-1 denominator).
inline double variance_of(const std::vector<double>& v) {
    if (v.size() < 2) throw InsufficientData("variance_of: need at least 2 samples");
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

/// Linear-interpolation percentile over order statistics: rank q*(n-1),
/// interpolated between the bracketing samples. q in [0,1].
inline double percentile(std::vector<double> v, double q) {
    if (v.empty()) throw InsufficientData("percentile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("percentile: q must lie in [0,1]");
    std::sort(v.begin(), v.end());
    double rank = q * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(rank);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = rank - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

namespace detail {

/// Fractional ranks (1-based), ties averaged.
inline std::vector<double> ranks_of(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace detail

/// Pearson correlation.
inline double pearson_r(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimError("pearson_r: length mismatch");
    if (a.size() < 2) throw InsufficientData("pearson_r: need at least 2 samples");
    double ma = mean_of(a), mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) throw InsufficientData("pearson_r: zero-variance input");
    return sab / std::sqrt(saa * sbb);
}

/// Spearman rank correlation: Pearson on fractional ranks, ties averaged.
inline double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimError("spearman_rho: length mismatch");
    return pearson_r(detail::ranks_of(a), detail::ranks_of(b));
}

}  // namespace obe
