#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "obe/errors.hpp"

namespace obe {

using Vec = std::vector<double>;

/// Dense row-major matrix of 64-bit reals.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major, rows*cols entries

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimError("dot: size mismatch");
    return dot(a.data(), b.data(), a.size());
}

inline double norm2(const Vec& v) { return std::sqrt(dot(v.data(), v.data(), v.size())); }

/// In-place L2 normalization; leaves the vector untouched if its norm is ~0.
inline void l2_normalize(Vec& v) {
    double n = norm2(v);
    if (n > 1e-300) {
        double inv = 1.0 / n;
        for (double& x : v) x *= inv;
    }
}

inline bool all_finite(const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

inline Vec matvec(const Mat& m, const Vec& v) {
    if (m.cols != v.size()) throw DimError("matvec: cols != vec dim");
    Vec out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) out[i] = dot(m.row(i), v.data(), m.cols);
    return out;
}

/// C = A * B, A is (r x k), B is (k x c).
inline Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows) throw DimError("matmul: inner dims differ");
    Mat c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row(i);
        double* cr = c.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            double aik = ar[k];
            const double* br = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) cr[j] += aik * br[j];
        }
    }
    return c;
}

/// C = A * B^T, A is (r x k), B is (c x k). Row-dot kernel.
inline Mat matmul_nt(const Mat& a, const Mat& b) {
    if (a.cols != b.cols) throw DimError("matmul_nt: inner dims differ");
    Mat c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row(i);
        double* cr = c.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) cr[j] = dot(ar, b.row(j), a.cols);
    }
    return c;
}

/// C = A^T * B, A is (n x r), B is (n x c). Accumulation kernel.
inline Mat matmul_tn(const Mat& a, const Mat& b) {
    if (a.rows != b.rows) throw DimError("matmul_tn: outer dims differ");
    Mat c(a.cols, b.cols);
    for (std::size_t n = 0; n < a.rows; ++n) {
        const double* ar = a.row(n);
        const double* br = b.row(n);
        for (std::size_t i = 0; i < a.cols; ++i) {
            double ani = ar[i];
            double* cr = c.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) cr[j] += ani * br[j];
        }
    }
    return c;
}

inline Mat transpose(const Mat& m) {
    Mat t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

inline double frobenius_norm(const Mat& m) {
    return std::sqrt(dot(m.data.data(), m.data.data(), m.data.size()));
}

/// Unbiased sample covariance, C = (1/(n-1)) * sum (x - mu)(x - mu)^T.
inline Mat covariance(const std::vector<Vec>& rows) {
    if (rows.size() < 2) throw InsufficientData("covariance: need at least 2 rows");
    const std::size_t d = rows[0].size();
    for (const Vec& r : rows)
        if (r.size() != d) throw DimError("covariance: inconsistent row dims");

    Vec mu(d, 0.0);
    for (const Vec& r : rows)
        for (std::size_t j = 0; j < d; ++j) mu[j] += r[j];
    for (double& x : mu) x /= static_cast<double>(rows.size());

    Mat c(d, d);
    Vec centered(d);
    for (const Vec& r : rows) {
        for (std::size_t j = 0; j < d; ++j) centered[j] = r[j] - mu[j];
        for (std::size_t i = 0; i < d; ++i) {
            double ci = centered[i];
            double* cr = c.row(i);
            for (std::size_t j = i; j < d; ++j) cr[j] += ci * centered[j];
        }
    }
    double scale = 1.0 / static_cast<double>(rows.size() - 1);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            c(i, j) *= scale;
            c(j, i) = c(i, j);
        }
    return c;
}

struct EigenResult {
    Vec values;   // descending
    Mat vectors;  // eigenvectors as columns, vectors(:,k) pairs with values[k]
};

/// Symmetric eigendecomposition via cyclic Jacobi rotations.
/// Converges when the off-diagonal Frobenius norm falls below 1e-12 relative
/// to the input norm; throws ConvergenceError after 100 sweeps.
inline EigenResult sym_eigen(const Mat& m) {
    if (m.rows != m.cols) throw SymmetryError("sym_eigen: matrix not square");
    const std::size_t n = m.rows;
    if (!all_finite(m.data.data(), m.data.size()))
        throw SymmetryError("sym_eigen: non-finite entries");

    double max_abs = 0.0;
    for (double x : m.data) max_abs = std::max(max_abs, std::fabs(x));
    const double sym_tol = 1e-9 * std::max(1.0, max_abs);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::fabs(m(i, j) - m(j, i)) > sym_tol)
                throw SymmetryError("sym_eigen: matrix not symmetric within 1e-9");

    Mat a = m;
    // Symmetrize exactly so rotations stay consistent.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }
    Mat v = Mat::identity(n);

    const double norm0 = std::max(frobenius_norm(a), 1e-300);
    const double stop = 1e-12 * norm0;
    const int max_sweeps = 100;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    int sweep = 0;
    while (off_norm() > stop) {
        if (++sweep > max_sweeps) throw ConvergenceError("sym_eigen: sweep cap exceeded");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::fabs(apq) <= 1e-300) continue;
                double app = a(p, p), aqq = a(q, q);
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenResult res;
    res.values.resize(n);
    res.vectors = Mat(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        res.values[k] = a(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) res.vectors(r, k) = v(r, order[k]);
    }
    return res;
}

}  // namespace obe
