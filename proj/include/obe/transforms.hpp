#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "obe/code.hpp"
#include "obe/detail/rng.hpp"
#include "obe/errors.hpp"
#include "obe/linalg.hpp"

namespace obe {

/// PCA basis fitted from data. `components` rows are the principal directions
/// in descending eigenvalue order.
struct PcaTransform {
    Vec mean;
    Mat components;
    Vec eigenvalues;

    std::size_t dim() const { return mean.size(); }
};

inline PcaTransform pca_fit(const std::vector<Vec>& rows) {
    if (rows.empty()) throw InsufficientData("pca_fit: no rows");
    const std::size_t d = rows[0].size();
    if (rows.size() < d + 1)
        throw InsufficientData("pca_fit: need at least dim+1 rows");

    PcaTransform t;
    t.mean.assign(d, 0.0);
    for (const Vec& r : rows) {
        if (r.size() != d) throw DimError("pca_fit: inconsistent row dims");
        for (std::size_t j = 0; j < d; ++j) t.mean[j] += r[j];
    }
    for (double& x : t.mean) x /= static_cast<double>(rows.size());

    EigenResult eig = sym_eigen(covariance(rows));
    t.eigenvalues = std::move(eig.values);
    t.components = transpose(eig.vectors);  // rows = directions
    return t;
}

inline Vec pca_project(const PcaTransform& t, const Vec& x, std::size_t k) {
    const std::size_t d = t.dim();
    if (x.size() != d) throw DimError("pca_project: input dim mismatch");
    if (k < 1 || k > d) throw DimError("pca_project: k out of range");
    Vec centered(d);
    for (std::size_t j = 0; j < d; ++j) centered[j] = x[j] - t.mean[j];
    Vec out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = dot(t.components.row(i), centered.data(), d);
    return out;
}

/// Sign-of-random-projection hasher. Rows of `planes` are i.i.d. standard
/// normal hyperplanes, generated row by row so a longer hasher extends a
/// shorter one fitted with the same seed.
struct LshHasher {
    Mat planes;  // bits x dim
    std::uint64_t seed = 0;

    std::size_t bits() const { return planes.rows; }
    std::size_t dim() const { return planes.cols; }
};

inline LshHasher lsh_fit(std::size_t dim, std::size_t bits, std::uint64_t seed) {
    if (dim < 1) throw ConfigError("lsh_fit: dim must be >= 1");
    if (bits < 1) throw ConfigError("lsh_fit: bits must be >= 1");
    LshHasher h;
    h.seed = seed;
    h.planes = Mat(bits, dim);
    std::mt19937_64 rng = detail::make_rng(seed, 0x6c7368ull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < bits; ++i)
        for (std::size_t j = 0; j < dim; ++j) h.planes(i, j) = gauss(rng);
    return h;
}

inline ObCode lsh_encode(const LshHasher& h, const Vec& x) {
    if (x.size() != h.dim()) throw DimError("lsh_encode: input dim mismatch");
    ObCode c = ObCode::zeros(static_cast<std::uint32_t>(h.bits()));
    for (std::size_t i = 0; i < h.bits(); ++i)
        if (dot(h.planes.row(i), x.data(), x.size()) >= 0.0)
            c.set_bit(static_cast<std::uint32_t>(i), true);
    return c;
}

inline ObCode pca_lsh_encode(const PcaTransform& t, const LshHasher& h, const Vec& x) {
    if (h.dim() != t.dim()) throw DimError("pca_lsh_encode: hasher dim != pca dim");
    return lsh_encode(h, pca_project(t, x, t.dim()));
}

// ---------------------------------------------------------------------------
// JSON persistence, `kind` in {"pca", "lsh"}.
// ---------------------------------------------------------------------------

inline nlohmann::json pca_to_json(const PcaTransform& t) {
    return {{"kind", "pca"},
            {"dim", t.dim()},
            {"mean", t.mean},
            {"components", t.components.data},
            {"eigenvalues", t.eigenvalues}};
}

inline nlohmann::json lsh_to_json(const LshHasher& h) {
    return {{"kind", "lsh"},
            {"dim", h.dim()},
            {"bits", h.bits()},
            {"seed", h.seed},
            {"planes", h.planes.data}};
}

inline PcaTransform pca_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "pca") throw FormatError("transform json: kind is not pca");
    PcaTransform t;
    std::size_t d = j.at("dim").get<std::size_t>();
    t.mean = j.at("mean").get<Vec>();
    t.eigenvalues = j.at("eigenvalues").get<Vec>();
    t.components = Mat(d, d);
    t.components.data = j.at("components").get<std::vector<double>>();
    if (t.mean.size() != d || t.eigenvalues.size() != d || t.components.data.size() != d * d)
        throw FormatError("transform json: inconsistent pca shapes");
    return t;
}

inline LshHasher lsh_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "lsh") throw FormatError("transform json: kind is not lsh");
    LshHasher h;
    std::size_t d = j.at("dim").get<std::size_t>();
    std::size_t b = j.at("bits").get<std::size_t>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.planes = Mat(b, d);
    h.planes.data = j.at("planes").get<std::vector<double>>();
    if (h.planes.data.size() != b * d) throw FormatError("transform json: inconsistent lsh shape");
    return h;
}

inline void save_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw FormatError("write failed: " + path.string());
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open for reading: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid json: ") + e.what());
    }
    return j;
}

}  // namespace obe
