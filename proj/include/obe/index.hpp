#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "obe/code.hpp"
#include "obe/datagen.hpp"
#include "obe/errors.hpp"
#include "obe/linalg.hpp"

namespace obe {

/// Enrollment table: one row per speaker, ids ascending. Centroids are the
/// L2-normalized means of that speaker's enrollment embeddings. Flat mirrors
/// (code_words, centroid_data) back the scan kernels.
struct EnrollTable {
    std::size_t dim = 0;
    std::uint32_t code_bits = 0;
    std::vector<std::string> ids;
    std::vector<Vec> centroids;
    std::vector<ObCode> codes;

    std::size_t words_per_code = 0;
    std::vector<std::uint64_t> code_words;
    std::vector<double> centroid_data;

    std::size_t size() const { return ids.size(); }
};

/// Rebuild the flat scan arrays from ids/centroids/codes. Validates that the
/// table is internally consistent.
inline void finalize_enroll_table(EnrollTable& t) {
    if (t.ids.empty()) throw EmptyIndexError("enroll table: no speakers");
    if (t.centroids.size() != t.ids.size())
        throw DimError("enroll table: ids/centroids size mismatch");
    if (!std::is_sorted(t.ids.begin(), t.ids.end()))
        throw ConfigError("enroll table: ids must be sorted ascending");
    if (std::adjacent_find(t.ids.begin(), t.ids.end()) != t.ids.end())
        throw ConfigError("enroll table: duplicate speaker id");
    t.dim = t.centroids[0].size();
    for (const Vec& c : t.centroids)
        if (c.size() != t.dim) throw DimError("enroll table: inconsistent centroid dims");
    t.centroid_data.resize(t.size() * t.dim);
    for (std::size_t i = 0; i < t.size(); ++i)
        std::copy(t.centroids[i].begin(), t.centroids[i].end(),
                  t.centroid_data.begin() + i * t.dim);

    if (t.codes.empty()) {
        t.code_bits = 0;
        t.words_per_code = 0;
        t.code_words.clear();
        return;
    }
    if (t.codes.size() != t.ids.size()) throw DimError("enroll table: ids/codes size mismatch");
    t.code_bits = t.codes[0].n_bits;
    for (const ObCode& c : t.codes)
        if (c.n_bits != t.code_bits) throw DimError("enroll table: inconsistent code widths");
    t.words_per_code = t.codes[0].words.size();
    t.code_words.resize(t.size() * t.words_per_code);
    for (std::size_t i = 0; i < t.size(); ++i)
        std::copy(t.codes[i].words.begin(), t.codes[i].words.end(),
                  t.code_words.begin() + i * t.words_per_code);
}

/// Group enrollment utterances by speaker, average, normalize, and (when an
/// encoder is supplied) hash each centroid into a code.
inline EnrollTable build_enroll_table(const std::vector<LabeledEmbedding>& items,
                                      const std::function<ObCode(const Vec&)>& encoder = nullptr) {
    if (items.empty()) throw EmptyIndexError("build_enroll_table: no enrollment data");
    const std::size_t dim = items[0].embedding.size();
    std::map<std::string, std::pair<Vec, std::size_t>> groups;
    for (const LabeledEmbedding& e : items) {
        if (e.embedding.size() != dim)
            throw DimError("build_enroll_table: inconsistent embedding dims");
        auto [it, fresh] = groups.try_emplace(e.speaker_id, Vec(dim, 0.0), 0);
        Vec& acc = it->second.first;
        for (std::size_t j = 0; j < dim; ++j) acc[j] += e.embedding[j];
        ++it->second.second;
    }
    EnrollTable t;
    for (auto& [id, acc] : groups) {
        Vec mean = std::move(acc.first);
        double inv = 1.0 / static_cast<double>(acc.second);
        for (double& v : mean) v *= inv;
        l2_normalize(mean);
        t.ids.push_back(id);
        if (encoder) t.codes.push_back(encoder(mean));
        t.centroids.push_back(std::move(mean));
    }
    finalize_enroll_table(t);
    return t;
}

// ---------------------------------------------------------------------------
// Scan backends.
// ---------------------------------------------------------------------------

/// One ranked answer: row index into the table plus its score. For Hamming
/// scans score is the distance (smaller is better); for cosine scans it is
/// the similarity (larger is better).
struct Hit {
    std::size_t index = 0;
    double score = 0.0;
};

namespace detail {

inline std::uint64_t masked_hamming_words(const std::uint64_t* a, const std::uint64_t* b,
                                          std::size_t full_words, std::uint64_t last_mask) {
    std::uint64_t d = 0;
    for (std::size_t w = 0; w < full_words; ++w) d += std::popcount(a[w] ^ b[w]);
    if (last_mask) d += std::popcount((a[full_words] ^ b[full_words]) & last_mask);
    return d;
}

template <class Score, class Better>
std::vector<Hit> select_topk(std::size_t n, std::size_t k, Score score, Better better) {
    k = std::min(k, n);
    if (k == 1) {
        Hit best{0, score(0)};
        for (std::size_t i = 1; i < n; ++i) {
            double s = score(i);
            if (better(s, best.score)) best = Hit{i, s};
        }
        return {best};
    }
    std::vector<Hit> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = Hit{i, score(i)};
    auto cmp = [&](const Hit& x, const Hit& y) {
        if (x.score != y.score) return better(x.score, y.score);
        return x.index < y.index;
    };
    std::partial_sort(all.begin(), all.begin() + k, all.end(), cmp);
    all.resize(k);
    return all;
}

}  // namespace detail

/// Exhaustive Hamming scan over the leading prefix_bits of every enrolled
/// code. Ties resolve to the lexicographically smaller speaker id (the table
/// is id-sorted, so the smaller row index).
inline std::vector<Hit> hamming_topk(const EnrollTable& t, const ObCode& q, std::size_t k,
                                     std::uint32_t prefix_bits) {
    if (t.size() == 0 || t.code_bits == 0) throw EmptyIndexError("hamming_topk: no codes");
    if (q.n_bits != t.code_bits) throw DimError("hamming_topk: code width mismatch");
    if (prefix_bits < 1 || prefix_bits > t.code_bits)
        throw DimError("hamming_topk: prefix_bits out of range");
    if (k < 1) throw ConfigError("hamming_topk: k must be >= 1");

    const std::size_t full_words = prefix_bits / 64;
    const std::uint32_t rem = prefix_bits % 64;
    const std::uint64_t last_mask = rem ? ((std::uint64_t{1} << rem) - 1) : 0;
    const std::uint64_t* qw = q.words.data();
    const std::uint64_t* base = t.code_words.data();
    const std::size_t stride = t.words_per_code;

    auto score = [&](std::size_t i) {
        return static_cast<double>(
            detail::masked_hamming_words(qw, base + i * stride, full_words, last_mask));
    };
    return detail::select_topk(t.size(), k, score, std::less<double>{});
}

/// Exhaustive cosine scan over the leading dims coordinates of query and
/// centroids. Rows whose truncated centroid has zero norm score below -1.
inline std::vector<Hit> cosine_topk(const EnrollTable& t, const Vec& q, std::size_t k,
                                    std::size_t dims) {
    if (t.size() == 0) throw EmptyIndexError("cosine_topk: empty table");
    if (q.size() != t.dim) throw DimError("cosine_topk: query dim mismatch");
    if (dims < 1 || dims > t.dim) throw DimError("cosine_topk: dims out of range");
    if (k < 1) throw ConfigError("cosine_topk: k must be >= 1");

    double qn = std::sqrt(dot(q.data(), q.data(), dims));
    const double* base = t.centroid_data.data();
    const std::size_t stride = t.dim;
    auto score = [&](std::size_t i) {
        const double* c = base + i * stride;
        double num = dot(q.data(), c, dims);
        double cn = std::sqrt(dot(c, c, dims));
        if (qn <= 0.0 || cn <= 0.0) return -2.0;
        return num / (qn * cn);
    };
    return detail::select_topk(t.size(), k, score, std::greater<double>{});
}

// ---------------------------------------------------------------------------
// Binary prefix tree.
// ---------------------------------------------------------------------------

/// Fixed-depth binary trie over the leading depth bits of the enrolled codes.
/// Leaves hold the row indices of every speaker sharing that prefix. Lookup
/// always descends exactly depth levels; a missing branch falls through to
/// the sibling (each internal node has at least one child by construction).
struct PrefixTreeIndex {
    struct Node {
        std::int32_t child[2] = {-1, -1};
        std::int32_t leaf = -1;
    };
    std::uint32_t depth = 0;
    std::vector<Node> nodes;
    std::vector<std::vector<std::uint32_t>> leaves;

    std::size_t node_count() const { return nodes.size(); }
};

inline PrefixTreeIndex build_tree(const EnrollTable& t, std::uint32_t prefix_bits) {
    if (t.size() == 0 || t.codes.empty()) throw EmptyIndexError("build_tree: no codes");
    if (prefix_bits < 1 || prefix_bits > t.code_bits)
        throw DimError("build_tree: prefix_bits out of range");

    PrefixTreeIndex tree;
    tree.depth = prefix_bits;
    tree.nodes.emplace_back();
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::int32_t cur = 0;
        for (std::uint32_t level = 0; level < prefix_bits; ++level) {
            int b = t.codes[i].bit(level) ? 1 : 0;
            std::int32_t next = tree.nodes[cur].child[b];
            if (next < 0) {
                next = static_cast<std::int32_t>(tree.nodes.size());
                tree.nodes[cur].child[b] = next;
                tree.nodes.emplace_back();
            }
            cur = next;
        }
        if (tree.nodes[cur].leaf < 0) {
            tree.nodes[cur].leaf = static_cast<std::int32_t>(tree.leaves.size());
            tree.leaves.emplace_back();
        }
        tree.leaves[tree.nodes[cur].leaf].push_back(static_cast<std::uint32_t>(i));
    }

    // Reindex nodes in preorder so a root-to-leaf walk touches mostly
    // adjacent memory.
    std::vector<PrefixTreeIndex::Node> ordered;
    ordered.reserve(tree.nodes.size());
    std::vector<std::int32_t> stack{0};
    std::vector<std::int32_t> remap(tree.nodes.size(), -1);
    while (!stack.empty()) {
        std::int32_t old = stack.back();
        stack.pop_back();
        remap[old] = static_cast<std::int32_t>(ordered.size());
        ordered.push_back(tree.nodes[old]);
        for (int b = 1; b >= 0; --b)
            if (tree.nodes[old].child[b] >= 0) stack.push_back(tree.nodes[old].child[b]);
    }
    for (PrefixTreeIndex::Node& n : ordered)
        for (int b = 0; b < 2; ++b)
            if (n.child[b] >= 0) n.child[b] = remap[n.child[b]];
    tree.nodes = std::move(ordered);
    return tree;
}

/// Walk the query's leading bits down the tree and return the candidate row
/// indices at the reached leaf. Exactly tree.depth nodes are visited; if
/// `visits` is non-null it is incremented by that amount.
inline const std::vector<std::uint32_t>& tree_search(const PrefixTreeIndex& tree, const ObCode& q,
                                                     std::uint64_t* visits = nullptr) {
    if (q.n_bits < tree.depth) throw DimError("tree_search: query shorter than tree depth");
    std::int32_t cur = 0;
    for (std::uint32_t level = 0; level < tree.depth; ++level) {
        int b = q.bit(level) ? 1 : 0;
        std::int32_t next = tree.nodes[cur].child[b];
        if (next < 0) next = tree.nodes[cur].child[1 - b];
        cur = next;
    }
    if (visits) *visits += tree.depth;
    return tree.leaves[tree.nodes[cur].leaf];
}

}  // namespace obe
