#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "obe/code.hpp"
#include "obe/datagen.hpp"
#include "obe/errors.hpp"
#include "obe/index.hpp"
#include "obe/linalg.hpp"
#include "obe/obae.hpp"
#include "obe/stats.hpp"
#include "obe/transforms.hpp"

namespace obe {

// ---------------------------------------------------------------------------
// Report types.
// ---------------------------------------------------------------------------

struct TimingStats {
    std::size_t samples = 0;
    double mean_ns = 0.0;
    double p50_ns = 0.0;
    double p95_ns = 0.0;
};

struct SeriesPoint {
    double x = 0.0;
    double value = 0.0;
};

/// Structured result of one experiment run: named (x, value) series, scalar
/// summaries, per-mode timing statistics, and algorithmic operation counters
/// kept separate from wall time.
struct EvalReport {
    std::string experiment;
    std::uint64_t seed = 0;
    nlohmann::json config = nlohmann::json::object();
    std::map<std::string, double> scalars;
    std::map<std::string, std::vector<SeriesPoint>> series;
    std::map<std::string, TimingStats> timings;
    std::map<std::string, std::uint64_t> counters;
};

/// Top-k accuracy per requested k; non-decreasing in k by construction.
struct TopkResult {
    std::map<int, double> acc;
};

struct CosineScorer {
    std::size_t dims;
};
struct HammingScorer {
    std::uint32_t bits;
    std::function<ObCode(const Vec&)> encoder;
};
using Scorer = std::variant<CosineScorer, HammingScorer>;

// ---------------------------------------------------------------------------
// Top-k protocol.
// ---------------------------------------------------------------------------

namespace detail {

inline std::size_t enrolled_row(const EnrollTable& t, const std::string& id) {
    auto it = std::lower_bound(t.ids.begin(), t.ids.end(), id);
    if (it == t.ids.end() || *it != id)
        throw ProtocolError("topk_accuracy: test speaker not enrolled: " + id);
    return static_cast<std::size_t>(it - t.ids.begin());
}

}  // namespace detail

inline TopkResult topk_accuracy(const EnrollTable& enroll,
                                const std::vector<LabeledEmbedding>& test, const Scorer& scorer,
                                const std::vector<int>& ks) {
    if (test.empty()) throw ProtocolError("topk_accuracy: no test items");
    if (ks.empty()) throw ProtocolError("topk_accuracy: no k values");
    int kmax = 0;
    for (int k : ks) {
        if (k < 1) throw ProtocolError("topk_accuracy: k must be >= 1");
        kmax = std::max(kmax, k);
    }

    std::map<int, double> hits;
    for (int k : ks) hits[k] = 0.0;
    for (const LabeledEmbedding& item : test) {
        std::size_t truth = detail::enrolled_row(enroll, item.speaker_id);
        std::vector<Hit> ranked;
        if (const CosineScorer* c = std::get_if<CosineScorer>(&scorer)) {
            ranked = cosine_topk(enroll, item.embedding, kmax, c->dims);
        } else {
            const HammingScorer& h = std::get<HammingScorer>(scorer);
            ranked = hamming_topk(enroll, h.encoder(item.embedding), kmax, h.bits);
        }
        std::size_t pos = ranked.size();
        for (std::size_t r = 0; r < ranked.size(); ++r)
            if (ranked[r].index == truth) {
                pos = r;
                break;
            }
        for (int k : ks)
            if (pos < static_cast<std::size_t>(k)) hits[k] += 1.0;
    }
    TopkResult out;
    for (auto& [k, h] : hits) out.acc[k] = h / static_cast<double>(test.size());
    return out;
}

// ---------------------------------------------------------------------------
// Orderliness protocol: per-dimension variance of the projected train set,
// and Top-1 per consecutive window of `window` dimensions.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<LabeledEmbedding> project_items(const std::vector<LabeledEmbedding>& items,
                                                   const std::function<Vec(const Vec&)>& project) {
    std::vector<LabeledEmbedding> out;
    out.reserve(items.size());
    for (const LabeledEmbedding& e : items) out.push_back({e.speaker_id, project(e.embedding)});
    return out;
}

inline std::vector<LabeledEmbedding> slice_items(const std::vector<LabeledEmbedding>& items,
                                                 std::size_t offset, std::size_t width) {
    std::vector<LabeledEmbedding> out;
    out.reserve(items.size());
    for (const LabeledEmbedding& e : items)
        out.push_back({e.speaker_id,
                       Vec(e.embedding.begin() + offset, e.embedding.begin() + offset + width)});
    return out;
}

}  // namespace detail

inline EvalReport orderliness_test(const std::function<Vec(const Vec&)>& project,
                                   std::size_t out_dim, const Dataset& data,
                                   std::size_t window = 8) {
    if (window < 1 || out_dim % window != 0)
        throw ProtocolError("orderliness_test: projected dim must be divisible by the window");
    if (data.train.empty() || data.enroll.empty() || data.test.empty())
        throw ProtocolError("orderliness_test: dataset must have all three splits");

    EvalReport rep;
    rep.experiment = "orderliness";

    std::vector<LabeledEmbedding> ztrain = detail::project_items(data.train, project);
    std::vector<LabeledEmbedding> zenroll = detail::project_items(data.enroll, project);
    std::vector<LabeledEmbedding> ztest = detail::project_items(data.test, project);
    for (const LabeledEmbedding& e : ztrain)
        if (e.embedding.size() != out_dim)
            throw DimError("orderliness_test: projector output dim mismatch");

    std::vector<double> dims(out_dim), vars(out_dim);
    {
        std::vector<double> column(ztrain.size());
        for (std::size_t j = 0; j < out_dim; ++j) {
            for (std::size_t i = 0; i < ztrain.size(); ++i) column[i] = ztrain[i].embedding[j];
            dims[j] = static_cast<double>(j);
            vars[j] = variance_of(column);
        }
    }
    auto& var_series = rep.series["latent_variance"];
    for (std::size_t j = 0; j < out_dim; ++j) var_series.push_back({dims[j], vars[j]});
    rep.scalars["spearman_rho"] = spearman_rho(dims, vars);

    const std::size_t n_windows = out_dim / window;
    auto& win_series = rep.series["window_top1"];
    for (std::size_t w = 0; w < n_windows; ++w) {
        std::size_t off = w * window;
        EnrollTable t = build_enroll_table(detail::slice_items(zenroll, off, window));
        TopkResult r =
            topk_accuracy(t, detail::slice_items(ztest, off, window), CosineScorer{window}, {1});
        win_series.push_back({static_cast<double>(w), r.acc.at(1)});
    }
    rep.scalars["n_windows"] = static_cast<double>(n_windows);
    return rep;
}

// ---------------------------------------------------------------------------
// Binary / bit protocols: Top-k vs leading-bit budget for a set of encoders.
// ---------------------------------------------------------------------------

struct NamedEncoder {
    std::string name;
    std::function<ObCode(const Vec&)> encode;
};

/// Shallow copy of a table with codes produced by `encoder` over the
/// existing centroids.
inline EnrollTable with_codes(const EnrollTable& base,
                              const std::function<ObCode(const Vec&)>& encoder) {
    EnrollTable t = base;
    t.codes.clear();
    for (const Vec& c : t.centroids) t.codes.push_back(encoder(c));
    finalize_enroll_table(t);
    return t;
}

inline EvalReport binary_test(const Dataset& data, const std::vector<NamedEncoder>& encoders,
                              const std::vector<std::uint32_t>& bit_grid,
                              const std::vector<int>& ks = {1, 3, 5}) {
    if (encoders.empty()) throw ProtocolError("binary_test: no encoders");
    if (bit_grid.empty()) throw ProtocolError("binary_test: empty bit grid");
    EvalReport rep;
    rep.experiment = "binary_test";
    EnrollTable base = build_enroll_table(data.enroll);
    for (const NamedEncoder& enc : encoders) {
        EnrollTable t = with_codes(base, enc.encode);
        for (std::uint32_t bits : bit_grid) {
            if (bits > t.code_bits)
                throw ProtocolError("binary_test: grid value exceeds code length");
            TopkResult r = topk_accuracy(t, data.test, HammingScorer{bits, enc.encode}, ks);
            for (int k : ks)
                rep.series[enc.name + "_top" + std::to_string(k)].push_back(
                    {static_cast<double>(bits), r.acc.at(k)});
        }
    }
    return rep;
}

inline EvalReport bit_test(const Dataset& data, const std::vector<NamedEncoder>& encoders,
                           const std::vector<std::uint32_t>& bit_grid) {
    EvalReport rep = binary_test(data, encoders, bit_grid, {1});
    rep.experiment = "bit_test";
    return rep;
}

// ---------------------------------------------------------------------------
// Speed protocol.
// ---------------------------------------------------------------------------

struct SpeedQuery {
    std::string true_id;
    Vec dense;
    ObCode code;
};

namespace detail {

template <class T>
inline void do_not_optimize(T const& value) {
    asm volatile("" : : "g"(value) : "memory");
}

template <class F>
TimingStats time_per_query(std::size_t n, int warmups, F&& run) {
    using clock = std::chrono::steady_clock;
    for (int w = 0; w < warmups; ++w) run(static_cast<std::size_t>(w) % n);
    std::vector<double> ns(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto t0 = clock::now();
        run(i);
        auto t1 = clock::now();
        ns[i] = static_cast<double>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    }
    TimingStats s;
    s.samples = n;
    s.mean_ns = mean_of(ns);
    s.p50_ns = percentile(ns, 0.50);
    s.p95_ns = percentile(ns, 0.95);
    return s;
}

}  // namespace detail

/// Exact-match speed protocol: every query carries an enrolled speaker's own
/// code plus a dense vector. Each mode is timed per query after discarding
/// warm-up runs. Operation counters are recorded per query, separately from
/// wall time: the scans evaluate exactly one distance per enrolled row per
/// query, and tree visits come from the instrumented traversal.
inline EvalReport speed_test(const EnrollTable& table, const std::vector<SpeedQuery>& queries,
                             const std::vector<std::uint32_t>& widths, int warmups = 3) {
    if (queries.size() < 100) throw ProtocolError("speed_test: need at least 100 queries");
    if (widths.empty()) throw ProtocolError("speed_test: no widths given");
    for (const SpeedQuery& q : queries) {
        if (q.dense.size() != table.dim) throw DimError("speed_test: dense query dim mismatch");
        if (q.code.n_bits != table.code_bits) throw DimError("speed_test: code width mismatch");
    }

    EvalReport rep;
    rep.experiment = "speed_test";
    const std::size_t nq = queries.size();
    rep.counters["queries"] = nq;
    rep.counters["enrolled"] = table.size();

    for (std::uint32_t w : widths) {
        if (w < 1 || w > table.code_bits || w > table.dim)
            throw ProtocolError("speed_test: width out of range");
        const std::string tag = "@" + std::to_string(w);
        PrefixTreeIndex tree = build_tree(table, w);

        std::size_t sink = 0;
        rep.timings["cosine_linear" + tag] = detail::time_per_query(nq, warmups, [&](std::size_t i) {
            sink += cosine_topk(table, queries[i].dense, 1, w)[0].index;
        });
        rep.timings["hamming_linear" + tag] =
            detail::time_per_query(nq, warmups, [&](std::size_t i) {
                sink += hamming_topk(table, queries[i].code, 1, w)[0].index;
            });
        rep.timings["tree" + tag] = detail::time_per_query(nq, warmups, [&](std::size_t i) {
            sink += tree_search(tree, queries[i].code).front();
        });
        detail::do_not_optimize(sink);

        // Untimed accuracy + counter pass.
        double cos_hit = 0, ham_hit = 0, tree_hit = 0;
        std::uint64_t visits = 0;
        for (const SpeedQuery& q : queries) {
            std::size_t truth = detail::enrolled_row(table, q.true_id);
            if (cosine_topk(table, q.dense, 1, w)[0].index == truth) cos_hit += 1.0;
            if (hamming_topk(table, q.code, 1, w)[0].index == truth) ham_hit += 1.0;
            const std::vector<std::uint32_t>& leaf = tree_search(tree, q.code, &visits);
            for (std::uint32_t cand : leaf)
                if (cand == truth) {
                    tree_hit += 1.0;
                    break;
                }
        }
        rep.scalars["top1/cosine_linear" + tag] = cos_hit / static_cast<double>(nq);
        rep.scalars["top1/hamming_linear" + tag] = ham_hit / static_cast<double>(nq);
        rep.scalars["top1/tree" + tag] = tree_hit / static_cast<double>(nq);
        rep.counters["cosine_linear" + tag + "/distance_evals_per_query"] = table.size();
        rep.counters["hamming_linear" + tag + "/distance_evals_per_query"] = table.size();
        rep.counters["tree" + tag + "/node_visits_per_query"] = visits / nq;
        rep.counters["tree" + tag + "/nodes"] = tree.node_count();
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Report serialization.
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["experiment"] = r.experiment;
    j["seed"] = r.seed;
    j["config"] = r.config;
    j["scalars"] = r.scalars;
    nlohmann::json series = nlohmann::json::object();
    for (const auto& [name, pts] : r.series) {
        nlohmann::json arr = nlohmann::json::array();
        for (const SeriesPoint& p : pts) arr.push_back({p.x, p.value});
        series[name] = arr;
    }
    j["series"] = series;
    nlohmann::json timings = nlohmann::json::object();
    for (const auto& [mode, t] : r.timings)
        timings[mode] = {{"samples", t.samples},
                         {"mean_ns", t.mean_ns},
                         {"p50_ns", t.p50_ns},
                         {"p95_ns", t.p95_ns}};
    j["timings"] = timings;
    j["counters"] = r.counters;
    return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.experiment = j.at("experiment").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config = j.at("config");
    r.scalars = j.at("scalars").get<std::map<std::string, double>>();
    for (const auto& [name, arr] : j.at("series").items()) {
        std::vector<SeriesPoint>& pts = r.series[name];
        for (const auto& p : arr) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    for (const auto& [mode, t] : j.at("timings").items()) {
        TimingStats s;
        s.samples = t.at("samples").get<std::size_t>();
        s.mean_ns = t.at("mean_ns").get<double>();
        s.p50_ns = t.at("p50_ns").get<double>();
        s.p95_ns = t.at("p95_ns").get<double>();
        r.timings[mode] = s;
    }
    r.counters = j.at("counters").get<std::map<std::string, std::uint64_t>>();
    return r;
}

namespace detail {

inline std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace detail

/// Aligned-column plain-text rendering: series sharing an x grid print as one
/// table, then scalars, timings, and counters.
inline std::string report_to_text(const EvalReport& r) {
    std::ostringstream os;
    os << "experiment: " << r.experiment << "\n";
    os << "seed: " << r.seed << "\n";

    std::vector<std::vector<std::string>> groups;  // series names per shared x grid
    for (const auto& [name, pts] : r.series) {
        bool placed = false;
        for (auto& g : groups) {
            const auto& ref = r.series.at(g.front());
            if (ref.size() == pts.size()) {
                bool same = true;
                for (std::size_t i = 0; i < pts.size() && same; ++i)
                    same = ref[i].x == pts[i].x;
                if (same) {
                    g.push_back(name);
                    placed = true;
                    break;
                }
            }
        }
        if (!placed) groups.push_back({name});
    }

    for (const auto& g : groups) {
        os << "\n";
        std::vector<std::vector<std::string>> cells;
        std::vector<std::string> header{"x"};
        for (const std::string& name : g) header.push_back(name);
        cells.push_back(header);
        const auto& ref = r.series.at(g.front());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            std::vector<std::string> row{detail::fmt_num(ref[i].x)};
            for (const std::string& name : g) row.push_back(detail::fmt_num(r.series.at(name)[i].value));
            cells.push_back(row);
        }
        std::vector<std::size_t> width(header.size(), 0);
        for (const auto& row : cells)
            for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
        for (const auto& row : cells) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                os << row[c];
                if (c + 1 < row.size()) os << std::string(width[c] - row[c].size() + 2, ' ');
            }
            os << "\n";
        }
    }

    if (!r.scalars.empty()) {
        os << "\n";
        for (const auto& [name, v] : r.scalars) os << name << " = " << detail::fmt_num(v) << "\n";
    }
    if (!r.timings.empty()) {
        os << "\nmode  samples  mean_ns  p50_ns  p95_ns\n";
        for (const auto& [mode, t] : r.timings)
            os << mode << "  " << t.samples << "  " << detail::fmt_num(t.mean_ns) << "  "
               << detail::fmt_num(t.p50_ns) << "  " << detail::fmt_num(t.p95_ns) << "\n";
    }
    if (!r.counters.empty()) {
        os << "\n";
        for (const auto& [name, v] : r.counters) os << name << " = " << v << "\n";
    }
    return os.str();
}

/// CSV with one row per series point.
inline std::string report_to_csv(const EvalReport& r) {
    std::ostringstream os;
    os << "series,x,value\n";
    for (const auto& [name, pts] : r.series)
        for (const SeriesPoint& p : pts) os << name << "," << detail::fmt_num(p.x) << ","
                                            << detail::fmt_num(p.value) << "\n";
    return os.str();
}

/// Element-wise mean of reports that share series names and x grids. Scalars
/// are averaged; timings and counters are taken from the first report.
inline EvalReport average_reports(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw ProtocolError("average_reports: no reports");
    EvalReport out = reports.front();
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const EvalReport& r = reports[i];
        if (r.series.size() != out.series.size())
            throw ProtocolError("average_reports: series mismatch");
        for (auto& [name, pts] : out.series) {
            auto it = r.series.find(name);
            if (it == r.series.end() || it->second.size() != pts.size())
                throw ProtocolError("average_reports: series mismatch: " + name);
            for (std::size_t p = 0; p < pts.size(); ++p) {
                if (it->second[p].x != pts[p].x)
                    throw ProtocolError("average_reports: x grid mismatch: " + name);
                pts[p].value += it->second[p].value;
            }
        }
        for (auto& [name, v] : out.scalars) {
            auto it = r.scalars.find(name);
            if (it == r.scalars.end())
                throw ProtocolError("average_reports: scalar mismatch: " + name);
            v += it->second;
        }
    }
    const double inv = 1.0 / static_cast<double>(reports.size());
    for (auto& [name, pts] : out.series)
        for (SeriesPoint& p : pts) p.value *= inv;
    for (auto& [name, v] : out.scalars) v *= inv;
    return out;
}

// ---------------------------------------------------------------------------
// Experiment runners: dataset generation + model fitting + protocol, with
// multi-seed averaging for the trend experiments.
// ---------------------------------------------------------------------------

struct BaselineRunConfig {
    SynthConfig data;
    std::vector<std::size_t> dims_grid;  // empty -> full dim only
    std::vector<int> ks{1, 3, 5};
};

inline EvalReport run_baseline(const BaselineRunConfig& cfg) {
    Dataset ds = generate(cfg.data);
    EnrollTable t = build_enroll_table(ds.enroll);
    std::vector<std::size_t> dims = cfg.dims_grid;
    if (dims.empty()) dims.push_back(ds.dim);
    EvalReport rep;
    rep.experiment = "baseline";
    rep.seed = cfg.data.seed;
    rep.config = {{"data", synth_config_to_json(cfg.data)}, {"ks", cfg.ks}, {"dims", dims}};
    for (std::size_t d : dims) {
        TopkResult r = topk_accuracy(t, ds.test, CosineScorer{d}, cfg.ks);
        for (int k : cfg.ks)
            rep.series["top" + std::to_string(k)].push_back(
                {static_cast<double>(d), r.acc.at(k)});
    }
    return rep;
}

struct OrderlinessRunConfig {
    SynthConfig data;
    TrainConfig train;
    bool use_pca = false;
    std::size_t window = 8;
};

inline EvalReport run_orderliness(const OrderlinessRunConfig& cfg) {
    Dataset ds = generate(cfg.data);
    std::vector<Vec> train_vecs;
    train_vecs.reserve(ds.train.size());
    for (const LabeledEmbedding& e : ds.train) train_vecs.push_back(e.embedding);

    EvalReport rep;
    if (cfg.use_pca) {
        PcaTransform pca = pca_fit(train_vecs);
        std::size_t out_dim = pca.dim();
        rep = orderliness_test([&](const Vec& x) { return pca_project(pca, x, out_dim); }, out_dim,
                               ds, cfg.window);
        rep.config["projector"] = "pca";
    } else {
        ObaeModel m = train(train_vecs, cfg.train, ObaeMode::ordered_dense);
        rep = orderliness_test([&](const Vec& x) { return encode(m, x); },
                               static_cast<std::size_t>(cfg.train.latent_dim), ds, cfg.window);
        rep.config["projector"] = "ordered_dense";
        rep.config["train"] = train_config_to_json(cfg.train);
        rep.scalars["final_loss"] = m.final_loss;
    }
    rep.seed = cfg.data.seed;
    rep.config["data"] = synth_config_to_json(cfg.data);
    rep.config["window"] = cfg.window;
    return rep;
}

struct BinaryRunConfig {
    SynthConfig data;
    TrainConfig obae_train;  // latent_dim must cover the largest grid value
    std::vector<std::uint32_t> bit_grid{20, 40, 80, 120, 160, 256};
    std::vector<int> ks{1, 3, 5};
    int n_seeds = 10;
};

inline EvalReport run_binary_test(const BinaryRunConfig& cfg) {
    if (cfg.n_seeds < 1) throw ConfigError("run_binary_test: n_seeds must be >= 1");
    std::uint32_t max_bits = 0;
    for (std::uint32_t b : cfg.bit_grid) max_bits = std::max(max_bits, b);
    if (static_cast<std::uint32_t>(cfg.obae_train.latent_dim) < max_bits)
        throw ConfigError("run_binary_test: latent_dim smaller than largest grid value");

    std::vector<EvalReport> runs;
    for (int s = 0; s < cfg.n_seeds; ++s) {
        SynthConfig dc = cfg.data;
        dc.seed = cfg.data.seed + static_cast<std::uint64_t>(s);
        Dataset ds = generate(dc);
        std::vector<Vec> train_vecs;
        train_vecs.reserve(ds.train.size());
        for (const LabeledEmbedding& e : ds.train) train_vecs.push_back(e.embedding);

        TrainConfig tc = cfg.obae_train;
        tc.seed = cfg.obae_train.seed + static_cast<std::uint64_t>(s);
        ObaeModel model = train(train_vecs, tc, ObaeMode::ordered_binary);
        PcaTransform pca = pca_fit(train_vecs);
        LshHasher hasher = lsh_fit(ds.dim, max_bits, dc.seed);

        std::vector<NamedEncoder> encoders{
            {"lsh", [&](const Vec& x) { return lsh_encode(hasher, x); }},
            {"pca_lsh", [&](const Vec& x) { return pca_lsh_encode(pca, hasher, x); }},
            {"obae", [&](const Vec& x) { return encode_code(model, x); }}};
        runs.push_back(binary_test(ds, encoders, cfg.bit_grid, cfg.ks));
    }
    EvalReport rep = average_reports(runs);
    rep.seed = cfg.data.seed;
    rep.config = {{"data", synth_config_to_json(cfg.data)},
                  {"train", train_config_to_json(cfg.obae_train)},
                  {"bit_grid", cfg.bit_grid},
                  {"ks", cfg.ks},
                  {"n_seeds", cfg.n_seeds}};
    return rep;
}

struct BitRunConfig {
    SynthConfig data;
    TrainConfig obae_train;  // latent_dim 2000 in the full protocol
    std::vector<std::uint32_t> bit_grid{20, 40, 80, 160, 320, 640, 1280, 2000};
    int n_seeds = 5;
};

inline EvalReport run_bit_test(const BitRunConfig& cfg) {
    if (cfg.n_seeds < 1) throw ConfigError("run_bit_test: n_seeds must be >= 1");
    std::uint32_t max_bits = 0;
    for (std::uint32_t b : cfg.bit_grid) max_bits = std::max(max_bits, b);
    if (static_cast<std::uint32_t>(cfg.obae_train.latent_dim) < max_bits)
        throw ConfigError("run_bit_test: latent_dim smaller than largest grid value");

    std::vector<EvalReport> runs;
    for (int s = 0; s < cfg.n_seeds; ++s) {
        SynthConfig dc = cfg.data;
        dc.seed = cfg.data.seed + static_cast<std::uint64_t>(s);
        Dataset ds = generate(dc);
        std::vector<Vec> train_vecs;
        train_vecs.reserve(ds.train.size());
        for (const LabeledEmbedding& e : ds.train) train_vecs.push_back(e.embedding);

        TrainConfig tc = cfg.obae_train;
        tc.seed = cfg.obae_train.seed + static_cast<std::uint64_t>(s);
        ObaeModel model = train(train_vecs, tc, ObaeMode::ordered_binary);
        LshHasher hasher = lsh_fit(ds.dim, static_cast<std::size_t>(tc.latent_dim), dc.seed);

        std::vector<NamedEncoder> encoders{
            {"obae", [&](const Vec& x) { return encode_code(model, x); }},
            {"lsh", [&](const Vec& x) { return lsh_encode(hasher, x); }}};
        runs.push_back(bit_test(ds, encoders, cfg.bit_grid));
    }
    EvalReport rep = average_reports(runs);
    rep.seed = cfg.data.seed;
    rep.config = {{"data", synth_config_to_json(cfg.data)},
                  {"train", train_config_to_json(cfg.obae_train)},
                  {"bit_grid", cfg.bit_grid},
                  {"n_seeds", cfg.n_seeds}};
    return rep;
}

struct SpeedRunConfig {
    SynthConfig data;  // n_speakers is the enrolled population size
    std::vector<std::uint32_t> widths{32, 40, 48};
    std::uint32_t code_bits = 48;
    int warmups = 3;
    std::uint64_t hasher_seed = 1;
};

inline EvalReport run_speed_test(const SpeedRunConfig& cfg) {
    Dataset ds = generate(cfg.data);
    if (cfg.code_bits < 1) throw ConfigError("run_speed_test: code_bits must be >= 1");
    LshHasher hasher = lsh_fit(ds.dim, cfg.code_bits, cfg.hasher_seed);
    EnrollTable table =
        build_enroll_table(ds.enroll, [&](const Vec& x) { return lsh_encode(hasher, x); });

    std::vector<SpeedQuery> queries;
    queries.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i)
        queries.push_back({table.ids[i], table.centroids[i], table.codes[i]});

    EvalReport rep = speed_test(table, queries, cfg.widths, cfg.warmups);
    rep.seed = cfg.data.seed;
    rep.config = {{"data", synth_config_to_json(cfg.data)},
                  {"widths", cfg.widths},
                  {"code_bits", cfg.code_bits},
                  {"warmups", cfg.warmups}};
    return rep;
}

}  // namespace obe
