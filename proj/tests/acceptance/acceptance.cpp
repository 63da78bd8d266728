// Acceptance suite: nine end-to-end checks with pinned tolerances, one
// PASS/FAIL line each. Run with no arguments for the full suite or with a
// single criterion number. Exits nonzero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "obe/eval.hpp"

using namespace obe;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Sampler fidelity.
// ---------------------------------------------------------------------------

Outcome criterion1() {
    auto t0 = std::chrono::steady_clock::now();
    const int n = 100000;
    std::mt19937_64 rng = detail::make_rng(2024, 0xACC1);
    double worst_hard = 0.0, worst_relaxed = 0.0;
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double z = logit(p);
        double hard_acc = 0.0, relaxed_acc = 0.0;
        for (int i = 0; i < n; ++i) {
            double u = detail::open_unit_uniform(rng);
            hard_acc += hard_sample({z}, {u})[0];
            relaxed_acc += sample_relaxed({z}, 0.1, {u})[0];
        }
        worst_hard = std::max(worst_hard, std::abs(hard_acc / n - p));
        worst_relaxed = std::max(worst_relaxed, std::abs(relaxed_acc / n - p));
    }
    double dt = seconds_since(t0);
    Outcome o;
    o.pass = worst_hard <= 0.01 && worst_relaxed <= 0.02 && dt < 5.0;
    o.detail = "max hard dev " + fmt(worst_hard) + " (<=0.01), max relaxed dev " +
               fmt(worst_relaxed) + " (<=0.02), " + fmt(dt) + "s (<5s)";
    return o;
}

// ---------------------------------------------------------------------------
// 2. Gradient correctness.
// ---------------------------------------------------------------------------

double grad_max_rel_err(ObaeMode mode, bool tied) {
    const std::size_t d = 8, L = 6, B = 12;
    std::mt19937_64 rng(7041);
    std::normal_distribution<double> g(0.0, 1.0);

    ObaeModel m;
    m.mode = mode;
    m.config.latent_dim = static_cast<int>(L);
    m.config.temperature = 0.1;
    m.enc_w = Mat(L, d);
    m.enc_b.assign(L, 0.0);
    m.dec_w = Mat(d, L);
    m.dec_b.assign(d, 0.0);
    for (double& w : m.enc_w.data) w = 0.5 * g(rng);
    for (double& w : m.dec_w.data) w = 0.5 * g(rng);
    if (!tied) {
        for (double& b : m.enc_b) b = 0.2 * g(rng);
        for (double& b : m.dec_b) b = 0.2 * g(rng);
    }

    Mat X(B, d);
    for (double& v : X.data) v = g(rng);
    BatchNoise noise;
    noise.keep.resize(B);
    std::uniform_int_distribution<int> keep_dist(1, static_cast<int>(L));
    for (int& k : noise.keep) k = keep_dist(rng);
    noise.uniform = Mat(B, L);
    for (double& u : noise.uniform.data) u = 0.05 + 0.9 * detail::open_unit_uniform(rng);

    ModelGrads grads;
    batch_loss_grad(m, X, noise, tied, &grads);
    auto loss_at = [&] { return batch_loss_grad(m, X, noise, tied, nullptr); };

    const double h = 1e-5;
    double worst = 0.0;
    auto probe = [&](double* param, double analytic) {
        double keep = *param;
        *param = keep + h;
        double up = loss_at();
        *param = keep - h;
        double down = loss_at();
        *param = keep;
        double fd = (up - down) / (2.0 * h);
        // The floor keeps central-difference roundoff on near-zero components
        // from registering as gradient error.
        double rel =
            std::abs(analytic - fd) / std::max(std::max(std::abs(analytic), std::abs(fd)), 1e-4);
        worst = std::max(worst, rel);
    };
    for (std::size_t i = 0; i < m.enc_w.data.size(); ++i)
        probe(&m.enc_w.data[i], grads.enc_w.data[i]);
    if (!tied) {
        for (std::size_t i = 0; i < L; ++i) probe(&m.enc_b[i], grads.enc_b[i]);
        for (std::size_t i = 0; i < m.dec_w.data.size(); ++i)
            probe(&m.dec_w.data[i], grads.dec_w.data[i]);
        for (std::size_t i = 0; i < d; ++i) probe(&m.dec_b[i], grads.dec_b[i]);
    }
    return worst;
}

Outcome criterion2() {
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    worst = std::max(worst, grad_max_rel_err(ObaeMode::ordered_dense, false));
    worst = std::max(worst, grad_max_rel_err(ObaeMode::ordered_binary, false));
    worst = std::max(worst, grad_max_rel_err(ObaeMode::ordered_dense, true));
    worst = std::max(worst, grad_max_rel_err(ObaeMode::ordered_binary, true));
    double dt = seconds_since(t0);
    Outcome o;
    o.pass = worst < 1e-4 && dt < 10.0;
    o.detail = "max rel err " + fmt(worst) + " (<1e-4), " + fmt(dt) + "s (<10s)";
    return o;
}

// ---------------------------------------------------------------------------
// 3. PCA equivalence of the tied dense model.
// ---------------------------------------------------------------------------

// Rows of `basis` are orthonormalized in place (modified Gram-Schmidt).
void orthonormalize_rows(Mat& basis) {
    for (std::size_t i = 0; i < basis.rows; ++i) {
        double* ri = basis.row(i);
        for (std::size_t j = 0; j < i; ++j) {
            const double* rj = basis.row(j);
            double proj = dot(ri, rj, basis.cols);
            for (std::size_t c = 0; c < basis.cols; ++c) ri[c] -= proj * rj[c];
        }
        double nrm = std::sqrt(dot(ri, ri, basis.cols));
        for (std::size_t c = 0; c < basis.cols; ++c) ri[c] /= nrm;
    }
}

// Mean cosine of the principal angles between the row spans of two
// orthonormal k x d bases: mean singular value of Qa Qb^T.
double mean_principal_cosine(const Mat& qa, const Mat& qb) {
    Mat m = matmul_nt(qa, qb);          // k x k
    EigenResult eig = sym_eigen(matmul_tn(m, m));
    double acc = 0.0;
    for (double lam : eig.values) acc += std::sqrt(std::max(0.0, lam));
    return acc / static_cast<double>(eig.values.size());
}

Outcome criterion3() {
    auto t0 = std::chrono::steady_clock::now();
    SynthConfig dc;
    dc.n_speakers = 300;
    dc.utts_per_speaker = 10;
    dc.dim = 16;
    dc.within_spread = 0.05;
    dc.seed = 5;
    dc.between_spread.resize(16);
    for (int i = 0; i < 16; ++i) dc.between_spread[i] = 1.0 / (1.0 + i / 2.0);
    Dataset ds = generate(dc);
    std::vector<Vec> rows;
    rows.reserve(ds.train.size());
    for (const auto& e : ds.train) rows.push_back(e.embedding);

    PcaTransform pca = pca_fit(rows);

    TrainConfig tc;
    tc.latent_dim = 16;
    tc.epochs = 1000;
    tc.batch_size = 64;
    tc.learning_rate = 1e-3;
    tc.tied_weights = true;
    tc.seed = 3;
    ObaeModel model = train(rows, tc, ObaeMode::ordered_dense);

    Outcome o;
    o.pass = true;
    std::string vals;
    for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{4}}) {
        Mat qa(k, 16), qb(k, 16);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < 16; ++j) {
                qa(i, j) = pca.components(i, j);
                qb(i, j) = model.enc_w(i, j);
            }
        orthonormalize_rows(qa);
        orthonormalize_rows(qb);
        double c = mean_principal_cosine(qa, qb);
        if (c < 0.9) o.pass = false;
        if (!vals.empty()) vals += ", ";
        vals += "k=" + std::to_string(k) + ": " + fmt(c);
    }
    double dt = seconds_since(t0);
    if (dt >= 120.0) o.pass = false;
    o.detail = "mean principal cosines " + vals + " (>=0.9), " + fmt(dt) + "s (<2min)";
    return o;
}

// ---------------------------------------------------------------------------
// 4. Orderliness trend.
// ---------------------------------------------------------------------------

Outcome criterion4() {
    auto t0 = std::chrono::steady_clock::now();
    OrderlinessRunConfig cfg;
    cfg.data.n_speakers = 1000;
    cfg.data.utts_per_speaker = 6;
    cfg.data.dim = 64;
    cfg.data.within_spread = 0.05;
    cfg.data.seed = 11;
    cfg.data.between_spread.resize(64);
    for (int i = 0; i < 64; ++i) cfg.data.between_spread[i] = 1.0 / (1.0 + i / 2.0);
    cfg.train.latent_dim = 64;
    cfg.train.epochs = 1000;
    cfg.train.batch_size = 256;
    cfg.train.learning_rate = 3e-3;
    // Tied weights pin the latent scale; the untied parametrization can
    // rescale each latent dim freely, which makes raw variance meaningless
    // as an ordering diagnostic.
    cfg.train.tied_weights = true;
    cfg.train.seed = 7;
    cfg.window = 8;

    EvalReport rep = run_orderliness(cfg);
    double rho = rep.scalars.at("spearman_rho");
    const auto& win = rep.series.at("window_top1");
    double lead = win.front().value;
    double trail = win.back().value;

    double dt = seconds_since(t0);
    Outcome o;
    o.pass = rho <= -0.8 && (lead - trail) >= 0.1 && win.size() == 8 && dt < 300.0;
    o.detail = "spearman rho " + fmt(rho) + " (<=-0.8), window top1 lead " + fmt(lead) +
               " vs trail " + fmt(trail) + " (gap >=0.1), " + std::to_string(win.size()) +
               " windows, " + fmt(dt) + "s (<5min)";
    return o;
}

// ---------------------------------------------------------------------------
// 5. Binary test trend at 20 and 256 bits.
// ---------------------------------------------------------------------------

Outcome criterion5() {
    auto t0 = std::chrono::steady_clock::now();
    BinaryRunConfig cfg;
    cfg.data.n_speakers = 400;
    cfg.data.utts_per_speaker = 6;
    cfg.data.dim = 64;
    cfg.data.within_spread = 0.15;
    cfg.data.mean_shift = 2.0;
    cfg.data.seed = 1;
    cfg.obae_train.latent_dim = 256;
    cfg.obae_train.epochs = 500;
    cfg.obae_train.batch_size = 256;
    cfg.obae_train.learning_rate = 3e-3;
    cfg.obae_train.seed = 2;
    cfg.bit_grid = {20, 256};
    cfg.ks = {1};
    cfg.n_seeds = 10;

    EvalReport rep = run_binary_test(cfg);
    auto at = [&](const char* name, std::size_t i) { return rep.series.at(name)[i].value; };
    double ob20 = at("obae_top1", 0), pl20 = at("pca_lsh_top1", 0), ls20 = at("lsh_top1", 0);
    double ob256 = at("obae_top1", 1), pl256 = at("pca_lsh_top1", 1), ls256 = at("lsh_top1", 1);
    double hi = std::max({ob256, pl256, ls256});
    double lo = std::min({ob256, pl256, ls256});

    double dt = seconds_since(t0);
    Outcome o;
    o.pass = ob20 >= pl20 + 0.01 && pl20 >= ls20 + 0.01 && (hi - lo) <= 0.05 && dt < 900.0;
    o.detail = "top1@20 obae " + fmt(ob20) + " > pca_lsh " + fmt(pl20) + " > lsh " + fmt(ls20) +
               " (margins >=0.01); top1@256 spread " + fmt(hi - lo) + " (<=0.05), " + fmt(dt) +
               "s (<15min)";
    return o;
}

// ---------------------------------------------------------------------------
// 6. Bit test trend with a 2000-dim latent.
// ---------------------------------------------------------------------------

Outcome criterion6() {
    auto t0 = std::chrono::steady_clock::now();
    BitRunConfig cfg;
    cfg.data.n_speakers = 400;
    cfg.data.utts_per_speaker = 6;
    cfg.data.dim = 64;
    cfg.data.within_spread = 0.10;
    cfg.data.seed = 4;
    cfg.obae_train.latent_dim = 2000;
    cfg.obae_train.epochs = 300;
    cfg.obae_train.batch_size = 256;
    cfg.obae_train.learning_rate = 1e-3;
    cfg.obae_train.seed = 6;
    cfg.n_seeds = 5;

    EvalReport rep = run_bit_test(cfg);
    const auto& ob = rep.series.at("obae_top1");
    const auto& ls = rep.series.at("lsh_top1");

    bool non_decreasing = true;
    double worst_drop = 0.0;
    for (std::size_t i = 1; i < ob.size(); ++i) {
        double drop = ob[i - 1].value - ob[i].value;
        worst_drop = std::max(worst_drop, drop);
        if (drop > 0.02) non_decreasing = false;
    }
    bool dominates = true;
    double worst_deficit = -1.0;
    for (std::size_t i = 0; i < ob.size(); ++i) {
        double deficit = ls[i].value - ob[i].value;
        worst_deficit = std::max(worst_deficit, deficit);
        if (deficit > 0.01) dominates = false;
    }

    double dt = seconds_since(t0);
    Outcome o;
    o.pass = non_decreasing && dominates && dt < 1800.0;
    o.detail = "worst obae drop " + fmt(worst_drop) + " (<=0.02), worst deficit vs lsh " +
               fmt(worst_deficit) + " (<=0.01), " + fmt(dt) + "s (<30min)";
    return o;
}

// ---------------------------------------------------------------------------
// 7. Speed ordering and counters.
// ---------------------------------------------------------------------------

Outcome criterion7() {
    auto t0 = std::chrono::steady_clock::now();
    auto run_at = [](int speakers) {
        SpeedRunConfig cfg;
        cfg.data.n_speakers = speakers;
        cfg.data.utts_per_speaker = 4;
        cfg.data.dim = 64;
        cfg.data.seed = 9;
        cfg.widths = {32, 40, 48};
        cfg.code_bits = 48;
        return run_speed_test(cfg);
    };
    EvalReport rep = run_at(1251);

    Outcome o;
    o.pass = true;
    std::string ratios;
    for (std::uint32_t w : {32u, 40u, 48u}) {
        std::string tag = "@" + std::to_string(w);
        double tree = rep.timings.at("tree" + tag).mean_ns;
        double ham = rep.timings.at("hamming_linear" + tag).mean_ns;
        double cos = rep.timings.at("cosine_linear" + tag).mean_ns;
        if (!(tree < ham && ham < cos)) o.pass = false;
        if (cos / tree < 50.0) o.pass = false;
        if (rep.counters.at("tree" + tag + "/node_visits_per_query") != w) o.pass = false;
        if (!ratios.empty()) ratios += ", ";
        ratios += tag.substr(1) + "b: " + fmt(tree) + "/" + fmt(ham) + "/" + fmt(cos) +
                  "ns x" + fmt(cos / tree);
    }

    EvalReport doubled = run_at(2502);
    for (std::uint32_t w : {32u, 40u, 48u}) {
        std::string tag = "@" + std::to_string(w);
        if (doubled.counters.at("cosine_linear" + tag + "/distance_evals_per_query") !=
            2 * rep.counters.at("cosine_linear" + tag + "/distance_evals_per_query"))
            o.pass = false;
        if (doubled.counters.at("hamming_linear" + tag + "/distance_evals_per_query") !=
            2 * rep.counters.at("hamming_linear" + tag + "/distance_evals_per_query"))
            o.pass = false;
        if (doubled.counters.at("tree" + tag + "/node_visits_per_query") != w) o.pass = false;
    }

    double dt = seconds_since(t0);
    if (dt >= 300.0) o.pass = false;
    o.detail = "tree/hamming/cosine mean " + ratios + " (ratio >=50), counters double with N, " +
               fmt(dt) + "s (<5min)";
    return o;
}

// ---------------------------------------------------------------------------
// 8. Oracle equivalence for the scan kernels and the tree.
// ---------------------------------------------------------------------------

Outcome criterion8() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng = detail::make_rng(88, 0xACC8);
    std::normal_distribution<double> g(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);

    auto random_code = [&](std::uint32_t bits) {
        ObCode c = ObCode::zeros(bits);
        for (std::uint32_t i = 0; i < bits; ++i)
            if (coin(rng)) c.set_bit(i, true);
        return c;
    };

    int bad = 0;
    for (int inst = 0; inst < 200; ++inst) {
        std::uniform_int_distribution<int> n_dist(1, 50);
        const int n = n_dist(rng);
        std::uniform_int_distribution<int> dim_dist(1, 24);
        const std::size_t dim = static_cast<std::size_t>(dim_dist(rng));
        std::uniform_int_distribution<int> bit_dist(1, 130);
        const std::uint32_t bits = static_cast<std::uint32_t>(bit_dist(rng));

        EnrollTable t;
        for (int i = 0; i < n; ++i) {
            t.ids.push_back(speaker_name(i));
            Vec c(dim);
            for (double& v : c) v = g(rng);
            t.centroids.push_back(c);
            t.codes.push_back(random_code(bits));
        }
        finalize_enroll_table(t);

        std::uniform_int_distribution<int> k_dist(1, n + 2);
        const std::size_t k = static_cast<std::size_t>(k_dist(rng));
        std::uniform_int_distribution<int> prefix_dist(1, static_cast<int>(bits));
        const std::uint32_t prefix = static_cast<std::uint32_t>(prefix_dist(rng));
        std::uniform_int_distribution<int> dims_dist(1, static_cast<int>(dim));
        const std::size_t dims = static_cast<std::size_t>(dims_dist(rng));

        ObCode qc = random_code(bits);
        Vec qv(dim);
        for (double& v : qv) v = g(rng);

        std::vector<Hit> ham = hamming_topk(t, qc, k, prefix);
        std::vector<Hit> ham_oracle;
        for (std::size_t i = 0; i < t.size(); ++i)
            ham_oracle.push_back({i, static_cast<double>(hamming(qc, t.codes[i], prefix))});
        std::stable_sort(ham_oracle.begin(), ham_oracle.end(), [](const Hit& a, const Hit& b) {
            if (a.score != b.score) return a.score < b.score;
            return a.index < b.index;
        });
        ham_oracle.resize(std::min(k, ham_oracle.size()));
        if (ham.size() != ham_oracle.size()) ++bad;
        else
            for (std::size_t i = 0; i < ham.size(); ++i)
                if (ham[i].index != ham_oracle[i].index || ham[i].score != ham_oracle[i].score) {
                    ++bad;
                    break;
                }

        std::vector<Hit> cos = cosine_topk(t, qv, k, dims);
        std::vector<Hit> cos_oracle;
        for (std::size_t i = 0; i < t.size(); ++i) {
            double num = 0.0, qn = 0.0, cn = 0.0;
            for (std::size_t j = 0; j < dims; ++j) {
                num += qv[j] * t.centroids[i][j];
                qn += qv[j] * qv[j];
                cn += t.centroids[i][j] * t.centroids[i][j];
            }
            double s = (qn <= 0.0 || cn <= 0.0) ? -2.0 : num / (std::sqrt(qn) * std::sqrt(cn));
            cos_oracle.push_back({i, s});
        }
        std::stable_sort(cos_oracle.begin(), cos_oracle.end(), [](const Hit& a, const Hit& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.index < b.index;
        });
        cos_oracle.resize(std::min(k, cos_oracle.size()));
        if (cos.size() != cos_oracle.size()) ++bad;
        else
            for (std::size_t i = 0; i < cos.size(); ++i)
                if (cos[i].index != cos_oracle[i].index ||
                    std::abs(cos[i].score - cos_oracle[i].score) > 1e-12) {
                    ++bad;
                    break;
                }
    }

    // Tree exact-match identification.
    int tree_misses = 0, tree_queries = 0;
    for (int inst = 0; inst < 20; ++inst) {
        std::uniform_int_distribution<int> n_dist(1, 400);
        const int n = n_dist(rng);
        const std::uint32_t bits = 48;
        EnrollTable t;
        for (int i = 0; i < n; ++i) {
            t.ids.push_back(speaker_name(i));
            t.centroids.push_back({1.0});
            t.codes.push_back(random_code(bits));
        }
        finalize_enroll_table(t);
        std::uniform_int_distribution<int> depth_dist(1, static_cast<int>(bits));
        PrefixTreeIndex tree = build_tree(t, static_cast<std::uint32_t>(depth_dist(rng)));
        for (int i = 0; i < n; ++i) {
            const auto& leaf = tree_search(tree, t.codes[i]);
            ++tree_queries;
            bool found = false;
            for (std::uint32_t r : leaf)
                if (r == static_cast<std::uint32_t>(i)) found = true;
            if (!found) ++tree_misses;
        }
    }

    double dt = seconds_since(t0);
    Outcome o;
    o.pass = bad == 0 && tree_misses == 0;
    o.detail = std::to_string(bad) + "/200 scan mismatches, " + std::to_string(tree_misses) + "/" +
               std::to_string(tree_queries) + " tree exact-match misses, " + fmt(dt) + "s";
    return o;
}

// ---------------------------------------------------------------------------
// 9. Format round-trips and corruption handling.
// ---------------------------------------------------------------------------

Outcome criterion9() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng = detail::make_rng(99, 0xACC9);
    std::normal_distribution<double> g(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    fs::path dir = fs::temp_directory_path() / "obe_acceptance_fmt";
    fs::create_directories(dir);

    auto read_bytes = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    auto write_bytes = [](const fs::path& p, const std::string& s) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out << s;
    };

    int failures = 0;
    std::string note;
    auto fail = [&](const std::string& why) {
        ++failures;
        if (note.empty()) note = why;
    };

    for (int inst = 0; inst < 40; ++inst) {
        std::uniform_int_distribution<int> n_dist(0, 20);
        std::uniform_int_distribution<int> dim_dist(1, 40);
        const int n = n_dist(rng);
        const std::size_t dim = static_cast<std::size_t>(dim_dist(rng));

        std::vector<LabeledEmbedding> items;
        for (int i = 0; i < n; ++i) {
            Vec v(dim);
            for (double& x : v) x = static_cast<float>(g(rng));
            items.push_back({speaker_name(i) + std::string(i % 3, 'x'), v});
        }
        fs::path p1 = dir / "a.obe1", p2 = dir / "b.obe1";
        write_embeddings(p1, items);
        write_embeddings(p2, read_embeddings(p1));
        if (read_bytes(p1) != read_bytes(p2)) fail("obe1 re-write differs");

        std::uniform_int_distribution<int> bit_dist(1, 130);
        const std::uint32_t bits = static_cast<std::uint32_t>(bit_dist(rng));
        std::vector<std::string> ids;
        std::vector<ObCode> codes;
        for (int i = 0; i < std::max(n, 1); ++i) {
            ids.push_back(speaker_name(i));
            ObCode c = ObCode::zeros(bits);
            for (std::uint32_t b = 0; b < bits; ++b)
                if (coin(rng)) c.set_bit(b, true);
            codes.push_back(c);
        }
        fs::path c1 = dir / "a.obc1", c2 = dir / "b.obc1";
        write_codes(c1, ids, codes);
        CodeFile cf = read_codes(c1);
        write_codes(c2, cf.ids, cf.codes);
        if (read_bytes(c1) != read_bytes(c2)) fail("obc1 re-write differs");
    }

    // Model JSON round-trip through text.
    {
        std::vector<Vec> rows(20, Vec(5));
        for (auto& r : rows)
            for (double& v : r) v = g(rng);
        TrainConfig tc;
        tc.latent_dim = 4;
        tc.epochs = 2;
        tc.batch_size = 8;
        ObaeModel m = train(rows, tc, ObaeMode::ordered_binary);
        std::string s1 = obae_to_json(m).dump(2);
        ObaeModel m2 = obae_from_json(nlohmann::json::parse(s1));
        std::string s2 = obae_to_json(m2).dump(2);
        if (s1 != s2) fail("model json re-dump differs");
    }

    // Corruption: every header byte flip or truncation must raise FormatError.
    {
        fs::path p = dir / "c.obe1";
        write_embeddings(p, {{"ab", {1.0, 2.0}}, {"cd", {3.0, 4.0}}});
        std::string good = read_bytes(p);
        fs::path cc = dir / "c.obc1";
        write_codes(cc, {"ab"}, {ObCode::zeros(12)});
        std::string good_codes = read_bytes(cc);

        auto expect_format_error = [&](const fs::path& path, const std::string& bytes,
                                       auto reader, const char* what) {
            write_bytes(path, bytes);
            try {
                reader(path);
                fail(std::string(what) + " accepted corrupt input");
            } catch (const FormatError&) {
            } catch (...) {
                fail(std::string(what) + " threw a non-FormatError");
            }
        };
        auto read_emb = [](const fs::path& p) { read_embeddings(p); };
        auto read_cod = [](const fs::path& p) { read_codes(p); };

        for (std::size_t i = 0; i < 14 && i < good.size(); ++i) {
            std::string bad = good;
            bad[i] = static_cast<char>(bad[i] ^ 0x7F);
            expect_format_error(dir / "bad.obe1", bad, read_emb, "obe1 header flip");
        }
        for (std::size_t cut : {0u, 3u, 9u, 20u}) {
            if (cut < good.size())
                expect_format_error(dir / "bad.obe1", good.substr(0, cut), read_emb, "obe1 trunc");
            if (cut < good_codes.size())
                expect_format_error(dir / "bad.obc1", good_codes.substr(0, cut), read_cod,
                                    "obc1 trunc");
        }
        for (std::size_t i = 0; i < 14 && i < good_codes.size(); ++i) {
            std::string bad = good_codes;
            bad[i] = static_cast<char>(bad[i] ^ 0x7F);
            expect_format_error(dir / "bad.obc1", bad, read_cod, "obc1 header flip");
        }
        expect_format_error(dir / "bad.obe1", good + "junk", read_emb, "obe1 trailing");
        expect_format_error(dir / "bad.obc1", good_codes + "junk", read_cod, "obc1 trailing");
    }

    double dt = seconds_since(t0);
    Outcome o;
    o.pass = failures == 0;
    o.detail = failures == 0 ? "40 fuzzed round-trips byte-identical, corruption always raises "
                               "FormatError, " + fmt(dt) + "s"
                             : std::to_string(failures) + " failures, first: " + note;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > 9) {
            std::cerr << "usage: " << argv[0] << " [criterion 1..9]\n";
            return 2;
        }
    }

    Outcome (*criteria[])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                               criterion6, criterion7, criterion8, criterion9};
    bool all_pass = true;
    for (int c = 1; c <= 9; ++c) {
        if (only && c != only) continue;
        Outcome o;
        try {
            o = criteria[c - 1]();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::cout << "criterion " << c << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail
                  << ")\n";
        if (!o.pass) all_pass = false;
    }
    return all_pass ? 0 : 1;
}
