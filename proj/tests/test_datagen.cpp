#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "obe/datagen.hpp"
#include "obe/eval.hpp"
#include "obe/stats.hpp"

using namespace obe;
namespace fs = std::filesystem;

namespace {

bool same_items(const std::vector<LabeledEmbedding>& a, const std::vector<LabeledEmbedding>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == b[i])) return false;
    return true;
}

fs::path temp_file(const char* name) {
    fs::path p = fs::temp_directory_path() / (std::string("obe_test_") + name);
    fs::remove(p);
    return p;
}

}  // namespace

TEST_CASE("generate is deterministic for a fixed seed", "[datagen]") {
    SynthConfig cfg;
    cfg.n_speakers = 10;
    cfg.utts_per_speaker = 4;
    cfg.dim = 8;
    cfg.seed = 7;
    Dataset a = generate(cfg);
    Dataset b = generate(cfg);
    CHECK(same_items(a.train, b.train));
    CHECK(same_items(a.enroll, b.enroll));
    CHECK(same_items(a.test, b.test));

    cfg.seed = 8;
    Dataset c = generate(cfg);
    CHECK_FALSE(same_items(a.train, c.train));
}

TEST_CASE("generate invariants: splits, labels, normalization", "[datagen]") {
    SynthConfig cfg;
    cfg.n_speakers = 13;
    cfg.utts_per_speaker = 9;
    cfg.dim = 16;
    Dataset ds = generate(cfg);
    SplitCounts sc = split_counts(9);
    CHECK(ds.train.size() == static_cast<std::size_t>(13 * sc.train));
    CHECK(ds.enroll.size() == static_cast<std::size_t>(13 * sc.enroll));
    CHECK(ds.test.size() == static_cast<std::size_t>(13 * sc.test));

    std::set<std::string> enroll_ids, test_ids;
    for (const auto& e : ds.enroll) enroll_ids.insert(e.speaker_id);
    for (const auto& e : ds.test) test_ids.insert(e.speaker_id);
    for (const std::string& id : test_ids) CHECK(enroll_ids.count(id) == 1);

    for (const auto& e : ds.test) {
        CHECK(e.embedding.size() == 16);
        CHECK(norm2(e.embedding) == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("within_spread zero collapses a speaker's utterances", "[datagen]") {
    SynthConfig cfg;
    cfg.n_speakers = 5;
    cfg.utts_per_speaker = 6;
    cfg.dim = 8;
    cfg.within_spread = 0.0;
    Dataset ds = generate(cfg);
    std::map<std::string, Vec> seen;
    auto check_all = [&](const std::vector<LabeledEmbedding>& items) {
        for (const auto& e : items) {
            auto [it, fresh] = seen.try_emplace(e.speaker_id, e.embedding);
            if (!fresh)
                for (std::size_t j = 0; j < e.embedding.size(); ++j)
                    CHECK(e.embedding[j] == Catch::Approx(it->second[j]).margin(1e-12));
        }
    };
    check_all(ds.train);
    check_all(ds.enroll);
    check_all(ds.test);
}

TEST_CASE("generate rejects invalid configs", "[datagen]") {
    SynthConfig cfg;
    cfg.n_speakers = 1;
    CHECK_THROWS_AS(generate(cfg), ConfigError);
    cfg.n_speakers = 5;
    cfg.utts_per_speaker = 1;
    CHECK_THROWS_AS(generate(cfg), ConfigError);
    cfg.utts_per_speaker = 4;
    cfg.within_spread = -0.1;
    CHECK_THROWS_AS(generate(cfg), ConfigError);
    cfg.within_spread = 0.05;
    cfg.between_spread = {1.0, 2.0};  // wrong length for dim 64 and increasing
    CHECK_THROWS_AS(generate(cfg), ConfigError);
}

TEST_CASE("easy regime gives near-perfect dense Top-1", "[datagen]") {
    BaselineRunConfig cfg;
    cfg.data.n_speakers = 100;
    cfg.data.utts_per_speaker = 10;
    cfg.data.dim = 64;
    cfg.data.within_spread = 0.05;
    cfg.ks = {1};
    EvalReport rep = run_baseline(cfg);
    CHECK(rep.series.at("top1").front().value > 0.95);
}

TEST_CASE("per-dimension variance decays with dimension index", "[datagen]") {
    SynthConfig cfg;
    cfg.n_speakers = 200;
    cfg.utts_per_speaker = 2;
    cfg.dim = 32;
    cfg.within_spread = 0.01;
    Dataset ds = generate(cfg);
    std::vector<LabeledEmbedding> all = ds.train;
    all.insert(all.end(), ds.enroll.begin(), ds.enroll.end());
    all.insert(all.end(), ds.test.begin(), ds.test.end());

    std::vector<double> idx(32), vars(32);
    for (std::size_t j = 0; j < 32; ++j) {
        std::vector<double> col;
        col.reserve(all.size());
        for (const auto& e : all) col.push_back(e.embedding[j]);
        idx[j] = static_cast<double>(j);
        vars[j] = variance_of(col);
    }
    CHECK(spearman_rho(idx, vars) <= -0.9);
}

TEST_CASE("OBE1 files round-trip including the empty file", "[datagen]") {
    fs::path p = temp_file("embeddings.obe1");

    write_embeddings(p, {});
    CHECK(read_embeddings(p).empty());

    std::vector<LabeledEmbedding> items{{"a", {1.0, 2.0, 3.0, 4.0}},
                                        {"b", {-1.0, 0.5, 0.0, 2.5}},
                                        {"c", {0.25, -0.75, 1.5, -3.0}}};
    write_embeddings(p, items);
    std::vector<LabeledEmbedding> back = read_embeddings(p);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].speaker_id == items[i].speaker_id);
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(back[i].embedding[j] ==
                  static_cast<double>(static_cast<float>(items[i].embedding[j])));
    }

    // header 4+2+4+4 bytes, labels 3*(2+1), rows 3*4*4.
    CHECK(fs::file_size(p) == 14 + 9 + 48);
    fs::remove(p);
}

TEST_CASE("OBE1 rejects corruption", "[datagen]") {
    fs::path p = temp_file("embeddings_bad.obe1");
    write_embeddings(p, {{"ab", {1.0, 2.0}}});

    auto bytes = [&] {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }();
    auto rewrite = [&](const std::string& s) {
        std::ofstream out(p, std::ios::binary);
        out << s;
    };

    std::string bad = bytes;
    bad[1] = 'X';
    rewrite(bad);
    CHECK_THROWS_AS(read_embeddings(p), FormatError);

    rewrite(bytes.substr(0, bytes.size() - 2));
    CHECK_THROWS_AS(read_embeddings(p), FormatError);

    rewrite(bytes + "zz");
    CHECK_THROWS_AS(read_embeddings(p), FormatError);
    fs::remove(p);
}
