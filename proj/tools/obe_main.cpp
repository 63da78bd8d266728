// Command-line front end: gen, train, encode, index, search, eval, bench.
// Exit codes: 0 success, 2 usage/config error, 3 I/O error, 4 numerical
// divergence.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "obe/datagen.hpp"
#include "obe/eval.hpp"
#include "obe/index.hpp"
#include "obe/obae.hpp"
#include "obe/transforms.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// CLI11 config formatter for JSON files. Top-level keys name subcommands;
/// nested objects map onto their long options. Unknown keys are rejected by
/// the app's config_extras_mode.
class JsonConfig : public CLI::Config {
  public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        return dump_app(app, default_also).dump(2) + "\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        try {
            j = json::parse(input);
        } catch (const json::parse_error& e) {
            throw CLI::FileError(std::string("config is not valid JSON: ") + e.what());
        }
        std::vector<CLI::ConfigItem> items;
        flatten(j, {}, items);
        return items;
    }

  private:
    static json dump_app(const CLI::App* app, bool default_also) {
        json out = json::object();
        for (const CLI::Option* opt : app->get_options()) {
            if (!opt->get_configurable()) continue;
            std::string name = opt->get_single_name();
            if (opt->count() > 0)
                out[name] = opt->results().size() == 1 ? json(opt->results().front())
                                                       : json(opt->results());
            else if (default_also && !opt->get_default_str().empty())
                out[name] = opt->get_default_str();
        }
        for (const CLI::App* sub : app->get_subcommands({}))
            out[sub->get_name()] = dump_app(sub, default_also);
        return out;
    }

    static void flatten(const json& node, std::vector<std::string> parents,
                        std::vector<CLI::ConfigItem>& items) {
        if (!node.is_object()) throw CLI::FileError("config root must be a JSON object");
        for (const auto& [key, value] : node.items()) {
            if (value.is_object()) {
                std::vector<std::string> next = parents;
                next.push_back(key);
                flatten(value, next, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar_to_string(v));
            } else {
                item.inputs.push_back(scalar_to_string(value));
            }
            items.push_back(std::move(item));
        }
    }

    static std::string scalar_to_string(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }
};

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_report_files(const fs::path& dir, const obe::EvalReport& rep) {
    fs::create_directories(dir);
    obe::save_json(dir / "report.json", obe::report_to_json(rep));
    write_text_file(dir / "report.txt", obe::report_to_text(rep));
    write_text_file(dir / "report.csv", obe::report_to_csv(rep));
    std::cout << obe::report_to_text(rep);
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenOpts {
    obe::SynthConfig cfg;
    std::string out;
};

void run_gen(const GenOpts& o) {
    obe::Dataset ds = obe::generate(o.cfg);
    fs::path dir(o.out);
    fs::create_directories(dir);
    obe::write_embeddings(dir / "train.obe1", ds.train);
    obe::write_embeddings(dir / "enroll.obe1", ds.enroll);
    obe::write_embeddings(dir / "test.obe1", ds.test);
    obe::save_json(dir / "config.json", {{"command", "gen"}, {"gen", obe::synth_config_to_json(o.cfg)}});
    std::cout << "wrote " << ds.train.size() << " train, " << ds.enroll.size() << " enroll, "
              << ds.test.size() << " test embeddings to " << dir.string() << "\n";
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
    std::string mode;
    std::string data;
    std::string out;
    obe::TrainConfig cfg;
    int lsh_bits = 256;
    std::string optimizer = "adam";
};

std::vector<obe::Vec> load_rows(const std::string& path) {
    std::vector<obe::LabeledEmbedding> items = obe::read_embeddings(path);
    std::vector<obe::Vec> rows;
    rows.reserve(items.size());
    for (obe::LabeledEmbedding& e : items) rows.push_back(std::move(e.embedding));
    return rows;
}

void run_train(const TrainOpts& o) {
    obe::TrainConfig cfg = o.cfg;
    if (o.optimizer == "adam")
        cfg.optimizer = obe::Optimizer::adam;
    else if (o.optimizer == "sgd")
        cfg.optimizer = obe::Optimizer::sgd;
    else
        throw obe::ConfigError("train: unknown optimizer: " + o.optimizer);

    json out_json;
    if (o.mode == "oae" || o.mode == "obae") {
        std::vector<obe::Vec> rows = load_rows(o.data);
        obe::ObaeMode mode =
            o.mode == "oae" ? obe::ObaeMode::ordered_dense : obe::ObaeMode::ordered_binary;
        obe::ObaeModel model = obe::train(rows, cfg, mode);
        out_json = obe::obae_to_json(model);
        std::cout << "final loss " << model.final_loss << " after " << cfg.epochs << " epochs\n";
    } else if (o.mode == "pca") {
        std::vector<obe::Vec> rows = load_rows(o.data);
        obe::PcaTransform t = obe::pca_fit(rows);
        out_json = obe::pca_to_json(t);
    } else if (o.mode == "lsh") {
        std::vector<obe::LabeledEmbedding> items = obe::read_embeddings(o.data);
        if (items.empty()) throw obe::InsufficientData("train lsh: empty embedding file");
        obe::LshHasher h = obe::lsh_fit(items[0].embedding.size(),
                                        static_cast<std::size_t>(o.lsh_bits), cfg.seed);
        out_json = obe::lsh_to_json(h);
    } else {
        throw obe::ConfigError("train: unknown mode: " + o.mode + " (use oae|obae|pca|lsh)");
    }
    out_json["cli"] = {{"command", "train"},
                       {"mode", o.mode},
                       {"data", o.data},
                       {"train", obe::train_config_to_json(cfg)},
                       {"lsh_bits", o.lsh_bits}};
    if (!fs::path(o.out).parent_path().empty()) fs::create_directories(fs::path(o.out).parent_path());
    obe::save_json(o.out, out_json);
    std::cout << "wrote model to " << o.out << "\n";
}

// ---------------------------------------------------------------------------
// encode
// ---------------------------------------------------------------------------

struct EncodeOpts {
    std::string model;
    std::string pca;
    std::string data;
    std::string out;
};

std::function<obe::ObCode(const obe::Vec&)> make_encoder(const std::string& model_path,
                                                         const std::string& pca_path,
                                                         std::shared_ptr<void>& keep_alive) {
    json j = obe::load_json(model_path);
    std::string kind = j.value("kind", "");
    if (kind == "obae_model") {
        if (!pca_path.empty())
            throw obe::ConfigError("encode: --pca only applies to lsh models");
        auto model = std::make_shared<obe::ObaeModel>(obe::obae_from_json(j));
        keep_alive = model;
        return [model](const obe::Vec& x) { return obe::encode_code(*model, x); };
    }
    if (kind == "lsh") {
        auto hasher = std::make_shared<obe::LshHasher>(obe::lsh_from_json(j));
        if (pca_path.empty()) {
            keep_alive = hasher;
            return [hasher](const obe::Vec& x) { return obe::lsh_encode(*hasher, x); };
        }
        auto pca = std::make_shared<obe::PcaTransform>(
            obe::pca_from_json(obe::load_json(pca_path)));
        auto pair = std::make_shared<std::pair<std::shared_ptr<obe::LshHasher>,
                                               std::shared_ptr<obe::PcaTransform>>>(hasher, pca);
        keep_alive = pair;
        return [pair](const obe::Vec& x) {
            return obe::pca_lsh_encode(*pair->second, *pair->first, x);
        };
    }
    throw obe::FormatError("encode: unsupported model kind: " + kind);
}

void run_encode(const EncodeOpts& o) {
    std::shared_ptr<void> keep_alive;
    auto encoder = make_encoder(o.model, o.pca, keep_alive);
    std::vector<obe::LabeledEmbedding> items = obe::read_embeddings(o.data);
    if (items.empty()) throw obe::InsufficientData("encode: empty embedding file");
    std::vector<std::string> ids;
    std::vector<obe::ObCode> codes;
    for (const obe::LabeledEmbedding& e : items) {
        ids.push_back(e.speaker_id);
        codes.push_back(encoder(e.embedding));
    }
    if (!fs::path(o.out).parent_path().empty()) fs::create_directories(fs::path(o.out).parent_path());
    obe::write_codes(o.out, ids, codes);
    obe::save_json(o.out + ".config.json", {{"command", "encode"},
                                            {"model", o.model},
                                            {"pca", o.pca},
                                            {"data", o.data},
                                            {"n_codes", codes.size()},
                                            {"n_bits", codes[0].n_bits}});
    std::cout << "wrote " << codes.size() << " codes of " << codes[0].n_bits << " bits to "
              << o.out << "\n";
}

// ---------------------------------------------------------------------------
// index
// ---------------------------------------------------------------------------

struct IndexOpts {
    std::string enroll;
    std::string model;
    std::string pca;
    std::string out;
};

void run_index(const IndexOpts& o) {
    std::vector<obe::LabeledEmbedding> items = obe::read_embeddings(o.enroll);
    std::shared_ptr<void> keep_alive;
    std::function<obe::ObCode(const obe::Vec&)> encoder;
    if (!o.model.empty()) encoder = make_encoder(o.model, o.pca, keep_alive);
    obe::EnrollTable t = obe::build_enroll_table(items, encoder);

    fs::path dir(o.out);
    fs::create_directories(dir);
    std::vector<obe::LabeledEmbedding> rows;
    rows.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) rows.push_back({t.ids[i], t.centroids[i]});
    obe::write_embeddings(dir / "centroids.obe1", rows);
    if (!t.codes.empty()) obe::write_codes(dir / "codes.obc1", t.ids, t.codes);
    obe::save_json(dir / "config.json", {{"command", "index"},
                                         {"enroll", o.enroll},
                                         {"model", o.model},
                                         {"pca", o.pca},
                                         {"speakers", t.size()},
                                         {"code_bits", t.code_bits}});
    std::cout << "indexed " << t.size() << " speakers to " << dir.string() << "\n";
}

obe::EnrollTable load_index_dir(const std::string& dir) {
    fs::path d(dir);
    std::vector<obe::LabeledEmbedding> rows = obe::read_embeddings(d / "centroids.obe1");
    obe::EnrollTable t;
    for (obe::LabeledEmbedding& e : rows) {
        t.ids.push_back(std::move(e.speaker_id));
        t.centroids.push_back(std::move(e.embedding));
    }
    if (fs::exists(d / "codes.obc1")) {
        obe::CodeFile cf = obe::read_codes(d / "codes.obc1");
        if (cf.ids != t.ids) throw obe::FormatError("index: codes.obc1 ids disagree with centroids");
        t.codes = std::move(cf.codes);
    }
    finalize_enroll_table(t);
    return t;
}

// ---------------------------------------------------------------------------
// search
// ---------------------------------------------------------------------------

struct SearchOpts {
    std::string index_dir;
    std::string queries;
    std::string codes;
    std::string model;
    std::string pca;
    std::string mode = "cosine";
    int k = 5;
    int dims = 0;  // 0 -> full
    int bits = 0;  // 0 -> full
};

void run_search(const SearchOpts& o) {
    obe::EnrollTable t = load_index_dir(o.index_dir);

    std::vector<obe::LabeledEmbedding> queries;
    std::vector<obe::ObCode> query_codes;
    std::vector<std::string> query_ids;
    if (!o.queries.empty()) {
        queries = obe::read_embeddings(o.queries);
        for (const obe::LabeledEmbedding& e : queries) query_ids.push_back(e.speaker_id);
    }

    const bool needs_codes = o.mode == "hamming" || o.mode == "tree";
    if (needs_codes) {
        if (t.codes.empty()) throw obe::ConfigError("search: index has no codes; rebuild with --model");
        if (!o.codes.empty()) {
            obe::CodeFile cf = obe::read_codes(o.codes);
            query_codes = std::move(cf.codes);
            query_ids = cf.ids;
        } else if (!o.model.empty() && !queries.empty()) {
            std::shared_ptr<void> keep_alive;
            auto encoder = make_encoder(o.model, o.pca, keep_alive);
            for (const obe::LabeledEmbedding& e : queries) query_codes.push_back(encoder(e.embedding));
        } else {
            throw obe::ConfigError("search: " + o.mode + " mode needs --codes, or --queries with --model");
        }
    } else if (queries.empty()) {
        throw obe::ConfigError("search: cosine mode needs --queries");
    }

    if (o.k < 1) throw obe::ConfigError("search: --k must be >= 1");
    const std::size_t k = static_cast<std::size_t>(o.k);
    const std::size_t dims = o.dims > 0 ? static_cast<std::size_t>(o.dims) : t.dim;
    const std::uint32_t bits = o.bits > 0 ? static_cast<std::uint32_t>(o.bits) : t.code_bits;

    auto print_hits = [&](const std::string& qid, const std::vector<obe::Hit>& hits) {
        for (std::size_t r = 0; r < hits.size(); ++r)
            std::cout << qid << "\t" << (r + 1) << "\t" << t.ids[hits[r].index] << "\t"
                      << hits[r].score << "\n";
    };

    if (o.mode == "cosine") {
        for (const obe::LabeledEmbedding& q : queries)
            print_hits(q.speaker_id, obe::cosine_topk(t, q.embedding, k, dims));
    } else if (o.mode == "hamming") {
        for (std::size_t i = 0; i < query_codes.size(); ++i)
            print_hits(query_ids[i], obe::hamming_topk(t, query_codes[i], k, bits));
    } else if (o.mode == "tree") {
        obe::PrefixTreeIndex tree = obe::build_tree(t, bits);
        for (std::size_t i = 0; i < query_codes.size(); ++i) {
            const std::vector<std::uint32_t>& leaf = obe::tree_search(tree, query_codes[i]);
            std::vector<obe::Hit> hits;
            for (std::uint32_t row : leaf)
                hits.push_back({row, static_cast<double>(
                                         obe::hamming(t.codes[row], query_codes[i]))});
            std::sort(hits.begin(), hits.end(), [](const obe::Hit& a, const obe::Hit& b) {
                if (a.score != b.score) return a.score < b.score;
                return a.index < b.index;
            });
            if (hits.size() > k) hits.resize(k);
            print_hits(query_ids[i], hits);
        }
    } else {
        throw obe::ConfigError("search: unknown mode: " + o.mode + " (use cosine|hamming|tree)");
    }
}

// ---------------------------------------------------------------------------
// eval / bench
// ---------------------------------------------------------------------------

struct EvalOpts {
    std::string experiment;
    std::string out;
    obe::SynthConfig data;
    obe::TrainConfig train;
    std::string optimizer = "adam";
    bool use_pca = false;
    int window = 8;
    std::vector<std::uint32_t> grid;
    std::vector<int> ks{1, 3, 5};
    int n_seeds = 0;  // 0 -> experiment default
    bool latent_set = false;
    bool epochs_set = false;
};

void run_eval(const EvalOpts& o) {
    obe::TrainConfig tc = o.train;
    tc.optimizer = o.optimizer == "sgd" ? obe::Optimizer::sgd : obe::Optimizer::adam;
    obe::EvalReport rep;
    if (o.experiment == "baseline") {
        obe::BaselineRunConfig cfg;
        cfg.data = o.data;
        cfg.ks = o.ks;
        rep = obe::run_baseline(cfg);
    } else if (o.experiment == "orderliness") {
        obe::OrderlinessRunConfig cfg;
        cfg.data = o.data;
        cfg.train = tc;
        cfg.use_pca = o.use_pca;
        cfg.window = static_cast<std::size_t>(o.window);
        rep = obe::run_orderliness(cfg);
    } else if (o.experiment == "binary") {
        obe::BinaryRunConfig cfg;
        cfg.data = o.data;
        cfg.obae_train = tc;
        if (!o.grid.empty()) cfg.bit_grid = o.grid;
        cfg.ks = o.ks;
        if (o.n_seeds > 0) cfg.n_seeds = o.n_seeds;
        rep = obe::run_binary_test(cfg);
    } else if (o.experiment == "bit") {
        obe::BitRunConfig cfg;
        cfg.data = o.data;
        cfg.obae_train = tc;
        if (!o.latent_set) cfg.obae_train.latent_dim = 2000;
        if (!o.epochs_set) cfg.obae_train.epochs = 30;
        if (!o.grid.empty()) cfg.bit_grid = o.grid;
        if (o.n_seeds > 0) cfg.n_seeds = o.n_seeds;
        rep = obe::run_bit_test(cfg);
    } else {
        throw obe::ConfigError("eval: unknown experiment: " + o.experiment +
                               " (use baseline|orderliness|binary|bit)");
    }
    write_report_files(o.out, rep);
}

struct BenchOpts {
    std::string out;
    obe::SynthConfig data;
    std::vector<std::uint32_t> widths{32, 40, 48};
    int code_bits = 48;
    int warmups = 3;
};

void run_bench(const BenchOpts& o) {
    obe::SpeedRunConfig cfg;
    cfg.data = o.data;
    cfg.widths = o.widths;
    cfg.code_bits = static_cast<std::uint32_t>(o.code_bits);
    cfg.warmups = o.warmups;
    cfg.hasher_seed = o.data.seed;
    write_report_files(o.out, obe::run_speed_test(cfg));
}

void add_data_flags(CLI::App* sub, obe::SynthConfig& cfg) {
    sub->add_option("--speakers", cfg.n_speakers, "number of synthetic speakers")
        ->capture_default_str();
    sub->add_option("--utts", cfg.utts_per_speaker, "utterances per speaker")
        ->capture_default_str();
    sub->add_option("--dim", cfg.dim, "embedding dimensionality")->capture_default_str();
    sub->add_option("--within", cfg.within_spread, "within-speaker noise scale")
        ->capture_default_str();
    sub->add_option("--shift", cfg.mean_shift, "constant mean offset of the cloud")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ordered binary embedding toolkit"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file; top-level keys name subcommands");
    app.allow_config_extras(CLI::config_extras_mode::error);

    std::uint64_t global_seed = 1;
    app.add_option("--seed", global_seed, "seed applied to the chosen subcommand")
        ->capture_default_str();

    GenOpts gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic dataset (OBE1 files)");
    add_data_flags(gen_cmd, gen.cfg);
    gen_cmd->add_option("--out", gen.out, "output directory")->required();

    TrainOpts train;
    CLI::App* train_cmd = app.add_subcommand("train", "fit a model: oae, obae, pca, or lsh");
    train_cmd->add_option("mode", train.mode, "oae|obae|pca|lsh")->required();
    train_cmd->add_option("--data", train.data, "training embeddings (OBE1)")->required();
    train_cmd->add_option("--latent", train.cfg.latent_dim, "latent dimensionality")
        ->capture_default_str();
    train_cmd->add_option("--epochs", train.cfg.epochs, "training epochs")->capture_default_str();
    train_cmd->add_option("--batch", train.cfg.batch_size, "batch size")->capture_default_str();
    train_cmd->add_option("--lr", train.cfg.learning_rate, "learning rate")->capture_default_str();
    train_cmd->add_option("--temp", train.cfg.temperature, "relaxation temperature")
        ->capture_default_str();
    train_cmd->add_option("--optimizer", train.optimizer, "adam|sgd")->capture_default_str();
    train_cmd->add_flag("--tied", train.cfg.tied_weights, "tie decoder to encoder transpose");
    train_cmd->add_option("--bits", train.lsh_bits, "hash width for lsh mode")
        ->capture_default_str();
    train_cmd->add_option("--out", train.out, "output model file (JSON)")->required();

    EncodeOpts encode;
    CLI::App* encode_cmd = app.add_subcommand("encode", "hash embeddings into an OBC1 code file");
    encode_cmd->add_option("--model", encode.model, "model file (obae or lsh JSON)")->required();
    encode_cmd->add_option("--pca", encode.pca, "PCA transform applied before an lsh model");
    encode_cmd->add_option("--data", encode.data, "embeddings to encode (OBE1)")->required();
    encode_cmd->add_option("--out", encode.out, "output code file (OBC1)")->required();

    IndexOpts index;
    CLI::App* index_cmd = app.add_subcommand("index", "build an enrollment index directory");
    index_cmd->add_option("--enroll", index.enroll, "enrollment embeddings (OBE1)")->required();
    index_cmd->add_option("--model", index.model, "optional model used to hash centroids");
    index_cmd->add_option("--pca", index.pca, "PCA transform applied before an lsh model");
    index_cmd->add_option("--out", index.out, "output directory")->required();

    SearchOpts search;
    CLI::App* search_cmd = app.add_subcommand("search", "rank enrolled speakers for queries");
    search_cmd->add_option("--index", search.index_dir, "index directory")->required();
    search_cmd->add_option("--queries", search.queries, "query embeddings (OBE1)");
    search_cmd->add_option("--codes", search.codes, "precomputed query codes (OBC1)");
    search_cmd->add_option("--model", search.model, "model to hash dense queries");
    search_cmd->add_option("--pca", search.pca, "PCA transform applied before an lsh model");
    search_cmd->add_option("--mode", search.mode, "cosine|hamming|tree")->capture_default_str();
    search_cmd->add_option("--k", search.k, "list length")->capture_default_str();
    search_cmd->add_option("--dims", search.dims, "leading dims for cosine (0 = all)")
        ->capture_default_str();
    search_cmd->add_option("--bits", search.bits, "leading bits / tree depth (0 = all)")
        ->capture_default_str();

    EvalOpts eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "run an evaluation experiment");
    eval_cmd->add_option("experiment", eval.experiment, "baseline|orderliness|binary|bit")
        ->required();
    add_data_flags(eval_cmd, eval.data);
    CLI::Option* latent_opt =
        eval_cmd->add_option("--latent", eval.train.latent_dim, "latent dimensionality")
            ->capture_default_str();
    CLI::Option* epochs_opt =
        eval_cmd->add_option("--epochs", eval.train.epochs, "training epochs")->capture_default_str();
    eval_cmd->add_option("--batch", eval.train.batch_size, "batch size")->capture_default_str();
    eval_cmd->add_option("--lr", eval.train.learning_rate, "learning rate")->capture_default_str();
    eval_cmd->add_option("--temp", eval.train.temperature, "relaxation temperature")
        ->capture_default_str();
    eval_cmd->add_option("--optimizer", eval.optimizer, "adam|sgd")->capture_default_str();
    eval_cmd->add_flag("--pca", eval.use_pca, "orderliness: project with PCA instead of oae");
    eval_cmd->add_option("--window", eval.window, "orderliness window width")->capture_default_str();
    eval_cmd->add_option("--grid", eval.grid, "bit grid for binary/bit experiments");
    eval_cmd->add_option("--ks", eval.ks, "k values for top-k");
    eval_cmd->add_option("--seeds", eval.n_seeds, "number of seeds to average");
    eval_cmd->add_option("--out", eval.out, "report output directory")->required();

    BenchOpts bench;
    bench.data.n_speakers = 1251;
    bench.data.utts_per_speaker = 4;
    CLI::App* bench_cmd = app.add_subcommand("bench", "speed test with timings and counters");
    add_data_flags(bench_cmd, bench.data);
    bench_cmd->add_option("--widths", bench.widths, "prefix widths to benchmark")
        ->capture_default_str();
    bench_cmd->add_option("--bits", bench.code_bits, "full hash width")->capture_default_str();
    bench_cmd->add_option("--warmups", bench.warmups, "warm-up queries per mode")
        ->capture_default_str();
    bench_cmd->add_option("--out", bench.out, "report output directory")->required();

    gen_cmd->callback([&] {
        gen.cfg.seed = global_seed;
        run_gen(gen);
    });
    train_cmd->callback([&] {
        train.cfg.seed = global_seed;
        run_train(train);
    });
    encode_cmd->callback([&] { run_encode(encode); });
    index_cmd->callback([&] { run_index(index); });
    search_cmd->callback([&] { run_search(search); });
    eval_cmd->callback([&] {
        eval.data.seed = global_seed;
        eval.train.seed = global_seed;
        eval.latent_set = latent_opt->count() > 0;
        eval.epochs_set = epochs_opt->count() > 0;
        run_eval(eval);
    });
    bench_cmd->callback([&] {
        bench.data.seed = global_seed;
        run_bench(bench);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const obe::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const obe::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::logic_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
