#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "obe/detail/binio.hpp"
#include "obe/detail/rng.hpp"
#include "obe/errors.hpp"
#include "obe/linalg.hpp"

namespace obe {

struct LabeledEmbedding {
    std::string speaker_id;
    Vec embedding;

    bool operator==(const LabeledEmbedding& o) const {
        return speaker_id == o.speaker_id && embedding == o.embedding;
    }
};

struct Dataset {
    std::size_t dim = 0;
    std::vector<LabeledEmbedding> train;
    std::vector<LabeledEmbedding> enroll;
    std::vector<LabeledEmbedding> test;
};

/// Synthetic speaker-embedding generator configuration. Speaker centroids are
/// drawn from a Gaussian with per-dimension spread `between_spread` (descending,
/// so leading dimensions carry more between-speaker variance), utterances add
/// isotropic noise of scale `within_spread`, an optional constant `mean_shift`
/// offsets the whole cloud away from the origin (dense speaker embeddings in
/// the wild are not centered), and everything is L2-normalized.
struct SynthConfig {
    int n_speakers = 100;
    int utts_per_speaker = 10;
    int dim = 64;
    Vec between_spread;  // empty selects the default profile 1/(1+i/8)
    double within_spread = 0.05;
    double mean_shift = 0.0;
    std::uint64_t seed = 1;
};

inline Vec default_between_spread(int dim) {
    Vec s(dim);
    for (int i = 0; i < dim; ++i) s[i] = 1.0 / (1.0 + i / 8.0);
    return s;
}

/// Utterance split per speaker: enroll gets clamp(u/4, 1, 3), test gets
/// max(1, (u - enroll + 2) / 3), train keeps the rest (possibly none).
struct SplitCounts {
    int train = 0, enroll = 0, test = 0;
};

inline SplitCounts split_counts(int utts_per_speaker) {
    SplitCounts s;
    s.enroll = std::clamp(utts_per_speaker / 4, 1, 3);
    s.test = std::max(1, (utts_per_speaker - s.enroll + 2) / 3);
    s.train = utts_per_speaker - s.enroll - s.test;
    return s;
}

inline std::string speaker_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "spk%05d", index);
    return buf;
}

inline Dataset generate(const SynthConfig& cfg) {
    if (cfg.n_speakers < 2) throw ConfigError("generate: n_speakers must be >= 2");
    if (cfg.utts_per_speaker < 2) throw ConfigError("generate: utts_per_speaker must be >= 2");
    if (cfg.dim < 1) throw ConfigError("generate: dim must be >= 1");
    if (!(cfg.within_spread >= 0.0) || !std::isfinite(cfg.within_spread))
        throw ConfigError("generate: within_spread must be >= 0");
    if (!std::isfinite(cfg.mean_shift)) throw ConfigError("generate: mean_shift must be finite");

    Vec between = cfg.between_spread.empty() ? default_between_spread(cfg.dim) : cfg.between_spread;
    if (between.size() != static_cast<std::size_t>(cfg.dim))
        throw ConfigError("generate: between_spread length != dim");
    for (std::size_t i = 0; i + 1 < between.size(); ++i)
        if (between[i] < between[i + 1]) throw ConfigError("generate: between_spread must be non-increasing");
    for (double b : between)
        if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("generate: between_spread entries must be positive");

    const double shift = cfg.mean_shift / std::sqrt(static_cast<double>(cfg.dim));

    std::mt19937_64 rng = detail::make_rng(cfg.seed, 0x6461746167656eull);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Dataset ds;
    ds.dim = static_cast<std::size_t>(cfg.dim);
    SplitCounts sc = split_counts(cfg.utts_per_speaker);

    Vec centroid(cfg.dim);
    for (int s = 0; s < cfg.n_speakers; ++s) {
        std::string id = speaker_name(s);
        for (int j = 0; j < cfg.dim; ++j) centroid[j] = between[j] * gauss(rng);
        for (int u = 0; u < cfg.utts_per_speaker; ++u) {
            Vec e(cfg.dim);
            for (int j = 0; j < cfg.dim; ++j)
                e[j] = centroid[j] + cfg.within_spread * gauss(rng) + shift;
            l2_normalize(e);
            auto& part = (u < sc.train) ? ds.train : (u < sc.train + sc.enroll) ? ds.enroll : ds.test;
            part.push_back({id, std::move(e)});
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// OBE1 embedding file: magic "OBE1", u16 version=1, u32 dim, u32 count,
// count label entries (u16 byte length + UTF-8 id), then count rows of dim
// little-endian 32-bit floats.
// ---------------------------------------------------------------------------

inline void write_embeddings(const std::filesystem::path& path,
                             const std::vector<LabeledEmbedding>& items) {
    std::uint32_t dim = items.empty() ? 0 : static_cast<std::uint32_t>(items[0].embedding.size());
    for (const auto& it : items)
        if (it.embedding.size() != dim) throw DimError("write_embeddings: inconsistent dims");

    detail::ByteWriter w;
    w.magic("OBE1");
    w.u16(1);
    w.u32(dim);
    w.u32(static_cast<std::uint32_t>(items.size()));
    for (const auto& it : items) {
        if (it.speaker_id.empty()) throw ConfigError("write_embeddings: empty speaker id");
        if (it.speaker_id.size() > 0xFFFF) throw ConfigError("speaker id longer than 65535 bytes");
        w.u16(static_cast<std::uint16_t>(it.speaker_id.size()));
        w.bytes(it.speaker_id.data(), it.speaker_id.size());
    }
    for (const auto& it : items)
        for (double x : it.embedding) w.f32(static_cast<float>(x));
    w.save(path);
}

inline std::vector<LabeledEmbedding> read_embeddings(const std::filesystem::path& path) {
    detail::ByteReader r = detail::ByteReader::from_file(path);
    r.expect_magic("OBE1", "embedding file");
    if (r.u16() != 1) throw FormatError("unsupported OBE1 version");
    std::uint32_t dim = r.u32();
    std::uint32_t count = r.u32();
    // Bound the declared sizes by the bytes actually present before any
    // allocation; each item needs a 2-byte id length plus dim 4-byte floats.
    const std::uint64_t rem = r.remaining();
    if (count > rem / 2) throw FormatError("OBE1: count exceeds file size");
    if (count > 0 && dim > (rem - 2ull * count) / 4 / count)
        throw FormatError("OBE1: dim exceeds file size");
    std::vector<LabeledEmbedding> items;
    items.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint16_t len = r.u16();
        if (len == 0) throw FormatError("OBE1: empty speaker id");
        std::string id(len, '\0');
        r.bytes(id.data(), len);
        items.push_back({std::move(id), Vec(dim)});
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        Vec& e = items[i].embedding;
        for (std::uint32_t j = 0; j < dim; ++j) {
            float f = r.f32();
            if (!std::isfinite(f)) throw FormatError("OBE1: non-finite embedding value");
            e[j] = static_cast<double>(f);
        }
    }
    if (!r.exhausted()) throw FormatError("OBE1: trailing bytes");
    return items;
}

inline nlohmann::json synth_config_to_json(const SynthConfig& c) {
    return {{"n_speakers", c.n_speakers},
            {"utts_per_speaker", c.utts_per_speaker},
            {"dim", c.dim},
            {"between_spread", c.between_spread},
            {"within_spread", c.within_spread},
            {"mean_shift", c.mean_shift},
            {"seed", c.seed}};
}

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
    SynthConfig c;
    c.n_speakers = j.at("n_speakers").get<int>();
    c.utts_per_speaker = j.at("utts_per_speaker").get<int>();
    c.dim = j.at("dim").get<int>();
    c.between_spread = j.value("between_spread", Vec{});
    c.within_spread = j.at("within_spread").get<double>();
    c.mean_shift = j.value("mean_shift", 0.0);
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace obe
