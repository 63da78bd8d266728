#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "obe/detail/binio.hpp"
#include "obe/errors.hpp"

namespace obe {

/// Bit-packed binary code. Bit 0 is the most important bit of the code;
/// in memory bit j lives at words[j/64] bit position j%64. Padding bits
/// beyond n_bits are kept at zero.
struct ObCode {
    std::vector<std::uint64_t> words;
    std::uint32_t n_bits = 0;

    static ObCode zeros(std::uint32_t n) {
        ObCode c;
        c.n_bits = n;
        c.words.assign((n + 63) / 64, 0);
        return c;
    }

    bool bit(std::uint32_t i) const { return (words[i >> 6] >> (i & 63)) & 1u; }

    void set_bit(std::uint32_t i, bool v) {
        std::uint64_t mask = std::uint64_t(1) << (i & 63);
        if (v)
            words[i >> 6] |= mask;
        else
            words[i >> 6] &= ~mask;
    }

    bool operator==(const ObCode& o) const { return n_bits == o.n_bits && words == o.words; }
};

inline ObCode pack_bits(const std::vector<bool>& bits) {
    ObCode c = ObCode::zeros(static_cast<std::uint32_t>(bits.size()));
    for (std::uint32_t i = 0; i < bits.size(); ++i)
        if (bits[i]) c.set_bit(i, true);
    return c;
}

/// Hamming distance over the leading prefix_bits bits.
inline int hamming(const ObCode& a, const ObCode& b, std::uint32_t prefix_bits) {
    if (a.n_bits != b.n_bits) throw DimError("hamming: code lengths differ");
    if (prefix_bits < 1 || prefix_bits > a.n_bits)
        throw DimError("hamming: prefix_bits out of range");
    std::uint32_t full = prefix_bits >> 6;
    std::uint32_t rem = prefix_bits & 63;
    int d = 0;
    for (std::uint32_t w = 0; w < full; ++w)
        d += std::popcount(a.words[w] ^ b.words[w]);
    if (rem) {
        std::uint64_t mask = (std::uint64_t(1) << rem) - 1;
        d += std::popcount((a.words[full] ^ b.words[full]) & mask);
    }
    return d;
}

inline int hamming(const ObCode& a, const ObCode& b) { return hamming(a, b, a.n_bits); }

// ---------------------------------------------------------------------------
// OBC1 code file: magic "OBC1", u16 version=1, u32 n_bits, u32 count,
// count label entries (u16 byte length + UTF-8 id), then count rows of
// ceil(n_bits/8) bytes where the first code bit is the MSB of byte 0.
// ---------------------------------------------------------------------------

struct CodeFile {
    std::uint32_t n_bits = 0;
    std::vector<std::string> ids;
    std::vector<ObCode> codes;
};

inline std::vector<std::uint8_t> code_to_file_bytes(const ObCode& c) {
    std::vector<std::uint8_t> out((c.n_bits + 7) / 8, 0);
    for (std::uint32_t i = 0; i < c.n_bits; ++i)
        if (c.bit(i)) out[i >> 3] |= std::uint8_t(0x80u >> (i & 7));
    return out;
}

inline ObCode code_from_file_bytes(const std::uint8_t* bytes, std::uint32_t n_bits) {
    ObCode c = ObCode::zeros(n_bits);
    for (std::uint32_t i = 0; i < n_bits; ++i)
        if (bytes[i >> 3] & (0x80u >> (i & 7))) c.set_bit(i, true);
    return c;
}

inline void write_codes(const std::filesystem::path& path, const std::vector<std::string>& ids,
                        const std::vector<ObCode>& codes) {
    if (ids.size() != codes.size()) throw DimError("write_codes: ids/codes count mismatch");
    std::uint32_t n_bits = codes.empty() ? 0 : codes[0].n_bits;
    for (const ObCode& c : codes)
        if (c.n_bits != n_bits) throw DimError("write_codes: inconsistent code lengths");

    detail::ByteWriter w;
    w.magic("OBC1");
    w.u16(1);
    w.u32(n_bits);
    w.u32(static_cast<std::uint32_t>(codes.size()));
    for (const std::string& id : ids) {
        if (id.size() > 0xFFFF) throw ConfigError("speaker id longer than 65535 bytes");
        w.u16(static_cast<std::uint16_t>(id.size()));
        w.bytes(id.data(), id.size());
    }
    for (const ObCode& c : codes) {
        auto bytes = code_to_file_bytes(c);
        w.bytes(bytes.data(), bytes.size());
    }
    w.save(path);
}

inline CodeFile read_codes(const std::filesystem::path& path) {
    detail::ByteReader r = detail::ByteReader::from_file(path);
    r.expect_magic("OBC1", "code file");
    if (r.u16() != 1) throw FormatError("unsupported OBC1 version");
    CodeFile f;
    f.n_bits = r.u32();
    std::uint32_t count = r.u32();
    // Bound the declared sizes by the bytes actually present before any
    // allocation; each entry needs a 2-byte id length plus a code row.
    const std::uint64_t rem = r.remaining();
    if (count > rem / 2) throw FormatError("OBC1: count exceeds file size");
    const std::uint64_t row_bytes = (static_cast<std::uint64_t>(f.n_bits) + 7) / 8;
    if (count > 0 && row_bytes > (rem - 2ull * count) / count)
        throw FormatError("OBC1: declared sizes exceed file size");
    f.ids.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint16_t len = r.u16();
        std::string id(len, '\0');
        r.bytes(id.data(), len);
        f.ids.push_back(std::move(id));
    }
    if (count > 0 && f.n_bits == 0) throw FormatError("OBC1: zero-length codes");
    const std::size_t row = static_cast<std::size_t>(row_bytes);
    std::vector<std::uint8_t> buf(row);
    f.codes.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        r.bytes(buf.data(), row);
        f.codes.push_back(code_from_file_bytes(buf.data(), f.n_bits));
    }
    if (!r.exhausted()) throw FormatError("OBC1: trailing bytes");
    return f;
}

}  // namespace obe
