#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "obe/errors.hpp"

namespace obe::detail {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats assume a little-endian host");

class ByteWriter {
  public:
    void u16(std::uint16_t v) { raw(&v, 2); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void f32(float v) { raw(&v, 4); }
    void bytes(const void* p, std::size_t n) { raw(p, n); }
    void magic(const char (&m)[5]) { raw(m, 4); }

    const std::vector<std::uint8_t>& buffer() const { return buf_; }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot open for writing: " + path.string());
        out.write(reinterpret_cast<const char*>(buf_.data()),
                  static_cast<std::streamsize>(buf_.size()));
        if (!out) throw FormatError("write failed: " + path.string());
    }

  private:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
  public:
    explicit ByteReader(std::vector<std::uint8_t> data) : buf_(std::move(data)) {}

    static ByteReader from_file(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw FormatError("cannot open for reading: " + path.string());
        std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
        return ByteReader(std::move(data));
    }

    std::uint16_t u16() { return load<std::uint16_t>(); }
    std::uint32_t u32() { return load<std::uint32_t>(); }
    float f32() { return load<float>(); }

    void bytes(void* dst, std::size_t n) {
        need(n);
        std::memcpy(dst, buf_.data() + pos_, n);
        pos_ += n;
    }

    void expect_magic(const char (&m)[5], const std::string& what) {
        char got[4];
        need(4);
        std::memcpy(got, buf_.data() + pos_, 4);
        pos_ += 4;
        if (std::memcmp(got, m, 4) != 0) throw FormatError("bad magic for " + what);
    }

    bool exhausted() const { return pos_ == buf_.size(); }
    std::size_t remaining() const { return buf_.size() - pos_; }

  private:
    template <typename T>
    T load() {
        T v;
        need(sizeof(T));
        std::memcpy(&v, buf_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    void need(std::size_t n) {
        if (buf_.size() - pos_ < n) throw FormatError("truncated file");
    }

    std::vector<std::uint8_t> buf_;
    std::size_t pos_ = 0;
};

}  // namespace obe::detail
