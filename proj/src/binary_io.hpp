#pragma once

// Little-endian primitives shared by the pyramid and model file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "scct/error.hpp"

namespace scct::detail {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes_.insert(bytes_.end(), b, b + n);
    }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8() {
        need(1, "u8");
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        std::uint32_t v;
        raw(&v, sizeof v, "u32");
        return v;
    }
    double f64() {
        double v;
        raw(&v, sizeof v, "f64");
        return v;
    }
    std::string str() {
        const auto n = u32();
        need(n, "string");
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void raw(void* out, std::size_t n, const char* what) {
        need(n, what);
        std::memcpy(out, bytes_.data() + pos_, n);
        pos_ += n;
    }

    std::size_t offset() const noexcept { return pos_; }
    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) throw FormatError(std::string("truncated ") + what, pos_);
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace scct::detail
