#pragma once

#include "ilwp/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace ilwp {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

// Little-endian append-only byte sink used by the .wgt and .ilw writers.
class ByteWriter {
public:
    void put_u8(std::uint8_t v) { bytes_.push_back(v); }
    void put_i8(std::int8_t v) { bytes_.push_back(static_cast<std::uint8_t>(v)); }
    void put_u16(std::uint16_t v) { put_raw(&v, sizeof v); }
    void put_u32(std::uint32_t v) { put_raw(&v, sizeof v); }
    void put_f32(float v) { put_raw(&v, sizeof v); }
    void put_bytes(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }

    std::size_t size() const { return bytes_.size(); }
    std::vector<std::uint8_t> take() && { return std::move(bytes_); }

private:
    void put_raw(const void* p, std::size_t n)
    {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes_.insert(bytes_.end(), b, b + n);
    }

    std::vector<std::uint8_t> bytes_;
};

// Bounds-checked little-endian reader. Every short read raises FormatError
// naming the field and the byte offset where it was expected.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t get_u8(const char* what) { return get<std::uint8_t>(what); }
    std::int8_t get_i8(const char* what) { return get<std::int8_t>(what); }
    std::uint16_t get_u16(const char* what) { return get<std::uint16_t>(what); }
    std::uint32_t get_u32(const char* what) { return get<std::uint32_t>(what); }
    float get_f32(const char* what) { return get<float>(what); }

    std::span<const std::uint8_t> get_bytes(std::size_t n, const char* what)
    {
        require(n, what);
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    template <class T>
    T get(const char* what)
    {
        require(sizeof(T), what);
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    void require(std::size_t n, const char* what) const
    {
        if (n > remaining())
            throw FormatError("truncated input: " + std::string(what) + " needs " + std::to_string(n) +
                              " bytes at offset " + std::to_string(pos_) + ", " +
                              std::to_string(remaining()) + " available");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

} // namespace ilwp
