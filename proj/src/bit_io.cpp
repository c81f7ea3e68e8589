#include "ilwp/bit_io.hpp"

#include "ilwp/error.hpp"

#include <bit>
#include <string>

namespace ilwp {

void BitWriter::write_bit(bool bit)
{
    const auto offset = static_cast<unsigned>(out_.bit_count & 7u);
    if (offset == 0)
        out_.bytes.push_back(0);
    if (bit)
        out_.bytes.back() |= static_cast<std::uint8_t>(0x80u >> offset);
    ++out_.bit_count;
}

void BitWriter::write(std::uint64_t value, unsigned width)
{
    for (unsigned i = width; i-- > 0;)
        write_bit(((value >> i) & 1u) != 0);
}

BitSequence BitWriter::finish() &&
{
    return std::move(out_);
}

bool BitReader::read_bit()
{
    if (pos_ >= bits_.bit_count)
        throw FormatError("bitstream exhausted at bit " + std::to_string(pos_));
    const std::uint8_t byte = bits_.bytes[pos_ >> 3];
    const bool bit = ((byte >> (7u - (pos_ & 7u))) & 1u) != 0;
    ++pos_;
    return bit;
}

std::uint64_t BitReader::read(unsigned width)
{
    std::uint64_t v = 0;
    for (unsigned i = 0; i < width; ++i)
        v = (v << 1) | static_cast<std::uint64_t>(read_bit());
    return v;
}

unsigned index_width(std::uint64_t n)
{
    if (n <= 1)
        return 0;
    return static_cast<unsigned>(std::bit_width(n - 1));
}

} // namespace ilwp

namespace ilwp {

void check_bit_sequence(const BitSequence& bits, const char* what)
{
    const std::uint64_t expected = (bits.bit_count + 7) / 8;
    if (bits.bytes.size() != expected)
        throw FormatError(std::string(what) + ": " + std::to_string(bits.bytes.size()) +
                          " bytes for a declared length of " + std::to_string(bits.bit_count) + " bits");
    const auto used = static_cast<unsigned>(bits.bit_count & 7u);
    if (used != 0) {
        const auto pad_mask = static_cast<std::uint8_t>(0xFFu >> used);
        if ((bits.bytes.back() & pad_mask) != 0)
            throw FormatError(std::string(what) + ": nonzero padding bits");
    }
}

} // namespace ilwp
