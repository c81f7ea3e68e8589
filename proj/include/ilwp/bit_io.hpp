#pragma once

#include <cstdint>
#include <vector>

namespace ilwp {

/// A packed bit string, most-significant bit of each byte first. Bits past
/// `bit_count` in the last byte are padding and always zero.
struct BitSequence {
    std::vector<std::uint8_t> bytes;
    std::uint64_t bit_count = 0;

    bool operator==(const BitSequence&) const = default;
};

class BitWriter {
public:
    // Appends the low `width` bits of `value`, MSB first. width <= 64.
    void write(std::uint64_t value, unsigned width);
    void write_bit(bool bit);

    std::uint64_t bit_count() const { return out_.bit_count; }
    BitSequence finish() &&;

private:
    BitSequence out_;
};

class BitReader {
public:
    explicit BitReader(const BitSequence& bits) : bits_(bits) {}

    // Throws FormatError when the declared bit length is exhausted.
    bool read_bit();
    std::uint64_t read(unsigned width);

    std::uint64_t position() const { return pos_; }
    std::uint64_t remaining() const { return bits_.bit_count - pos_; }

private:
    const BitSequence& bits_;
    std::uint64_t pos_ = 0;
};

/// Number of bits needed to address `n` distinct values (0 for n <= 1).
unsigned index_width(std::uint64_t n);

} // namespace ilwp

namespace ilwp {

/// Throws FormatError unless `bits.bytes` holds exactly ceil(bit_count / 8)
/// bytes and every padding bit is zero. `what` names the stream in the message.
void check_bit_sequence(const BitSequence& bits, const char* what);

} // namespace ilwp
