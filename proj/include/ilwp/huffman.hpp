#pragma once

#include "ilwp/bit_io.hpp"
#include "ilwp/byte_io.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace ilwp {

/// Occurrence count per quantizer symbol.
using SymbolHistogram = std::map<int, std::uint64_t>;

SymbolHistogram make_histogram(std::span<const int> symbols);

/// Canonical Huffman code. Only the per-symbol code lengths are stored; codes
/// are assigned in (length, symbol) ascending order.
class HuffmanTable {
public:
    inline static constexpr unsigned kMaxCodeLength = 63;

    HuffmanTable() = default;

    /// Builds the canonical code for the given lengths. Throws CodingError if
    /// a length is outside [1, 63], a symbol does not fit in int8, or the
    /// lengths violate the Kraft inequality.
    static HuffmanTable from_lengths(std::map<int, unsigned> lengths);

    const std::map<int, unsigned>& lengths() const { return lengths_; }
    std::size_t alphabet_size() const { return lengths_.size(); }
    bool empty() const { return lengths_.empty(); }

    bool contains(int symbol) const { return lengths_.count(symbol) != 0; }
    unsigned length(int symbol) const;
    std::uint64_t code(int symbol) const;

    /// u16 alphabet size, then (int8 symbol, u8 length) per entry in ascending symbol order.
    void serialize(ByteWriter& out) const;
    std::size_t serialized_size() const { return 2 + 2 * lengths_.size(); }
    /// Throws FormatError on unsorted/duplicate symbols or invalid lengths.
    static HuffmanTable parse(ByteReader& in);

    bool operator==(const HuffmanTable& other) const { return lengths_ == other.lengths_; }

private:
    friend std::vector<int> decode(const BitSequence&, const HuffmanTable&, std::size_t);

    std::map<int, unsigned> lengths_;
    std::map<int, std::uint64_t> codes_;
    // Canonical decoding tables indexed by code length.
    std::vector<std::uint64_t> first_code_;
    std::vector<std::size_t> first_index_;
    std::vector<std::size_t> length_count_;
    std::vector<int> sorted_symbols_;
};

/// Optimal prefix-code lengths for `hist` (zero-count entries are ignored).
/// Ties in the merge queue are broken by (count, smallest symbol) ascending; a
/// one-symbol alphabet gets length 1. Throws ValueError if no count is positive.
HuffmanTable build_table(const SymbolHistogram& hist);

/// Concatenated canonical codewords, MSB first. Throws CodingError for a
/// symbol missing from the table.
BitSequence encode(std::span<const int> symbols, const HuffmanTable& table);

/// Decodes exactly `count` symbols. Throws FormatError if the stream ends
/// early, holds an invalid codeword, or has bits left over after `count` symbols.
std::vector<int> decode(const BitSequence& bits, const HuffmanTable& table, std::size_t count);

/// Total coded length of a histogram under a table, in bits.
std::uint64_t coded_bits(const SymbolHistogram& hist, const HuffmanTable& table);

} // namespace ilwp
