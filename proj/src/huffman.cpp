#include "ilwp/huffman.hpp"

#include "ilwp/error.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <string>
#include <tuple>

namespace ilwp {

SymbolHistogram make_histogram(std::span<const int> symbols)
{
    SymbolHistogram hist;
    for (int s : symbols)
        ++hist[s];
    return hist;
}

HuffmanTable HuffmanTable::from_lengths(std::map<int, unsigned> lengths)
{
    // Kraft sum scaled by 2^63; stop as soon as it passes 1.
    constexpr std::uint64_t one = std::uint64_t{1} << 63;
    std::uint64_t kraft = 0;
    unsigned max_len = 0;
    for (const auto& [sym, len] : lengths) {
        if (sym < std::numeric_limits<std::int8_t>::min() || sym > std::numeric_limits<std::int8_t>::max())
            throw CodingError("symbol " + std::to_string(sym) + " does not fit in 8 bits");
        if (len < 1 || len > kMaxCodeLength)
            throw CodingError("code length " + std::to_string(len) + " for symbol " + std::to_string(sym) +
                              " is outside [1, " + std::to_string(kMaxCodeLength) + "]");
        kraft += std::uint64_t{1} << (63 - len);
        if (kraft > one)
            throw CodingError("code lengths violate the Kraft inequality");
        max_len = std::max(max_len, len);
    }

    HuffmanTable t;
    t.lengths_ = std::move(lengths);
    t.sorted_symbols_.reserve(t.lengths_.size());
    for (const auto& entry : t.lengths_)
        t.sorted_symbols_.push_back(entry.first);
    std::stable_sort(t.sorted_symbols_.begin(), t.sorted_symbols_.end(),
                     [&](int a, int b) { return t.lengths_.at(a) < t.lengths_.at(b); });

    t.first_code_.assign(max_len + 1, 0);
    t.first_index_.assign(max_len + 1, 0);
    t.length_count_.assign(max_len + 1, 0);
    for (const auto& entry : t.lengths_)
        ++t.length_count_[entry.second];

    std::uint64_t code = 0;
    std::size_t index = 0;
    for (unsigned len = 1; len <= max_len; ++len) {
        t.first_code_[len] = code;
        t.first_index_[len] = index;
        for (std::size_t k = 0; k < t.length_count_[len]; ++k)
            t.codes_[t.sorted_symbols_[index + k]] = code + k;
        code = (code + t.length_count_[len]) << 1;
        index += t.length_count_[len];
    }
    return t;
}

unsigned HuffmanTable::length(int symbol) const
{
    auto it = lengths_.find(symbol);
    if (it == lengths_.end())
        throw CodingError("symbol " + std::to_string(symbol) + " is not in the Huffman table");
    return it->second;
}

std::uint64_t HuffmanTable::code(int symbol) const
{
    auto it = codes_.find(symbol);
    if (it == codes_.end())
        throw CodingError("symbol " + std::to_string(symbol) + " is not in the Huffman table");
    return it->second;
}

void HuffmanTable::serialize(ByteWriter& out) const
{
    out.put_u16(static_cast<std::uint16_t>(lengths_.size()));
    for (const auto& [sym, len] : lengths_) {
        out.put_i8(static_cast<std::int8_t>(sym));
        out.put_u8(static_cast<std::uint8_t>(len));
    }
}

HuffmanTable HuffmanTable::parse(ByteReader& in)
{
    const std::size_t at = in.offset();
    const std::uint16_t n = in.get_u16("huffman alphabet size");
    std::map<int, unsigned> lengths;
    int prev = std::numeric_limits<int>::min();
    for (std::uint16_t k = 0; k < n; ++k) {
        const int sym = in.get_i8("huffman symbol");
        const unsigned len = in.get_u8("huffman code length");
        if (sym <= prev)
            throw FormatError("huffman table at offset " + std::to_string(at) +
                              ": symbols not strictly ascending at entry " + std::to_string(k));
        prev = sym;
        lengths.emplace(sym, len);
    }
    try {
        return from_lengths(std::move(lengths));
    } catch (const CodingError& e) {
        throw FormatError("huffman table at offset " + std::to_string(at) + ": " + e.what());
    }
}

HuffmanTable build_table(const SymbolHistogram& hist)
{
    struct Node {
        std::uint64_t count;
        int min_symbol;
        std::size_t id;
    };
    auto later = [](const Node& a, const Node& b) {
        return std::tie(a.count, a.min_symbol) > std::tie(b.count, b.min_symbol);
    };
    std::priority_queue<Node, std::vector<Node>, decltype(later)> queue(later);

    // members[id] lists the leaf symbols under node id.
    std::vector<std::vector<int>> members;
    std::map<int, unsigned> depth;
    for (const auto& [sym, count] : hist) {
        if (count == 0)
            continue;
        queue.push({count, sym, members.size()});
        members.push_back({sym});
        depth[sym] = 0;
    }
    if (queue.empty())
        throw ValueError("cannot build a Huffman table from an empty histogram");
    if (queue.size() == 1)
        return HuffmanTable::from_lengths({{queue.top().min_symbol, 1u}});

    while (queue.size() > 1) {
        const Node a = queue.top();
        queue.pop();
        const Node b = queue.top();
        queue.pop();
        std::vector<int> merged = std::move(members[a.id]);
        merged.insert(merged.end(), members[b.id].begin(), members[b.id].end());
        members[b.id].clear();
        for (int s : merged)
            ++depth[s];
        queue.push({a.count + b.count, std::min(a.min_symbol, b.min_symbol), members.size()});
        members.push_back(std::move(merged));
    }
    return HuffmanTable::from_lengths(std::move(depth));
}

BitSequence encode(std::span<const int> symbols, const HuffmanTable& table)
{
    BitWriter out;
    for (int s : symbols)
        out.write(table.code(s), table.length(s));
    return std::move(out).finish();
}

std::vector<int> decode(const BitSequence& bits, const HuffmanTable& table, std::size_t count)
{
    check_bit_sequence(bits, "huffman bitstream");
    std::vector<int> out;
    if (count == 0) {
        if (bits.bit_count != 0)
            throw FormatError("huffman bitstream has " + std::to_string(bits.bit_count) +
                              " bits but no symbols are expected");
        return out;
    }
    if (table.empty())
        throw FormatError("huffman bitstream expects symbols but the table is empty");

    out.reserve(count);
    BitReader in(bits);
    const auto max_len = static_cast<unsigned>(table.first_code_.size() - 1);
    while (out.size() < count) {
        const std::uint64_t start = in.position();
        std::uint64_t code = 0;
        bool matched = false;
        for (unsigned len = 1; len <= max_len; ++len) {
            code = (code << 1) | static_cast<std::uint64_t>(in.read_bit());
            const std::uint64_t offset = code - table.first_code_[len];
            if (code >= table.first_code_[len] && offset < table.length_count_[len]) {
                out.push_back(table.sorted_symbols_[table.first_index_[len] + offset]);
                matched = true;
                break;
            }
        }
        if (!matched)
            throw FormatError("invalid huffman codeword at bit " + std::to_string(start));
    }
    if (in.remaining() != 0)
        throw FormatError("huffman bitstream has " + std::to_string(in.remaining()) +
                          " trailing bits after " + std::to_string(count) + " symbols");
    return out;
}

std::uint64_t coded_bits(const SymbolHistogram& hist, const HuffmanTable& table)
{
    std::uint64_t bits = 0;
    for (const auto& [sym, count] : hist)
        if (count != 0)
            bits += count * table.length(sym);
    return bits;
}

} // namespace ilwp
