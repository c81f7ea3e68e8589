#include "ilwp/codec.hpp"

#include "ilwp/byte_io.hpp"
#include "ilwp/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <string>

namespace ilwp {

namespace {

constexpr char kMagic[4] = {'I', 'L', 'W', 'C'};
// magic, version, mode, bits, layer count
constexpr std::size_t kFixedHeaderBytes = 4 + 2 + 1 + 1 + 4;

std::string layer_tag(std::size_t i)
{
    return "layer " + std::to_string(i);
}

bool predicts(Mode mode)
{
    return mode != Mode::Baseline;
}

SearchStrategy strategy_for(Mode mode)
{
    return mode == Mode::Fss ? SearchStrategy::Full : SearchStrategy::Local;
}

std::uint32_t max_count_before(std::span<const std::uint32_t> counts, std::size_t i)
{
    return *std::max_element(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(i));
}

Kernel3x3 reconstruct(const Kernel3x3& reference, std::span<const int> symbols, double scale)
{
    Kernel3x3 k;
    for (std::size_t e = 0; e < kKernelSize; ++e)
        k[e] = reference[e] + static_cast<double>(symbols[e]) * scale;
    return k;
}

Kernel3x3 dequantize_kernel(std::span<const int> symbols, double scale)
{
    Kernel3x3 k;
    for (std::size_t e = 0; e < kKernelSize; ++e)
        k[e] = static_cast<double>(symbols[e]) * scale;
    return k;
}

// Quantized residuals and reconstruction of one layer for a fixed set of references.
struct LayerCoding {
    std::vector<KernelRef> refs;
    std::vector<double> values;
    QuantizedPlane plane;
    std::vector<Kernel3x3> recon;
};

LayerCoding code_layer(const DepthwiseLayer& target, std::span<const DepthwiseLayer> context,
                       std::vector<KernelRef> refs, int bits)
{
    LayerCoding c;
    c.refs = std::move(refs);
    c.values.reserve(target.count() * kKernelSize);
    for (std::size_t j = 0; j < target.count(); ++j) {
        const auto r = compute_residual(target.kernels[j], context[c.refs[j].layer].kernels[c.refs[j].kernel]);
        c.values.insert(c.values.end(), r.begin(), r.end());
    }
    c.plane = quantize(c.values, bits);
    c.recon.reserve(target.count());
    for (std::size_t j = 0; j < target.count(); ++j) {
        const auto& ref = context[c.refs[j].layer].kernels[c.refs[j].kernel];
        c.recon.push_back(reconstruct(ref, std::span(c.plane.symbols).subspan(j * kKernelSize, kKernelSize),
                                      c.plane.scale));
    }
    return c;
}

std::vector<KernelRef> best_references(std::span<const Kernel3x3> kernels, std::span<const DepthwiseLayer> context,
                                       std::size_t layer, SearchStrategy strategy)
{
    std::vector<KernelRef> refs;
    refs.reserve(kernels.size());
    for (const auto& k : kernels)
        refs.push_back(find_best_prediction(context, k, layer, strategy));
    return refs;
}

// Candidate scales under which some (kernel, candidate) pair reproduces the
// kernel bit-exactly when that pair alone sets the peak. A kernel decoded
// from a stream yields the scale it was coded with.
std::vector<double> self_consistent_scales(std::span<const Kernel3x3> kernels, std::span<const DepthwiseLayer> context,
                                           std::size_t first, std::size_t layer, int bits)
{
    const int levels = max_symbol(bits);
    std::vector<double> scales;
    std::array<int, kKernelSize> symbols;
    for (const auto& kernel : kernels) {
        for (std::size_t u = first; u < layer; ++u) {
            for (const auto& ref : context[u].kernels) {
                double peak = 0.0;
                for (std::size_t e = 0; e < kKernelSize; ++e)
                    peak = std::max(peak, std::abs(kernel[e] - ref[e]));
                const double exact = peak / levels;
                if (!(exact >= std::numeric_limits<float>::min() && exact <= std::numeric_limits<float>::max()))
                    continue;
                const double scale = static_cast<float>(exact);
                for (std::size_t e = 0; e < kKernelSize; ++e)
                    symbols[e] = static_cast<int>(
                        std::clamp(std::round((kernel[e] - ref[e]) / scale), -double(levels), double(levels)));
                if (reconstruct(ref, symbols, scale) == kernel)
                    scales.push_back(scale);
            }
        }
    }
    std::sort(scales.begin(), scales.end(), std::greater<>());
    scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
    return scales;
}

// For each kernel, the nearest (L1, then index) candidate that the quantized
// residual at `scale` reproduces bit-exactly. nullopt if some kernel has none.
std::optional<std::vector<KernelRef>> exact_references(std::span<const Kernel3x3> kernels,
                                                       std::span<const DepthwiseLayer> context, std::size_t first,
                                                       std::size_t layer, double scale, int bits)
{
    const int levels = max_symbol(bits);
    std::vector<KernelRef> refs;
    refs.reserve(kernels.size());
    std::array<int, kKernelSize> symbols;
    for (const auto& kernel : kernels) {
        std::optional<KernelRef> best;
        double best_dist = 0.0;
        for (std::size_t u = first; u < layer; ++u) {
            for (std::size_t v = 0; v < context[u].count(); ++v) {
                const auto& ref = context[u].kernels[v];
                bool in_range = true;
                for (std::size_t e = 0; e < kKernelSize && in_range; ++e) {
                    const double q = std::round((kernel[e] - ref[e]) / scale);
                    in_range = std::abs(q) <= levels;
                    symbols[e] = static_cast<int>(q);
                }
                if (!in_range || reconstruct(ref, symbols, scale) != kernel)
                    continue;
                const double d = l1_distance(kernel, ref);
                if (!best || d < best_dist) {
                    best = KernelRef{u, v};
                    best_dist = d;
                }
            }
        }
        if (!best)
            return std::nullopt;
        refs.push_back(*best);
    }
    return refs;
}

// Searched-mode coding of one layer. The L1 best match over reconstructed
// kernels is the default. When the layer can instead be reproduced exactly
// (true for a layer decoded from a stream) that representation wins, which
// makes encode(decode(x)) == x.
LayerCoding code_searched_layer(const DepthwiseLayer& target, std::span<const DepthwiseLayer> context,
                                std::size_t layer, SearchStrategy strategy, int bits)
{
    LayerCoding plain = code_layer(target, context, best_references(target.kernels, context, layer, strategy), bits);
    if (plain.recon == target.kernels)
        return plain;

    const std::size_t first = strategy == SearchStrategy::Full ? 0 : layer - 1;
    std::vector<double> scales{plain.plane.scale};
    for (double s : self_consistent_scales(target.kernels, context, first, layer, bits))
        if (s != plain.plane.scale)
            scales.push_back(s);

    for (double s : scales) {
        auto refs = exact_references(target.kernels, context, first, layer, s, bits);
        if (!refs)
            continue;
        LayerCoding exact = code_layer(target, context, std::move(*refs), bits);
        if (exact.recon == target.kernels)
            return exact;
    }
    return plain;
}

void check_float32(float v, const std::string& where)
{
    if (!std::isfinite(v))
        throw FormatError("non-finite value in " + where);
}

} // namespace

std::string_view mode_name(Mode mode)
{
    switch (mode) {
    case Mode::Baseline:
        return "baseline";
    case Mode::Fss:
        return "fss";
    case Mode::Lss:
        return "lss";
    case Mode::Ill:
        return "ill";
    }
    return "unknown";
}

Mode parse_mode(std::string_view name)
{
    for (Mode m : {Mode::Baseline, Mode::Fss, Mode::Lss, Mode::Ill})
        if (mode_name(m) == name)
            return m;
    throw ConfigError("unknown mode '" + std::string(name) + "' (expected baseline, fss, lss or ill)");
}

std::uint64_t index_stream_bits(Mode mode, std::span<const std::uint32_t> kernel_counts)
{
    std::uint64_t bits = 0;
    for (std::size_t i = 1; i < kernel_counts.size(); ++i) {
        std::uint64_t per_kernel = 0;
        if (mode == Mode::Fss)
            per_kernel = index_width(i) + index_width(max_count_before(kernel_counts, i));
        else if (mode == Mode::Lss)
            per_kernel = index_width(kernel_counts[i - 1]);
        bits += per_kernel * kernel_counts[i];
    }
    return bits;
}

EncodeResult encode_model_traced(const WeightStore& store, Mode mode, int bits)
{
    check_bits(bits);
    if (store.empty())
        throw FormatError("cannot encode a store with no layers");
    if (predicts(mode) && store.layer_count() < 2)
        throw ConfigError(std::string(mode_name(mode)) + " mode needs at least 2 layers, store has " +
                          std::to_string(store.layer_count()));

    const std::size_t layer_count = store.layer_count();
    EncodeResult result;
    EncodedModel& enc = result.model;
    EncoderTrace& trace = result.trace;
    enc.mode = mode;
    enc.bits = bits;
    for (const auto& l : store.layers())
        enc.kernel_counts.push_back(static_cast<std::uint32_t>(l.count()));
    enc.scales.assign(layer_count, 0.0f);

    // Layer 0 is kept raw at container precision and seeds the reconstruction.
    std::vector<DepthwiseLayer> recon(layer_count);
    for (const auto& k : store.layer(0).kernels) {
        Kernel3x3 raw;
        for (std::size_t e = 0; e < kKernelSize; ++e) {
            const auto f = static_cast<float>(k[e]);
            if (!std::isfinite(f))
                throw ValueError("layer 0 weight is not finite in float32");
            enc.first_layer.push_back(f);
            raw[e] = f;
        }
        recon[0].kernels.push_back(raw);
    }

    std::vector<int> symbols;
    BitWriter indices;
    const std::span<const DepthwiseLayer> context(recon);

    for (std::size_t i = 1; i < layer_count; ++i) {
        const DepthwiseLayer& target = store.layer(i);
        LayerCoding coding;

        if (mode == Mode::Baseline) {
            for (const auto& k : target.kernels)
                coding.values.insert(coding.values.end(), k.begin(), k.end());
            coding.plane = quantize(coding.values, bits);
            for (std::size_t j = 0; j < target.count(); ++j)
                coding.recon.push_back(dequantize_kernel(
                    std::span(coding.plane.symbols).subspan(j * kKernelSize, kKernelSize), coding.plane.scale));
        } else if (mode == Mode::Ill) {
            std::vector<KernelRef> refs;
            for (std::size_t j = 0; j < target.count(); ++j)
                refs.push_back({i - 1, collocated_index(j, recon[i - 1].count())});
            coding = code_layer(target, context, std::move(refs), bits);
        } else {
            coding = code_searched_layer(target, context, i, strategy_for(mode), bits);
        }

        enc.scales[i] = static_cast<float>(coding.plane.scale);
        symbols.insert(symbols.end(), coding.plane.symbols.begin(), coding.plane.symbols.end());

        if (mode == Mode::Fss) {
            const unsigned u_width = index_width(i);
            const unsigned v_width = index_width(max_count_before(enc.kernel_counts, i));
            for (const auto& r : coding.refs) {
                indices.write(r.layer, u_width);
                indices.write(r.kernel, v_width);
            }
        } else if (mode == Mode::Lss) {
            const unsigned v_width = index_width(enc.kernel_counts[i - 1]);
            for (const auto& r : coding.refs)
                indices.write(r.kernel, v_width);
        }

        for (std::size_t j = 0; j < coding.refs.size(); ++j) {
            PredictionRecord rec;
            rec.target = {i, j};
            rec.source = coding.refs[j];
            std::copy_n(coding.values.begin() + static_cast<std::ptrdiff_t>(j * kKernelSize), kKernelSize,
                        rec.residual.begin());
            trace.predictions.push_back(rec);
        }
        recon[i].kernels = std::move(coding.recon);
        trace.planes.push_back(std::move(coding.plane));
        trace.quantized_values.push_back(std::move(coding.values));
    }

    enc.non_texture = std::move(indices).finish();
    enc.symbol_count = static_cast<std::uint32_t>(symbols.size());
    if (!symbols.empty()) {
        enc.table = build_table(make_histogram(symbols));
        enc.texture = encode(symbols, enc.table);
    }
    trace.reconstruction = WeightStore(std::move(recon), store.model_name());
    return result;
}

EncodedModel encode_model(const WeightStore& store, Mode mode, int bits)
{
    return encode_model_traced(store, mode, bits).model;
}

namespace {

// Structural checks shared by decode_model and parse_model.
void validate_layout(const EncodedModel& enc)
{
    if (static_cast<std::uint8_t>(enc.mode) > static_cast<std::uint8_t>(Mode::Ill))
        throw FormatError("unknown mode " + std::to_string(static_cast<int>(enc.mode)));
    if (enc.bits < kMinBits || enc.bits > kMaxBits)
        throw FormatError("invalid quantization bits " + std::to_string(enc.bits));
    const std::size_t layer_count = enc.kernel_counts.size();
    if (layer_count == 0)
        throw FormatError("encoded model has no layers");
    if (predicts(enc.mode) && layer_count < 2)
        throw FormatError(std::string(mode_name(enc.mode)) + " stream with a single layer");
    for (std::size_t i = 0; i < layer_count; ++i)
        if (enc.kernel_counts[i] == 0)
            throw FormatError(layer_tag(i) + " declares zero kernels");
    if (enc.scales.size() != layer_count)
        throw FormatError("expected " + std::to_string(layer_count) + " scales, found " +
                          std::to_string(enc.scales.size()));
    if (enc.scales[0] != 0.0f || std::signbit(enc.scales[0]))
        throw FormatError("layer 0 scale must be 0.0");
    for (std::size_t i = 1; i < layer_count; ++i) {
        const float s = enc.scales[i];
        if (!std::isfinite(s) || !(s > 0.0f))
            throw FormatError(layer_tag(i) + " has invalid scale " + std::to_string(s));
    }
    if (enc.first_layer.size() != static_cast<std::size_t>(enc.kernel_counts[0]) * kKernelSize)
        throw FormatError("first-layer block holds " + std::to_string(enc.first_layer.size()) +
                          " values, expected " + std::to_string(enc.kernel_counts[0] * kKernelSize));
    for (float v : enc.first_layer)
        check_float32(v, "first-layer block");

    const std::uint64_t expected_indices = index_stream_bits(enc.mode, enc.kernel_counts);
    if (enc.non_texture.bit_count != expected_indices)
        throw FormatError("non-texture stream has " + std::to_string(enc.non_texture.bit_count) +
                          " bits, layout requires " + std::to_string(expected_indices));
    check_bit_sequence(enc.non_texture, "non-texture stream");

    std::uint64_t expected_symbols = 0;
    for (std::size_t i = 1; i < layer_count; ++i)
        expected_symbols += std::uint64_t{enc.kernel_counts[i]} * kKernelSize;
    if (enc.symbol_count != expected_symbols)
        throw FormatError("texture stream declares " + std::to_string(enc.symbol_count) + " symbols, layout requires " +
                          std::to_string(expected_symbols));
    check_bit_sequence(enc.texture, "texture stream");
    if (enc.symbol_count == 0 && !enc.table.empty())
        throw FormatError("huffman table present but no symbols are coded");
}

} // namespace

WeightStore decode_model(const EncodedModel& enc)
{
    validate_layout(enc);
    const std::size_t layer_count = enc.kernel_counts.size();

    std::vector<DepthwiseLayer> recon(layer_count);
    recon[0].kernels.resize(enc.kernel_counts[0]);
    for (std::size_t j = 0; j < recon[0].count(); ++j)
        for (std::size_t e = 0; e < kKernelSize; ++e)
            recon[0].kernels[j][e] = enc.first_layer[j * kKernelSize + e];

    std::vector<int> symbols;
    try {
        symbols = decode(enc.texture, enc.table, enc.symbol_count);
    } catch (const FormatError& e) {
        throw FormatError(std::string("texture stream: ") + e.what());
    }

    BitReader indices(enc.non_texture);
    std::size_t cursor = 0;
    for (std::size_t i = 1; i < layer_count; ++i) {
        QuantizedPlane plane;
        plane.bits = enc.bits;
        plane.scale = enc.scales[i];
        const std::size_t count = enc.kernel_counts[i];
        plane.symbols.assign(symbols.begin() + static_cast<std::ptrdiff_t>(cursor),
                             symbols.begin() + static_cast<std::ptrdiff_t>(cursor + count * kKernelSize));
        cursor += count * kKernelSize;
        try {
            dequantize(plane); // range check only
        } catch (const FormatError& e) {
            throw FormatError(layer_tag(i) + ": " + e.what());
        }

        auto& out = recon[i].kernels;
        out.reserve(count);
        for (std::size_t j = 0; j < count; ++j) {
            const auto s = std::span(plane.symbols).subspan(j * kKernelSize, kKernelSize);
            KernelRef ref{i - 1, 0};
            switch (enc.mode) {
            case Mode::Baseline:
                out.push_back(dequantize_kernel(s, plane.scale));
                continue;
            case Mode::Ill:
                ref.kernel = collocated_index(j, recon[i - 1].count());
                break;
            case Mode::Fss:
                ref.layer = indices.read(index_width(i));
                ref.kernel = indices.read(index_width(max_count_before(enc.kernel_counts, i)));
                break;
            case Mode::Lss:
                ref.kernel = indices.read(index_width(enc.kernel_counts[i - 1]));
                break;
            }
            if (ref.layer >= i || ref.kernel >= recon[ref.layer].count())
                throw FormatError(layer_tag(i) + " kernel " + std::to_string(j) + ": reference (" +
                                  std::to_string(ref.layer) + ", " + std::to_string(ref.kernel) + ") out of range");
            out.push_back(reconstruct(recon[ref.layer].kernels[ref.kernel], s, plane.scale));
        }
    }
    return WeightStore(std::move(recon));
}

std::size_t serialized_size(const EncodedModel& enc)
{
    const std::size_t layers = enc.kernel_counts.size();
    return kFixedHeaderBytes + 4 * layers + 4 * layers + 4 * enc.first_layer.size() + enc.table.serialized_size() +
           4 + enc.non_texture.bytes.size() + 4 + 4 + enc.texture.bytes.size();
}

std::vector<std::uint8_t> serialize_model(const EncodedModel& enc)
{
    validate_layout(enc);
    ByteWriter out;
    out.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
    out.put_u16(kIlwVersion);
    out.put_u8(static_cast<std::uint8_t>(enc.mode));
    out.put_u8(static_cast<std::uint8_t>(enc.bits));
    out.put_u32(static_cast<std::uint32_t>(enc.kernel_counts.size()));
    for (auto c : enc.kernel_counts)
        out.put_u32(c);
    for (float s : enc.scales)
        out.put_f32(s);
    for (float v : enc.first_layer)
        out.put_f32(v);
    enc.table.serialize(out);
    out.put_u32(static_cast<std::uint32_t>(enc.non_texture.bit_count));
    out.put_bytes(enc.non_texture.bytes);
    out.put_u32(enc.symbol_count);
    out.put_u32(static_cast<std::uint32_t>(enc.texture.bit_count));
    out.put_bytes(enc.texture.bytes);
    return std::move(out).take();
}

EncodedModel parse_model(std::span<const std::uint8_t> bytes)
{
    ByteReader in(bytes);
    auto magic = in.get_bytes(4, "magic");
    if (!std::equal(magic.begin(), magic.end(), kMagic))
        throw FormatError("bad magic: not an .ilw stream");
    const auto version = in.get_u16("version");
    if (version != kIlwVersion)
        throw FormatError("unsupported .ilw version " + std::to_string(version));

    EncodedModel enc;
    const auto mode = in.get_u8("mode");
    if (mode > static_cast<std::uint8_t>(Mode::Ill))
        throw FormatError("unknown mode " + std::to_string(mode) + " at offset 6");
    enc.mode = static_cast<Mode>(mode);
    enc.bits = in.get_u8("bits");

    const std::uint32_t layer_count = in.get_u32("layer count");
    // counts + scales need 8 bytes per layer.
    if (static_cast<std::uint64_t>(layer_count) * 8 > in.remaining())
        throw FormatError("truncated input: " + std::to_string(layer_count) + " layers declared at offset 8");
    for (std::uint32_t i = 0; i < layer_count; ++i)
        enc.kernel_counts.push_back(in.get_u32("kernel count"));
    for (std::uint32_t i = 0; i < layer_count; ++i)
        enc.scales.push_back(in.get_f32("layer scale"));

    if (layer_count != 0) {
        const std::uint64_t raw = std::uint64_t{enc.kernel_counts[0]} * kKernelSize;
        if (raw * 4 > in.remaining())
            throw FormatError("truncated input: first-layer block of " + std::to_string(raw) + " floats at offset " +
                              std::to_string(in.offset()));
        enc.first_layer.reserve(raw);
        for (std::uint64_t k = 0; k < raw; ++k)
            enc.first_layer.push_back(in.get_f32("first-layer weight"));
    }

    enc.table = HuffmanTable::parse(in);

    enc.non_texture.bit_count = in.get_u32("non-texture bit length");
    {
        const auto b = in.get_bytes((enc.non_texture.bit_count + 7) / 8, "non-texture stream");
        enc.non_texture.bytes.assign(b.begin(), b.end());
    }
    enc.symbol_count = in.get_u32("texture symbol count");
    enc.texture.bit_count = in.get_u32("texture bit length");
    {
        const auto b = in.get_bytes((enc.texture.bit_count + 7) / 8, "texture stream");
        enc.texture.bytes.assign(b.begin(), b.end());
    }
    if (in.remaining() != 0)
        throw FormatError(std::to_string(in.remaining()) + " trailing bytes at offset " + std::to_string(in.offset()));

    validate_layout(enc);
    return enc;
}

SizeReport measure_sizes(const EncodedModel& enc)
{
    SizeReport r;
    r.texture_bits = enc.texture.bit_count;
    r.non_texture_bits = enc.non_texture.bit_count;
    r.total_bits = 8 * static_cast<std::uint64_t>(serialized_size(enc));
    r.header_bits = r.total_bits - r.texture_bits - r.non_texture_bits;
    return r;
}

std::vector<SweepRow> sweep_bits(const WeightStore& store, Mode mode, std::span<const int> bit_list)
{
    if (bit_list.empty())
        throw ConfigError("sweep needs at least one bit width");
    std::vector<int> sorted(bit_list.begin(), bit_list.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ConfigError("sweep bit list contains duplicates");
    for (int b : sorted)
        check_bits(b);

    std::vector<std::future<SizeReport>> jobs;
    jobs.reserve(sorted.size());
    for (int b : sorted)
        jobs.push_back(std::async(std::launch::async, [&store, mode, b] {
            return measure_sizes(encode_model(store, mode, b));
        }));

    std::vector<SweepRow> rows;
    rows.reserve(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k)
        rows.push_back({sorted[k], jobs[k].get()});
    return rows;
}

} // namespace ilwp
