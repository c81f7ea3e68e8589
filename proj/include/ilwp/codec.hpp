#pragma once

#include "ilwp/bit_io.hpp"
#include "ilwp/huffman.hpp"
#include "ilwp/predictor.hpp"
#include "ilwp/quantizer.hpp"
#include "ilwp/weight_store.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ilwp {

enum class Mode : std::uint8_t {
    Baseline = 0, ///< quantize raw weights, no prediction
    Fss = 1,      ///< reference searched over all previous layers
    Lss = 2,      ///< reference searched over the previous layer
    Ill = 3,      ///< collocated reference j mod c_{i-1}, no indices stored
};

std::string_view mode_name(Mode mode);
/// Accepts "baseline", "fss", "lss", "ill" (case-sensitive). Throws ConfigError otherwise.
Mode parse_mode(std::string_view name);

inline constexpr std::uint16_t kIlwVersion = 1;

/// In-memory form of an .ilw file.
struct EncodedModel {
    Mode mode = Mode::Baseline;
    int bits = kMaxBits;
    std::vector<std::uint32_t> kernel_counts;
    std::vector<float> scales;      ///< one per layer; layer 0 is 0.0 and unused
    std::vector<float> first_layer; ///< c_0 x 9 raw weights
    HuffmanTable table;             ///< empty when no symbols are coded
    BitSequence non_texture;        ///< packed reference indices (FSS/LSS)
    std::uint32_t symbol_count = 0;
    BitSequence texture;            ///< Huffman-coded residual symbols

    bool operator==(const EncodedModel&) const = default;
};

struct SizeReport {
    std::uint64_t texture_bits = 0;
    std::uint64_t non_texture_bits = 0;
    std::uint64_t header_bits = 0;
    std::uint64_t total_bits = 0;

    bool operator==(const SizeReport&) const = default;
};

/// Kilobytes as 1000 bytes.
constexpr double to_kilobytes(std::uint64_t bits)
{
    return static_cast<double>(bits) / 8000.0;
}

/// Encoder side products, for analysis and for checking the closed loop.
struct EncoderTrace {
    /// One record per predicted kernel (FSS/LSS/ILL); empty for BASELINE.
    std::vector<PredictionRecord> predictions;
    /// Quantized plane of layer i at index i-1.
    std::vector<QuantizedPlane> planes;
    /// Values that were quantized (residuals, or raw weights for BASELINE), layer i at index i-1.
    std::vector<std::vector<double>> quantized_values;
    /// The encoder's own reconstruction; equals decode_model of the result.
    WeightStore reconstruction;
};

struct EncodeResult {
    EncodedModel model;
    EncoderTrace trace;
};

/// Closed-loop encoder.
///
/// Layer 0 is stored as raw float32 and seeds the reconstruction. Each later
/// layer is predicted from reconstructed kernels of earlier layers, its
/// residuals are quantized as one plane, and the reconstruction
/// ref + symbol * scale feeds the following layers. All symbols share one
/// Huffman table.
///
/// FSS/LSS reference each kernel against its L1 best match among the
/// reconstructed kernels. A layer that can be reproduced exactly by quantized
/// residuals against earlier reconstructions (a layer of a decoded model) is
/// coded that way instead, so re-encoding a decoded model reproduces the
/// original stream byte for byte.
///
/// Throws ConfigError for bits outside [2, 8] or a prediction mode on a store
/// with fewer than 2 layers, FormatError for an empty store.
EncodeResult encode_model_traced(const WeightStore& store, Mode mode, int bits);
EncodedModel encode_model(const WeightStore& store, Mode mode, int bits);

/// Inverse of encode_model. Throws FormatError naming the offending layer or stream.
WeightStore decode_model(const EncodedModel& enc);

std::vector<std::uint8_t> serialize_model(const EncodedModel& enc);
/// Throws FormatError with the byte offset or layer of the first inconsistency.
EncodedModel parse_model(std::span<const std::uint8_t> bytes);

/// Byte length of serialize_model(enc), computed without serializing.
std::size_t serialized_size(const EncodedModel& enc);

/// texture = coded residual bits, non_texture = index bits, header = every
/// other bit of the file (fixed fields, scales, Huffman table, raw first
/// layer, stream length fields and byte padding). total = 8 x file size.
SizeReport measure_sizes(const EncodedModel& enc);

/// Non-texture stream length implied by the index packing rule.
///
/// FSS: per kernel of layer i, u in index_width(i) bits then v in
/// index_width(max_{u<i} c_u) bits. LSS: v in index_width(c_{i-1}) bits.
std::uint64_t index_stream_bits(Mode mode, std::span<const std::uint32_t> kernel_counts);

struct SweepRow {
    int bits = 0;
    SizeReport sizes;
};

/// One encode per bit width, run concurrently; rows sorted by bit width.
std::vector<SweepRow> sweep_bits(const WeightStore& store, Mode mode, std::span<const int> bit_list);

} // namespace ilwp
