#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ilwp {

inline constexpr int kMinBits = 2;
inline constexpr int kMaxBits = 8;

/// Largest symbol magnitude at `bits`: 2^(bits-1) - 1.
constexpr int max_symbol(int bits)
{
    return (1 << (bits - 1)) - 1;
}

/// Symmetric mid-tread quantization of one plane of values.
///
/// `scale` is always representable as float32: the container stores it that
/// way and the encoder reconstructs with exactly what the decoder will read.
struct QuantizedPlane {
    std::vector<int> symbols;
    double scale = 1.0;
    int bits = kMaxBits;

    std::size_t count() const { return symbols.size(); }
    bool operator==(const QuantizedPlane&) const = default;
};

/// scale = max|x| / (2^(bits-1) - 1) rounded to float32 (1.0 for an all-zero
/// plane); symbol = x / scale rounded half away from zero.
/// Throws ConfigError for bits outside [2, 8] and ValueError for non-finite
/// input or a scale that is not representable in float32.
QuantizedPlane quantize(std::span<const double> values, int bits);

/// symbol * scale. Throws FormatError for an out-of-range symbol or a
/// non-positive scale.
std::vector<double> dequantize(const QuantizedPlane& plane);

/// Throws ConfigError unless kMinBits <= bits <= kMaxBits.
void check_bits(int bits);

} // namespace ilwp
