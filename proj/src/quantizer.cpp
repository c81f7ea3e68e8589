#include "ilwp/quantizer.hpp"

#include "ilwp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ilwp {

void check_bits(int bits)
{
    if (bits < kMinBits || bits > kMaxBits)
        throw ConfigError("quantization bits must be in [" + std::to_string(kMinBits) + ", " +
                          std::to_string(kMaxBits) + "], got " + std::to_string(bits));
}

QuantizedPlane quantize(std::span<const double> values, int bits)
{
    check_bits(bits);
    double peak = 0.0;
    for (double v : values) {
        if (!std::isfinite(v))
            throw ValueError("cannot quantize a non-finite value");
        peak = std::max(peak, std::abs(v));
    }

    const int levels = max_symbol(bits);
    QuantizedPlane plane;
    plane.bits = bits;
    plane.symbols.assign(values.size(), 0);
    if (peak == 0.0) {
        plane.scale = 1.0;
        return plane;
    }

    const double exact = peak / levels;
    if (exact > std::numeric_limits<float>::max() || exact < std::numeric_limits<float>::min())
        throw ValueError("quantization scale " + std::to_string(exact) + " is outside the float32 normal range");
    plane.scale = static_cast<float>(exact);

    for (std::size_t k = 0; k < values.size(); ++k) {
        // std::round is half-away-from-zero. The clamp only bites on the
        // peak element when float32 rounding made the scale slightly small.
        const double s = std::round(values[k] / plane.scale);
        plane.symbols[k] = static_cast<int>(std::clamp(s, -double(levels), double(levels)));
    }
    return plane;
}

std::vector<double> dequantize(const QuantizedPlane& plane)
{
    if (plane.bits < kMinBits || plane.bits > kMaxBits)
        throw FormatError("plane declares an invalid bit width " + std::to_string(plane.bits));
    if (!(plane.scale > 0.0) || !std::isfinite(plane.scale))
        throw FormatError("quantization scale must be positive and finite");
    const int levels = max_symbol(plane.bits);
    std::vector<double> out(plane.symbols.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const int s = plane.symbols[k];
        if (s < -levels || s > levels)
            throw FormatError("symbol " + std::to_string(s) + " at position " + std::to_string(k) +
                              " exceeds the " + std::to_string(plane.bits) + "-bit alphabet");
        out[k] = static_cast<double>(s) * plane.scale;
    }
    return out;
}

} // namespace ilwp
