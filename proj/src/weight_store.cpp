#include "ilwp/weight_store.hpp"

#include "ilwp/byte_io.hpp"
#include "ilwp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ilwp {

namespace {

constexpr char kMagic[4] = {'I', 'L', 'W', 'P'};
constexpr std::size_t kHeaderBytes = 12;

std::string where(std::size_t layer, std::size_t kernel)
{
    return "layer " + std::to_string(layer) + " kernel " + std::to_string(kernel);
}

} // namespace

WeightStore::WeightStore(std::vector<DepthwiseLayer> layers, std::string model_name)
    : layers_(std::move(layers)), name_(std::move(model_name))
{
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (layers_[i].kernels.empty())
            throw ValueError("layer " + std::to_string(i) + " has no kernels");
        for (std::size_t j = 0; j < layers_[i].kernels.size(); ++j)
            for (double v : layers_[i].kernels[j])
                if (!std::isfinite(v))
                    throw ValueError("non-finite weight at " + where(i, j));
    }
}

std::vector<std::size_t> WeightStore::kernel_counts() const
{
    std::vector<std::size_t> counts;
    counts.reserve(layers_.size());
    for (const auto& l : layers_)
        counts.push_back(l.count());
    return counts;
}

std::size_t WeightStore::total_kernels() const
{
    std::size_t n = 0;
    for (const auto& l : layers_)
        n += l.count();
    return n;
}

std::size_t wgt_size(std::span<const std::size_t> kernel_counts)
{
    const std::size_t kernels = std::accumulate(kernel_counts.begin(), kernel_counts.end(), std::size_t{0});
    return kHeaderBytes + 4 * kernel_counts.size() + kKernelSize * sizeof(float) * kernels;
}

WeightStore load_weight_store(std::span<const std::uint8_t> bytes, std::string model_name)
{
    ByteReader in(bytes);
    auto magic = in.get_bytes(4, "magic");
    if (!std::equal(magic.begin(), magic.end(), kMagic))
        throw FormatError("bad magic: not a .wgt container");
    const auto version = in.get_u16("version");
    if (version != kWgtVersion)
        throw FormatError("unsupported .wgt version " + std::to_string(version));
    if (in.get_u16("reserved") != 0)
        throw FormatError("reserved header field is nonzero");

    const std::uint32_t layer_count = in.get_u32("layer count");
    if (layer_count == 0)
        throw FormatError("container declares zero layers");
    // Each layer needs at least 4 bytes of table plus 36 bytes of weights.
    if (static_cast<std::uint64_t>(layer_count) * 40 > in.remaining())
        throw FormatError("truncated input: " + std::to_string(layer_count) + " layers declared, " +
                          std::to_string(in.remaining()) + " bytes follow the header");

    std::vector<std::uint32_t> counts(layer_count);
    std::uint64_t total = 0;
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        counts[i] = in.get_u32("kernel count");
        if (counts[i] == 0)
            throw FormatError("layer " + std::to_string(i) + " declares zero kernels");
        total += counts[i];
    }
    const std::uint64_t payload = total * kKernelSize * sizeof(float);
    if (payload != in.remaining())
        throw FormatError("weight payload is " + std::to_string(in.remaining()) + " bytes, expected " +
                          std::to_string(payload));

    std::vector<DepthwiseLayer> layers(layer_count);
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        layers[i].kernels.resize(counts[i]);
        for (std::uint32_t j = 0; j < counts[i]; ++j) {
            for (auto& v : layers[i].kernels[j]) {
                const float f = in.get_f32("weight");
                if (!std::isfinite(f))
                    throw ValueError("non-finite weight at " + where(i, j));
                v = f;
            }
        }
    }
    return WeightStore(std::move(layers), std::move(model_name));
}

std::vector<std::uint8_t> save_weight_store(const WeightStore& store)
{
    if (store.empty())
        throw FormatError("cannot serialize a store with no layers");

    ByteWriter out;
    out.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
    out.put_u16(kWgtVersion);
    out.put_u16(0);
    out.put_u32(static_cast<std::uint32_t>(store.layer_count()));
    for (const auto& l : store.layers())
        out.put_u32(static_cast<std::uint32_t>(l.count()));
    for (std::size_t i = 0; i < store.layer_count(); ++i) {
        const auto& kernels = store.layer(i).kernels;
        for (std::size_t j = 0; j < kernels.size(); ++j) {
            for (double v : kernels[j]) {
                if (!(std::abs(v) <= std::numeric_limits<float>::max()))
                    throw ValueError("weight at " + where(i, j) + " is not finite in float32");
                out.put_f32(static_cast<float>(v));
            }
        }
    }
    return std::move(out).take();
}

} // namespace ilwp
