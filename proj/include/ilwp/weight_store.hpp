#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ilwp {

inline constexpr std::size_t kKernelSize = 9;

/// One 3x3 depthwise kernel, row-major.
using Kernel3x3 = std::array<double, kKernelSize>;

struct DepthwiseLayer {
    std::vector<Kernel3x3> kernels;

    std::size_t count() const { return kernels.size(); }
    bool operator==(const DepthwiseLayer&) const = default;
};

/// Ordered depthwise layers of a network, index 0 nearest the input.
///
/// Values are held in double precision. The .wgt container stores float32, so
/// stores read from disk are exactly representable; decoded stores may carry
/// reconstructions that are rounded to float32 when saved.
class WeightStore {
public:
    WeightStore() = default;

    // Throws ValueError if a layer is empty or a value is not finite.
    explicit WeightStore(std::vector<DepthwiseLayer> layers, std::string model_name = {});

    std::size_t layer_count() const { return layers_.size(); }
    bool empty() const { return layers_.empty(); }

    const DepthwiseLayer& layer(std::size_t i) const { return layers_.at(i); }
    std::span<const DepthwiseLayer> layers() const { return layers_; }

    std::vector<std::size_t> kernel_counts() const;
    std::size_t total_kernels() const;

    const std::string& model_name() const { return name_; }
    void set_model_name(std::string name) { name_ = std::move(name); }

    // Compares weights only; the label is carried out-of-band.
    bool operator==(const WeightStore& other) const { return layers_ == other.layers_; }

private:
    std::vector<DepthwiseLayer> layers_;
    std::string name_;
};

inline constexpr std::uint16_t kWgtVersion = 1;

/// Parses a .wgt container: "ILWP" | u16 version | u16 reserved | u32 L |
/// L x u32 kernel counts | float32 weights, kernel-major, row-major.
/// Throws FormatError on structural problems and ValueError on non-finite weights.
WeightStore load_weight_store(std::span<const std::uint8_t> bytes, std::string model_name = {});

/// Serializes to the .wgt layout. Throws FormatError for a store with no
/// layers and ValueError when a weight is not finite in float32.
std::vector<std::uint8_t> save_weight_store(const WeightStore& store);

/// Byte length of the .wgt encoding for the given kernel counts.
std::size_t wgt_size(std::span<const std::size_t> kernel_counts);

} // namespace ilwp
