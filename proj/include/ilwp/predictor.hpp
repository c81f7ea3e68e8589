#pragma once

#include "ilwp/weight_store.hpp"

#include <cstddef>
#include <span>

namespace ilwp {

enum class SearchStrategy {
    Full,  ///< any kernel of layers 0..i-1
    Local, ///< kernels of layer i-1 only
};

struct KernelRef {
    std::size_t layer = 0;
    std::size_t kernel = 0;

    auto operator<=>(const KernelRef&) const = default;
};

/// One predicted kernel: target (i, j) is coded as `residual` against source (u, v).
struct PredictionRecord {
    KernelRef target;
    KernelRef source;
    Kernel3x3 residual{};
};

double l1_distance(const Kernel3x3& a, const Kernel3x3& b);

/// Best reference for a kernel of layer `layer_index` among the kernels of
/// `context[0 .. layer_index-1]` (Full) or `context[layer_index-1]` (Local),
/// minimizing L1 distance. Ties go to the smallest layer, then the smallest
/// kernel index.
///
/// `context` must hold at least `layer_index` non-empty layers; entries at or
/// beyond `layer_index` are ignored. Throws PredictionError for layer 0 or an
/// undersized context.
KernelRef find_best_prediction(std::span<const DepthwiseLayer> context, const Kernel3x3& target,
                               std::size_t layer_index, SearchStrategy strategy);

/// Collocated kernel in the previous layer: j mod c_prev.
constexpr std::size_t collocated_index(std::size_t j, std::size_t c_prev)
{
    return j % c_prev;
}

Kernel3x3 compute_residual(const Kernel3x3& target, const Kernel3x3& reference);

} // namespace ilwp
