#include "ilwp/predictor.hpp"

#include "ilwp/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ilwp {

double l1_distance(const Kernel3x3& a, const Kernel3x3& b)
{
    double sum = 0.0;
    for (std::size_t k = 0; k < kKernelSize; ++k)
        sum += std::abs(a[k] - b[k]);
    return sum;
}

KernelRef find_best_prediction(std::span<const DepthwiseLayer> context, const Kernel3x3& target,
                               std::size_t layer_index, SearchStrategy strategy)
{
    if (layer_index == 0)
        throw PredictionError("layer 0 has no reference layers and is never predicted");
    if (context.size() < layer_index)
        throw PredictionError("prediction context has " + std::to_string(context.size()) +
                              " layers, layer " + std::to_string(layer_index) + " needs " +
                              std::to_string(layer_index));

    const std::size_t first = strategy == SearchStrategy::Full ? 0 : layer_index - 1;
    KernelRef best{};
    double best_dist = std::numeric_limits<double>::infinity();
    bool found = false;
    // Strict '<' over ascending (u, v) keeps the first minimum, which is the
    // tie-break order.
    for (std::size_t u = first; u < layer_index; ++u) {
        const auto& kernels = context[u].kernels;
        if (kernels.empty())
            throw PredictionError("reference layer " + std::to_string(u) + " is empty");
        for (std::size_t v = 0; v < kernels.size(); ++v) {
            const double d = l1_distance(target, kernels[v]);
            if (!found || d < best_dist) {
                best = {u, v};
                best_dist = d;
                found = true;
            }
        }
    }
    return best;
}

Kernel3x3 compute_residual(const Kernel3x3& target, const Kernel3x3& reference)
{
    Kernel3x3 r;
    for (std::size_t k = 0; k < kKernelSize; ++k)
        r[k] = target[k] - reference[k];
    return r;
}

} // namespace ilwp
