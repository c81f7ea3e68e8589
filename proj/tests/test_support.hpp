#pragma once

// Shared generators and independent oracles for the test suites.

#include "ilwp/weight_store.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ilwp::testing {

inline Kernel3x3 random_kernel(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<float> dist(static_cast<float>(lo), static_cast<float>(hi));
    Kernel3x3 k;
    for (auto& v : k)
        v = dist(rng);
    return k;
}

inline Kernel3x3 constant_kernel(double v)
{
    Kernel3x3 k;
    k.fill(v);
    return k;
}

/// Store with the given kernel counts and float32-representable weights in [lo, hi].
inline WeightStore random_store(std::mt19937_64& rng, const std::vector<std::size_t>& counts, double lo = -1.0,
                                double hi = 1.0)
{
    std::vector<DepthwiseLayer> layers(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        for (std::size_t j = 0; j < counts[i]; ++j)
            layers[i].kernels.push_back(random_kernel(rng, lo, hi));
    return WeightStore(std::move(layers), "random");
}

/// Random layer count in [min_layers, max_layers] and kernel counts in [1, max_kernels].
inline WeightStore random_shaped_store(std::mt19937_64& rng, std::size_t min_layers, std::size_t max_layers,
                                       std::size_t max_kernels)
{
    std::uniform_int_distribution<std::size_t> nl(min_layers, max_layers);
    std::uniform_int_distribution<std::size_t> nk(1, max_kernels);
    std::vector<std::size_t> counts(nl(rng));
    for (auto& c : counts)
        c = nk(rng);
    // Mix magnitudes so some stores have residuals much smaller than weights.
    std::uniform_int_distribution<int> scale_pick(0, 2);
    const double magnitude = std::array{1.0, 0.05, 4.0}[static_cast<std::size_t>(scale_pick(rng))];
    return random_store(rng, counts, -magnitude, magnitude);
}

/// Chain store for SVWH checks: uniform base kernels in [-1, 1], every later
/// layer is its predecessor plus a Gaussian offset tensor (sigma = 0.01) that
/// is drawn afresh every `redraw` layers and reused in between.
inline WeightStore drifting_store(std::mt19937_64& rng, std::size_t layers, std::size_t kernels, double sigma = 0.01,
                                  std::size_t redraw = 3)
{
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<DepthwiseLayer> out(layers);
    for (std::size_t j = 0; j < kernels; ++j)
        out[0].kernels.push_back(random_kernel(rng));
    std::vector<Kernel3x3> offset(kernels);
    for (std::size_t i = 1; i < layers; ++i) {
        if ((i - 1) % redraw == 0)
            for (auto& k : offset)
                for (auto& v : k)
                    v = noise(rng);
        for (std::size_t j = 0; j < kernels; ++j) {
            Kernel3x3 k;
            for (std::size_t e = 0; e < kKernelSize; ++e)
                k[e] = static_cast<float>(out[i - 1].kernels[j][e] + offset[j][e]);
            out[i].kernels.push_back(k);
        }
    }
    return WeightStore(std::move(out), "drifting");
}

/// Exhaustive argmin over (u, v) in ascending order, first minimum wins.
struct BruteForceRef {
    std::size_t layer;
    std::size_t kernel;
};

inline BruteForceRef brute_force_argmin(const WeightStore& context, const Kernel3x3& target, std::size_t first_layer,
                                        std::size_t end_layer)
{
    BruteForceRef best{0, 0};
    double best_d = INFINITY;
    for (std::size_t u = first_layer; u < end_layer; ++u) {
        for (std::size_t v = 0; v < context.layer(u).count(); ++v) {
            double d = 0;
            for (std::size_t e = 0; e < 9; ++e)
                d += std::fabs(target[e] - context.layer(u).kernels[v][e]);
            if (d < best_d) {
                best_d = d;
                best = {u, v};
            }
        }
    }
    return best;
}

} // namespace ilwp::testing
