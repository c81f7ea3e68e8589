#include "ilwp/analyzer.hpp"

#include "ilwp/error.hpp"
#include "ilwp/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ilwp {

SourceHeatmap prediction_source_heatmap(const WeightStore& store)
{
    const std::size_t layers = store.layer_count();
    if (layers < 2)
        throw AnalysisError("heatmap needs at least 2 layers, store has " + std::to_string(layers));

    SourceHeatmap map;
    map.tallies.assign(layers - 1, std::vector<std::uint64_t>(layers - 1, 0));
    map.percent.assign(layers - 1, std::vector<double>(layers - 1, 0.0));
    for (std::size_t i = 1; i < layers; ++i) {
        auto& row = map.tallies[i - 1];
        for (const auto& k : store.layer(i).kernels)
            ++row[find_best_prediction(store.layers(), k, i, SearchStrategy::Full).layer];
        const double total = static_cast<double>(store.layer(i).count());
        for (std::size_t u = 0; u < i; ++u)
            map.percent[i - 1][u] = 100.0 * static_cast<double>(row[u]) / total;
    }
    return map;
}

double svwh_ratio(const WeightStore& store)
{
    const std::size_t layers = store.layer_count();
    if (layers < 3)
        throw AnalysisError("SVWH ratio needs at least 3 layers, store has " + std::to_string(layers));

    std::uint64_t previous = 0;
    std::uint64_t total = 0;
    for (std::size_t i = 2; i < layers; ++i) {
        for (const auto& k : store.layer(i).kernels) {
            if (find_best_prediction(store.layers(), k, i, SearchStrategy::Full).layer == i - 1)
                ++previous;
            ++total;
        }
    }
    return static_cast<double>(previous) / static_cast<double>(total);
}

std::map<std::int64_t, std::uint64_t> residual_histogram(std::span<const double> values, double bin_width)
{
    if (!(bin_width > 0.0) || !std::isfinite(bin_width))
        throw ValueError("histogram bin width must be positive and finite");
    std::map<std::int64_t, std::uint64_t> hist;
    for (double v : values) {
        if (!std::isfinite(v))
            throw ValueError("cannot histogram a non-finite value");
        ++hist[static_cast<std::int64_t>(std::round(v / bin_width))];
    }
    return hist;
}

LaplaceFit fit_laplace(std::span<const double> values)
{
    if (values.size() < 2)
        throw AnalysisError("Laplace fit needs at least 2 values, got " + std::to_string(values.size()));

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double mu = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    double dev = 0.0;
    for (double v : sorted)
        dev += std::abs(v - mu);
    const double b = dev / static_cast<double>(n);
    if (!(b > 0.0))
        throw AnalysisError("degenerate sample: all values equal the median, Laplace scale is 0");
    return {mu, b, n};
}

double laplace_entropy(double b)
{
    if (!(b > 0.0) || !std::isfinite(b))
        throw ValueError("Laplace scale must be positive and finite");
    return std::log(2.0 * b) + 1.0;
}

double empirical_entropy(const SymbolHistogram& hist)
{
    std::uint64_t total = 0;
    for (const auto& entry : hist)
        total += entry.second;
    if (total == 0)
        throw ValueError("entropy of an empty histogram");

    double h = 0.0;
    for (const auto& [sym, count] : hist) {
        if (count == 0)
            continue;
        const double p = static_cast<double>(count) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

double zero_fraction(std::span<const int> symbols)
{
    if (symbols.empty())
        return 0.0;
    const auto zeros = std::count(symbols.begin(), symbols.end(), 0);
    return static_cast<double>(zeros) / static_cast<double>(symbols.size());
}

double average_code_length(const SymbolHistogram& hist, const HuffmanTable& table)
{
    std::uint64_t total = 0;
    for (const auto& entry : hist)
        total += entry.second;
    if (total == 0)
        throw ValueError("average code length of an empty histogram");
    return static_cast<double>(coded_bits(hist, table)) / static_cast<double>(total);
}

} // namespace ilwp
