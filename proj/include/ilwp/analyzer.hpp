#pragma once

#include "ilwp/huffman.hpp"
#include "ilwp/weight_store.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace ilwp {

/// Where full-search best predictions come from, per target layer.
///
/// Row r describes target layer r + 1; column u is source layer u (< r + 1).
/// Entries at or above the diagonal are zero by construction.
struct SourceHeatmap {
    std::vector<std::vector<std::uint64_t>> tallies;
    std::vector<std::vector<double>> percent; ///< each row sums to 100
};

/// Runs the full search over the ORIGINAL weights for every kernel of layers
/// i >= 1 and tallies the source layer. Throws AnalysisError for < 2 layers.
SourceHeatmap prediction_source_heatmap(const WeightStore& store);

/// Fraction of kernels in layers i >= 2 whose full-search best match lies in
/// layer i - 1. Throws AnalysisError for fewer than 3 layers.
double svwh_ratio(const WeightStore& store);

/// Histogram with bins centered at k * bin_width; key is k. Values are
/// assigned to the nearest center, halves rounded away from zero so that
/// negating the input mirrors the histogram. Throws ValueError unless
/// bin_width is positive and finite, or for non-finite input.
std::map<std::int64_t, std::uint64_t> residual_histogram(std::span<const double> values, double bin_width);

struct LaplaceFit {
    double mu = 0.0;
    double b = 0.0;
    std::size_t count = 0;
};

/// Maximum-likelihood Laplace parameters: mu = sample median (midpoint of
/// the two middle values for even counts), b = mean |x - mu|.
/// Throws AnalysisError for fewer than 2 values or b == 0.
LaplaceFit fit_laplace(std::span<const double> values);

/// Differential entropy of Laplace(mu, b) in nats: ln(2b) + 1.
/// Throws ValueError unless b > 0.
double laplace_entropy(double b);

/// Shannon entropy of a histogram in bits. Throws ValueError when empty.
double empirical_entropy(const SymbolHistogram& hist);

/// Fraction of symbols equal to zero; 0 for an empty span.
double zero_fraction(std::span<const int> symbols);

/// Mean codeword length of `hist` under `table`, in bits per symbol.
double average_code_length(const SymbolHistogram& hist, const HuffmanTable& table);

} // namespace ilwp
