// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "ilwp/analyzer.hpp"
#include "ilwp/codec.hpp"
#include "ilwp/huffman.hpp"
#include "ilwp/predictor.hpp"
#include "ilwp/quantizer.hpp"
#include "ilwp/weight_store.hpp"

#include "test_support.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/random/laplace_distribution.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace ilwp;

namespace {

constexpr std::array kModes{Mode::Baseline, Mode::Fss, Mode::Lss, Mode::Ill};

int failures = 0;

void report(bool ok, const char* name, const std::string& detail)
{
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

template <class... T>
std::string fmt(const T&... parts)
{
    std::ostringstream s;
    (s << ... << parts);
    return s.str();
}

struct CodecCase {
    WeightStore store;
    Mode mode;
    int bits;
};

std::vector<WeightStore> acceptance_stores()
{
    std::mt19937_64 rng(20240601);
    std::vector<WeightStore> stores;
    for (int k = 0; k < 50; ++k)
        stores.push_back(testing::random_shaped_store(rng, 2, 8, 64));
    return stores;
}

void round_trip_and_fixity(const std::vector<WeightStore>& stores)
{
    std::uint64_t cases = 0, bound_violations = 0, layer0_mismatches = 0, trace_mismatches = 0, not_fixed = 0;
    double worst_ratio = 0; // max |K - K^| / (scale / 2)
    double fixity_seconds = 0;

    const auto start = std::chrono::steady_clock::now();
    for (const auto& store : stores) {
        for (Mode mode : kModes) {
            for (int bits = kMinBits; bits <= kMaxBits; ++bits) {
                ++cases;
                const EncodeResult r = encode_model_traced(store, mode, bits);
                const auto bytes = serialize_model(r.model);
                const WeightStore decoded = decode_model(parse_model(bytes));
                trace_mismatches += !(decoded == r.trace.reconstruction);

                for (std::size_t j = 0; j < store.layer(0).count(); ++j)
                    for (std::size_t e = 0; e < 9; ++e)
                        layer0_mismatches += decoded.layer(0).kernels[j][e] != store.layer(0).kernels[j][e];
                for (std::size_t i = 1; i < store.layer_count(); ++i) {
                    const double half = static_cast<double>(r.model.scales[i]) / 2;
                    for (std::size_t j = 0; j < store.layer(i).count(); ++j)
                        for (std::size_t e = 0; e < 9; ++e) {
                            const double err = std::fabs(store.layer(i).kernels[j][e] - decoded.layer(i).kernels[j][e]);
                            bound_violations += err > half;
                            worst_ratio = std::max(worst_ratio, err / half);
                        }
                }

                const auto t0 = std::chrono::steady_clock::now();
                not_fixed += serialize_model(encode_model(decoded, mode, bits)) != bytes;
                fixity_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double bound_seconds = seconds - fixity_seconds;

    report(bound_violations == 0 && layer0_mismatches == 0 && trace_mismatches == 0 && bound_seconds < 60.0,
           "round_trip_bound",
           fmt(cases, " cases, bound violations ", bound_violations, ", worst |K-K^|/(scale/2) ", worst_ratio,
               ", layer-0 mismatches ", layer0_mismatches, ", encoder/decoder mismatches ", trace_mismatches,
               ", runtime ", bound_seconds, " s (limit 60)"));
    report(not_fixed == 0, "closed_loop_fixity",
           fmt(cases, " cases, non-identical re-encodes ", not_fixed, ", runtime ", fixity_seconds, " s"));
}

std::uint64_t optimal_cost_oracle(const std::vector<std::uint64_t>& counts)
{
    const std::size_t n = counts.size();
    if (n == 1)
        return counts[0];
    std::vector<unsigned> len(n, 1);
    std::uint64_t best = UINT64_MAX;
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == n) {
            double kraft = 0;
            std::uint64_t cost = 0;
            for (std::size_t s = 0; s < n; ++s) {
                kraft += std::ldexp(1.0, -static_cast<int>(len[s]));
                cost += counts[s] * len[s];
            }
            if (kraft <= 1.0)
                best = std::min(best, cost);
            return;
        }
        for (unsigned l = 1; l < n; ++l) {
            len[k] = l;
            rec(k + 1);
        }
    };
    rec(0);
    return best;
}

double entropy_bits_oracle(const std::vector<int>& s)
{
    std::map<int, std::uint64_t> freq;
    for (int v : s)
        ++freq[v];
    double h = 0;
    for (const auto& [sym, c] : freq) {
        const double p = static_cast<double>(c) / static_cast<double>(s.size());
        h -= p * std::log2(p);
    }
    return h;
}

void huffman_soundness()
{
    std::mt19937_64 rng(7);
    int streams = 0, round_trip_failures = 0, bound_failures = 0;
    double min_gap = INFINITY, max_gap = -INFINITY; // L - H

    auto check_stream = [&](const std::vector<int>& s) {
        ++streams;
        const auto hist = make_histogram(s);
        const auto table = build_table(hist);
        const auto bits = encode(s, table);
        round_trip_failures += decode(bits, table, s.size()) != s;
        const double L = static_cast<double>(bits.bit_count) / static_cast<double>(s.size());
        const double H = entropy_bits_oracle(s);
        bound_failures += !(L >= H - 1e-9 && L < H + 1.0);
        min_gap = std::min(min_gap, L - H);
        max_gap = std::max(max_gap, L - H);
    };

    // A one-symbol stream has H = 0 and codeword length 1, so L = H + 1 exactly;
    // only the round trip and the exact length are checked for it.
    const std::vector<int> constant(100000, 0);
    const auto constant_table = build_table(make_histogram(constant));
    const auto constant_bits = encode(constant, constant_table);
    const bool constant_ok =
        constant_bits.bit_count == constant.size() && decode(constant_bits, constant_table, constant.size()) == constant;

    constexpr std::size_t kSymbols = 100000;
    for (int bits = kMinBits; bits <= kMaxBits; ++bits) {
        for (double b : {0.01, 0.1, 1.0}) {
            boost::random::laplace_distribution<double> lap(0.0, b);
            std::vector<double> x(kSymbols);
            for (auto& v : x)
                v = lap(rng);
            check_stream(quantize(x, bits).symbols);
        }
        std::uniform_int_distribution<int> u(-max_symbol(bits), max_symbol(bits));
        std::vector<int> s(kSymbols);
        for (auto& v : s)
            v = u(rng);
        check_stream(s);
    }

    std::uint64_t histograms = 0, suboptimal = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
        std::vector<std::uint64_t> c(n, 1);
        while (true) {
            SymbolHistogram h;
            for (std::size_t s = 0; s < n; ++s)
                h[static_cast<int>(s)] = c[s];
            ++histograms;
            suboptimal += coded_bits(h, build_table(h)) != optimal_cost_oracle(c);
            std::size_t k = 0;
            while (k < n && c[k] == 6)
                c[k++] = 1;
            if (k == n)
                break;
            ++c[k];
        }
    }

    report(round_trip_failures == 0 && bound_failures == 0 && suboptimal == 0 && constant_ok, "huffman_soundness",
           fmt(streams, " streams of ", kSymbols, " symbols, round-trip failures ", round_trip_failures,
               ", entropy-bound failures ", bound_failures, ", L-H in [", min_gap, ", ", max_gap,
               "], one-symbol stream ", constant_ok ? "ok" : "broken", "; ", histograms,
               " exhaustive histograms, suboptimal ", suboptimal));
}

void search_oracle()
{
    std::mt19937_64 rng(99);
    std::uint64_t queries = 0, mismatches = 0, trace_queries = 0, trace_mismatches = 0;
    for (int k = 0; k < 200; ++k) {
        const WeightStore store = testing::random_shaped_store(rng, 2, 4, 8);
        for (std::size_t i = 1; i < store.layer_count(); ++i) {
            for (const auto& t : store.layer(i).kernels) {
                const auto full = testing::brute_force_argmin(store, t, 0, i);
                const auto local = testing::brute_force_argmin(store, t, i - 1, i);
                queries += 2;
                mismatches += find_best_prediction(store.layers(), t, i, SearchStrategy::Full) !=
                              KernelRef{full.layer, full.kernel};
                mismatches += find_best_prediction(store.layers(), t, i, SearchStrategy::Local) !=
                              KernelRef{local.layer, local.kernel};
            }
        }
        // Inside the encoder the search runs over reconstructed kernels.
        for (Mode mode : {Mode::Fss, Mode::Lss}) {
            const EncodeResult r = encode_model_traced(store, mode, 8);
            for (const auto& p : r.trace.predictions) {
                const std::size_t i = p.target.layer;
                const auto& target = store.layer(i).kernels[p.target.kernel];
                const auto best = testing::brute_force_argmin(r.trace.reconstruction, target,
                                                              mode == Mode::Fss ? 0 : i - 1, i);
                ++trace_queries;
                trace_mismatches += p.source != KernelRef{best.layer, best.kernel};
            }
        }
    }
    report(mismatches == 0 && trace_mismatches == 0, "search_oracle",
           fmt("200 stores, ", queries, " FSS/LSS searches, mismatches ", mismatches, "; ", trace_queries,
               " encoder selections, mismatches ", trace_mismatches));
}

void bit_accounting(const std::vector<WeightStore>& stores)
{
    std::uint64_t encodes = 0, sum_failures = 0, ill_nonzero = 0, ordering_failures = 0, strict_cases = 0;
    for (const auto& store : stores) {
        for (int bits = kMinBits; bits <= kMaxBits; ++bits) {
            std::map<Mode, SizeReport> sizes;
            for (Mode mode : kModes) {
                const EncodedModel m = encode_model(store, mode, bits);
                const SizeReport s = measure_sizes(m);
                ++encodes;
                sum_failures += s.total_bits != s.texture_bits + s.non_texture_bits + s.header_bits ||
                                s.total_bits != 8 * serialize_model(m).size();
                sizes[mode] = s;
            }
            ill_nonzero += sizes[Mode::Ill].non_texture_bits != 0;
            ill_nonzero += sizes[Mode::Baseline].non_texture_bits != 0;
            const auto fss = sizes[Mode::Fss].non_texture_bits, lss = sizes[Mode::Lss].non_texture_bits;
            // The FSS layer index u needs at least one bit once a layer has two candidate source layers.
            const bool strict = store.layer_count() >= 3;
            strict_cases += strict;
            ordering_failures += strict ? !(lss < fss) : !(lss <= fss);
        }
    }
    report(sum_failures == 0 && ill_nonzero == 0 && ordering_failures == 0, "bit_accounting",
           fmt(encodes, " encodes, sum-identity failures ", sum_failures, ", ILL/BASELINE nonzero index bits ",
               ill_nonzero, ", LSS<=FSS violations ", ordering_failures, " (", strict_cases, " strict cases)"));
}

void entropy_analytics()
{
    boost::math::quadrature::exp_sinh<double> integrator;
    double worst = 0;
    for (double b : {0.01, 0.1, 0.5, 1.0}) {
        auto integrand = [b](double x) {
            const double f = std::exp(-x / b) / (2 * b);
            return f > 0 ? -f * std::log(f) : 0.0;
        };
        const double q = 2 * integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity());
        worst = std::max(worst, std::fabs(q - laplace_entropy(b)));
    }

    std::mt19937_64 rng(1234);
    boost::random::laplace_distribution<double> lap(0.0, 0.05);
    std::vector<double> x(100000);
    for (auto& v : x)
        v = lap(rng);
    const LaplaceFit fit = fit_laplace(x);
    const double rel = std::fabs(fit.b - 0.05) / 0.05;
    const double h05 = laplace_entropy(0.5);

    report(worst <= 1e-6 && rel <= 0.05 && h05 == 1.0, "entropy_analytics",
           fmt("max |entropy - quadrature| ", worst, " (limit 1e-6), fitted b ", fit.b, " rel err ", rel,
               " (limit 0.05), laplace_entropy(0.5) = ", h05));
}

void svwh_trend()
{
    std::mt19937_64 rng(31337);
    const WeightStore store = testing::drifting_store(rng, 12, 64);
    const double ratio = svwh_ratio(store);
    const auto ill = measure_sizes(encode_model(store, Mode::Ill, 8)).total_bits;
    const auto base = measure_sizes(encode_model(store, Mode::Baseline, 8)).total_bits;
    report(ratio > 0.9 && ill < base, "svwh_trend",
           fmt("12 layers x 64 kernels, svwh_ratio ", ratio, " (need > 0.9), ILL total ", ill,
               " bits vs BASELINE ", base, " bits at 8 bits"));
}

} // namespace

int main()
{
    try {
        const auto stores = acceptance_stores();
        round_trip_and_fixity(stores);
        huffman_soundness();
        search_oracle();
        bit_accounting(stores);
        entropy_analytics();
        svwh_trend();
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
