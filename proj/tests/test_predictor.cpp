#include "ilwp/error.hpp"
#include "ilwp/predictor.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace ilwp;

namespace {

double l1_oracle(const Kernel3x3& a, const Kernel3x3& b)
{
    double s = 0;
    for (std::size_t e = 0; e < a.size(); ++e)
        s += a[e] > b[e] ? a[e] - b[e] : b[e] - a[e];
    return s;
}

KernelRef find(const WeightStore& s, const Kernel3x3& t, std::size_t i, SearchStrategy st)
{
    return find_best_prediction(s.layers(), t, i, st);
}

} // namespace

TEST_CASE("l1 distance")
{
    std::mt19937_64 rng(1);
    const Kernel3x3 a = testing::random_kernel(rng);
    CHECK(l1_distance(a, a) == 0.0);
    CHECK(l1_distance(testing::constant_kernel(1.0), testing::constant_kernel(0.0)) == 9.0);
    for (int k = 0; k < 100; ++k) {
        const Kernel3x3 x = testing::random_kernel(rng), y = testing::random_kernel(rng);
        CHECK(l1_distance(x, y) == doctest::Approx(l1_oracle(x, y)).epsilon(1e-14));
        CHECK(l1_distance(x, y) == l1_distance(y, x));
        CHECK(l1_distance(x, y) > 0.0);
    }
}

TEST_CASE("planted exact match is found by the full search")
{
    std::mt19937_64 rng(4);
    WeightStore base = testing::random_store(rng, {3, 3, 2}, 5.0, 9.0);
    std::vector<DepthwiseLayer> layers(base.layers().begin(), base.layers().end());
    layers[2].kernels[0] = layers[0].kernels[2];
    const WeightStore store(std::move(layers));

    const Kernel3x3& target = store.layer(2).kernels[0];
    const KernelRef full = find(store, target, 2, SearchStrategy::Full);
    CHECK(full == KernelRef{0, 2});
    for (double r : compute_residual(target, store.layer(0).kernels[2]))
        CHECK(r == 0.0);

    const KernelRef local = find(store, target, 2, SearchStrategy::Local);
    const auto oracle = testing::brute_force_argmin(store, target, 1, 2);
    CHECK(local == KernelRef{oracle.layer, oracle.kernel});
}

TEST_CASE("search matches an exhaustive scan on small random stores")
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const WeightStore store = testing::random_shaped_store(rng, 2, 4, 8);
        for (std::size_t i = 1; i < store.layer_count(); ++i) {
            for (const auto& t : store.layer(i).kernels) {
                const auto f = testing::brute_force_argmin(store, t, 0, i);
                const auto l = testing::brute_force_argmin(store, t, i - 1, i);
                CHECK(find(store, t, i, SearchStrategy::Full) == KernelRef{f.layer, f.kernel});
                CHECK(find(store, t, i, SearchStrategy::Local) == KernelRef{l.layer, l.kernel});
            }
        }
    }
}

TEST_CASE("ties go to the smallest layer, then the smallest kernel")
{
    const Kernel3x3 z = testing::constant_kernel(0.0);
    const Kernel3x3 one = testing::constant_kernel(1.0);
    const Kernel3x3 neg = testing::constant_kernel(-1.0);
    // Distances from the zero target: layer 0 {9, 9}, layer 1 {9, 9}.
    const WeightStore store({DepthwiseLayer{{neg, one}}, DepthwiseLayer{{one, neg}}, DepthwiseLayer{{z}}});
    CHECK(find(store, z, 2, SearchStrategy::Full) == KernelRef{0, 0});
    CHECK(find(store, z, 2, SearchStrategy::Local) == KernelRef{1, 0});
}

TEST_CASE("context beyond the target layer is ignored")
{
    const Kernel3x3 z = testing::constant_kernel(0.0);
    const WeightStore store({DepthwiseLayer{{testing::constant_kernel(2.0)}}, DepthwiseLayer{{z}}, DepthwiseLayer{{z}}});
    CHECK(find(store, z, 1, SearchStrategy::Full) == KernelRef{0, 0});
}

TEST_CASE("prediction errors")
{
    std::mt19937_64 rng(2);
    const WeightStore store = testing::random_store(rng, {2, 2});
    const Kernel3x3 t = store.layer(1).kernels[0];
    CHECK_THROWS_AS(find(store, t, 0, SearchStrategy::Full), PredictionError);
    CHECK_THROWS_AS(find(store, t, 0, SearchStrategy::Local), PredictionError);
    CHECK_THROWS_AS(find(store, t, 3, SearchStrategy::Full), PredictionError);
    std::vector<DepthwiseLayer> empty_ref(2);
    empty_ref[1].kernels.push_back(t);
    CHECK_THROWS_AS(find_best_prediction(empty_ref, t, 1, SearchStrategy::Full), PredictionError);
}

TEST_CASE("collocated index")
{
    static_assert(collocated_index(5, 4) == 1);
    CHECK(collocated_index(5, 4) == 1);
    CHECK(collocated_index(3, 8) == 3);
    CHECK(collocated_index(0, 1) == 0);
}

TEST_CASE("residuals")
{
    std::mt19937_64 rng(8);
    const Kernel3x3 r = testing::random_kernel(rng);
    for (double v : compute_residual(r, r))
        CHECK(v == 0.0);
    for (double v : compute_residual(testing::constant_kernel(0.2), testing::constant_kernel(0.1)))
        CHECK(v == doctest::Approx(0.1).epsilon(1e-15));
    for (int k = 0; k < 100; ++k) {
        const Kernel3x3 t = testing::random_kernel(rng), ref = testing::random_kernel(rng);
        const Kernel3x3 res = compute_residual(t, ref);
        for (std::size_t e = 0; e < 9; ++e)
            CHECK(res[e] + ref[e] == doctest::Approx(t[e]).epsilon(1e-15));
    }
}
