// Microbenchmarks for the hot kernels: census transform, cost-volume
// accumulation, semi-global aggregation, the confidence-filter pool and
// sub-pixel refinement. Sizes are chosen so one iteration stays well under a
// second; scale the ranges up to probe full-resolution behavior.
#include <benchmark/benchmark.h>

#include <random>

#include "ssf/census.hpp"
#include "ssf/geometry.hpp"
#include "ssf/refine.hpp"
#include "ssf/sgm.hpp"

namespace {

ssf::MultiBandImage random_image(int width, int height, unsigned seed) {
    ssf::MultiBandImage img = ssf::MultiBandImage::create(width, height, 1);
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dist(0, 255);
    for (float& sample : img.data)
        sample = static_cast<float>(dist(rng));
    return img;
}

struct MatchFixture {
    ssf::MultiBandImage left;
    ssf::MultiBandImage right;
    ssf::CensusImage census_left;
    ssf::CensusImage census_right;
    ssf::CostVolumeF dsi;

    MatchFixture(int width, int height, int d_max)
        : left(random_image(width, height, 11)),
          right(random_image(width, height, 23)),
          census_left(ssf::census_transform(left)),
          census_right(ssf::census_transform(right)),
          dsi(ssf::compute_dsi<float>(census_left, census_right, d_max)) {}
};

void bm_census(benchmark::State& state) {
    const auto img = random_image(static_cast<int>(state.range(0)),
                                  static_cast<int>(state.range(1)), 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(ssf::census_transform(img));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(bm_census)->Args({640, 480})->Args({1280, 720});

void bm_accumulate_dsi(benchmark::State& state) {
    MatchFixture fx(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)),
                    static_cast<int>(state.range(2)));
    auto acc = ssf::CostVolumeF::zeros(fx.dsi.width, fx.dsi.height, fx.dsi.d_max);
    for (auto _ : state) {
        ssf::accumulate_dsi(acc, fx.census_left, fx.census_right);
        benchmark::DoNotOptimize(acc.costs.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1) *
                            state.range(2));
}
BENCHMARK(bm_accumulate_dsi)->Args({640, 480, 64});

void bm_sgm_aggregate(benchmark::State& state) {
    MatchFixture fx(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)),
                    static_cast<int>(state.range(2)));
    ssf::SgmParams params;
    params.paths = static_cast<int>(state.range(3));
    for (auto _ : state)
        benchmark::DoNotOptimize(ssf::sgm_aggregate(fx.dsi, params));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1) *
                            state.range(2) * state.range(3));
}
BENCHMARK(bm_sgm_aggregate)->Args({320, 240, 64, 4})->Args({320, 240, 64, 8});

void bm_filter_pool(benchmark::State& state) {
    MatchFixture fx(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 64);
    const auto aggregated = ssf::sgm_aggregate(fx.dsi, ssf::SgmParams{});
    const auto left = ssf::wta(aggregated);
    const auto right = ssf::wta_right_view(aggregated);
    const ssf::ConfidencePoolParams params;
    for (auto _ : state)
        benchmark::DoNotOptimize(ssf::filter_pool(left, right, fx.left, params));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(bm_filter_pool)->Args({320, 240});

void bm_subpixel(benchmark::State& state) {
    MatchFixture fx(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 64);
    const auto aggregated = ssf::sgm_aggregate(fx.dsi, ssf::SgmParams{});
    const auto disp = ssf::wta(aggregated);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            ssf::subpixel_refine(disp, aggregated, ssf::SubpixelMode::Parabola));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(bm_subpixel)->Args({640, 480});

void bm_warp_disparity(benchmark::State& state) {
    const int width = static_cast<int>(state.range(0));
    const int height = static_cast<int>(state.range(1));
    ssf::DisparityMap disp = ssf::DisparityMap::create(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            disp.set(x, y, 8.0 + 0.01 * x);
    Eigen::Matrix3d h_src = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d h_dst = Eigen::Matrix3d::Identity();
    h_dst(0, 2) = 1.5; // small shift keeps the sampling bilinear
    for (auto _ : state)
        benchmark::DoNotOptimize(ssf::warp_disparity(disp, h_src, h_dst, 0.5, 1.0));
    state.SetItemsProcessed(state.iterations() * width * height);
}
BENCHMARK(bm_warp_disparity)->Args({640, 480});

} // namespace

BENCHMARK_MAIN();
