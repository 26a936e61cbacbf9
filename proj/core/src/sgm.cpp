#include <algorithm>
#include <array>
#include <limits>
#include <vector>

#include "ssf/error.hpp"
#include "ssf/parallel.hpp"
#include "ssf/sgm.hpp"

namespace ssf {

void SgmParams::check() const {
    detail::require(p1 >= 0.0 && p1 <= p2, "sgm: penalties must satisfy 0 <= p1 <= p2");
    detail::require(paths == 4 || paths == 8, "sgm: path count must be 4 or 8");
}

namespace {

// One recurrence step: cur = C + min(prev_d, prev_{d+-1}+p1, min_prev+p2)
// - min_prev, with prev holding L_r(p-r, .) for the same scanline.
inline void sgm_step(const double* prev, double* cur, const double* cost, int d_max,
                     double p1, double p2) {
    double min_prev = prev[0];
    for (int d = 1; d < d_max; ++d)
        min_prev = std::min(min_prev, prev[d]);
    const double capped = min_prev + p2;
    for (int d = 0; d < d_max; ++d) {
        double best = prev[d];
        if (d > 0)
            best = std::min(best, prev[d - 1] + p1);
        if (d + 1 < d_max)
            best = std::min(best, prev[d + 1] + p1);
        best = std::min(best, capped);
        cur[d] = cost[d] + best - min_prev;
    }
}

// Horizontal paths: every row is an independent recurrence.
template <class T>
void aggregate_horizontal(const BasicCostVolume<T>& volume, int dx, double p1, double p2,
                          BasicCostVolume<T>& acc, int jobs) {
    const int d_max = volume.d_max;
    parallel_chunks(0, volume.height, jobs, [&](int y0, int y1) {
        std::vector<double> prev(static_cast<size_t>(d_max));
        std::vector<double> cur(static_cast<size_t>(d_max));
        std::vector<double> cost(static_cast<size_t>(d_max));
        for (int y = y0; y < y1; ++y) {
            const int x_start = dx > 0 ? 0 : volume.width - 1;
            for (int i = 0; i < volume.width; ++i) {
                const int x = x_start + i * dx;
                const T* c = volume.cell(x, y);
                for (int d = 0; d < d_max; ++d)
                    cost[static_cast<size_t>(d)] = static_cast<double>(c[d]);
                if (i == 0)
                    cur = cost;
                else
                    sgm_step(prev.data(), cur.data(), cost.data(), d_max, p1, p2);
                T* a = acc.cell(x, y);
                for (int d = 0; d < d_max; ++d)
                    a[d] += static_cast<T>(cur[static_cast<size_t>(d)]);
                std::swap(prev, cur);
            }
        }
    });
}

// Vertical and diagonal paths: rows advance in lockstep; within a row every
// column only reads the previous row's buffer, so x-chunks stay independent.
template <class T>
void aggregate_with_row_buffer(const BasicCostVolume<T>& volume, int dx, int dy, double p1,
                               double p2, BasicCostVolume<T>& acc, int jobs) {
    const int d_max = volume.d_max;
    const size_t row_size = static_cast<size_t>(volume.width) * d_max;
    std::vector<double> prev_row(row_size);
    std::vector<double> cur_row(row_size);

    const int y_start = dy > 0 ? 0 : volume.height - 1;
    for (int j = 0; j < volume.height; ++j) {
        const int y = y_start + j * dy;
        parallel_chunks(0, volume.width, jobs, [&](int x0, int x1) {
            std::vector<double> cost(static_cast<size_t>(d_max));
            for (int x = x0; x < x1; ++x) {
                const T* c = volume.cell(x, y);
                for (int d = 0; d < d_max; ++d)
                    cost[static_cast<size_t>(d)] = static_cast<double>(c[d]);
                double* cur = cur_row.data() + static_cast<size_t>(x) * d_max;
                const int xp = x - dx;
                if (j == 0 || xp < 0 || xp >= volume.width)
                    std::copy(cost.begin(), cost.end(), cur);
                else
                    sgm_step(prev_row.data() + static_cast<size_t>(xp) * d_max, cur,
                             cost.data(), d_max, p1, p2);
                T* a = acc.cell(x, y);
                for (int d = 0; d < d_max; ++d)
                    a[d] += static_cast<T>(cur[d]);
            }
        });
        std::swap(prev_row, cur_row);
    }
}

constexpr std::array<std::array<int, 2>, 8> kDirections = {{
    {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1},
}};

} // namespace

template <class T>
void sgm_aggregate_direction(const BasicCostVolume<T>& volume, int dx, int dy, double p1,
                             double p2, BasicCostVolume<T>& acc, int jobs) {
    detail::require((dx != 0 || dy != 0) && dx >= -1 && dx <= 1 && dy >= -1 && dy <= 1,
                    "sgm: direction components must be in {-1, 0, 1}, not both 0");
    detail::require(acc.same_shape(volume), "sgm: accumulator shape mismatch");
    if (dy == 0)
        aggregate_horizontal(volume, dx, p1, p2, acc, jobs);
    else
        aggregate_with_row_buffer(volume, dx, dy, p1, p2, acc, jobs);
}

template <class T>
BasicCostVolume<T> sgm_aggregate(const BasicCostVolume<T>& volume, const SgmParams& params,
                                 int jobs) {
    volume.check();
    params.check();
    BasicCostVolume<T> acc =
        BasicCostVolume<T>::zeros(volume.width, volume.height, volume.d_max);
    for (int i = 0; i < params.paths; ++i)
        sgm_aggregate_direction(volume, kDirections[static_cast<size_t>(i)][0],
                                kDirections[static_cast<size_t>(i)][1], params.p1,
                                params.p2, acc, jobs);
    return acc;
}

template <class T>
DisparityMap wta(const BasicCostVolume<T>& volume, int jobs) {
    volume.check();
    DisparityMap map = DisparityMap::create(volume.width, volume.height);
    parallel_chunks(0, volume.height, jobs, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < volume.width; ++x) {
                const T* cell = volume.cell(x, y);
                int best = 0;
                for (int d = 1; d < volume.d_max; ++d)
                    if (cell[d] < cell[best])
                        best = d;
                map.set(x, y, best);
            }
        }
    });
    return map;
}

template <class T>
DisparityMap wta_right_view(const BasicCostVolume<T>& volume, int jobs) {
    volume.check();
    DisparityMap map = DisparityMap::create(volume.width, volume.height);
    parallel_chunks(0, volume.height, jobs, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < volume.width; ++x) {
                int best = -1;
                double best_cost = std::numeric_limits<double>::infinity();
                for (int d = 0; d < volume.d_max && x + d < volume.width; ++d) {
                    const double cost = static_cast<double>(volume.at(x + d, y, d));
                    if (cost < best_cost) {
                        best_cost = cost;
                        best = d;
                    }
                }
                map.set(x, y, best < 0 ? 0 : best);
            }
        }
    });
    return map;
}

template void sgm_aggregate_direction<float>(const BasicCostVolume<float>&, int, int, double,
                                             double, BasicCostVolume<float>&, int);
template void sgm_aggregate_direction<double>(const BasicCostVolume<double>&, int, int,
                                              double, double, BasicCostVolume<double>&, int);
template BasicCostVolume<float> sgm_aggregate<float>(const BasicCostVolume<float>&,
                                                     const SgmParams&, int);
template BasicCostVolume<double> sgm_aggregate<double>(const BasicCostVolume<double>&,
                                                       const SgmParams&, int);
template DisparityMap wta<float>(const BasicCostVolume<float>&, int);
template DisparityMap wta<double>(const BasicCostVolume<double>&, int);
template DisparityMap wta_right_view<float>(const BasicCostVolume<float>&, int);
template DisparityMap wta_right_view<double>(const BasicCostVolume<double>&, int);

} // namespace ssf
