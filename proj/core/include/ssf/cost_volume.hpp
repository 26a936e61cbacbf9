#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ssf/error.hpp"

namespace ssf {

/// W x H x D stack of non-negative matching costs, d fastest-varying.
/// T is the storage scalar: double for oracle-grade work, float where the
/// costs are integer-valued and memory matters (full-resolution pipelines).
/// Arithmetic on the volume is always carried out in double.
template <class T>
struct BasicCostVolume {
    int width = 0;
    int height = 0;
    int d_max = 0;
    std::vector<T> costs;

    static BasicCostVolume zeros(int width, int height, int d_max) {
        detail::require(width > 0 && height > 0, "cost volume: non-positive dimensions");
        detail::require(d_max >= 1, "cost volume: d_max must be >= 1");
        BasicCostVolume v;
        v.width = width;
        v.height = height;
        v.d_max = d_max;
        v.costs.assign(static_cast<size_t>(width) * height * d_max, T(0));
        return v;
    }

    T at(int x, int y, int d) const {
        return costs[(static_cast<size_t>(y) * width + x) * d_max + d];
    }
    T& at(int x, int y, int d) {
        return costs[(static_cast<size_t>(y) * width + x) * d_max + d];
    }

    const T* cell(int x, int y) const {
        return costs.data() + (static_cast<size_t>(y) * width + x) * d_max;
    }
    T* cell(int x, int y) {
        return costs.data() + (static_cast<size_t>(y) * width + x) * d_max;
    }

    bool same_shape(const BasicCostVolume& o) const {
        return width == o.width && height == o.height && d_max == o.d_max;
    }

    /// Validates shape and that every cost is finite and >= 0.
    void check() const {
        detail::require(width > 0 && height > 0 && d_max >= 1,
                        "cost volume: malformed dimensions");
        detail::require(costs.size() == static_cast<size_t>(width) * height * d_max,
                        "cost volume: storage size does not match dimensions");
        for (const T c : costs)
            detail::require(std::isfinite(static_cast<double>(c)) && c >= T(0),
                            "cost volume: costs must be finite and non-negative");
    }
};

using CostVolume = BasicCostVolume<double>;
using CostVolumeF = BasicCostVolume<float>;

} // namespace ssf
