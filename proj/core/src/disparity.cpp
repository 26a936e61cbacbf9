#include "ssf/disparity.hpp"

#include <cmath>

#include "ssf/error.hpp"

namespace ssf {

DisparityMap DisparityMap::create(int width, int height) {
    detail::require(width > 0 && height > 0, "disparity map: non-positive dimensions");
    DisparityMap m;
    m.width = width;
    m.height = height;
    m.values.assign(static_cast<size_t>(width) * height, 0.0);
    m.valid.assign(static_cast<size_t>(width) * height, 0);
    return m;
}

std::size_t DisparityMap::valid_count() const {
    std::size_t n = 0;
    for (const auto v : valid)
        n += v != 0;
    return n;
}

double DisparityMap::density() const {
    if (valid.empty())
        return 0.0;
    return static_cast<double>(valid_count()) / static_cast<double>(valid.size());
}

void DisparityMap::check() const {
    detail::require(width > 0 && height > 0, "disparity map: non-positive dimensions");
    const size_t n = static_cast<size_t>(width) * height;
    detail::require(values.size() == n && valid.size() == n,
                    "disparity map: storage size does not match dimensions");
    for (size_t i = 0; i < n; ++i)
        if (valid[i])
            detail::require(std::isfinite(values[i]) && values[i] >= 0.0,
                            "disparity map: valid entries must be finite and >= 0");
}

} // namespace ssf
