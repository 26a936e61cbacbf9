#pragma once

#include <cstdint>
#include <vector>

#include "ssf/cost_volume.hpp"
#include "ssf/image.hpp"

namespace ssf {

inline constexpr int kCensusWindowWidth = 9;
inline constexpr int kCensusWindowHeight = 7;
inline constexpr int kCensusBits = kCensusWindowWidth * kCensusWindowHeight; // 63
inline constexpr int kCensusMarginX = kCensusWindowWidth / 2;
inline constexpr int kCensusMarginY = kCensusWindowHeight / 2;

/// Per-pixel binary descriptor of the intensity order relations inside the
/// census window: bit i is set iff the i-th window position (row-major scan,
/// center included and always 0) is strictly darker than the center. Pixels
/// closer than (margin_x, margin_y) to the border carry no descriptor and
/// match at maximal cost.
struct CensusImage {
    int width = 0;
    int height = 0;
    int margin_x = kCensusMarginX;
    int margin_y = kCensusMarginY;
    int bits = kCensusBits;
    std::vector<std::uint64_t> codes;

    bool is_defined(int x, int y) const {
        return x >= margin_x && x < width - margin_x && y >= margin_y &&
               y < height - margin_y;
    }
    std::uint64_t at(int x, int y) const {
        return codes[static_cast<size_t>(y) * width + x];
    }

    void check() const;
};

CensusImage census_transform(const MultiBandImage& img,
                             int window_width = kCensusWindowWidth,
                             int window_height = kCensusWindowHeight, int jobs = 1);

/// Single-pair DSI: cost(x,y,d) = Hamming(left(x,y), right(x-d,y)). Wherever
/// either descriptor is undefined or x-d runs off the image, the cost is the
/// maximal descriptor length (63 for the default window).
template <class T>
BasicCostVolume<T> compute_dsi(const CensusImage& left, const CensusImage& right,
                               int d_max, int jobs = 1);

/// Adds the single-pair DSI of (left, right) into acc cell by cell —
/// integrate_dsi over per-pattern volumes without materializing them.
template <class T>
void accumulate_dsi(BasicCostVolume<T>& acc, const CensusImage& left,
                    const CensusImage& right, int jobs = 1);

/// Element-wise sum over the pattern sequence (space-time integration).
template <class T>
BasicCostVolume<T> integrate_dsi(const std::vector<BasicCostVolume<T>>& volumes);

} // namespace ssf
