#pragma once

#include "ssf/cost_volume.hpp"
#include "ssf/disparity.hpp"
#include "ssf/image.hpp"

namespace ssf {

/// Parameters of the outlier-suppression pool. Thresholds are in disparity
/// pixels; sigma_color is the bilateral weight spread on the guide-image
/// intensity scale.
struct ConfidencePoolParams {
    double lrc_threshold = 1.0;
    int wmdd_window = 41;
    double wmdd_threshold = 1.0;
    double wmdd_sigma_color = 10.0;

    void check() const;
};

/// Left-right consistency: a pixel survives iff the right-view disparity at
/// its matched coordinate x - round(d) exists, is valid, and agrees within
/// the threshold. Filters only clear validity — surviving values are
/// untouched.
DisparityMap lrc_filter(const DisparityMap& left_disp, const DisparityMap& right_disp,
                        double threshold = 1.0);

/// Asymmetric consistency: among the left pixels of one row mapping to the
/// same right coordinate round(x - d), only the largest disparity (nearest
/// surface) survives.
DisparityMap acc_filter(const DisparityMap& left_disp);

/// Weighted median disparity deviation: a pixel survives iff its disparity
/// is within wmdd_threshold of the lower weighted median of the valid
/// disparities in the surrounding window, weighted by
/// exp(-(guide(q) - guide(p))^2 / (2 sigma^2)). Guide must be single-band
/// and share the map's dimensions.
DisparityMap wmdd_filter(const DisparityMap& disp, const MultiBandImage& guide,
                         const ConfidencePoolParams& params, int jobs = 1);

/// Intersection of the three survivor sets: a pixel survives the pool only
/// if it survives LRC, ACC and WMDD individually.
DisparityMap filter_pool(const DisparityMap& disp, const DisparityMap& right_disp,
                         const MultiBandImage& guide, const ConfidencePoolParams& params,
                         int jobs = 1);

enum class SubpixelMode {
    Parabola, ///< vertex of the parabola through (d-1, d, d+1); offsets in [-0.5, 0.5]
    Literal   ///< piecewise neighbor-ratio form, clamped to [d-0.5, d+0.5]
};

/// Sub-pixel interpolation on integer-valued disparities against the
/// aggregated cost volume. Pixels at disparity borders, with symmetric
/// neighbor costs, or with degenerate denominators keep their integer value.
template <class T>
DisparityMap subpixel_refine(const DisparityMap& disp, const BasicCostVolume<T>& volume,
                             SubpixelMode mode, int jobs = 1);

} // namespace ssf
