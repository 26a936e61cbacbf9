#pragma once

#include "ssf/cost_volume.hpp"
#include "ssf/disparity.hpp"

namespace ssf {

/// Penalties and path-set selector for semi-global aggregation. The penalties
/// live on the cost scale of the input volume (0..63 per census pair before
/// temporal integration).
struct SgmParams {
    double p1 = 7.0;
    double p2 = 100.0;
    int paths = 8; ///< 4 (axis-aligned) or 8 (plus diagonals) directions

    void check() const;
};

/// Semi-global aggregation: S(p,d) = sum over scanline directions r of the
/// path cost L_r, where
///   L_r(p,d) = C(p,d) - min_k L_r(p-r,k)
///            + min(L_r(p-r,d), L_r(p-r,d-1)+P1, L_r(p-r,d+1)+P1,
///                  min_k L_r(p-r,k)+P2)
/// and L_r = C at path origins. The recurrence runs in double regardless of
/// the storage scalar, and the direction order is fixed, so results are
/// identical for every job count.
template <class T>
BasicCostVolume<T> sgm_aggregate(const BasicCostVolume<T>& volume, const SgmParams& params,
                                 int jobs = 1);

/// Adds the path cost of the single direction (dx, dy) into acc. Exposed so
/// tests can compare one direction at a time against a reference dynamic
/// program.
template <class T>
void sgm_aggregate_direction(const BasicCostVolume<T>& volume, int dx, int dy,
                             double p1, double p2, BasicCostVolume<T>& acc,
                             int jobs = 1);

/// Winner-takes-all: per pixel the smallest disparity attaining the minimum
/// cost. Every pixel comes back valid.
template <class T>
DisparityMap wta(const BasicCostVolume<T>& volume, int jobs = 1);

/// Right-view disparity read from the left-referenced aggregated volume:
/// d_R(x,y) = argmin_d S(x+d, y, d), smallest d on ties. Used to drive the
/// left-right consistency check without a second aggregation pass.
template <class T>
DisparityMap wta_right_view(const BasicCostVolume<T>& volume, int jobs = 1);

} // namespace ssf
