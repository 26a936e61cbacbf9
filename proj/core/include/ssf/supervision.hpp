#pragma once

#include <string>
#include <vector>

#include "ssf/disparity.hpp"
#include "ssf/geometry.hpp"
#include "ssf/image.hpp"
#include "ssf/refine.hpp"
#include "ssf/sgm.hpp"

namespace ssf {

/// Supervision target for one pixel: a discrete distribution over integer
/// disparities [0, d_max] (inclusive, so d_max+1 entries) plus the residual
/// offset of the real disparity from the distribution's argmax.
struct CategoricalTarget {
    std::vector<double> distribution;
    double offset_label = 0.0;
    int integer_label = 0;

    void check() const;
};

/// Gaussian target centered at d_star, sampled at the integers of
/// [0, d_max] and renormalized over that truncated support.
CategoricalTarget make_target(double d_star, double sigma, int d_max);

/// Shannon entropy (natural log) of a distribution; the attainable minimum
/// of eval_loss over predictions.
double distribution_entropy(const std::vector<double>& dist);

/// Cross-entropy of the prediction against the target distribution plus the
/// absolute offset error. Logs are floored at 1e-12 so the value stays
/// finite.
double eval_loss(const std::vector<double>& pred_dist, double pred_offset,
                 const CategoricalTarget& target);

/// argmax of the distribution (lowest index on ties) plus the offset.
double compose_disparity(const std::vector<double>& pred_dist, double pred_offset);

enum class ProxySource {
    DirectRgbMs, ///< match the downsampled RGB directly against the MS bands
    SecondRgb    ///< match RGB against a second RGB camera, then warp
};

/// Geometry tying the RGB-RGB rectified frame to the RGB-MS one, consumed by
/// warp_disparity after second-rgb matching.
struct WarpSpec {
    Eigen::Matrix3d h_src = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d h_dst = Eigen::Matrix3d::Identity();
    double baseline_ratio = 1.0;
    double scale = 1.0;
    Resolution out_res{}; ///< defaults to the matched pair's size
};

struct ProxyConfig {
    double min_density = 0.70; ///< acceptance threshold, inclusive
    ProxySource source = ProxySource::DirectRgbMs;
    int d_max = 64;
    SgmParams sgm{};
    ConfidencePoolParams pool{};
    int jobs = 1;

    void check() const;
};

struct ProxyResult {
    bool accepted = false;
    double density = 0.0;
    DisparityMap map;
    std::string reason; ///< non-empty iff rejected
};

/// Direct mode: grayscale-converts the RGB frame, band-averages the MS
/// frame, brings both to the MS resolution and runs census, DSI, SGM and
/// the confidence-filter pool. Inputs must already be rectified for the
/// RGB-MS setup. The result is rejected (with reason) when the surviving
/// density falls below min_density.
ProxyResult distill_proxy(const MultiBandImage& rgb, const MultiBandImage& ms,
                          const ProxyConfig& config);

/// Second-rgb mode: matches the two same-resolution RGB frames (rectified
/// for the RGB-RGB setup), then warps the filtered map into the RGB-MS
/// frame via `warp`. Density is judged on the delivered, warped map.
ProxyResult distill_proxy(const MultiBandImage& rgb, const MultiBandImage& second_rgb,
                          const WarpSpec& warp, const ProxyConfig& config);

} // namespace ssf
