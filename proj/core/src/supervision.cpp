#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "ssf/census.hpp"
#include "ssf/error.hpp"
#include "ssf/supervision.hpp"

namespace ssf {

void CategoricalTarget::check() const {
    detail::require(!distribution.empty(), "categorical target: empty distribution");
    double sum = 0.0;
    for (const double p : distribution) {
        detail::require(std::isfinite(p) && p >= 0.0,
                        "categorical target: probabilities must be finite and >= 0");
        sum += p;
    }
    detail::require(std::abs(sum - 1.0) <= 1e-9,
                    "categorical target: probabilities must sum to 1");
    detail::require(integer_label >= 0 &&
                        integer_label < static_cast<int>(distribution.size()),
                    "categorical target: integer label outside the support");
    detail::require(std::abs(offset_label) <= 0.5 + 1e-9,
                    "categorical target: |offset| must be <= 0.5");
}

CategoricalTarget make_target(double d_star, double sigma, int d_max) {
    detail::require(sigma > 0.0, "make_target: sigma must be > 0");
    detail::require(d_max >= 1, "make_target: d_max must be >= 1");
    detail::require(d_star >= 0.0 && d_star <= d_max,
                    "make_target: d_star outside [0, d_max]");

    CategoricalTarget target;
    target.distribution.resize(static_cast<size_t>(d_max) + 1);
    // Shift the exponent by the smallest squared distance so the largest
    // weight is exactly 1 and tiny sigmas cannot underflow the whole sum.
    double min_sq = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= d_max; ++k)
        min_sq = std::min(min_sq, (k - d_star) * (k - d_star));
    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    double sum = 0.0;
    for (int k = 0; k <= d_max; ++k) {
        const double sq = (k - d_star) * (k - d_star);
        const double w = std::exp(-(sq - min_sq) * inv_two_sigma2);
        target.distribution[static_cast<size_t>(k)] = w;
        sum += w;
    }
    for (double& p : target.distribution)
        p /= sum;

    const auto arg_max =
        std::max_element(target.distribution.begin(), target.distribution.end());
    target.integer_label = static_cast<int>(arg_max - target.distribution.begin());
    target.offset_label = d_star - target.integer_label;
    target.check();
    return target;
}

double distribution_entropy(const std::vector<double>& dist) {
    double h = 0.0;
    for (const double p : dist)
        if (p > 0.0)
            h -= p * std::log(p);
    return h;
}

namespace {

void require_distribution(const std::vector<double>& dist, const char* who) {
    detail::require(!dist.empty(), std::string(who) + ": empty distribution");
    double sum = 0.0;
    for (const double p : dist) {
        detail::require(std::isfinite(p) && p >= 0.0,
                        std::string(who) + ": probabilities must be finite and >= 0");
        sum += p;
    }
    detail::require(std::abs(sum - 1.0) <= 1e-6,
                    std::string(who) + ": probabilities must sum to 1");
}

} // namespace

double eval_loss(const std::vector<double>& pred_dist, double pred_offset,
                 const CategoricalTarget& target) {
    target.check();
    require_distribution(pred_dist, "eval_loss");
    detail::require(pred_dist.size() == target.distribution.size(),
                    "eval_loss: prediction and target supports differ");
    double cross_entropy = 0.0;
    for (size_t k = 0; k < pred_dist.size(); ++k) {
        const double t = target.distribution[k];
        if (t > 0.0)
            cross_entropy -= t * std::log(std::max(pred_dist[k], 1e-12));
    }
    return cross_entropy + std::abs(pred_offset - target.offset_label);
}

double compose_disparity(const std::vector<double>& pred_dist, double pred_offset) {
    require_distribution(pred_dist, "compose_disparity");
    const auto arg_max = std::max_element(pred_dist.begin(), pred_dist.end());
    return static_cast<double>(arg_max - pred_dist.begin()) + pred_offset;
}

void ProxyConfig::check() const {
    detail::require(min_density > 0.0 && min_density <= 1.0,
                    "proxy config: min_density must be in (0, 1]");
    detail::require(d_max >= 1, "proxy config: d_max must be >= 1");
    sgm.check();
    pool.check();
}

namespace {

ProxyResult finish_proxy(DisparityMap map, const ProxyConfig& config) {
    ProxyResult result;
    result.density = map.density();
    result.map = std::move(map);
    result.accepted = result.density >= config.min_density;
    if (!result.accepted) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "density %.4f below threshold %.4f",
                      result.density, config.min_density);
        result.reason = buf;
    }
    return result;
}

DisparityMap match_pair(const MultiBandImage& left_gray, const MultiBandImage& right_gray,
                        const ProxyConfig& config) {
    const CensusImage census_left =
        census_transform(left_gray, kCensusWindowWidth, kCensusWindowHeight, config.jobs);
    const CensusImage census_right =
        census_transform(right_gray, kCensusWindowWidth, kCensusWindowHeight, config.jobs);
    const CostVolumeF dsi =
        compute_dsi<float>(census_left, census_right, config.d_max, config.jobs);
    const CostVolumeF aggregated = sgm_aggregate(dsi, config.sgm, config.jobs);
    const DisparityMap left = wta(aggregated, config.jobs);
    const DisparityMap right = wta_right_view(aggregated, config.jobs);
    return filter_pool(left, right, left_gray, config.pool, config.jobs);
}

} // namespace

ProxyResult distill_proxy(const MultiBandImage& rgb, const MultiBandImage& ms,
                          const ProxyConfig& config) {
    config.check();
    detail::require(config.source == ProxySource::DirectRgbMs,
                    "distill_proxy: this overload implements direct-rgbms mode");
    const MultiBandImage left_gray =
        resize_image(to_single_channel(rgb), ms.width, ms.height);
    const MultiBandImage right_gray = to_single_channel(ms);
    return finish_proxy(match_pair(left_gray, right_gray, config), config);
}

ProxyResult distill_proxy(const MultiBandImage& rgb, const MultiBandImage& second_rgb,
                          const WarpSpec& warp, const ProxyConfig& config) {
    config.check();
    detail::require(config.source == ProxySource::SecondRgb,
                    "distill_proxy: this overload implements second-rgb mode");
    detail::require(rgb.width == second_rgb.width && rgb.height == second_rgb.height,
                    "distill_proxy: the RGB pair must share its resolution");
    const MultiBandImage left_gray = to_single_channel(rgb);
    const MultiBandImage right_gray = to_single_channel(second_rgb);
    DisparityMap matched = match_pair(left_gray, right_gray, config);
    DisparityMap warped = warp_disparity(matched, warp.h_src, warp.h_dst,
                                         warp.baseline_ratio, warp.scale, warp.out_res);
    return finish_proxy(std::move(warped), config);
}

} // namespace ssf
