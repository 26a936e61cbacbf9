#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ssf/error.hpp"
#include "ssf/parallel.hpp"
#include "ssf/refine.hpp"

namespace ssf {

void ConfidencePoolParams::check() const {
    detail::require(lrc_threshold > 0.0, "confidence pool: lrc_threshold must be > 0");
    detail::require(wmdd_threshold > 0.0, "confidence pool: wmdd_threshold must be > 0");
    detail::require(wmdd_window >= 1 && wmdd_window % 2 == 1,
                    "confidence pool: wmdd_window must be odd and positive");
    detail::require(wmdd_sigma_color > 0.0, "confidence pool: wmdd_sigma_color must be > 0");
}

DisparityMap lrc_filter(const DisparityMap& left_disp, const DisparityMap& right_disp,
                        double threshold) {
    left_disp.check();
    right_disp.check();
    detail::require(left_disp.width == right_disp.width &&
                        left_disp.height == right_disp.height,
                    "lrc_filter: map dimensions differ");
    detail::require(threshold > 0.0, "lrc_filter: threshold must be > 0");

    DisparityMap out = left_disp;
    for (int y = 0; y < left_disp.height; ++y) {
        for (int x = 0; x < left_disp.width; ++x) {
            if (!left_disp.is_valid(x, y))
                continue;
            const double d = left_disp.at(x, y);
            const int xr = x - static_cast<int>(std::lround(d));
            if (xr < 0 || xr >= left_disp.width || !right_disp.is_valid(xr, y) ||
                std::abs(d - right_disp.at(xr, y)) > threshold)
                out.invalidate(x, y);
        }
    }
    return out;
}

DisparityMap acc_filter(const DisparityMap& left_disp) {
    left_disp.check();
    DisparityMap out = left_disp;
    // Per row, bucket pixels by their matched right coordinate and keep only
    // the first pixel attaining the bucket's largest disparity.
    std::unordered_map<int, std::pair<double, int>> best; // target -> (disparity, x)
    for (int y = 0; y < left_disp.height; ++y) {
        best.clear();
        for (int x = 0; x < left_disp.width; ++x) {
            if (!left_disp.is_valid(x, y))
                continue;
            const double d = left_disp.at(x, y);
            const int target = x - static_cast<int>(std::lround(d));
            auto [it, inserted] = best.emplace(target, std::make_pair(d, x));
            if (!inserted && d > it->second.first)
                it->second = {d, x};
        }
        for (int x = 0; x < left_disp.width; ++x) {
            if (!left_disp.is_valid(x, y))
                continue;
            const int target = x - static_cast<int>(std::lround(left_disp.at(x, y)));
            if (best.at(target).second != x)
                out.invalidate(x, y);
        }
    }
    return out;
}

namespace {

// Largest disparity the histogram fast path will allocate bins for.
constexpr int kMaxBinnedDisparity = 4095;

struct GuideLut {
    bool usable = false;
    int g_max = 0;
    std::vector<double> weights; // indexed by (g_q - g_p) + g_max

    static GuideLut build(const MultiBandImage& guide, double inv_two_sigma2) {
        GuideLut lut;
        int g_max = 0;
        for (const float v : guide.data) {
            if (v != std::floor(v) || v < 0.0f || v > 65535.0f)
                return lut;
            g_max = std::max(g_max, static_cast<int>(v));
        }
        lut.usable = true;
        lut.g_max = g_max;
        lut.weights.resize(static_cast<size_t>(2 * g_max + 1));
        for (int diff = -g_max; diff <= g_max; ++diff) {
            const double delta = static_cast<double>(diff);
            lut.weights[static_cast<size_t>(diff + g_max)] =
                std::exp(-delta * delta * inv_two_sigma2);
        }
        return lut;
    }
};

bool disparities_are_binnable(const DisparityMap& disp, int& d_top) {
    d_top = 0;
    for (size_t i = 0; i < disp.values.size(); ++i) {
        if (!disp.valid[i])
            continue;
        const double v = disp.values[i];
        if (v != std::floor(v) || v > kMaxBinnedDisparity)
            return false;
        d_top = std::max(d_top, static_cast<int>(v));
    }
    return true;
}

// Lower weighted median: smallest value whose cumulative weight reaches half
// the total, scanning values in ascending order.
double weighted_median_sorted(std::vector<std::pair<double, double>>& samples,
                              double total) {
    std::sort(samples.begin(), samples.end());
    const double half = total * 0.5;
    double cum = 0.0;
    for (const auto& [value, weight] : samples) {
        cum += weight;
        if (cum >= half)
            return value;
    }
    return samples.back().first;
}

} // namespace

DisparityMap wmdd_filter(const DisparityMap& disp, const MultiBandImage& guide,
                         const ConfidencePoolParams& params, int jobs) {
    disp.check();
    guide.check();
    params.check();
    detail::require(guide.width == disp.width && guide.height == disp.height,
                    "wmdd_filter: guide and disparity dimensions differ");
    detail::require(guide.bands == 1, "wmdd_filter: guide must be single-band");

    const int radius = params.wmdd_window / 2;
    const double inv_two_sigma2 =
        1.0 / (2.0 * params.wmdd_sigma_color * params.wmdd_sigma_color);
    const GuideLut lut = GuideLut::build(guide, inv_two_sigma2);
    int d_top = 0;
    const bool use_bins = disparities_are_binnable(disp, d_top);

    DisparityMap out = disp;
    parallel_chunks(0, disp.height, jobs, [&](int y0, int y1) {
        std::vector<double> bins(use_bins ? static_cast<size_t>(d_top) + 1 : 0, 0.0);
        std::vector<std::pair<double, double>> samples;
        for (int y = y0; y < y1; ++y) {
            const int wy0 = std::max(0, y - radius);
            const int wy1 = std::min(disp.height - 1, y + radius);
            for (int x = 0; x < disp.width; ++x) {
                if (!disp.is_valid(x, y))
                    continue;
                const double gp = guide.at(x, y);
                const int gp_int = static_cast<int>(gp);
                const int wx0 = std::max(0, x - radius);
                const int wx1 = std::min(disp.width - 1, x + radius);
                double total = 0.0;
                int bin_lo = std::numeric_limits<int>::max();
                int bin_hi = -1;
                samples.clear();
                for (int wy = wy0; wy <= wy1; ++wy) {
                    for (int wx = wx0; wx <= wx1; ++wx) {
                        if (!disp.is_valid(wx, wy))
                            continue;
                        double w;
                        if (lut.usable) {
                            w = lut.weights[static_cast<size_t>(
                                static_cast<int>(guide.at(wx, wy)) - gp_int + lut.g_max)];
                        } else {
                            const double delta =
                                static_cast<double>(guide.at(wx, wy)) - gp;
                            w = std::exp(-delta * delta * inv_two_sigma2);
                        }
                        const double dq = disp.at(wx, wy);
                        if (use_bins) {
                            const int bin = static_cast<int>(dq);
                            bins[static_cast<size_t>(bin)] += w;
                            bin_lo = std::min(bin_lo, bin);
                            bin_hi = std::max(bin_hi, bin);
                        } else {
                            samples.emplace_back(dq, w);
                        }
                        total += w;
                    }
                }
                double median;
                if (use_bins) {
                    const double half = total * 0.5;
                    double cum = 0.0;
                    median = bin_hi;
                    for (int d = bin_lo; d <= bin_hi; ++d) {
                        cum += bins[static_cast<size_t>(d)];
                        if (cum >= half) {
                            median = d;
                            break;
                        }
                    }
                    std::fill(bins.begin() + bin_lo, bins.begin() + bin_hi + 1, 0.0);
                } else {
                    median = weighted_median_sorted(samples, total);
                }
                if (std::abs(disp.at(x, y) - median) > params.wmdd_threshold)
                    out.invalidate(x, y);
            }
        }
    });
    return out;
}

DisparityMap filter_pool(const DisparityMap& disp, const DisparityMap& right_disp,
                         const MultiBandImage& guide, const ConfidencePoolParams& params,
                         int jobs) {
    const DisparityMap lrc = lrc_filter(disp, right_disp, params.lrc_threshold);
    const DisparityMap acc = acc_filter(disp);
    const DisparityMap wmdd = wmdd_filter(disp, guide, params, jobs);
    DisparityMap out = disp;
    for (int y = 0; y < disp.height; ++y)
        for (int x = 0; x < disp.width; ++x)
            if (out.is_valid(x, y) &&
                !(lrc.is_valid(x, y) && acc.is_valid(x, y) && wmdd.is_valid(x, y)))
                out.invalidate(x, y);
    return out;
}

template <class T>
DisparityMap subpixel_refine(const DisparityMap& disp, const BasicCostVolume<T>& volume,
                             SubpixelMode mode, int jobs) {
    disp.check();
    volume.check();
    detail::require(disp.width == volume.width && disp.height == volume.height,
                    "subpixel_refine: map and volume dimensions differ");
    for (size_t i = 0; i < disp.values.size(); ++i)
        if (disp.valid[i])
            detail::require(disp.values[i] == std::floor(disp.values[i]) &&
                                disp.values[i] < volume.d_max,
                            "subpixel_refine: valid disparities must be integers below d_max");

    DisparityMap out = disp;
    parallel_chunks(0, disp.height, jobs, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < disp.width; ++x) {
                if (!disp.is_valid(x, y))
                    continue;
                const int d_hat = static_cast<int>(disp.at(x, y));
                if (d_hat - 1 < 0 || d_hat + 1 >= volume.d_max)
                    continue; // disparity border: keep the integer estimate
                const double c_minus = static_cast<double>(volume.at(x, y, d_hat - 1));
                const double c_0 = static_cast<double>(volume.at(x, y, d_hat));
                const double c_plus = static_cast<double>(volume.at(x, y, d_hat + 1));
                if (c_minus == c_plus)
                    continue; // symmetric neighbors: the refined value is d_hat itself
                double offset;
                if (mode == SubpixelMode::Parabola) {
                    const double denom = c_minus - 2.0 * c_0 + c_plus;
                    if (denom <= 0.0)
                        continue;
                    offset = (c_minus - c_plus) / (2.0 * denom);
                } else {
                    const double larger = std::max(c_minus, c_plus);
                    const double smaller = std::min(c_minus, c_plus);
                    if (smaller == c_0)
                        continue;
                    offset = -0.5 + (larger - c_0) / (smaller - c_0);
                }
                out.set(x, y, d_hat + std::clamp(offset, -0.5, 0.5));
            }
        }
    });
    return out;
}

template DisparityMap subpixel_refine<float>(const DisparityMap&,
                                             const BasicCostVolume<float>&, SubpixelMode,
                                             int);
template DisparityMap subpixel_refine<double>(const DisparityMap&,
                                              const BasicCostVolume<double>&, SubpixelMode,
                                              int);

} // namespace ssf
