#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ssf/disparity.hpp"
#include "ssf/geometry.hpp"
#include "ssf/image.hpp"

namespace ssf {

/// Registration and depth error metrics over the ground-truth validity
/// domain. Flow is purely horizontal in the rectified unbalanced frame, so
/// f_aepe = d_aepe / scale_ratio by construction. Pixels the prediction
/// marks invalid are excluded from the error means but count as bad at
/// every tolerance; both counts are reported.
struct MetricReport {
    double d_aepe = 0.0; ///< mean |d_pred - d_gt|, pixels
    double f_aepe = 0.0; ///< mean flow endpoint error, low-res pixels
    double ade = 0.0;    ///< mean |Z_pred - Z_gt|, meters
    std::vector<std::pair<double, double>> bad; ///< (tau, percentage), input order
    std::size_t evaluated = 0;      ///< gt-valid pixels (the whole domain)
    std::size_t pred_invalid = 0;   ///< domain pixels the prediction left invalid
    std::size_t depth_excluded = 0; ///< domain pixels without a defined depth pair

    void check() const;
};

MetricReport compute_metrics(const DisparityMap& pred, const DisparityMap& gt,
                             const RectificationSetup& setup,
                             const std::vector<double>& taus);

/// Synthesizes the MS image aligned with the high-resolution frame: each
/// valid pixel (x, y) bilinear-samples every MS band at
/// ((x - d) / scale_ratio, y / scale_ratio). The output carries one extra
/// validity band (max sample value where valid, 0 elsewhere); invalid or
/// out-of-range pixels produce zero samples.
MultiBandImage register_ms(const MultiBandImage& ms, const DisparityMap& disp,
                           const RectificationSetup& setup);

/// Two-row aligned table in the order D-AEPE, ADE, F-AEPE, bad_tau...
std::string format_report_table(const MetricReport& report);

void write_report_json(const MetricReport& report, const std::filesystem::path& path);
void write_report_table(const MetricReport& report, const std::filesystem::path& path);

} // namespace ssf
