#include <algorithm>
#include <cmath>
#include <cstdio>

#include "io_detail.hpp"
#include "io_json.hpp"
#include "ssf/metrics.hpp"

namespace ssf {

using nlohmann::json;

void MetricReport::check() const {
    detail::require(std::isfinite(d_aepe) && d_aepe >= 0.0 && std::isfinite(f_aepe) &&
                        f_aepe >= 0.0 && std::isfinite(ade) && ade >= 0.0,
                    "metric report: errors must be finite and >= 0");
    for (const auto& [tau, percent] : bad) {
        detail::require(tau >= 0.0, "metric report: tau must be >= 0");
        detail::require(percent >= 0.0 && percent <= 100.0,
                        "metric report: bad percentages must be in [0, 100]");
    }
    detail::require(pred_invalid <= evaluated && depth_excluded <= evaluated,
                    "metric report: counts exceed the evaluation domain");
}

namespace {

// Compensated (Kahan) accumulator; the reduction order is the fixed
// row-major pixel scan, so reports never depend on threading.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

} // namespace

MetricReport compute_metrics(const DisparityMap& pred, const DisparityMap& gt,
                             const RectificationSetup& setup,
                             const std::vector<double>& taus) {
    pred.check();
    gt.check();
    setup.check();
    detail::require(pred.width == gt.width && pred.height == gt.height,
                    "compute_metrics: prediction and ground truth frames differ");
    for (const double tau : taus)
        detail::require(tau >= 0.0, "compute_metrics: tau must be >= 0");

    const DisparityMap pred_depth = disparity_to_depth(pred, setup);
    const DisparityMap gt_depth = disparity_to_depth(gt, setup);

    MetricReport report;
    KahanSum disp_err;
    KahanSum depth_err;
    std::size_t depth_count = 0;
    std::vector<std::size_t> bad_counts(taus.size(), 0);

    for (int y = 0; y < gt.height; ++y) {
        for (int x = 0; x < gt.width; ++x) {
            if (!gt.is_valid(x, y))
                continue;
            ++report.evaluated;
            if (!pred.is_valid(x, y)) {
                // Missing prediction: infinite flow error, bad everywhere.
                ++report.pred_invalid;
                for (std::size_t t = 0; t < taus.size(); ++t)
                    ++bad_counts[t];
                continue;
            }
            const double err = std::abs(pred.at(x, y) - gt.at(x, y));
            disp_err.add(err);
            const double flow_err = err / setup.scale_ratio;
            for (std::size_t t = 0; t < taus.size(); ++t)
                if (flow_err > taus[t])
                    ++bad_counts[t];
            if (pred_depth.is_valid(x, y) && gt_depth.is_valid(x, y)) {
                depth_err.add(std::abs(pred_depth.at(x, y) - gt_depth.at(x, y)));
                ++depth_count;
            } else {
                ++report.depth_excluded;
            }
        }
    }
    if (report.evaluated == 0)
        throw Error("compute_metrics: empty evaluation domain");

    const std::size_t mean_count = report.evaluated - report.pred_invalid;
    report.d_aepe = mean_count > 0 ? disp_err.sum / static_cast<double>(mean_count) : 0.0;
    report.f_aepe = report.d_aepe / setup.scale_ratio;
    report.ade = depth_count > 0 ? depth_err.sum / static_cast<double>(depth_count) : 0.0;
    report.bad.reserve(taus.size());
    for (std::size_t t = 0; t < taus.size(); ++t)
        report.bad.emplace_back(taus[t], 100.0 * static_cast<double>(bad_counts[t]) /
                                             static_cast<double>(report.evaluated));
    report.check();
    return report;
}

MultiBandImage register_ms(const MultiBandImage& ms, const DisparityMap& disp,
                           const RectificationSetup& setup) {
    ms.check();
    disp.check();
    setup.check();
    const double s = setup.scale_ratio;
    detail::require(std::abs(ms.width * s - disp.width) <= 1.0 &&
                        std::abs(ms.height * s - disp.height) <= 1.0,
                    "register_ms: disparity frame does not match the MS raster scaled by "
                    "scale_ratio");

    MultiBandImage out = MultiBandImage::create(disp.width, disp.height, ms.bands + 1,
                                                ms.bit_depth);
    const int validity_band = ms.bands;
    for (int y = 0; y < disp.height; ++y) {
        const double v = y / s;
        for (int x = 0; x < disp.width; ++x) {
            if (!disp.is_valid(x, y))
                continue;
            const double u = (x - disp.at(x, y)) / s;
            if (!(u >= 0.0 && u <= ms.width - 1 && v >= 0.0 && v <= ms.height - 1))
                continue; // never read outside the MS raster
            const int x0 = static_cast<int>(std::floor(u));
            const int y0 = static_cast<int>(std::floor(v));
            const int x1 = std::min(x0 + 1, ms.width - 1);
            const int y1 = std::min(y0 + 1, ms.height - 1);
            const double fx = u - x0;
            const double fy = v - y0;
            for (int b = 0; b < ms.bands; ++b) {
                const double top = ms.at(x0, y0, b) * (1.0 - fx) + ms.at(x1, y0, b) * fx;
                const double bottom = ms.at(x0, y1, b) * (1.0 - fx) + ms.at(x1, y1, b) * fx;
                out.at(x, y, b) = static_cast<float>(top * (1.0 - fy) + bottom * fy);
            }
            out.at(x, y, validity_band) = out.max_value();
        }
    }
    return out;
}

namespace {

std::string format_value(double v, int decimals) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string format_tau(double tau) {
    if (tau == std::floor(tau))
        return std::to_string(static_cast<long long>(tau));
    std::string s = format_value(tau, 2);
    while (s.back() == '0')
        s.pop_back();
    return s;
}

} // namespace

std::string format_report_table(const MetricReport& report) {
    std::vector<std::pair<std::string, std::string>> columns = {
        {"D-AEPE", format_value(report.d_aepe, 4)},
        {"ADE", format_value(report.ade, 4)},
        {"F-AEPE", format_value(report.f_aepe, 4)},
    };
    for (const auto& [tau, percent] : report.bad)
        columns.emplace_back("bad_" + format_tau(tau), format_value(percent, 2));

    std::string header;
    std::string values;
    for (const auto& [name, value] : columns) {
        const std::size_t width = std::max(name.size(), value.size());
        if (!header.empty()) {
            header += "  ";
            values += "  ";
        }
        header += std::string(width - name.size(), ' ') + name;
        values += std::string(width - value.size(), ' ') + value;
    }
    return header + "\n" + values + "\n";
}

void write_report_json(const MetricReport& report, const std::filesystem::path& path) {
    report.check();
    json doc;
    doc["d_aepe"] = report.d_aepe;
    doc["f_aepe"] = report.f_aepe;
    doc["ade"] = report.ade;
    json bad = json::array();
    for (const auto& [tau, percent] : report.bad)
        bad.push_back({{"tau", tau}, {"percent", percent}});
    doc["bad"] = bad;
    doc["evaluated"] = report.evaluated;
    doc["pred_invalid"] = report.pred_invalid;
    doc["depth_excluded"] = report.depth_excluded;
    detail::write_json_file(doc, path);
}

void write_report_table(const MetricReport& report, const std::filesystem::path& path) {
    detail::AtomicFile file(path);
    file.stream() << format_report_table(report);
    file.commit();
}

} // namespace ssf
