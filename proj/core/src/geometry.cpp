#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "io_json.hpp"
#include "ssf/error.hpp"
#include "ssf/geometry.hpp"

namespace ssf::detail {

Eigen::Matrix3d matrix3_from_json(const nlohmann::json& arr, const std::filesystem::path& path,
                                  const char* key) {
    if (!arr.is_array() || arr.size() != 9)
        throw Error(path.string() + ": '" + key + "' must be a 9-element row-major array");
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            m(r, c) = arr.at(static_cast<size_t>(r * 3 + c)).get<double>();
    return m;
}

} // namespace ssf::detail

namespace ssf {

using nlohmann::json;

Eigen::Matrix3d CameraCalibration::intrinsics() const {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = focal;
    k(1, 1) = focal;
    k(0, 2) = principal_point.x();
    k(1, 2) = principal_point.y();
    return k;
}

Eigen::Vector3d CameraCalibration::center() const {
    return -rotation.transpose() * translation;
}

void CameraCalibration::check() const {
    detail::require(focal > 0.0, "calibration: focal must be > 0");
    detail::require(principal_point.allFinite() && translation.allFinite() &&
                        rotation.allFinite(),
                    "calibration: non-finite entries");
    const Eigen::Matrix3d residual =
        rotation * rotation.transpose() - Eigen::Matrix3d::Identity();
    detail::require(residual.cwiseAbs().maxCoeff() <= 1e-9,
                    "calibration: rotation is not orthonormal");
    detail::require(rotation.determinant() > 0.0,
                    "calibration: rotation must be proper (determinant +1)");
}

void RectificationSetup::check() const {
    detail::require(baseline > 0.0, "rectification: baseline must be > 0");
    detail::require(focal > 0.0, "rectification: focal must be > 0");
    detail::require(scale_ratio >= 1.0, "rectification: scale_ratio must be >= 1");
    detail::require(h_left.allFinite() && h_right.allFinite(),
                    "rectification: non-finite homography");
    detail::require(Eigen::FullPivLU<Eigen::Matrix3d>(h_left).isInvertible() &&
                        Eigen::FullPivLU<Eigen::Matrix3d>(h_right).isInvertible(),
                    "rectification: homographies must be invertible");
}

RectificationSetup unbalanced_rectify(const CameraCalibration& left,
                                      const CameraCalibration& right, Resolution res_left,
                                      Resolution res_right) {
    left.check();
    right.check();
    detail::require(res_left.width > 0 && res_left.height > 0 && res_right.width > 0 &&
                        res_right.height > 0,
                    "unbalanced_rectify: resolutions must be positive");
    const double scale_ratio =
        static_cast<double>(res_left.width) / static_cast<double>(res_right.width);
    detail::require(scale_ratio >= 1.0,
                    "unbalanced_rectify: the left camera must be the higher-resolution side");

    const Eigen::Vector3d c_left = left.center();
    const Eigen::Vector3d c_right = right.center();
    const Eigen::Vector3d base = c_right - c_left;
    const double baseline = base.norm();
    if (baseline <= 1e-12)
        throw Error("unbalanced_rectify: degenerate geometry, coincident camera centers");

    // New common orientation: x along the baseline, y orthogonal to it inside
    // the plane spanned with the old left optical axis, z completing the frame.
    const Eigen::Vector3d e1 = base / baseline;
    const Eigen::Vector3d z_left = left.rotation.row(2).transpose();
    Eigen::Vector3d e2 = z_left.cross(e1);
    const double e2_norm = e2.norm();
    if (e2_norm <= 1e-9)
        throw Error("unbalanced_rectify: degenerate geometry, baseline parallel to the "
                    "optical axis");
    e2 /= e2_norm;
    const Eigen::Vector3d e3 = e1.cross(e2);
    Eigen::Matrix3d r_new;
    r_new.row(0) = e1.transpose();
    r_new.row(1) = e2.transpose();
    r_new.row(2) = e3.transpose();

    const Eigen::Matrix3d k_new = left.intrinsics();
    Eigen::Matrix3d downscale = Eigen::Matrix3d::Identity();
    downscale(0, 0) = 1.0 / scale_ratio;
    downscale(1, 1) = 1.0 / scale_ratio;

    RectificationSetup setup;
    setup.h_left = k_new * r_new * left.rotation.transpose() * left.intrinsics().inverse();
    setup.h_right =
        downscale * k_new * r_new * right.rotation.transpose() * right.intrinsics().inverse();
    setup.baseline = baseline;
    setup.focal = left.focal;
    setup.scale_ratio = scale_ratio;
    setup.principal_point = left.principal_point;
    setup.check();
    return setup;
}

DisparityMap disparity_to_depth(const DisparityMap& disp, const RectificationSetup& setup) {
    disp.check();
    setup.check();
    DisparityMap out = DisparityMap::create(disp.width, disp.height);
    const double fb = setup.focal * setup.baseline;
    for (int y = 0; y < disp.height; ++y)
        for (int x = 0; x < disp.width; ++x)
            if (disp.is_valid(x, y) && disp.at(x, y) > 0.0)
                out.set(x, y, fb / disp.at(x, y));
    return out;
}

DisparityMap depth_to_disparity(const DisparityMap& depth, const RectificationSetup& setup) {
    // Z = f b / d is an involution, so the conversion is its own inverse.
    return disparity_to_depth(depth, setup);
}

PointCloud project_to_cloud(const DisparityMap& disp, const RectificationSetup& setup) {
    disp.check();
    setup.check();
    PointCloud cloud;
    cloud.points.reserve(disp.valid_count());
    const double fb = setup.focal * setup.baseline;
    const double cx = setup.principal_point.x();
    const double cy = setup.principal_point.y();
    for (int y = 0; y < disp.height; ++y) {
        for (int x = 0; x < disp.width; ++x) {
            if (!disp.is_valid(x, y))
                continue;
            const double d = disp.at(x, y);
            detail::require(d > 0.0, "project_to_cloud: valid disparities must be > 0");
            const double z = fb / d;
            cloud.points.push_back({(x - cx) * z / setup.focal, (y - cy) * z / setup.focal,
                                    z, x, y});
        }
    }
    return cloud;
}

namespace {

struct GridCell {
    std::int64_t x, y, z;
};

GridCell cell_of(const CloudPoint& p, double inv_cell) {
    return {static_cast<std::int64_t>(std::floor(p.x * inv_cell)),
            static_cast<std::int64_t>(std::floor(p.y * inv_cell)),
            static_cast<std::int64_t>(std::floor(p.z * inv_cell))};
}

// 21 bits per signed grid coordinate, offset into the positive range.
std::uint64_t grid_key(GridCell c) {
    const auto pack = [](std::int64_t v) {
        return static_cast<std::uint64_t>(v + (std::int64_t{1} << 20)) & ((1u << 21) - 1);
    };
    return (pack(c.x) << 42) | (pack(c.y) << 21) | pack(c.z);
}

} // namespace

CloudCleanResult remove_isolated_points(const PointCloud& cloud, double radius,
                                        int min_neighbors) {
    cloud.check();
    detail::require(radius > 0.0, "remove_isolated_points: radius must be > 0");
    CloudCleanResult result;
    result.cloud = cloud;
    if (min_neighbors <= 0)
        return result;

    const double inv_cell = 1.0 / radius;
    const double r2 = radius * radius;
    std::vector<CloudPoint>& pts = result.cloud.points;
    // Simultaneous removal sweeps until stable: deleting an isolated point can
    // strand its former neighbors, and idempotence requires settling that out.
    bool changed = true;
    while (changed && !pts.empty()) {
        changed = false;
        std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid;
        grid.reserve(pts.size());
        for (std::uint32_t i = 0; i < pts.size(); ++i)
            grid[grid_key(cell_of(pts[i], inv_cell))].push_back(i);

        std::vector<CloudPoint> kept;
        kept.reserve(pts.size());
        for (std::uint32_t i = 0; i < pts.size(); ++i) {
            const CloudPoint& p = pts[i];
            const GridCell home = cell_of(p, inv_cell);
            int found = 0;
            for (int dx = -1; dx <= 1 && found < min_neighbors; ++dx) {
                for (int dy = -1; dy <= 1 && found < min_neighbors; ++dy) {
                    for (int dz = -1; dz <= 1 && found < min_neighbors; ++dz) {
                        const auto it = grid.find(
                            grid_key({home.x + dx, home.y + dy, home.z + dz}));
                        if (it == grid.end())
                            continue;
                        for (const std::uint32_t j : it->second) {
                            if (j == i)
                                continue;
                            const CloudPoint& q = pts[j];
                            const double ddx = p.x - q.x;
                            const double ddy = p.y - q.y;
                            const double ddz = p.z - q.z;
                            if (ddx * ddx + ddy * ddy + ddz * ddz <= r2 &&
                                ++found >= min_neighbors)
                                break;
                        }
                    }
                }
            }
            if (found >= min_neighbors) {
                kept.push_back(p);
            } else {
                result.removed_pixels.emplace_back(p.px, p.py);
                changed = true;
            }
        }
        pts = std::move(kept);
    }
    return result;
}

DisparityMap warp_disparity(const DisparityMap& disp, const Eigen::Matrix3d& h_src,
                            const Eigen::Matrix3d& h_dst, double baseline_ratio,
                            double scale, Resolution out_res) {
    disp.check();
    detail::require(baseline_ratio > 0.0 && scale > 0.0,
                    "warp_disparity: ratios must be > 0");
    const Eigen::FullPivLU<Eigen::Matrix3d> lu_dst(h_dst);
    detail::require(lu_dst.isInvertible() &&
                        Eigen::FullPivLU<Eigen::Matrix3d>(h_src).isInvertible(),
                    "warp_disparity: singular homography");
    const Eigen::Matrix3d chain = h_src * lu_dst.inverse();

    const int out_w = out_res.width > 0 ? out_res.width : disp.width;
    const int out_h = out_res.height > 0 ? out_res.height : disp.height;
    const double factor = baseline_ratio * scale;
    DisparityMap out = DisparityMap::create(out_w, out_h);

    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const Eigen::Vector3d q = chain * Eigen::Vector3d(x, y, 1.0);
            if (std::abs(q.z()) < 1e-12)
                continue;
            const double qx = q.x() / q.z();
            const double qy = q.y() / q.z();
            if (!(qx >= 0.0 && qx <= disp.width - 1 && qy >= 0.0 && qy <= disp.height - 1))
                continue;
            const int x0 = static_cast<int>(std::floor(qx));
            const int y0 = static_cast<int>(std::floor(qy));
            const double fx = qx - x0;
            const double fy = qy - y0;
            const double weights[4] = {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy),
                                       (1.0 - fx) * fy, fx * fy};
            const int coords[4][2] = {{x0, y0}, {x0 + 1, y0}, {x0, y0 + 1}, {x0 + 1, y0 + 1}};
            double sum_w = 0.0;
            double sum_wd = 0.0;
            double d_min = 0.0;
            double d_max = 0.0;
            bool any = false;
            for (int k = 0; k < 4; ++k) {
                if (weights[k] <= 0.0)
                    continue;
                const int cx = coords[k][0];
                const int cy = coords[k][1];
                if (!disp.is_valid(cx, cy))
                    continue; // interpolation restricted to valid samples
                const double d = disp.at(cx, cy);
                sum_w += weights[k];
                sum_wd += weights[k] * d;
                d_min = any ? std::min(d_min, d) : d;
                d_max = any ? std::max(d_max, d) : d;
                any = true;
            }
            // Footprints across a depth discontinuity mix foreground and
            // background; treat them as occluded.
            if (!any || d_max - d_min > 1.0)
                continue;
            out.set(x, y, (sum_wd / sum_w) * factor);
        }
    }
    return out;
}

namespace {

json matrix_to_json(const Eigen::Matrix3d& m) {
    json arr = json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            arr.push_back(m(r, c));
    return arr;
}

Eigen::Vector2d vec2_from_json(const json& arr, const std::filesystem::path& path,
                               const char* key) {
    if (!arr.is_array() || arr.size() != 2)
        throw Error(path.string() + ": '" + key + "' must be a 2-element array");
    return {arr.at(0).get<double>(), arr.at(1).get<double>()};
}

} // namespace

CameraCalibration load_calibration(const std::filesystem::path& path) {
    const json doc = detail::load_json_file(path);
    detail::require_keys(doc, path, {"focal", "principal_point", "rotation", "translation"});
    CameraCalibration calib;
    try {
        calib.focal = doc.at("focal").get<double>();
        calib.principal_point = vec2_from_json(doc.at("principal_point"), path, "principal_point");
        calib.rotation = detail::matrix3_from_json(doc.at("rotation"), path, "rotation");
        const json& t = doc.at("translation");
        if (!t.is_array() || t.size() != 3)
            throw Error(path.string() + ": 'translation' must be a 3-element array");
        calib.translation = {t.at(0).get<double>(), t.at(1).get<double>(),
                             t.at(2).get<double>()};
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    try {
        calib.check();
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return calib;
}

void save_calibration(const CameraCalibration& calib, const std::filesystem::path& path) {
    calib.check();
    json doc;
    doc["focal"] = calib.focal;
    doc["principal_point"] = {calib.principal_point.x(), calib.principal_point.y()};
    doc["rotation"] = matrix_to_json(calib.rotation);
    doc["translation"] = {calib.translation.x(), calib.translation.y(),
                          calib.translation.z()};
    detail::write_json_file(doc, path);
}

RectificationSetup load_rectification(const std::filesystem::path& path) {
    const json doc = detail::load_json_file(path);
    detail::require_keys(
        doc, path, {"h_left", "h_right", "baseline", "focal", "scale_ratio", "principal_point"});
    RectificationSetup setup;
    try {
        setup.h_left = detail::matrix3_from_json(doc.at("h_left"), path, "h_left");
        setup.h_right = detail::matrix3_from_json(doc.at("h_right"), path, "h_right");
        setup.baseline = doc.at("baseline").get<double>();
        setup.focal = doc.at("focal").get<double>();
        setup.scale_ratio = doc.at("scale_ratio").get<double>();
        setup.principal_point = vec2_from_json(doc.at("principal_point"), path, "principal_point");
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    try {
        setup.check();
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return setup;
}

void save_rectification(const RectificationSetup& setup, const std::filesystem::path& path) {
    setup.check();
    json doc;
    doc["h_left"] = matrix_to_json(setup.h_left);
    doc["h_right"] = matrix_to_json(setup.h_right);
    doc["baseline"] = setup.baseline;
    doc["focal"] = setup.focal;
    doc["scale_ratio"] = setup.scale_ratio;
    doc["principal_point"] = {setup.principal_point.x(), setup.principal_point.y()};
    detail::write_json_file(doc, path);
}

} // namespace ssf
