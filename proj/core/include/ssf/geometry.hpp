#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <utility>
#include <vector>

#include "ssf/disparity.hpp"
#include "ssf/point_cloud.hpp"

namespace ssf {

struct Resolution {
    int width = 0;
    int height = 0;
};

/// Pinhole camera with square pixels and zero skew. `rotation` maps world
/// coordinates into the camera frame and `translation` is the world origin
/// expressed in camera coordinates (x_cam = R x_world + t), so the camera
/// center sits at -R^T t. Inputs are assumed lens-distortion free.
struct CameraCalibration {
    double focal = 0.0;
    Eigen::Vector2d principal_point = Eigen::Vector2d::Zero();
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Matrix3d intrinsics() const;
    Eigen::Vector3d center() const;
    void check() const;
};

/// Ties a cross-resolution camera pair together: h_left maps native left
/// pixels into the rectified high-resolution frame; h_right maps native
/// right pixels into the rectified low-resolution frame, whose rows align
/// with the left frame's after scaling coordinates by scale_ratio. Baseline,
/// focal and principal point describe the rectified high-resolution frame
/// for depth conversion and back-projection.
struct RectificationSetup {
    Eigen::Matrix3d h_left = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d h_right = Eigen::Matrix3d::Identity();
    double baseline = 0.0;    ///< meters
    double focal = 0.0;       ///< pixels
    double scale_ratio = 1.0; ///< high-res width / low-res width, >= 1
    Eigen::Vector2d principal_point = Eigen::Vector2d::Zero();

    void check() const;
};

/// Computes the unbalanced rectification of a two-camera rig whose left
/// camera is the higher-resolution one. The rectified frame keeps the left
/// intrinsics and rotates both cameras so the new x axis follows the
/// baseline; the right homography folds in the resolution change.
RectificationSetup unbalanced_rectify(const CameraCalibration& left,
                                      const CameraCalibration& right, Resolution res_left,
                                      Resolution res_right);

/// Z = focal * baseline / d per valid pixel; pixels with d = 0 come back
/// invalid. The returned map holds meters.
DisparityMap disparity_to_depth(const DisparityMap& disp, const RectificationSetup& setup);

/// Inverse of disparity_to_depth on positive depths.
DisparityMap depth_to_disparity(const DisparityMap& depth, const RectificationSetup& setup);

/// Pinhole back-projection of every valid pixel; source pixels become the
/// cloud's pixel tags. All valid disparities must be > 0.
PointCloud project_to_cloud(const DisparityMap& disp, const RectificationSetup& setup);

struct CloudCleanResult {
    PointCloud cloud;
    /// Pixel tags of every removed point, so callers can invalidate the
    /// corresponding disparities.
    std::vector<std::pair<int, int>> removed_pixels;
};

/// Removes points with fewer than min_neighbors other points within
/// `radius`, repeating until stable so a second application is a no-op.
CloudCleanResult remove_isolated_points(const PointCloud& cloud, double radius,
                                        int min_neighbors);

/// Backward-warps a disparity map from the frame rectified by h_src into the
/// frame rectified by h_dst: each destination pixel p samples the source at
/// h_src(h_dst^-1(p)) with valid-only bilinear interpolation, and the value
/// is multiplied by baseline_ratio * scale. Destination pixels mapping
/// outside the source, or whose sampling footprint spans a disparity jump
/// greater than 1 px, come back invalid. out_res defaults to the input size.
DisparityMap warp_disparity(const DisparityMap& disp, const Eigen::Matrix3d& h_src,
                            const Eigen::Matrix3d& h_dst, double baseline_ratio,
                            double scale, Resolution out_res = {});

CameraCalibration load_calibration(const std::filesystem::path& path);
void save_calibration(const CameraCalibration& calib, const std::filesystem::path& path);

RectificationSetup load_rectification(const std::filesystem::path& path);
void save_rectification(const RectificationSetup& setup, const std::filesystem::path& path);

} // namespace ssf
