#pragma once

#include <filesystem>
#include <vector>

namespace ssf {

/// A 3D point in meters, tagged with the disparity-map pixel it came from.
struct CloudPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    int px = 0;
    int py = 0;
};

struct PointCloud {
    std::vector<CloudPoint> points;

    /// Validates Z > 0 and pixel-tag uniqueness; throws Error otherwise.
    void check() const;
};

/// Writes an ASCII PLY with x/y/z float properties and px/py int properties.
void save_ply(const PointCloud& cloud, const std::filesystem::path& path);

} // namespace ssf
