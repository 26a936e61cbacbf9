#include <Eigen/Dense>
#include <cmath>
#include <doctest.h>
#include <fstream>
#include <random>

#include "ssf/error.hpp"
#include "ssf/geometry.hpp"
#include "test_support.hpp"

using namespace ssf;
using ssf::testing::TempDir;

namespace {

bool near_identity(const Eigen::Matrix3d& m, double tol) {
    return (m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol;
}

Eigen::Vector2d apply_homography(const Eigen::Matrix3d& h, const Eigen::Vector2d& p) {
    const Eigen::Vector3d q = h * Eigen::Vector3d(p.x(), p.y(), 1.0);
    return {q.x() / q.z(), q.y() / q.z()};
}

Eigen::Vector2d project(const CameraCalibration& cam, const Eigen::Vector3d& point) {
    const Eigen::Vector3d c = cam.rotation * point + cam.translation;
    return {cam.focal * c.x() / c.z() + cam.principal_point.x(),
            cam.focal * c.y() / c.z() + cam.principal_point.y()};
}

RectificationSetup simple_setup(double baseline, double focal, double scale_ratio,
                                Eigen::Vector2d pp) {
    RectificationSetup setup;
    setup.baseline = baseline;
    setup.focal = focal;
    setup.scale_ratio = scale_ratio;
    setup.principal_point = std::move(pp);
    return setup;
}

} // namespace

TEST_SUITE("geometry") {

TEST_CASE("parallel equal-resolution rig rectifies to identity") {
    const auto [left, right] = ssf::testing::make_parallel_rig(800.0, 0.1, {640, 480});
    const RectificationSetup setup = unbalanced_rectify(left, right, {640, 480}, {640, 480});
    CHECK(near_identity(setup.h_left, 1e-6));
    CHECK(near_identity(setup.h_right, 1e-6));
    CHECK(setup.baseline == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(setup.focal == doctest::Approx(800.0).epsilon(1e-12));
    CHECK(setup.scale_ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(setup.principal_point.x() == doctest::Approx(319.5).epsilon(1e-12));
    CHECK(setup.principal_point.y() == doctest::Approx(239.5).epsilon(1e-12));
}

TEST_CASE("downscaled right camera still yields identity homographies") {
    const auto [left, right] = ssf::testing::make_unbalanced_rig(800.0, 0.1, {640, 480}, 4);
    const RectificationSetup setup = unbalanced_rectify(left, right, {640, 480}, {160, 120});
    CHECK(near_identity(setup.h_left, 1e-6));
    CHECK(near_identity(setup.h_right, 1e-6));
    CHECK(setup.scale_ratio == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("rectified rows align across resolutions on a general rig") {
    const double s = 3222.0 / 510.0;
    CameraCalibration left;
    left.focal = 2400.0;
    left.principal_point = {1610.5, 1447.5};
    left.rotation =
        Eigen::AngleAxisd(0.01, Eigen::Vector3d(0.2, 1.0, 0.1).normalized()).toRotationMatrix();

    CameraCalibration right;
    right.focal = 2400.0 / s * 0.97; // intrinsics need not match the left camera
    right.principal_point = {254.5, 228.5};
    right.rotation =
        Eigen::AngleAxisd(0.02, Eigen::Vector3d(1.0, 0.3, -0.2).normalized()).toRotationMatrix();
    const Eigen::Vector3d center(0.31, 0.004, -0.01);
    right.translation = -right.rotation * center;

    const RectificationSetup setup =
        unbalanced_rectify(left, right, {3222, 2896}, {510, 458});
    CHECK(setup.scale_ratio == doctest::Approx(3222.0 / 510.0).epsilon(1e-12));
    CHECK(setup.baseline == doctest::Approx(center.norm()).epsilon(1e-9));

    std::mt19937 rng(71);
    std::uniform_real_distribution<double> span(-1.0, 1.0);
    std::uniform_real_distribution<double> depth(3.0, 12.0);
    for (int i = 0; i < 100; ++i) {
        const Eigen::Vector3d world(span(rng) * 1.3 + 0.3, span(rng), depth(rng));
        const Eigen::Vector2d rect_left =
            apply_homography(setup.h_left, project(left, world));
        const Eigen::Vector2d rect_right =
            apply_homography(setup.h_right, project(right, world));
        CHECK(std::abs(rect_left.y() - setup.scale_ratio * rect_right.y()) <= 0.05);
    }
}

TEST_CASE("rectification rejects a right camera wider than the left") {
    const auto [left, right] = ssf::testing::make_parallel_rig(800.0, 0.1, {640, 480});
    CHECK_THROWS_AS(unbalanced_rectify(left, right, {640, 480}, {800, 600}), Error);
}

TEST_CASE("depth conversion follows focal times baseline over disparity") {
    const RectificationSetup setup = simple_setup(0.04, 1000.0, 1.0, {319.5, 239.5});
    DisparityMap disp = DisparityMap::create(4, 1);
    disp.set(0, 0, 20.0);
    disp.set(1, 0, 40.0);
    disp.set(2, 0, 0.0); // zero disparity has no finite depth
    const DisparityMap depth = disparity_to_depth(disp, setup);
    CHECK(depth.at(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(depth.at(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(depth.is_valid(2, 0));
    CHECK_FALSE(depth.is_valid(3, 0));
    // Z * d is the rig constant focal * baseline.
    CHECK(depth.at(0, 0) * disp.at(0, 0) == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(depth.at(1, 0) * disp.at(1, 0) == doctest::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("depth and disparity conversions are mutually inverse") {
    const RectificationSetup setup = simple_setup(0.21, 1790.0, 2.0, {100.0, 80.0});
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> value(0.5, 60.0);
    DisparityMap disp = DisparityMap::create(32, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 32; ++x)
            if ((x + y) % 5 != 0)
                disp.set(x, y, value(rng));
    const DisparityMap round = depth_to_disparity(disparity_to_depth(disp, setup), setup);
    CHECK(round.valid == disp.valid);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 32; ++x)
            if (disp.is_valid(x, y))
                CHECK(std::abs(round.at(x, y) - disp.at(x, y)) <=
                      1e-9 * std::abs(disp.at(x, y)));
}

TEST_CASE("back-projection places pixels on the expected rays") {
    const RectificationSetup setup = simple_setup(0.05, 500.0, 1.0, {50.0, 40.0});
    DisparityMap disp = DisparityMap::create(101, 81);
    disp.set(50, 40, 10.0);   // exactly the principal point
    disp.set(100, 40, 10.0);  // 50 px right of it
    disp.set(50, 0, 25.0);    // 40 px above it
    const PointCloud cloud = project_to_cloud(disp, setup);
    REQUIRE(cloud.points.size() == disp.valid_count());

    const double z_near = 500.0 * 0.05 / 10.0; // 2.5 m
    for (const CloudPoint& p : cloud.points) {
        if (p.px == 50 && p.py == 40) {
            CHECK(std::abs(p.x) <= 1e-12);
            CHECK(std::abs(p.y) <= 1e-12);
            CHECK(p.z == doctest::Approx(z_near).epsilon(1e-12));
        } else if (p.px == 100 && p.py == 40) {
            CHECK(p.x == doctest::Approx(50.0 * z_near / 500.0).epsilon(1e-12));
            CHECK(std::abs(p.y) <= 1e-12);
        } else {
            CHECK(p.px == 50);
            CHECK(p.py == 0);
            CHECK(p.z == doctest::Approx(500.0 * 0.05 / 25.0).epsilon(1e-12));
            CHECK(p.y == doctest::Approx(-40.0 * p.z / 500.0).epsilon(1e-12));
        }
    }

    DisparityMap with_zero = DisparityMap::create(4, 1);
    with_zero.set(0, 0, 0.0);
    CHECK_THROWS_AS(project_to_cloud(with_zero, setup), Error);
}

TEST_CASE("doubling the baseline doubles every depth") {
    const RectificationSetup narrow = simple_setup(0.05, 500.0, 1.0, {50.0, 40.0});
    const RectificationSetup wide = simple_setup(0.10, 500.0, 1.0, {50.0, 40.0});
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> value(1.0, 30.0);
    DisparityMap disp = DisparityMap::create(12, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x)
            disp.set(x, y, value(rng));
    const PointCloud a = project_to_cloud(disp, narrow);
    const PointCloud b = project_to_cloud(disp, wide);
    REQUIRE(a.points.size() == b.points.size());
    for (size_t i = 0; i < a.points.size(); ++i)
        CHECK(b.points[i].z == doctest::Approx(2.0 * a.points[i].z).epsilon(1e-12));
}

TEST_CASE("isolated points are removed, clusters survive") {
    PointCloud cloud;
    for (int i = 0; i < 5; ++i)
        cloud.points.push_back({1.0 + 0.01 * i, 2.0, 3.0, i, 0});
    cloud.points.push_back({8.0, 8.0, 8.0, 99, 0}); // far from everything
    const CloudCleanResult result = remove_isolated_points(cloud, 0.1, 2);
    CHECK(result.cloud.points.size() == 5);
    REQUIRE(result.removed_pixels.size() == 1);
    CHECK(result.removed_pixels[0] == std::pair<int, int>(99, 0));
    for (const CloudPoint& p : result.cloud.points)
        CHECK(p.px != 99);

    const CloudCleanResult identity = remove_isolated_points(cloud, 0.1, 0);
    CHECK(identity.cloud.points.size() == cloud.points.size());
    CHECK(identity.removed_pixels.empty());
}

TEST_CASE("cloud cleaning runs to a fixed point") {
    // A chain spaced wider than half the radius unravels from the ends: each
    // removal exposes the next point, so only the empty set is stable.
    PointCloud chain;
    for (int i = 0; i < 10; ++i)
        chain.points.push_back({0.09 * i, 0.0, 1.0, i, 0});
    const CloudCleanResult result = remove_isolated_points(chain, 0.1, 2);
    CHECK(result.cloud.points.empty());
    CHECK(result.removed_pixels.size() == 10);

    // Re-running on an already clean cloud must be a no-op.
    PointCloud cluster;
    for (int i = 0; i < 6; ++i)
        cluster.points.push_back({0.01 * i, 0.0, 1.0, i, 0});
    const CloudCleanResult once = remove_isolated_points(cluster, 0.1, 2);
    CHECK(once.cloud.points.size() == 6);
    const CloudCleanResult twice = remove_isolated_points(once.cloud, 0.1, 2);
    CHECK(twice.cloud.points.size() == 6);
    CHECK(twice.removed_pixels.empty());
}

TEST_CASE("warp with identity homographies copies the map") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> value(0.0, 40.0);
    DisparityMap disp = DisparityMap::create(30, 22);
    for (int y = 0; y < 22; ++y)
        for (int x = 0; x < 30; ++x)
            if ((x * 7 + y * 3) % 6 != 0)
                disp.set(x, y, value(rng));
    const Eigen::Matrix3d identity = Eigen::Matrix3d::Identity();
    const DisparityMap out = warp_disparity(disp, identity, identity, 1.0, 1.0);
    CHECK(out.valid == disp.valid);
    CHECK(out.values == disp.values);
}

TEST_CASE("warp multiplies values by baseline ratio times scale") {
    DisparityMap disp = DisparityMap::create(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            disp.set(x, y, 3.0 + x);
    const Eigen::Matrix3d identity = Eigen::Matrix3d::Identity();
    const DisparityMap halved = warp_disparity(disp, identity, identity, 0.5, 1.0);
    const DisparityMap same = warp_disparity(disp, identity, identity, 0.5, 2.0);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            CHECK(halved.at(x, y) == 0.5 * disp.at(x, y));
            CHECK(same.at(x, y) == disp.at(x, y));
        }
    }
}

TEST_CASE("warp round trip through a general homography is accurate") {
    DisparityMap disp = DisparityMap::create(120, 90);
    for (int y = 0; y < 90; ++y)
        for (int x = 0; x < 120; ++x)
            disp.set(x, y, 8.0 + 0.01 * x + 0.005 * y);
    Eigen::Matrix3d h;
    h << 1.02, 0.01, 2.3, -0.008, 0.99, -1.7, 1e-5, -2e-5, 1.0;
    const Eigen::Matrix3d identity = Eigen::Matrix3d::Identity();
    const DisparityMap there = warp_disparity(disp, h, identity, 1.0, 1.0);
    const DisparityMap back = warp_disparity(there, identity, h, 1.0, 1.0);
    size_t both = 0;
    for (int y = 0; y < 90; ++y) {
        for (int x = 0; x < 120; ++x) {
            if (!back.is_valid(x, y) || !disp.is_valid(x, y))
                continue;
            ++both;
            CHECK(std::abs(back.at(x, y) - disp.at(x, y)) <= 0.02);
        }
    }
    CHECK(both >= disp.values.size() / 2); // most of the interior survives
}

TEST_CASE("warp treats footprints across disparity jumps as occluded") {
    DisparityMap disp = DisparityMap::create(20, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 20; ++x)
            disp.set(x, y, x < 10 ? 5.0 : 10.0);
    // Destination pixel x samples the source at x + 0.5, so the footprint at
    // x = 9 straddles the 5 -> 10 step.
    Eigen::Matrix3d h_dst = Eigen::Matrix3d::Identity();
    h_dst(0, 2) = -0.5;
    const DisparityMap out =
        warp_disparity(disp, Eigen::Matrix3d::Identity(), h_dst, 1.0, 1.0);
    CHECK_FALSE(out.is_valid(9, 3));
    CHECK(out.is_valid(5, 3));
    CHECK(out.at(5, 3) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(out.is_valid(14, 3));
    CHECK(out.at(14, 3) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("warp honours an explicit output resolution") {
    DisparityMap disp = DisparityMap::create(16, 12);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 16; ++x)
            disp.set(x, y, 4.0);
    const Eigen::Matrix3d identity = Eigen::Matrix3d::Identity();
    const DisparityMap out = warp_disparity(disp, identity, identity, 1.0, 1.0, {7, 5});
    CHECK(out.width == 7);
    CHECK(out.height == 5);
    CHECK(out.density() == 1.0);
}

TEST_CASE("warp rejects singular homographies and bad ratios") {
    DisparityMap disp = DisparityMap::create(4, 4);
    disp.set(1, 1, 2.0);
    Eigen::Matrix3d singular = Eigen::Matrix3d::Zero();
    const Eigen::Matrix3d identity = Eigen::Matrix3d::Identity();
    CHECK_THROWS_AS(warp_disparity(disp, singular, identity, 1.0, 1.0), Error);
    CHECK_THROWS_AS(warp_disparity(disp, identity, singular, 1.0, 1.0), Error);
    CHECK_THROWS_AS(warp_disparity(disp, identity, identity, 0.0, 1.0), Error);
    CHECK_THROWS_AS(warp_disparity(disp, identity, identity, 1.0, -2.0), Error);
}

TEST_CASE("calibration files round trip") {
    TempDir tmp("calib");
    CameraCalibration calib;
    calib.focal = 1234.5;
    calib.principal_point = {100.25, 80.75};
    calib.rotation =
        Eigen::AngleAxisd(0.1, Eigen::Vector3d(0.0, 0.0, 1.0)).toRotationMatrix();
    calib.translation = {-0.3, 0.01, 0.02};
    const auto path = tmp / "cam.json";
    save_calibration(calib, path);
    const CameraCalibration loaded = load_calibration(path);
    CHECK(loaded.focal == calib.focal);
    CHECK((loaded.principal_point - calib.principal_point).norm() <= 1e-12);
    CHECK((loaded.rotation - calib.rotation).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((loaded.translation - calib.translation).norm() <= 1e-12);

    CHECK_THROWS_AS(load_calibration(tmp / "absent.json"), Error);

    std::ofstream(tmp / "broken.json") << "{\"focal\": 100.0}";
    CHECK_THROWS_AS(load_calibration(tmp / "broken.json"), Error);

    std::ofstream(tmp / "extra.json")
        << R"({"focal": 100.0, "principal_point": [1, 2], "rotation": [1,0,0,0,1,0,0,0,1],
             "translation": [0, 0, 0], "skew": 3})";
    CHECK_THROWS_AS(load_calibration(tmp / "extra.json"), Error);
}

TEST_CASE("rectification files round trip") {
    TempDir tmp("rect");
    RectificationSetup setup = simple_setup(0.31, 2400.0, 3222.0 / 510.0, {20.5, 30.5});
    setup.h_left << 1.0, 0.01, -2.0, 0.0, 1.0, 0.5, 0.0, 0.0, 1.0;
    setup.h_right << 0.5, 0.0, 1.0, 0.02, 0.5, 0.0, 0.0, 0.0, 1.0;
    const auto path = tmp / "setup.json";
    save_rectification(setup, path);
    const RectificationSetup loaded = load_rectification(path);
    CHECK((loaded.h_left - setup.h_left).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((loaded.h_right - setup.h_right).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(loaded.baseline == setup.baseline);
    CHECK(loaded.focal == setup.focal);
    CHECK(loaded.scale_ratio == setup.scale_ratio);

    std::ofstream(tmp / "short.json")
        << R"({"h_left": [1, 2, 3], "h_right": [1,0,0,0,1,0,0,0,1], "baseline": 0.1,
             "focal": 100.0, "scale_ratio": 1.0, "principal_point": [0, 0]})";
    CHECK_THROWS_AS(load_rectification(tmp / "short.json"), Error);
}

TEST_CASE("structural checks reject malformed objects") {
    CameraCalibration calib;
    calib.focal = 0.0;
    CHECK_THROWS_AS(calib.check(), Error);

    RectificationSetup setup = simple_setup(0.1, 100.0, 0.5, {0.0, 0.0});
    CHECK_THROWS_AS(setup.check(), Error); // scale_ratio below 1
    setup.scale_ratio = 1.0;
    setup.baseline = 0.0;
    CHECK_THROWS_AS(setup.check(), Error);
}

} // TEST_SUITE
