#include "test_support.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <system_error>

#include "ssf/error.hpp"
#include "ssf/io.hpp"

namespace ssf::testing {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// TempDir
// ---------------------------------------------------------------------------

TempDir::TempDir(const std::string& tag) {
    std::random_device rd;
    for (int attempt = 0; attempt < 64; ++attempt) {
        fs::path candidate =
            fs::temp_directory_path() / ("ssf-" + tag + "-" + std::to_string(rd()));
        std::error_code ec;
        if (fs::create_directory(candidate, ec) && !ec) {
            dir_ = std::move(candidate);
            return;
        }
    }
    throw Error("test support: could not create a temporary directory");
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
}

// ---------------------------------------------------------------------------
// Texture and stereogram rendering
// ---------------------------------------------------------------------------

Texture::Texture(int width, int height, int pad, std::mt19937& rng)
    : pad_(pad), lattice_width_(width + pad + 2), lattice_height_(height + 3) {
    std::uniform_real_distribution<float> dist(0.0f, 255.0f);
    lattice_.resize(static_cast<size_t>(lattice_width_) * lattice_height_);
    for (float& v : lattice_)
        v = dist(rng);
}

double Texture::sample(double u, double v) const {
    // Shift into lattice coordinates; clamp so the rim extends flat.
    double su = std::clamp(u + pad_, 0.0, lattice_width_ - 1.001);
    double sv = std::clamp(v + 1.0, 0.0, lattice_height_ - 1.001);
    const int i0 = static_cast<int>(su);
    const int j0 = static_cast<int>(sv);
    const double fx = su - i0;
    const double fy = sv - j0;
    const auto at = [&](int i, int j) {
        return static_cast<double>(lattice_[static_cast<size_t>(j) * lattice_width_ + i]);
    };
    return (1.0 - fy) * ((1.0 - fx) * at(i0, j0) + fx * at(i0 + 1, j0)) +
           fy * ((1.0 - fx) * at(i0, j0 + 1) + fx * at(i0 + 1, j0 + 1));
}

namespace {

float quantize8(double v) {
    return static_cast<float>(std::lround(std::clamp(v, 0.0, 255.0)));
}

} // namespace

SyntheticPair render_pair(int width, int height,
                          const std::function<double(double, double)>& disparity,
                          std::mt19937& rng) {
    double max_d = 0.0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            max_d = std::max(max_d, disparity(x, y));
    const int pad = static_cast<int>(std::ceil(max_d)) + 2;
    const Texture texture(width, height, pad, rng);

    SyntheticPair pair;
    pair.left = MultiBandImage::create(width, height, 1);
    pair.right = MultiBandImage::create(width, height, 1);
    pair.truth = DisparityMap::create(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double d = disparity(x, y);
            pair.right.at(x, y) = quantize8(texture.sample(x, y));
            pair.left.at(x, y) = quantize8(texture.sample(x - d, y));
            pair.truth.set(x, y, d);
        }
    }
    return pair;
}

std::function<double(double, double)> plane_field(double d0, double gx, double gy) {
    return [=](double x, double y) { return d0 + gx * x + gy * y; };
}

// ---------------------------------------------------------------------------
// Rigs and on-disk scenes
// ---------------------------------------------------------------------------

std::pair<CameraCalibration, CameraCalibration>
make_parallel_rig(double focal, double baseline, Resolution res_left) {
    CameraCalibration left;
    left.focal = focal;
    left.principal_point = {(res_left.width - 1) / 2.0, (res_left.height - 1) / 2.0};
    CameraCalibration right = left;
    right.translation = {-baseline, 0.0, 0.0}; // camera center at (+baseline, 0, 0)
    return {left, right};
}

std::pair<CameraCalibration, CameraCalibration>
make_unbalanced_rig(double focal, double baseline, Resolution res_left, int scale) {
    auto [left, right] = make_parallel_rig(focal, baseline, res_left);
    right.focal = focal / scale;
    right.principal_point = left.principal_point / scale;
    return {left, right};
}

SceneFixture write_plane_scene(const fs::path& dir, int width, int height, int patterns,
                               double d0, double gx, double gy, double focal,
                               double baseline, unsigned seed) {
    fs::create_directories(dir);
    std::mt19937 rng(seed);
    const auto field = plane_field(d0, gx, gy);

    SceneFixture fixture;
    fixture.dir = dir;
    json pair_list = json::array();
    for (int t = 0; t < patterns; ++t) {
        SyntheticPair pair = render_pair(width, height, field, rng);
        const std::string left_name = "left_" + std::to_string(t) + ".png";
        const std::string right_name = "right_" + std::to_string(t) + ".png";
        write_image(pair.left, dir / left_name);
        write_image(pair.right, dir / right_name);
        pair_list.push_back(json{{"left", left_name}, {"right", right_name}});
        if (t == 0)
            fixture.truth = std::move(pair.truth);
    }

    const auto [calib_left, calib_right] =
        make_parallel_rig(focal, baseline, {width, height});
    save_calibration(calib_left, dir / "calib_left.json");
    save_calibration(calib_right, dir / "calib_right.json");
    fixture.setup = unbalanced_rectify(calib_left, calib_right, {width, height},
                                       {width, height});

    json scene;
    scene["pairs"] = pair_list;
    scene["calib_left"] = "calib_left.json";
    scene["calib_right"] = "calib_right.json";
    scene["resolution_left"] = {width, height};
    scene["resolution_right"] = {width, height};
    scene["layout"] = "single";
    std::ofstream out(dir / "scene.json");
    out << scene.dump(2) << "\n";
    return fixture;
}

// ---------------------------------------------------------------------------
// Proxy fixture
// ---------------------------------------------------------------------------

ProxyFixture make_proxy_fixture(int width, int height, int scale, double alpha,
                                unsigned seed) {
    detail::require(width % scale == 0 && height % scale == 0,
                    "proxy fixture: dimensions must divide by scale");
    const int lo_width = width / scale;
    const int lo_height = height / scale;
    std::mt19937 rng(seed);

    // Disparity plane in high-res pixels, kept within [5s+2, ~11s+2].
    const double d0 = 5.0 * scale + 2.0;
    const double gx = 4.0 * scale / width;
    const double gy = 2.0 * scale / height;
    const auto field = plane_field(d0, gx, gy);

    double max_d = field(width - 1.0, height - 1.0);
    const int pad = static_cast<int>(std::ceil(max_d)) + 2;
    const Texture texture(width, height, pad, rng);
    const Texture noise(width, height, pad, rng);

    ProxyFixture fx;
    fx.rgb = MultiBandImage::create(width, height, 3);
    fx.rgb2 = MultiBandImage::create(width, height, 3);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const float left = quantize8(texture.sample(x - field(x, y), y));
            const float right = quantize8(texture.sample(x, y));
            for (int b = 0; b < 3; ++b) {
                fx.rgb.at(x, y, b) = left;
                fx.rgb2.at(x, y, b) = right;
            }
        }
    }

    // MS bands: gamma-curved mixture of the scene texture and an independent
    // noise field, sampled at the centers of the s x s blocks the box
    // downscale of the RGB view integrates over.
    const double center = (scale - 1) / 2.0;
    fx.ms = MultiBandImage::create(lo_width, lo_height, 10);
    fx.truth_lo = DisparityMap::create(lo_width, lo_height);
    for (int y = 0; y < lo_height; ++y) {
        for (int x = 0; x < lo_width; ++x) {
            const double u = scale * x + center;
            const double v = scale * y + center;
            const double mixed = std::clamp(
                (1.0 - alpha) * texture.sample(u, v) + alpha * noise.sample(u, v), 0.0,
                255.0);
            for (int b = 0; b < 10; ++b) {
                const double gamma = 0.5 + 1.5 * b / 9.0;
                fx.ms.at(x, y, b) = quantize8(255.0 * std::pow(mixed / 255.0, gamma));
            }
            fx.truth_lo.set(x, y, field(u, v) / scale);
        }
    }

    // Deliver the high-res RGB-RGB map into the MS frame: destination pixel
    // (x, y) samples the source at (s*x + c, s*y + c), values divided by s.
    fx.warp.h_src = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d h_dst = Eigen::Matrix3d::Identity();
    h_dst(0, 0) = 1.0 / scale;
    h_dst(1, 1) = 1.0 / scale;
    h_dst(0, 2) = -center / scale;
    h_dst(1, 2) = -center / scale;
    fx.warp.h_dst = h_dst;
    fx.warp.baseline_ratio = 1.0;
    fx.warp.scale = 1.0 / scale;
    fx.warp.out_res = {lo_width, lo_height};
    return fx;
}

ErrorStats mean_abs_error(const DisparityMap& pred, const DisparityMap& truth) {
    detail::require(pred.width == truth.width && pred.height == truth.height,
                    "mean_abs_error: dimension mismatch");
    ErrorStats stats;
    double sum = 0.0;
    for (int y = 0; y < pred.height; ++y) {
        for (int x = 0; x < pred.width; ++x) {
            if (!pred.is_valid(x, y) || !truth.is_valid(x, y))
                continue;
            sum += std::abs(pred.at(x, y) - truth.at(x, y));
            ++stats.count;
        }
    }
    stats.mean_abs = stats.count > 0 ? sum / static_cast<double>(stats.count) : 0.0;
    return stats;
}

// ---------------------------------------------------------------------------
// SGM reference dynamic program
// ---------------------------------------------------------------------------

CostVolume sgm_reference_direction(const CostVolume& volume, int dx, int dy, double p1,
                                   double p2) {
    const int width = volume.width;
    const int height = volume.height;
    const int d_max = volume.d_max;
    CostVolume path = CostVolume::zeros(width, height, d_max);

    std::vector<int> xs(static_cast<size_t>(width));
    std::vector<int> ys(static_cast<size_t>(height));
    for (int x = 0; x < width; ++x)
        xs[static_cast<size_t>(x)] = dx >= 0 ? x : width - 1 - x;
    for (int y = 0; y < height; ++y)
        ys[static_cast<size_t>(y)] = dy >= 0 ? y : height - 1 - y;

    for (const int y : ys) {
        for (const int x : xs) {
            const int px = x - dx;
            const int py = y - dy;
            const bool has_prev = px >= 0 && px < width && py >= 0 && py < height;
            if (!has_prev) {
                for (int d = 0; d < d_max; ++d)
                    path.at(x, y, d) = volume.at(x, y, d);
                continue;
            }
            double prev_min = path.at(px, py, 0);
            for (int d = 1; d < d_max; ++d)
                prev_min = std::min(prev_min, path.at(px, py, d));
            for (int d = 0; d < d_max; ++d) {
                double best = path.at(px, py, d);
                if (d > 0)
                    best = std::min(best, path.at(px, py, d - 1) + p1);
                if (d + 1 < d_max)
                    best = std::min(best, path.at(px, py, d + 1) + p1);
                best = std::min(best, prev_min + p2);
                path.at(x, y, d) = volume.at(x, y, d) + best - prev_min;
            }
        }
    }
    return path;
}

CostVolume sgm_reference(const CostVolume& volume, const SgmParams& params) {
    static constexpr std::array<std::array<int, 2>, 8> directions = {{
        {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1},
    }};
    CostVolume acc = CostVolume::zeros(volume.width, volume.height, volume.d_max);
    for (int i = 0; i < params.paths; ++i) {
        const CostVolume path = sgm_reference_direction(
            volume, directions[static_cast<size_t>(i)][0],
            directions[static_cast<size_t>(i)][1], params.p1, params.p2);
        for (size_t j = 0; j < acc.costs.size(); ++j)
            acc.costs[j] += path.costs[j];
    }
    return acc;
}

CostVolume random_volume(std::mt19937& rng, int max_dim, bool integer_costs) {
    std::uniform_int_distribution<int> dim(1, max_dim);
    const int width = dim(rng);
    const int height = dim(rng);
    const int d_max = dim(rng);
    CostVolume volume = CostVolume::zeros(width, height, d_max);
    if (integer_costs) {
        std::uniform_int_distribution<int> cost(0, 63);
        for (double& c : volume.costs)
            c = cost(rng);
    } else {
        std::uniform_real_distribution<double> cost(0.0, 100.0);
        for (double& c : volume.costs)
            c = cost(rng);
    }
    return volume;
}

// ---------------------------------------------------------------------------
// Radiometric helpers
// ---------------------------------------------------------------------------

MultiBandImage random_uint8_image(int width, int height, std::mt19937& rng) {
    MultiBandImage img = MultiBandImage::create(width, height, 1);
    std::uniform_int_distribution<int> dist(0, 255);
    for (float& v : img.data)
        v = static_cast<float>(dist(rng));
    return img;
}

std::vector<int> random_increasing_remap(std::mt19937& rng) {
    std::uniform_int_distribution<int> step(1, 200);
    std::vector<int> remap(256);
    int level = step(rng);
    for (int i = 0; i < 256; ++i) {
        remap[static_cast<size_t>(i)] = level;
        level += step(rng);
    }
    return remap;
}

MultiBandImage apply_remap(const MultiBandImage& img, const std::vector<int>& remap) {
    MultiBandImage out = MultiBandImage::create(img.width, img.height, img.bands, 16);
    for (size_t i = 0; i < img.data.size(); ++i)
        out.data[i] =
            static_cast<float>(remap[static_cast<size_t>(std::lround(img.data[i]))]);
    return out;
}

} // namespace ssf::testing
