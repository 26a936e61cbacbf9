#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <utility>

#include "io_json.hpp"
#include "ssf/census.hpp"
#include "ssf/geometry.hpp"
#include "ssf/io.hpp"
#include "ssf/log.hpp"
#include "ssf/metrics.hpp"
#include "ssf/parallel.hpp"
#include "ssf/pipeline.hpp"
#include "ssf/refine.hpp"
#include "ssf/sgm.hpp"
#include "ssf/supervision.hpp"

namespace ssf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Runs `fn`, rewriting any Error so the message starts with the stage name.
template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(std::string(name) + ": " + e.what());
    }
}

std::string format_density(double density) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", density);
    return buf;
}

Resolution resolution_from_json(const json& arr, const fs::path& path, const char* key) {
    if (!arr.is_array() || arr.size() != 2)
        throw Error(path.string() + ": '" + key + "' must be [width, height]");
    return {arr.at(0).get<int>(), arr.at(1).get<int>()};
}

BandLayout parse_layout(const std::string& name, const fs::path& path) {
    if (name == "single")
        return BandLayout::SingleBand;
    if (name == "color")
        return BandLayout::ThreeBand;
    throw Error(path.string() + ": unknown layout '" + name + "' (expected single or color)");
}

/// MS stacks ship as a JSON sidecar; anything else is a single-band image.
BandLayout ms_layout(const fs::path& path) {
    return path.extension() == ".json" ? BandLayout::BandStack : BandLayout::SingleBand;
}

DisparityFormat format_for(const fs::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".pfm")
        return DisparityFormat::FloatMap;
    if (ext == ".png")
        return DisparityFormat::Scaled16;
    throw Error(path.string() +
                ": cannot infer disparity format from extension (expected .pfm or .png)");
}

// ---------------------------------------------------------------------------
// annotate
// ---------------------------------------------------------------------------

struct SceneSpec {
    std::vector<std::pair<fs::path, fs::path>> pairs; ///< (left, right) per pattern
    fs::path calib_left;
    fs::path calib_right;
    Resolution res_left{};
    Resolution res_right{};
    BandLayout layout = BandLayout::SingleBand;

    bool has_target = false; ///< cross-setup delivery requested
    fs::path target_calib_right;
    Resolution target_res_right{};
};

SceneSpec parse_scene(const fs::path& scene_dir, const PipelineConfig& config) {
    const fs::path path = scene_dir / "scene.json";
    const json doc = detail::load_json_file(path);
    detail::require_keys(doc, path, {"pairs", "resolution_left", "resolution_right"},
                         {"calib_left", "calib_right", "layout", "target"});
    SceneSpec spec;
    try {
        const json& pairs = doc.at("pairs");
        if (!pairs.is_array() || pairs.empty())
            throw Error(path.string() + ": 'pairs' must be a non-empty array");
        for (const json& entry : pairs) {
            detail::require_keys(entry, path, {"left", "right"});
            spec.pairs.emplace_back(scene_dir / entry.at("left").get<std::string>(),
                                    scene_dir / entry.at("right").get<std::string>());
        }
        spec.res_left = resolution_from_json(doc.at("resolution_left"), path, "resolution_left");
        spec.res_right =
            resolution_from_json(doc.at("resolution_right"), path, "resolution_right");

        if (doc.contains("calib_left"))
            spec.calib_left = scene_dir / doc.at("calib_left").get<std::string>();
        else if (!config.geometry.calib_left.empty())
            spec.calib_left = config.geometry.calib_left;
        else
            throw Error(path.string() + ": no left calibration (scene 'calib_left' or config)");
        if (doc.contains("calib_right"))
            spec.calib_right = scene_dir / doc.at("calib_right").get<std::string>();
        else if (!config.geometry.calib_right.empty())
            spec.calib_right = config.geometry.calib_right;
        else
            throw Error(path.string() + ": no right calibration (scene 'calib_right' or config)");

        if (doc.contains("layout"))
            spec.layout = parse_layout(doc.at("layout").get<std::string>(), path);

        if (doc.contains("target")) {
            const json& target = doc.at("target");
            detail::require_keys(target, path, {"calib_right", "resolution_right"});
            spec.has_target = true;
            spec.target_calib_right = scene_dir / target.at("calib_right").get<std::string>();
            spec.target_res_right =
                resolution_from_json(target.at("resolution_right"), path, "resolution_right");
        }
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return spec;
}

json annotate_parameters(const PipelineConfig& config) {
    return json{{"d_max", config.matching.d_max},
                {"window_width", config.matching.window_width},
                {"window_height", config.matching.window_height},
                {"p1", config.sgm.p1},
                {"p2", config.sgm.p2},
                {"paths", config.sgm.paths},
                {"lrc_threshold", config.pool.lrc_threshold},
                {"wmdd_window", config.pool.wmdd_window},
                {"wmdd_threshold", config.pool.wmdd_threshold},
                {"wmdd_sigma_color", config.pool.wmdd_sigma_color},
                {"subpixel", to_string(config.subpixel)},
                {"cleaning_radius", config.geometry.cleaning_radius},
                {"min_neighbors", config.geometry.min_neighbors},
                {"min_density", config.supervision.min_density}};
}

// ---------------------------------------------------------------------------
// proxy
// ---------------------------------------------------------------------------

struct ProxySceneSpec {
    fs::path rgb;
    BandLayout rgb_layout = BandLayout::ThreeBand;
    fs::path ms;
    bool has_ms = false;
    fs::path rgb2;
    bool has_rgb2 = false;
    bool has_warp = false;
    WarpSpec warp;
};

ProxySceneSpec parse_proxy_scene(const fs::path& scene_dir) {
    const fs::path path = scene_dir / "proxy.json";
    const json doc = detail::load_json_file(path);
    detail::require_keys(doc, path, {"rgb"}, {"rgb_layout", "ms", "rgb2", "warp"});
    ProxySceneSpec spec;
    try {
        spec.rgb = scene_dir / doc.at("rgb").get<std::string>();
        if (doc.contains("rgb_layout"))
            spec.rgb_layout = parse_layout(doc.at("rgb_layout").get<std::string>(), path);
        if (doc.contains("ms")) {
            spec.ms = scene_dir / doc.at("ms").get<std::string>();
            spec.has_ms = true;
        }
        if (doc.contains("rgb2")) {
            spec.rgb2 = scene_dir / doc.at("rgb2").get<std::string>();
            spec.has_rgb2 = true;
        }
        if (doc.contains("warp")) {
            const json& w = doc.at("warp");
            detail::require_keys(w, path, {"h_src", "h_dst"},
                                 {"baseline_ratio", "scale", "out_width", "out_height"});
            spec.has_warp = true;
            spec.warp.h_src = detail::matrix3_from_json(w.at("h_src"), path, "h_src");
            spec.warp.h_dst = detail::matrix3_from_json(w.at("h_dst"), path, "h_dst");
            if (w.contains("baseline_ratio"))
                spec.warp.baseline_ratio = w.at("baseline_ratio").get<double>();
            if (w.contains("scale"))
                spec.warp.scale = w.at("scale").get<double>();
            if (w.contains("out_width"))
                spec.warp.out_res.width = w.at("out_width").get<int>();
            if (w.contains("out_height"))
                spec.warp.out_res.height = w.at("out_height").get<int>();
        }
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return spec;
}

ProxyConfig proxy_config_from(const PipelineConfig& config) {
    ProxyConfig pc;
    pc.min_density = config.supervision.min_density;
    pc.source = config.supervision.mode;
    pc.d_max = config.matching.d_max;
    pc.sgm = config.sgm;
    pc.pool = config.pool;
    pc.jobs = resolve_jobs(config.jobs);
    return pc;
}

ProxyResult run_proxy_scene(const ProxySceneSpec& spec, const PipelineConfig& config) {
    const ProxyConfig pc = proxy_config_from(config);
    const MultiBandImage rgb = load_image(spec.rgb, spec.rgb_layout);
    if (pc.source == ProxySource::DirectRgbMs) {
        detail::require(spec.has_ms, "direct-rgbms mode requires an 'ms' entry in proxy.json");
        const MultiBandImage ms = load_image(spec.ms, ms_layout(spec.ms));
        return distill_proxy(rgb, ms, pc);
    }
    detail::require(spec.has_rgb2,
                    "second-rgb mode requires an 'rgb2' entry in proxy.json");
    detail::require(spec.has_warp,
                    "second-rgb mode requires a 'warp' descriptor in proxy.json");
    const MultiBandImage rgb2 = load_image(spec.rgb2, spec.rgb_layout);
    return distill_proxy(rgb, rgb2, spec.warp, pc);
}

} // namespace

// ---------------------------------------------------------------------------
// entry points
// ---------------------------------------------------------------------------

AnnotateResult annotate_scene(const fs::path& scene_dir, const fs::path& out_dir,
                              const PipelineConfig& config) {
    config.check();
    const SceneSpec spec = stage("scene", [&] {
        detail::require(fs::is_directory(scene_dir),
                        scene_dir.string() + " is not a directory");
        return parse_scene(scene_dir, config);
    });
    const int jobs = resolve_jobs(config.jobs);

    // Geometry first: a scene with broken calibration fails before any
    // matching work happens.
    const RectificationSetup setup = stage("geometry", [&] {
        return unbalanced_rectify(load_calibration(spec.calib_left),
                                  load_calibration(spec.calib_right), spec.res_left,
                                  spec.res_right);
    });
    std::optional<RectificationSetup> target_setup;
    if (spec.has_target)
        target_setup = stage("geometry", [&] {
            return unbalanced_rectify(load_calibration(spec.calib_left),
                                      load_calibration(spec.target_calib_right), spec.res_left,
                                      spec.target_res_right);
        });

    MultiBandImage guide;
    CostVolumeF dsi;
    stage("matching", [&] {
        for (size_t t = 0; t < spec.pairs.size(); ++t) {
            MultiBandImage left = to_single_channel(load_image(spec.pairs[t].first, spec.layout));
            MultiBandImage right =
                to_single_channel(load_image(spec.pairs[t].second, spec.layout));
            const CensusImage census_left = census_transform(
                left, config.matching.window_width, config.matching.window_height, jobs);
            const CensusImage census_right = census_transform(
                right, config.matching.window_width, config.matching.window_height, jobs);
            if (t == 0) {
                guide = std::move(left);
                dsi = CostVolumeF::zeros(census_left.width, census_left.height,
                                         config.matching.d_max);
            }
            detail::require(census_left.width == dsi.width && census_left.height == dsi.height &&
                                census_right.width == dsi.width &&
                                census_right.height == dsi.height,
                            "all patterns must share one resolution");
            accumulate_dsi(dsi, census_left, census_right, jobs);
            log_debug("integrated pattern " + std::to_string(t + 1) + "/" +
                      std::to_string(spec.pairs.size()));
        }
        return 0;
    });

    CostVolumeF aggregated =
        stage("sgm", [&] { return sgm_aggregate(dsi, config.sgm, jobs); });
    dsi = CostVolumeF{}; // the raw volume is no longer needed; cap peak memory

    DisparityMap refined = stage("refine", [&] {
        const DisparityMap left = wta(aggregated, jobs);
        const DisparityMap right = wta_right_view(aggregated, jobs);
        const DisparityMap pooled = filter_pool(left, right, guide, config.pool, jobs);
        return subpixel_refine(pooled, aggregated, config.subpixel, jobs);
    });
    aggregated = CostVolumeF{};

    size_t removed_points = 0;
    const PointCloud cloud = stage("geometry", [&] {
        for (int y = 0; y < refined.height; ++y)
            for (int x = 0; x < refined.width; ++x)
                if (refined.is_valid(x, y) && refined.at(x, y) <= 0.0)
                    refined.invalidate(x, y); // d = 0 has no depth
        PointCloud projected = project_to_cloud(refined, setup);
        CloudCleanResult cleaned = remove_isolated_points(
            projected, config.geometry.cleaning_radius, config.geometry.min_neighbors);
        for (const auto& [px, py] : cleaned.removed_pixels)
            refined.invalidate(px, py);
        removed_points = cleaned.removed_pixels.size();
        return std::move(cleaned.cloud);
    });

    AnnotateResult result;
    if (target_setup) {
        result.map = stage("warp", [&] {
            return warp_disparity(refined, setup.h_left, target_setup->h_left,
                                  target_setup->baseline / setup.baseline, 1.0);
        });
    } else {
        result.map = std::move(refined);
    }
    result.density = result.map.density();
    result.accepted = result.density >= config.supervision.min_density;

    stage("output", [&] {
        fs::create_directories(out_dir);
        write_disparity(result.map, out_dir / "disparity.pfm", DisparityFormat::FloatMap);
        write_disparity(result.map, out_dir / "disparity.png", DisparityFormat::Scaled16);
        write_mask(result.map, out_dir / "mask.png");
        save_ply(cloud, out_dir / "cloud.ply");
        // The setup of the delivered map's frame, so eval and register can
        // run later without re-deriving geometry from the scene.
        save_rectification(target_setup ? *target_setup : setup,
                           out_dir / "rectification.json");
        json manifest;
        manifest["accepted"] = result.accepted;
        manifest["density"] = result.density;
        manifest["pairs"] = spec.pairs.size();
        manifest["warped"] = spec.has_target;
        manifest["removed_points"] = removed_points;
        manifest["parameters"] = annotate_parameters(config);
        detail::write_json_file(manifest, out_dir / "manifest.json");
        return 0;
    });

    log_info("annotate: density " + format_density(result.density) +
             (result.accepted ? " (accepted)" : " (rejected)"));
    return result;
}

std::vector<ProxySceneOutcome> run_proxy_batch(const fs::path& dataset_dir,
                                               const fs::path& out_dir,
                                               const PipelineConfig& config) {
    config.check();
    std::vector<fs::path> scene_dirs = stage("proxy", [&] {
        detail::require(fs::is_directory(dataset_dir),
                        dataset_dir.string() + " is not a directory");
        std::vector<fs::path> dirs;
        if (fs::is_regular_file(dataset_dir / "proxy.json")) {
            dirs.push_back(dataset_dir);
        } else {
            for (const auto& entry : fs::directory_iterator(dataset_dir))
                if (entry.is_directory() && fs::is_regular_file(entry.path() / "proxy.json"))
                    dirs.push_back(entry.path());
            std::sort(dirs.begin(), dirs.end());
        }
        detail::require(!dirs.empty(),
                        "no scene with a proxy.json found under " + dataset_dir.string());
        return dirs;
    });

    std::vector<ProxySceneOutcome> outcomes;
    json manifest_scenes = json::array();
    for (const fs::path& scene_dir : scene_dirs) {
        std::string name = scene_dir.filename().string();
        if (name.empty())
            name = "scene";
        ProxyResult result;
        try {
            result = run_proxy_scene(parse_proxy_scene(scene_dir), config);
        } catch (const Error& e) {
            throw Error("proxy[" + name + "]: " + e.what());
        }
        if (result.accepted) {
            const fs::path scene_out = out_dir / name;
            stage("output", [&] {
                fs::create_directories(scene_out);
                write_disparity(result.map, scene_out / "proxy.pfm", DisparityFormat::FloatMap);
                write_disparity(result.map, scene_out / "proxy.png", DisparityFormat::Scaled16);
                write_mask(result.map, scene_out / "mask.png");
                return 0;
            });
        }
        log_info("proxy " + name + ": " + (result.accepted ? "accepted" : "rejected") +
                 ", density " + format_density(result.density));
        manifest_scenes.push_back(json{{"scene", name},
                                       {"accepted", result.accepted},
                                       {"density", result.density},
                                       {"reason", result.reason}});
        outcomes.push_back(
            {name, result.accepted, result.density, std::move(result.reason)});
    }

    stage("output", [&] {
        fs::create_directories(out_dir);
        json manifest;
        manifest["scenes"] = manifest_scenes;
        detail::write_json_file(manifest, out_dir / "manifest.json");
        return 0;
    });
    return outcomes;
}

MetricReport run_eval(const fs::path& pred_path, const fs::path& gt_path,
                      const fs::path& setup_path, const std::vector<double>& taus,
                      const fs::path& out_dir) {
    const DisparityMap pred = stage(
        "eval", [&] { return load_disparity(pred_path, format_for(pred_path)); });
    const DisparityMap gt =
        stage("eval", [&] { return load_disparity(gt_path, format_for(gt_path)); });
    const RectificationSetup setup =
        stage("eval", [&] { return load_rectification(setup_path); });
    const MetricReport report =
        stage("eval", [&] { return compute_metrics(pred, gt, setup, taus); });
    stage("output", [&] {
        fs::create_directories(out_dir);
        write_report_json(report, out_dir / "report.json");
        write_report_table(report, out_dir / "report.txt");
        return 0;
    });
    return report;
}

void run_register(const fs::path& ms_path, const fs::path& disp_path,
                  const fs::path& setup_path, const fs::path& out_sidecar) {
    stage("register", [&] {
        const MultiBandImage ms = load_image(ms_path, ms_layout(ms_path));
        const DisparityMap disp = load_disparity(disp_path, format_for(disp_path));
        const RectificationSetup setup = load_rectification(setup_path);
        const MultiBandImage registered = register_ms(ms, disp, setup);
        if (out_sidecar.has_parent_path())
            fs::create_directories(out_sidecar.parent_path());
        write_band_stack(registered, out_sidecar);
        return 0;
    });
}

bool run_selftest(std::ostream& log) {
    int failures = 0;
    const auto expect = [&](bool ok, const char* what) {
        log << (ok ? "ok   " : "FAIL ") << what << "\n";
        if (!ok)
            ++failures;
    };
    const auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };

    // Config defaults must mirror the per-module defaults.
    const PipelineConfig cfg;
    const SgmParams sgm_defaults;
    const ConfidencePoolParams pool_defaults;
    expect(cfg.matching.d_max == 64 && cfg.matching.window_width == kCensusWindowWidth &&
               cfg.matching.window_height == kCensusWindowHeight,
           "config matching defaults");
    expect(cfg.sgm.p1 == sgm_defaults.p1 && cfg.sgm.p2 == sgm_defaults.p2 &&
               cfg.sgm.paths == sgm_defaults.paths,
           "config sgm defaults");
    expect(cfg.pool.lrc_threshold == pool_defaults.lrc_threshold &&
               cfg.pool.wmdd_window == pool_defaults.wmdd_window &&
               cfg.pool.wmdd_threshold == pool_defaults.wmdd_threshold &&
               cfg.pool.wmdd_sigma_color == pool_defaults.wmdd_sigma_color,
           "config refine defaults");
    expect(cfg.subpixel == SubpixelMode::Parabola, "config subpixel default");
    expect(cfg.supervision.sigma == 1.0 && cfg.supervision.min_density == 0.70 &&
               cfg.supervision.mode == ProxySource::DirectRgbMs,
           "config supervision defaults");
    expect(cfg.geometry.cleaning_radius == 0.02 && cfg.geometry.min_neighbors == 5,
           "config geometry defaults");
    expect(cfg.eval.taus == std::vector<double>({1.0, 2.0, 3.0}), "config eval defaults");

    // A constant image censuses to all-zero descriptors.
    {
        MultiBandImage flat = MultiBandImage::create(12, 9, 1);
        std::fill(flat.data.begin(), flat.data.end(), 37.0f);
        const CensusImage census = census_transform(flat);
        bool all_zero = true;
        for (int y = census.margin_y; y < census.height - census.margin_y; ++y)
            for (int x = census.margin_x; x < census.width - census.margin_x; ++x)
                all_zero = all_zero && census.at(x, y) == 0;
        expect(all_zero, "census of a constant image is zero");
    }

    // Hand-checked single-path aggregation over a 3x1 strip.
    {
        CostVolume strip = CostVolume::zeros(3, 1, 2);
        strip.at(0, 0, 0) = 0.0;
        strip.at(0, 0, 1) = 5.0;
        strip.at(1, 0, 0) = 5.0;
        strip.at(1, 0, 1) = 0.0;
        strip.at(2, 0, 0) = 5.0;
        strip.at(2, 0, 1) = 0.0;
        CostVolume acc = CostVolume::zeros(3, 1, 2);
        sgm_aggregate_direction(strip, 1, 0, 1.0, 2.0, acc);
        expect(acc.at(0, 0, 0) == 0.0 && acc.at(0, 0, 1) == 5.0 && acc.at(1, 0, 0) == 5.0 &&
                   acc.at(1, 0, 1) == 1.0 && acc.at(2, 0, 0) == 6.0 && acc.at(2, 0, 1) == 0.0,
               "sgm strip aggregation");
    }

    // Sub-pixel interpolation on costs (10, 2, 6) around d = 1.
    {
        CostVolume column = CostVolume::zeros(1, 1, 3);
        column.at(0, 0, 0) = 10.0;
        column.at(0, 0, 1) = 2.0;
        column.at(0, 0, 2) = 6.0;
        DisparityMap d = DisparityMap::create(1, 1);
        d.set(0, 0, 1.0);
        const DisparityMap parabola = subpixel_refine(d, column, SubpixelMode::Parabola);
        const DisparityMap literal = subpixel_refine(d, column, SubpixelMode::Literal);
        expect(near(parabola.at(0, 0), 1.0 + 1.0 / 6.0, 1e-12), "parabola vertex offset");
        expect(near(literal.at(0, 0), 1.5, 1e-12), "literal neighbor-ratio offset");
    }

    // Supervision target for d* = 17.25 and its exact inversion.
    {
        const CategoricalTarget target = make_target(17.25, 1.0, 64);
        expect(target.integer_label == 17 && near(target.offset_label, 0.25, 1e-12),
               "target argmax and offset");
        expect(near(compose_disparity(target.distribution, target.offset_label), 17.25, 1e-9),
               "target composes back to d*");
        expect(near(eval_loss(target.distribution, target.offset_label, target),
                    distribution_entropy(target.distribution), 1e-9),
               "loss at the optimum equals the entropy");
    }

    // A perfect prediction scores zero everywhere.
    {
        DisparityMap map = DisparityMap::create(8, 8);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
                map.set(x, y, 4.0 + 0.25 * x);
        RectificationSetup setup;
        setup.baseline = 0.2;
        setup.focal = 400.0;
        setup.scale_ratio = 2.0;
        const MetricReport report = compute_metrics(map, map, setup, {1.0, 2.0, 3.0});
        bool zero = report.d_aepe == 0.0 && report.f_aepe == 0.0 && report.ade == 0.0;
        for (const auto& [tau, percent] : report.bad)
            zero = zero && percent == 0.0 && tau > 0.0;
        expect(zero && report.evaluated == 64, "metrics vanish on a perfect prediction");
    }

    // Mode spellings round-trip.
    expect(parse_subpixel_mode("parabola") == SubpixelMode::Parabola &&
               parse_subpixel_mode("literal") == SubpixelMode::Literal &&
               std::string(to_string(SubpixelMode::Parabola)) == "parabola" &&
               std::string(to_string(SubpixelMode::Literal)) == "literal",
           "subpixel mode names");
    expect(parse_proxy_source("direct-rgbms") == ProxySource::DirectRgbMs &&
               parse_proxy_source("second-rgb") == ProxySource::SecondRgb &&
               std::string(to_string(ProxySource::DirectRgbMs)) == "direct-rgbms" &&
               std::string(to_string(ProxySource::SecondRgb)) == "second-rgb",
           "proxy source names");

    log << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
    return failures == 0;
}

} // namespace ssf
