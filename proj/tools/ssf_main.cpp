#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "ssf/config.hpp"
#include "ssf/error.hpp"
#include "ssf/log.hpp"
#include "ssf/metrics.hpp"
#include "ssf/pipeline.hpp"

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitRejected = 2;  // density below the acceptance threshold
constexpr int kExitInputError = 3;

struct CliOverrides {
    std::string config_path;
    std::string mode;
    std::string subpixel;
    std::string taus;
    int jobs = -1; // < 0 = not given
};

/// Config file first (when given), command-line flags on top.
ssf::PipelineConfig resolve_config(const CliOverrides& cli) {
    ssf::PipelineConfig config;
    if (!cli.config_path.empty())
        config = ssf::load_config(cli.config_path);
    if (!cli.mode.empty())
        config.supervision.mode = ssf::parse_proxy_source(cli.mode);
    if (!cli.subpixel.empty())
        config.subpixel = ssf::parse_subpixel_mode(cli.subpixel);
    if (!cli.taus.empty())
        config.eval.taus = ssf::parse_tau_list(cli.taus);
    if (cli.jobs >= 0)
        config.jobs = cli.jobs;
    config.check();
    return config;
}

int run(int argc, char** argv) {
    CLI::App app{"Space-time stereo labeling, proxy distillation and cross-spectral "
                 "registration metrics"};
    app.require_subcommand(1);
    app.fallthrough();

    CliOverrides cli;
    app.add_option("--config", cli.config_path, "JSON pipeline configuration file");
    app.add_option("--mode", cli.mode, "Proxy source: direct-rgbms or second-rgb");
    app.add_option("--subpixel", cli.subpixel, "Sub-pixel model: parabola or literal");
    app.add_option("--taus", cli.taus, "Comma-separated bad-pixel tolerances, e.g. 1,2,3");
    app.add_option("--jobs", cli.jobs, "Worker threads (0 = one per hardware thread)");

    std::string scene_dir, dataset_dir, out_dir;
    std::string pred_path, gt_path, setup_path, ms_path, disp_path, out_sidecar;

    CLI::App* annotate = app.add_subcommand(
        "annotate", "Produce semi-dense ground-truth disparity for one scene");
    annotate->add_option("scene-dir", scene_dir, "Scene directory with scene.json")
        ->required();
    annotate->add_option("out-dir", out_dir, "Output directory")->required();

    CLI::App* proxy =
        app.add_subcommand("proxy", "Distill proxy labels for a scene or a dataset");
    proxy->add_option("dataset-dir", dataset_dir, "Scene or dataset directory")->required();
    proxy->add_option("out-dir", out_dir, "Output directory")->required();

    CLI::App* eval =
        app.add_subcommand("eval", "Score a prediction against ground truth");
    eval->add_option("pred", pred_path, "Predicted disparity (.pfm or .png)")->required();
    eval->add_option("gt", gt_path, "Ground-truth disparity (.pfm or .png)")->required();
    eval->add_option("setup", setup_path, "Rectification setup JSON")->required();
    eval->add_option("out-dir", out_dir, "Output directory for report files")->required();

    CLI::App* reg = app.add_subcommand(
        "register", "Warp an MS stack into the high-resolution disparity frame");
    reg->add_option("ms", ms_path, "MS stack sidecar (.json) or single-band image")
        ->required();
    reg->add_option("disp", disp_path, "Disparity map (.pfm or .png)")->required();
    reg->add_option("setup", setup_path, "Rectification setup JSON")->required();
    reg->add_option("out", out_sidecar, "Output band-stack sidecar path")->required();

    CLI::App* selftest =
        app.add_subcommand("selftest", "Verify config defaults and frozen identities");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitSuccess : kExitInputError;
    }

    if (selftest->parsed())
        return ssf::run_selftest(std::cout) ? kExitSuccess : 1;

    const ssf::PipelineConfig config = resolve_config(cli);
    if (annotate->parsed()) {
        const ssf::AnnotateResult result = ssf::annotate_scene(scene_dir, out_dir, config);
        std::cout << (result.accepted ? "accepted" : "rejected") << " density "
                  << result.density << "\n";
        return result.accepted ? kExitSuccess : kExitRejected;
    }
    if (proxy->parsed()) {
        const auto outcomes = ssf::run_proxy_batch(dataset_dir, out_dir, config);
        size_t accepted = 0;
        for (const auto& outcome : outcomes) {
            std::cout << outcome.name << ": "
                      << (outcome.accepted ? "accepted" : "rejected") << " density "
                      << outcome.density << "\n";
            accepted += outcome.accepted ? 1 : 0;
        }
        return accepted > 0 ? kExitSuccess : kExitRejected;
    }
    if (eval->parsed()) {
        const ssf::MetricReport report =
            ssf::run_eval(pred_path, gt_path, setup_path, config.eval.taus, out_dir);
        std::cout << ssf::format_report_table(report) << "\n";
        return kExitSuccess;
    }
    ssf::run_register(ms_path, disp_path, setup_path, out_sidecar);
    return kExitSuccess;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ssf::Error& e) {
        std::cerr << "ssf: error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "ssf: unexpected error: " << e.what() << "\n";
        return kExitInputError;
    }
}
