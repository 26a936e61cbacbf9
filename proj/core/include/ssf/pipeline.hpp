#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "ssf/config.hpp"
#include "ssf/disparity.hpp"
#include "ssf/metrics.hpp"

namespace ssf {

struct AnnotateResult {
    bool accepted = false;
    double density = 0.0;
    DisparityMap map; ///< the final (possibly warped) semi-dense labels
};

/// Runs the full space-time annotation pipeline on one scene directory
/// (census, per-pair cost volumes, temporal integration, SGM, WTA, the
/// confidence-filter pool, sub-pixel refinement, point-cloud cleaning and
/// the optional cross-setup warp) and writes disparity, mask, point cloud
/// and manifest into out_dir. The scene is accepted when the surviving
/// density reaches the configured minimum. Stage failures carry the stage
/// name in the message.
AnnotateResult annotate_scene(const std::filesystem::path& scene_dir,
                              const std::filesystem::path& out_dir,
                              const PipelineConfig& config);

struct ProxySceneOutcome {
    std::string name;
    bool accepted = false;
    double density = 0.0;
    std::string reason;
};

/// Distills proxy labels for one scene (a directory holding proxy.json) or a
/// batch (a directory of such scenes). Accepted maps are written under
/// out_dir; the batch manifest records every acceptance decision.
std::vector<ProxySceneOutcome> run_proxy_batch(const std::filesystem::path& dataset_dir,
                                               const std::filesystem::path& out_dir,
                                               const PipelineConfig& config);

/// Loads prediction and ground truth (.pfm float maps or 16-bit .png),
/// computes the metric suite against the rectification file and writes
/// report.json and report.txt into out_dir.
MetricReport run_eval(const std::filesystem::path& pred_path,
                      const std::filesystem::path& gt_path,
                      const std::filesystem::path& setup_path,
                      const std::vector<double>& taus,
                      const std::filesystem::path& out_dir);

/// Warps the MS stack into the high-resolution frame of the disparity map
/// and writes the registered band stack (plus validity band) at
/// out_sidecar.
void run_register(const std::filesystem::path& ms_path,
                  const std::filesystem::path& disp_path,
                  const std::filesystem::path& setup_path,
                  const std::filesystem::path& out_sidecar);

/// Verifies config defaults against the module defaults plus a handful of
/// frozen pipeline identities; logs one line per check. Returns true when
/// everything holds.
bool run_selftest(std::ostream& log);

} // namespace ssf
