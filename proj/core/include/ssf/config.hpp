#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ssf/census.hpp"
#include "ssf/refine.hpp"
#include "ssf/sgm.hpp"
#include "ssf/supervision.hpp"

namespace ssf {

/// Whole-pipeline configuration, one section per stage. Field defaults equal
/// the per-module defaults; a config file only ever overrides them. Parsing
/// is total: unknown keys or malformed values fail with the file path and
/// the offending key in the message.
struct PipelineConfig {
    struct MatchingConfig {
        int d_max = 64;
        int window_width = kCensusWindowWidth;
        int window_height = kCensusWindowHeight;
    };
    struct GeometryConfig {
        std::string calib_left;  ///< optional override; empty = scene provides it
        std::string calib_right; ///< optional override; empty = scene provides it
        double cleaning_radius = 0.02; ///< meters
        int min_neighbors = 5;
    };
    struct SupervisionConfig {
        double sigma = 1.0;
        double min_density = 0.70;
        ProxySource mode = ProxySource::DirectRgbMs;
    };
    struct EvalConfig {
        std::vector<double> taus{1.0, 2.0, 3.0};
    };

    MatchingConfig matching;
    SgmParams sgm;
    ConfidencePoolParams pool;
    SubpixelMode subpixel = SubpixelMode::Parabola;
    GeometryConfig geometry;
    SupervisionConfig supervision;
    EvalConfig eval;
    int jobs = 0; ///< 0 = one worker per hardware thread

    void check() const;
};

PipelineConfig load_config(const std::filesystem::path& path);

SubpixelMode parse_subpixel_mode(const std::string& name);
const char* to_string(SubpixelMode mode);

ProxySource parse_proxy_source(const std::string& name);
const char* to_string(ProxySource source);

/// Parses a comma-separated tolerance list such as "1,2,3".
std::vector<double> parse_tau_list(const std::string& text);

} // namespace ssf
