#include <cmath>
#include <sstream>

#include "io_json.hpp"
#include "ssf/config.hpp"

namespace ssf {

using nlohmann::json;

void PipelineConfig::check() const {
    detail::require(matching.d_max >= 1, "config: matching.d_max must be >= 1");
    detail::require(matching.window_width >= 1 && matching.window_height >= 1 &&
                        matching.window_width % 2 == 1 && matching.window_height % 2 == 1,
                    "config: census window dimensions must be odd and positive");
    detail::require(matching.window_width * matching.window_height <= 64,
                    "config: census window exceeds 64 descriptor bits");
    sgm.check();
    pool.check();
    detail::require(geometry.cleaning_radius > 0.0,
                    "config: geometry.cleaning_radius must be > 0");
    detail::require(geometry.min_neighbors >= 0,
                    "config: geometry.min_neighbors must be >= 0");
    detail::require(supervision.sigma > 0.0, "config: supervision.sigma must be > 0");
    detail::require(supervision.min_density > 0.0 && supervision.min_density <= 1.0,
                    "config: supervision.min_density must be in (0, 1]");
    for (const double tau : eval.taus)
        detail::require(tau >= 0.0, "config: eval.taus entries must be >= 0");
    detail::require(jobs >= 0, "config: jobs must be >= 0");
}

namespace {

template <class T>
void read_field(const json& section, const char* key, T& field) {
    if (section.contains(key))
        section.at(key).get_to(field);
}

} // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
    const json doc = detail::load_json_file(path);
    detail::require_keys(doc, path, {},
                         {"matching", "sgm", "refine", "geometry", "supervision", "eval",
                          "jobs"});
    PipelineConfig cfg;
    try {
        if (doc.contains("matching")) {
            const json& m = doc.at("matching");
            detail::require_keys(m, path, {}, {"d_max", "window_width", "window_height"});
            read_field(m, "d_max", cfg.matching.d_max);
            read_field(m, "window_width", cfg.matching.window_width);
            read_field(m, "window_height", cfg.matching.window_height);
        }
        if (doc.contains("sgm")) {
            const json& s = doc.at("sgm");
            detail::require_keys(s, path, {}, {"p1", "p2", "paths"});
            read_field(s, "p1", cfg.sgm.p1);
            read_field(s, "p2", cfg.sgm.p2);
            read_field(s, "paths", cfg.sgm.paths);
        }
        if (doc.contains("refine")) {
            const json& r = doc.at("refine");
            detail::require_keys(r, path, {},
                                 {"lrc_threshold", "wmdd_window", "wmdd_threshold",
                                  "wmdd_sigma_color", "subpixel"});
            read_field(r, "lrc_threshold", cfg.pool.lrc_threshold);
            read_field(r, "wmdd_window", cfg.pool.wmdd_window);
            read_field(r, "wmdd_threshold", cfg.pool.wmdd_threshold);
            read_field(r, "wmdd_sigma_color", cfg.pool.wmdd_sigma_color);
            if (r.contains("subpixel"))
                cfg.subpixel = parse_subpixel_mode(r.at("subpixel").get<std::string>());
        }
        if (doc.contains("geometry")) {
            const json& g = doc.at("geometry");
            detail::require_keys(
                g, path, {}, {"calib_left", "calib_right", "cleaning_radius", "min_neighbors"});
            read_field(g, "calib_left", cfg.geometry.calib_left);
            read_field(g, "calib_right", cfg.geometry.calib_right);
            read_field(g, "cleaning_radius", cfg.geometry.cleaning_radius);
            read_field(g, "min_neighbors", cfg.geometry.min_neighbors);
        }
        if (doc.contains("supervision")) {
            const json& s = doc.at("supervision");
            detail::require_keys(s, path, {}, {"sigma", "min_density", "mode"});
            read_field(s, "sigma", cfg.supervision.sigma);
            read_field(s, "min_density", cfg.supervision.min_density);
            if (s.contains("mode"))
                cfg.supervision.mode = parse_proxy_source(s.at("mode").get<std::string>());
        }
        if (doc.contains("eval")) {
            const json& e = doc.at("eval");
            detail::require_keys(e, path, {}, {"taus"});
            read_field(e, "taus", cfg.eval.taus);
        }
        read_field(doc, "jobs", cfg.jobs);
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    try {
        cfg.check();
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return cfg;
}

SubpixelMode parse_subpixel_mode(const std::string& name) {
    if (name == "parabola")
        return SubpixelMode::Parabola;
    if (name == "literal")
        return SubpixelMode::Literal;
    throw Error("unknown subpixel mode '" + name + "', expected parabola or literal");
}

const char* to_string(SubpixelMode mode) {
    return mode == SubpixelMode::Parabola ? "parabola" : "literal";
}

ProxySource parse_proxy_source(const std::string& name) {
    if (name == "direct-rgbms")
        return ProxySource::DirectRgbMs;
    if (name == "second-rgb")
        return ProxySource::SecondRgb;
    throw Error("unknown proxy mode '" + name + "', expected direct-rgbms or second-rgb");
}

const char* to_string(ProxySource source) {
    return source == ProxySource::DirectRgbMs ? "direct-rgbms" : "second-rgb";
}

std::vector<double> parse_tau_list(const std::string& text) {
    std::vector<double> taus;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        try {
            size_t used = 0;
            const double tau = std::stod(item, &used);
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
                ++used;
            if (used != item.size() || !(tau >= 0.0))
                throw Error("");
            taus.push_back(tau);
        } catch (const std::exception&) {
            throw Error("invalid tolerance list entry '" + item + "'");
        }
    }
    if (taus.empty())
        throw Error("tolerance list must contain at least one value");
    return taus;
}

} // namespace ssf
