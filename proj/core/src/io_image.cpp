#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "io_detail.hpp"
#include "io_json.hpp"
#include "ssf/io.hpp"
#include "ssf/point_cloud.hpp"

namespace ssf {

using nlohmann::json;

namespace detail {

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(path.string() + ": missing file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
    AtomicFile file(path);
    file.stream() << doc.dump(2) << "\n";
    file.commit();
}

void require_keys(const json& doc, const std::filesystem::path& path,
                  std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional) {
    const std::string p = path.string();
    if (!doc.is_object())
        throw Error(p + ": expected a JSON object");
    for (const char* key : required)
        if (!doc.contains(key))
            throw Error(p + ": missing key '" + key + "'");
    for (const auto& [key, _] : doc.items()) {
        const auto matches = [&key](const char* k) { return key == k; };
        if (!std::any_of(required.begin(), required.end(), matches) &&
            !std::any_of(optional.begin(), optional.end(), matches))
            throw Error(p + ": unknown key '" + key + "'");
    }
}

} // namespace detail

namespace {

MultiBandImage read_any(const std::filesystem::path& path) {
    if (detail::is_png(path))
        return detail::read_png(path);
    if (detail::is_pnm(path))
        return detail::read_pnm(path);
    throw Error(path.string() + ": unsupported image extension '" +
                path.extension().string() + "'");
}

MultiBandImage load_band_stack(const std::filesystem::path& path) {
    std::filesystem::path sidecar = path;
    if (std::filesystem::is_directory(path))
        sidecar = path / "stack.json";
    const json doc = detail::load_json_file(sidecar);
    const std::string p = sidecar.string();
    detail::require_keys(doc, sidecar, {"width", "height", "bands"});
    const int width = doc.at("width").get<int>();
    const int height = doc.at("height").get<int>();
    const auto& bands = doc.at("bands");
    if (!bands.is_array() || bands.empty())
        throw Error(p + ": bands must be a non-empty ordered file list");

    const auto dir = sidecar.parent_path();
    MultiBandImage out;
    int b = 0;
    for (const auto& entry : bands) {
        const std::filesystem::path band_path = dir / entry.get<std::string>();
        MultiBandImage band = read_any(band_path);
        if (band.bands != 1)
            throw Error(band_path.string() + ": band-count mismatch, stack entries must be single-band");
        if (band.width != width || band.height != height)
            throw Error(band_path.string() + ": size does not match sidecar dimensions");
        if (b == 0) {
            out = MultiBandImage::create(width, height, static_cast<int>(bands.size()),
                                         band.bit_depth);
        } else if (band.bit_depth != out.bit_depth) {
            throw Error(band_path.string() + ": bit depth differs from the first band");
        }
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                out.at(x, y, b) = band.at(x, y);
        ++b;
    }
    return out;
}

} // namespace

MultiBandImage load_image(const std::filesystem::path& path, BandLayout layout) {
    if (layout == BandLayout::BandStack)
        return load_band_stack(path);
    MultiBandImage img = read_any(path);
    const int expected = layout == BandLayout::SingleBand ? 1 : 3;
    if (img.bands != expected)
        throw Error(path.string() + ": band-count mismatch, expected " +
                    std::to_string(expected) + " got " + std::to_string(img.bands));
    return img;
}

void write_image(const MultiBandImage& img, const std::filesystem::path& path) {
    if (detail::is_png(path))
        detail::write_png(img, path);
    else if (detail::is_pnm(path))
        detail::write_pnm(img, path);
    else
        throw Error(path.string() + ": unsupported image extension '" +
                    path.extension().string() + "'");
}

void write_band_stack(const MultiBandImage& img, const std::filesystem::path& sidecar_path,
                      const std::string& prefix) {
    img.check();
    const auto dir = sidecar_path.parent_path();
    if (!dir.empty())
        std::filesystem::create_directories(dir);
    json bands = json::array();
    for (int b = 0; b < img.bands; ++b) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s%02d.png", prefix.c_str(), b);
        MultiBandImage plane = MultiBandImage::create(img.width, img.height, 1, img.bit_depth);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                plane.at(x, y) = img.at(x, y, b);
        detail::write_png(plane, dir / name);
        bands.push_back(name);
    }
    json doc;
    doc["width"] = img.width;
    doc["height"] = img.height;
    doc["bands"] = bands;
    detail::write_json_file(doc, sidecar_path);
}

void PointCloud::check() const {
    std::vector<std::uint64_t> tags;
    tags.reserve(points.size());
    for (const auto& pt : points) {
        detail::require(pt.z > 0.0, "point cloud: Z must be > 0");
        tags.push_back((static_cast<std::uint64_t>(static_cast<std::uint32_t>(pt.py)) << 32) |
                       static_cast<std::uint32_t>(pt.px));
    }
    std::sort(tags.begin(), tags.end());
    detail::require(std::adjacent_find(tags.begin(), tags.end()) == tags.end(),
                    "point cloud: duplicate pixel tags");
}

void save_ply(const PointCloud& cloud, const std::filesystem::path& path) {
    detail::AtomicFile file(path);
    std::ostream& out = file.stream();
    out << "ply\nformat ascii 1.0\n"
        << "element vertex " << cloud.points.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "property int px\nproperty int py\n"
        << "end_header\n";
    char line[128];
    for (const auto& pt : cloud.points) {
        std::snprintf(line, sizeof(line), "%.9g %.9g %.9g %d %d\n",
                      pt.x, pt.y, pt.z, pt.px, pt.py);
        out << line;
    }
    file.commit();
}

} // namespace ssf
