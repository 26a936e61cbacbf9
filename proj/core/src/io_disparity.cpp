#include <cmath>

#include "io_detail.hpp"
#include "ssf/io.hpp"

namespace ssf {

void write_disparity(const DisparityMap& map, const std::filesystem::path& path,
                     DisparityFormat format) {
    map.check();
    if (format == DisparityFormat::FloatMap) {
        detail::AtomicFile file(path);
        detail::write_pfm_samples(map, file.stream());
        file.commit();
        return;
    }
    MultiBandImage img = MultiBandImage::create(map.width, map.height, 1, 16);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            if (!map.is_valid(x, y)) {
                img.at(x, y) = 0.0f;
                continue;
            }
            const double scaled = std::round(map.at(x, y) * 256.0);
            if (scaled < 0.0 || scaled > 65535.0)
                throw Error(path.string() + ": disparity " + std::to_string(map.at(x, y)) +
                            " does not fit the 16-bit scaled encoding");
            img.at(x, y) = static_cast<float>(scaled);
        }
    }
    detail::write_png(img, path);
}

DisparityMap load_disparity(const std::filesystem::path& path, DisparityFormat format) {
    if (format == DisparityFormat::FloatMap)
        return detail::read_pfm(path);
    const MultiBandImage img = detail::read_png(path);
    if (img.bands != 1)
        throw Error(path.string() + ": scaled disparity maps must be single-band");
    DisparityMap map = DisparityMap::create(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const float sample = img.at(x, y);
            if (sample > 0.0f)
                map.set(x, y, static_cast<double>(sample) / 256.0);
        }
    }
    return map;
}

void write_mask(const DisparityMap& map, const std::filesystem::path& path) {
    MultiBandImage img = MultiBandImage::create(map.width, map.height, 1, 8);
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x)
            img.at(x, y) = map.is_valid(x, y) ? 255.0f : 0.0f;
    detail::write_png(img, path);
}

} // namespace ssf
