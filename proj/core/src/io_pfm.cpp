#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include "io_detail.hpp"
#include "ssf/io.hpp"

namespace ssf {
namespace detail {

bool host_is_little_endian() {
    const std::uint16_t probe = 1;
    std::uint8_t first;
    std::memcpy(&first, &probe, 1);
    return first == 1;
}

namespace {

// One whitespace-delimited header token; comments are not part of the format.
std::string next_token(std::istream& in, const std::string& path) {
    std::string tok;
    if (!(in >> tok))
        throw Error(path + ": truncated header");
    return tok;
}

} // namespace

void write_pfm_samples(const DisparityMap& map, std::ostream& out) {
    const double scale = host_is_little_endian() ? -1.0 : 1.0;
    out << "Pf\n" << map.width << " " << map.height << "\n" << scale << "\n";
    std::vector<float> row(static_cast<size_t>(map.width));
    // Scanlines run bottom to top.
    for (int y = map.height - 1; y >= 0; --y) {
        for (int x = 0; x < map.width; ++x)
            row[static_cast<size_t>(x)] = map.is_valid(x, y)
                ? static_cast<float>(map.at(x, y))
                : std::numeric_limits<float>::infinity();
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
}

DisparityMap read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(path.string() + ": missing file");
    const std::string p = path.string();
    const std::string magic = next_token(in, p);
    if (magic == "PF")
        throw Error(p + ": color float maps are not supported, expected Pf");
    if (magic != "Pf")
        throw Error(p + ": corrupt header, expected Pf");
    int width = 0, height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(next_token(in, p));
        height = std::stoi(next_token(in, p));
        scale = std::stod(next_token(in, p));
    } catch (const std::exception&) {
        throw Error(p + ": corrupt header");
    }
    if (width <= 0 || height <= 0 || scale == 0.0)
        throw Error(p + ": corrupt header");
    in.get(); // single whitespace byte after the scale token

    const bool file_little = scale < 0.0;
    DisparityMap map = DisparityMap::create(width, height);
    std::vector<float> row(static_cast<size_t>(width));
    for (int y = height - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in)
            throw Error(p + ": truncated sample data");
        for (int x = 0; x < width; ++x) {
            float v = row[static_cast<size_t>(x)];
            if (file_little != host_is_little_endian()) {
                std::uint32_t u;
                std::memcpy(&u, &v, 4);
                u = __builtin_bswap32(u);
                std::memcpy(&v, &u, 4);
            }
            if (std::isfinite(v) && v >= 0.0f)
                map.set(x, y, v);
            else
                map.invalidate(x, y);
        }
    }
    return map;
}

} // namespace detail
} // namespace ssf
