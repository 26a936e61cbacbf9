#include <cctype>
#include <cmath>
#include <fstream>
#include <vector>

#include "io_detail.hpp"

namespace ssf::detail {
namespace {

int next_pnm_value(std::istream& in, const std::string& path) {
    // Decimal token, skipping whitespace and '#' comments.
    for (;;) {
        const int c = in.peek();
        if (c == EOF)
            throw Error(path + ": corrupt header");
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        break;
    }
    int value = 0;
    if (!(in >> value))
        throw Error(path + ": corrupt header");
    return value;
}

} // namespace

MultiBandImage read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(path.string() + ": missing file");
    const std::string p = path.string();
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6'))
        throw Error(p + ": corrupt header, expected binary P5/P6");
    const int bands = m1 == '5' ? 1 : 3;
    const int width = next_pnm_value(in, p);
    const int height = next_pnm_value(in, p);
    const int maxval = next_pnm_value(in, p);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
        throw Error(p + ": corrupt header");
    in.get(); // single whitespace byte before the raster

    const int depth = maxval > 255 ? 16 : 8;
    MultiBandImage img = MultiBandImage::create(width, height, bands, depth);
    const size_t n = img.data.size();
    if (depth == 8) {
        std::vector<std::uint8_t> buf(n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
        if (!in)
            throw Error(p + ": truncated sample data");
        for (size_t i = 0; i < n; ++i)
            img.data[i] = static_cast<float>(buf[i]);
    } else {
        std::vector<std::uint8_t> buf(n * 2);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 2));
        if (!in)
            throw Error(p + ": truncated sample data");
        for (size_t i = 0; i < n; ++i) // samples are big-endian
            img.data[i] = static_cast<float>((buf[2 * i] << 8) | buf[2 * i + 1]);
    }
    return img;
}

void write_pnm(const MultiBandImage& img, const std::filesystem::path& path) {
    img.check();
    if (img.bands != 1 && img.bands != 3)
        throw Error(path.string() + ": PNM supports 1 or 3 bands, got " +
                    std::to_string(img.bands));
    AtomicFile file(path);
    std::ostream& out = file.stream();
    const int maxval = img.bit_depth == 8 ? 255 : 65535;
    out << (img.bands == 1 ? "P5" : "P6") << "\n"
        << img.width << " " << img.height << "\n"
        << maxval << "\n";
    const size_t n = img.data.size();
    if (img.bit_depth == 8) {
        std::vector<std::uint8_t> buf(n);
        for (size_t i = 0; i < n; ++i)
            buf[i] = static_cast<std::uint8_t>(std::lrint(std::min(img.data[i], 255.0f)));
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(n));
    } else {
        std::vector<std::uint8_t> buf(n * 2);
        for (size_t i = 0; i < n; ++i) {
            const auto v = static_cast<std::uint16_t>(std::lrint(std::min(img.data[i], 65535.0f)));
            buf[2 * i] = static_cast<std::uint8_t>(v >> 8);
            buf[2 * i + 1] = static_cast<std::uint8_t>(v & 0xff);
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(n * 2));
    }
    file.commit();
}

bool is_png(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return ext == ".png" || ext == ".PNG";
}

bool is_pnm(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

} // namespace ssf::detail
