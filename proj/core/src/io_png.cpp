#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

#include "io_detail.hpp"

namespace ssf::detail {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f)
            std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    // Propagate through libpng's longjmp point; message recovered below.
    (void)msg;
    longjmp(png_jmpbuf(png), 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

} // namespace

MultiBandImage read_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file)
        throw Error(path.string() + ": missing file");

    png_byte header[8];
    if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw Error(path.string() + ": corrupt header, not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             png_error_fn, png_warning_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(path.string() + ": libpng initialization failed");
    }
    std::vector<png_byte> raw;
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(path.string() + ": corrupt PNG data");
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA)
        png_set_strip_alpha(png);
    if (depth == 16 && host_is_little_endian())
        png_set_swap(png);
    png_read_update_info(png, info);

    depth = png_get_bit_depth(png, info);
    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(path.string() + ": unsupported channel count");
    }

    const size_t stride = png_get_rowbytes(png, info);
    raw.resize(stride * height);
    row_ptrs.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        row_ptrs[y] = raw.data() + y * stride;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    MultiBandImage img = MultiBandImage::create(static_cast<int>(width),
                                                static_cast<int>(height), channels,
                                                depth == 16 ? 16 : 8);
    const size_t samples_per_row = static_cast<size_t>(width) * channels;
    for (png_uint_32 y = 0; y < height; ++y) {
        float* dst = img.data.data() + static_cast<size_t>(y) * samples_per_row;
        if (depth == 16) {
            const auto* src = reinterpret_cast<const std::uint16_t*>(raw.data() + y * stride);
            for (size_t i = 0; i < samples_per_row; ++i)
                dst[i] = static_cast<float>(src[i]);
        } else {
            const png_byte* src = raw.data() + y * stride;
            for (size_t i = 0; i < samples_per_row; ++i)
                dst[i] = static_cast<float>(src[i]);
        }
    }
    return img;
}

void write_png(const MultiBandImage& img, const std::filesystem::path& path) {
    img.check();
    if (img.bands != 1 && img.bands != 3)
        throw Error(path.string() + ": PNG supports 1 or 3 bands, got " +
                    std::to_string(img.bands));

    const std::filesystem::path tmp = path.string() + ".tmp";
    FilePtr file(std::fopen(tmp.string().c_str(), "wb"));
    if (!file)
        throw Error(path.string() + ": cannot open for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              png_error_fn, png_warning_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error(path.string() + ": libpng initialization failed");
    }
    std::vector<png_byte> raw;
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw Error(path.string() + ": PNG write failed");
    }

    png_init_io(png, file.get());
    const int color = img.bands == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), img.bit_depth, color,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (img.bit_depth == 16 && host_is_little_endian())
        png_set_swap(png);

    const size_t samples_per_row = static_cast<size_t>(img.width) * img.bands;
    const size_t stride = samples_per_row * (img.bit_depth == 16 ? 2 : 1);
    raw.resize(stride * img.height);
    row_ptrs.resize(static_cast<size_t>(img.height));
    const double hi = img.max_value();
    for (int y = 0; y < img.height; ++y) {
        row_ptrs[static_cast<size_t>(y)] = raw.data() + static_cast<size_t>(y) * stride;
        const float* src = img.data.data() + static_cast<size_t>(y) * samples_per_row;
        if (img.bit_depth == 16) {
            auto* dst = reinterpret_cast<std::uint16_t*>(row_ptrs[static_cast<size_t>(y)]);
            for (size_t i = 0; i < samples_per_row; ++i)
                dst[i] = static_cast<std::uint16_t>(std::lrint(std::min<double>(src[i], hi)));
        } else {
            png_byte* dst = row_ptrs[static_cast<size_t>(y)];
            for (size_t i = 0; i < samples_per_row; ++i)
                dst[i] = static_cast<png_byte>(std::lrint(std::min<double>(src[i], hi)));
        }
    }
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    file.reset();
    std::filesystem::rename(tmp, path);
}

} // namespace ssf::detail
