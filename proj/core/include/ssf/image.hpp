#pragma once

#include <cstdint>
#include <vector>

namespace ssf {

/// H x W x C raster with 1, 3 or 10 bands and a declared source bit depth
/// (8 or 16 bits per sample). Samples are stored as float in row-major,
/// band-interleaved order; 8/16-bit integers are exactly representable, and
/// derived rasters (grayscale conversion, resizing) may carry fractional
/// values while staying inside the declared range.
struct MultiBandImage {
    int width = 0;
    int height = 0;
    int bands = 0;
    int bit_depth = 8;
    std::vector<float> data;

    static MultiBandImage create(int width, int height, int bands, int bit_depth = 8);

    float at(int x, int y, int b = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * bands + b];
    }
    float& at(int x, int y, int b = 0) {
        return data[(static_cast<size_t>(y) * width + x) * bands + b];
    }

    /// Upper end of the declared sample range (255 or 65535).
    float max_value() const { return bit_depth == 8 ? 255.0f : 65535.0f; }

    /// Validates dimensions, bit depth and sample range; throws Error
    /// otherwise.
    void check() const;
};

/// Collapses to one band: 10-band input becomes the per-pixel mean of the
/// bands, 3-band input the 0.299/0.587/0.114 luma, 1-band input is returned
/// unchanged. Other band counts are rejected.
MultiBandImage to_single_channel(const MultiBandImage& img);

/// Resamples to new_width x new_height. Downscaling integrates the source
/// box under each destination pixel (fractional edges weighted); upscaling
/// is bilinear. Band count and bit depth are preserved.
MultiBandImage resize_image(const MultiBandImage& img, int new_width, int new_height);

} // namespace ssf
