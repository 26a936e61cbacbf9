#pragma once

#include <filesystem>
#include <string>

#include "ssf/disparity.hpp"
#include "ssf/image.hpp"

namespace ssf {

/// Declared file layout for load_image: a single-band image file, a 3-band
/// color file, or a band-stack sidecar (JSON listing width, height and the
/// ordered per-band files) for multi-spectral input.
enum class BandLayout { SingleBand, ThreeBand, BandStack };

/// Loads an image and verifies it against the declared layout. PNG and
/// binary PGM/PPM files are supported for the single-/3-band layouts; the
/// band-stack layout takes the sidecar path (or a directory containing
/// stack.json). Sample values are preserved exactly.
MultiBandImage load_image(const std::filesystem::path& path, BandLayout layout);

/// Writes a 1- or 3-band image to PNG or binary PGM/PPM, chosen by file
/// extension. Samples are rounded to the nearest integer of the declared
/// bit depth. The write is atomic (temp file + rename).
void write_image(const MultiBandImage& img, const std::filesystem::path& path);

/// Writes every band as <prefix>NN.png next to `sidecar_path` and the JSON
/// sidecar itself (keys: width, height, bands).
void write_band_stack(const MultiBandImage& img, const std::filesystem::path& sidecar_path,
                      const std::string& prefix = "band");

enum class DisparityFormat {
    FloatMap, ///< portable float map, exact; invalid pixels stored as +inf
    Scaled16  ///< 16-bit grayscale PNG, sample = round(d*256), 0 = invalid
};

void write_disparity(const DisparityMap& map, const std::filesystem::path& path,
                     DisparityFormat format);
DisparityMap load_disparity(const std::filesystem::path& path, DisparityFormat format);

/// 8-bit PNG validity mask: 255 where valid, 0 elsewhere.
void write_mask(const DisparityMap& map, const std::filesystem::path& path);

} // namespace ssf
