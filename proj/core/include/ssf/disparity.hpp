#pragma once

#include <cstdint>
#include <cstdlib>
#include <vector>

namespace ssf {

/// Per-pixel real-valued disparity (or depth, in meters, when produced by
/// disparity_to_depth) plus a validity mask. Valid entries are finite and
/// >= 0; invalid entries hold 0 and must never enter arithmetic — the mask,
/// not a sentinel value, is authoritative.
struct DisparityMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;

    static DisparityMap create(int width, int height);

    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    bool is_valid(int x, int y) const { return valid[static_cast<size_t>(y) * width + x] != 0; }

    void set(int x, int y, double value) {
        const size_t i = static_cast<size_t>(y) * width + x;
        values[i] = value;
        valid[i] = 1;
    }
    void invalidate(int x, int y) {
        const size_t i = static_cast<size_t>(y) * width + x;
        values[i] = 0.0;
        valid[i] = 0;
    }

    std::size_t valid_count() const;
    /// Fraction of pixels marked valid, in [0, 1].
    double density() const;

    /// Validates dimensions, mask/value length and the valid-entry
    /// invariants; throws Error otherwise.
    void check() const;
};

} // namespace ssf
