#include "ssf/image.hpp"

#include <algorithm>
#include <cmath>

#include "ssf/error.hpp"

namespace ssf {

MultiBandImage MultiBandImage::create(int width, int height, int bands, int bit_depth) {
    detail::require(width > 0 && height > 0, "image: non-positive dimensions");
    detail::require(bands >= 1, "image: band count must be >= 1");
    detail::require(bit_depth == 8 || bit_depth == 16, "image: bit depth must be 8 or 16");
    MultiBandImage img;
    img.width = width;
    img.height = height;
    img.bands = bands;
    img.bit_depth = bit_depth;
    img.data.assign(static_cast<size_t>(width) * height * bands, 0.0f);
    return img;
}

void MultiBandImage::check() const {
    detail::require(width > 0 && height > 0, "image: non-positive dimensions");
    detail::require(bands >= 1, "image: band count must be >= 1");
    detail::require(bit_depth == 8 || bit_depth == 16, "image: bit depth must be 8 or 16");
    detail::require(data.size() == static_cast<size_t>(width) * height * bands,
                    "image: sample count does not match width*height*bands");
    const float hi = max_value();
    for (const float v : data)
        detail::require(std::isfinite(v) && v >= 0.0f && v <= hi,
                        "image: sample outside declared bit-depth range");
}

MultiBandImage to_single_channel(const MultiBandImage& img) {
    img.check();
    if (img.bands == 1)
        return img;
    detail::require(img.bands == 3 || img.bands == 10,
                    "to_single_channel: unsupported band count " + std::to_string(img.bands));
    MultiBandImage out = MultiBandImage::create(img.width, img.height, 1, img.bit_depth);
    const size_t pixels = static_cast<size_t>(img.width) * img.height;
    if (img.bands == 3) {
        for (size_t i = 0; i < pixels; ++i) {
            const float* p = img.data.data() + i * 3;
            out.data[i] = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
        }
    } else {
        for (size_t i = 0; i < pixels; ++i) {
            const float* p = img.data.data() + i * 10;
            float sum = 0.0f;
            for (int b = 0; b < 10; ++b)
                sum += p[b];
            out.data[i] = sum / 10.0f;
        }
    }
    return out;
}

namespace {

// Integral of one source axis over [lo, hi) with unit-weight samples:
// accumulates value*coverage for every source index the interval touches.
struct BoxAxis {
    int first;
    int last;          // inclusive
    double w_first;
    double w_last;
};

BoxAxis box_axis(double lo, double hi, int limit) {
    BoxAxis a;
    a.first = std::clamp(static_cast<int>(std::floor(lo)), 0, limit - 1);
    a.last = std::clamp(static_cast<int>(std::ceil(hi)) - 1, 0, limit - 1);
    a.w_first = (a.first == a.last) ? hi - lo : (a.first + 1.0) - lo;
    a.w_last = hi - a.last;
    return a;
}

MultiBandImage resize_box(const MultiBandImage& img, int nw, int nh) {
    MultiBandImage out = MultiBandImage::create(nw, nh, img.bands, img.bit_depth);
    const double sx = static_cast<double>(img.width) / nw;
    const double sy = static_cast<double>(img.height) / nh;
    for (int y = 0; y < nh; ++y) {
        const BoxAxis ay = box_axis(y * sy, (y + 1) * sy, img.height);
        for (int x = 0; x < nw; ++x) {
            const BoxAxis ax = box_axis(x * sx, (x + 1) * sx, img.width);
            for (int b = 0; b < img.bands; ++b) {
                double acc = 0.0, wsum = 0.0;
                for (int yy = ay.first; yy <= ay.last; ++yy) {
                    const double wy = (yy == ay.first) ? ay.w_first
                                    : (yy == ay.last) ? ay.w_last : 1.0;
                    for (int xx = ax.first; xx <= ax.last; ++xx) {
                        const double wx = (xx == ax.first) ? ax.w_first
                                        : (xx == ax.last) ? ax.w_last : 1.0;
                        acc += wy * wx * img.at(xx, yy, b);
                        wsum += wy * wx;
                    }
                }
                out.at(x, y, b) = static_cast<float>(acc / wsum);
            }
        }
    }
    return out;
}

MultiBandImage resize_bilinear(const MultiBandImage& img, int nw, int nh) {
    MultiBandImage out = MultiBandImage::create(nw, nh, img.bands, img.bit_depth);
    const double sx = nw > 1 ? static_cast<double>(img.width - 1) / (nw - 1) : 0.0;
    const double sy = nh > 1 ? static_cast<double>(img.height - 1) / (nh - 1) : 0.0;
    for (int y = 0; y < nh; ++y) {
        const double fy = y * sy;
        const int y0 = std::min(static_cast<int>(fy), img.height - 1);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double ty = fy - y0;
        for (int x = 0; x < nw; ++x) {
            const double fx = x * sx;
            const int x0 = std::min(static_cast<int>(fx), img.width - 1);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double tx = fx - x0;
            for (int b = 0; b < img.bands; ++b) {
                const double top = (1.0 - tx) * img.at(x0, y0, b) + tx * img.at(x1, y0, b);
                const double bot = (1.0 - tx) * img.at(x0, y1, b) + tx * img.at(x1, y1, b);
                out.at(x, y, b) = static_cast<float>((1.0 - ty) * top + ty * bot);
            }
        }
    }
    return out;
}

} // namespace

MultiBandImage resize_image(const MultiBandImage& img, int new_width, int new_height) {
    img.check();
    detail::require(new_width > 0 && new_height > 0, "resize: non-positive target size");
    if (new_width == img.width && new_height == img.height)
        return img;
    if (new_width <= img.width && new_height <= img.height)
        return resize_box(img, new_width, new_height);
    return resize_bilinear(img, new_width, new_height);
}

} // namespace ssf
