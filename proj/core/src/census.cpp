#include <bit>
#include <string>

#include "ssf/census.hpp"
#include "ssf/error.hpp"
#include "ssf/parallel.hpp"

namespace ssf {

void CensusImage::check() const {
    detail::require(width > 0 && height > 0, "census image: non-positive dimensions");
    detail::require(margin_x >= 0 && margin_y >= 0, "census image: negative margin");
    detail::require(bits >= 1 && bits <= 64, "census image: descriptor length out of range");
    detail::require(codes.size() == static_cast<size_t>(width) * height,
                    "census image: code count does not match dimensions");
}

CensusImage census_transform(const MultiBandImage& img, int window_width,
                             int window_height, int jobs) {
    img.check();
    if (img.bands != 1)
        throw Error("census_transform: expected a single-band image, got " +
                    std::to_string(img.bands) + " bands");
    if (window_width < 1 || window_height < 1 || window_width % 2 == 0 ||
        window_height % 2 == 0)
        throw Error("census_transform: window dimensions must be odd and positive");
    if (window_width * window_height > 64)
        throw Error("census_transform: window exceeds 64 descriptor bits");
    if (img.width < window_width || img.height < window_height)
        throw Error("census_transform: image smaller than the census window");

    CensusImage out;
    out.width = img.width;
    out.height = img.height;
    out.margin_x = window_width / 2;
    out.margin_y = window_height / 2;
    out.bits = window_width * window_height;
    out.codes.assign(static_cast<size_t>(img.width) * img.height, 0);

    parallel_chunks(out.margin_y, img.height - out.margin_y, jobs, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = out.margin_x; x < img.width - out.margin_x; ++x) {
                const float center = img.at(x, y);
                std::uint64_t code = 0;
                int bit = 0;
                for (int dy = -out.margin_y; dy <= out.margin_y; ++dy)
                    for (int dx = -out.margin_x; dx <= out.margin_x; ++dx, ++bit)
                        if (img.at(x + dx, y + dy) < center)
                            code |= std::uint64_t{1} << bit;
                out.codes[static_cast<size_t>(y) * img.width + x] = code;
            }
        }
    });
    return out;
}

namespace {

void require_census_pair(const CensusImage& left, const CensusImage& right) {
    left.check();
    right.check();
    detail::require(left.width == right.width && left.height == right.height,
                    "compute_dsi: census images differ in size");
    detail::require(left.margin_x == right.margin_x && left.margin_y == right.margin_y &&
                        left.bits == right.bits,
                    "compute_dsi: census images differ in window");
}

} // namespace

template <class T>
void accumulate_dsi(BasicCostVolume<T>& acc, const CensusImage& left,
                    const CensusImage& right, int jobs) {
    require_census_pair(left, right);
    detail::require(acc.width == left.width && acc.height == left.height,
                    "accumulate_dsi: volume and census dimensions differ");
    detail::require(acc.d_max >= 1, "accumulate_dsi: d_max must be >= 1");

    const T invalid_cost = static_cast<T>(left.bits);
    parallel_chunks(0, acc.height, jobs, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            const bool row_defined = y >= left.margin_y && y < left.height - left.margin_y;
            for (int x = 0; x < acc.width; ++x) {
                T* cell = acc.cell(x, y);
                if (!row_defined || x < left.margin_x || x >= left.width - left.margin_x) {
                    for (int d = 0; d < acc.d_max; ++d)
                        cell[d] += invalid_cost;
                    continue;
                }
                const std::uint64_t code_l = left.at(x, y);
                // x-d only ever decreases, so the in-range disparities form a
                // prefix [0, n_match).
                const int n_match = std::min(acc.d_max, x - left.margin_x + 1);
                for (int d = 0; d < n_match; ++d)
                    cell[d] += static_cast<T>(std::popcount(code_l ^ right.at(x - d, y)));
                for (int d = n_match; d < acc.d_max; ++d)
                    cell[d] += invalid_cost;
            }
        }
    });
}

template <class T>
BasicCostVolume<T> compute_dsi(const CensusImage& left, const CensusImage& right,
                               int d_max, int jobs) {
    left.check();
    if (d_max < 1)
        throw Error("compute_dsi: d_max must be >= 1");
    BasicCostVolume<T> out = BasicCostVolume<T>::zeros(left.width, left.height, d_max);
    accumulate_dsi(out, left, right, jobs);
    return out;
}

template <class T>
BasicCostVolume<T> integrate_dsi(const std::vector<BasicCostVolume<T>>& volumes) {
    if (volumes.empty())
        throw Error("integrate_dsi: empty volume list");
    volumes.front().check();
    BasicCostVolume<T> out = volumes.front();
    for (size_t i = 1; i < volumes.size(); ++i) {
        detail::require(out.same_shape(volumes[i]), "integrate_dsi: volume shape mismatch");
        const std::vector<T>& src = volumes[i].costs;
        for (size_t j = 0; j < out.costs.size(); ++j)
            out.costs[j] += src[j];
    }
    return out;
}

template void accumulate_dsi<float>(BasicCostVolume<float>&, const CensusImage&,
                                    const CensusImage&, int);
template void accumulate_dsi<double>(BasicCostVolume<double>&, const CensusImage&,
                                     const CensusImage&, int);
template BasicCostVolume<float> compute_dsi<float>(const CensusImage&, const CensusImage&,
                                                   int, int);
template BasicCostVolume<double> compute_dsi<double>(const CensusImage&, const CensusImage&,
                                                     int, int);
template BasicCostVolume<float> integrate_dsi<float>(const std::vector<BasicCostVolume<float>>&);
template BasicCostVolume<double>
integrate_dsi<double>(const std::vector<BasicCostVolume<double>>&);

} // namespace ssf
