#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "ssf/disparity.hpp"
#include "ssf/error.hpp"
#include "ssf/image.hpp"

namespace ssf::detail {

// Writes through a sibling temp file and renames on commit, so readers never
// observe a partially written artifact.
class AtomicFile {
public:
    explicit AtomicFile(const std::filesystem::path& target)
        : target_(target), tmp_(target.string() + ".tmp") {
        stream_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!stream_)
            throw Error(target.string() + ": cannot open for writing");
    }
    ~AtomicFile() {
        if (!committed_) {
            stream_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }
    std::ostream& stream() { return stream_; }
    void commit() {
        stream_.flush();
        if (!stream_)
            throw Error(target_.string() + ": write failed");
        stream_.close();
        std::filesystem::rename(tmp_, target_);
        committed_ = true;
    }

private:
    std::filesystem::path target_;
    std::filesystem::path tmp_;
    std::ofstream stream_;
    bool committed_ = false;
};

bool host_is_little_endian();

// Portable float map ("Pf" header, signed scale encoding endianness, raw
// 32-bit floats bottom-to-top). Invalid pixels are stored as +inf.
void write_pfm_samples(const DisparityMap& map, std::ostream& out);
DisparityMap read_pfm(const std::filesystem::path& path);

// PNG (libpng). Gray and RGB, 8 or 16 bit; palette/low-depth/alpha inputs are
// normalized on read.
MultiBandImage read_png(const std::filesystem::path& path);
void write_png(const MultiBandImage& img, const std::filesystem::path& path);

// Binary netpbm (P5/P6).
MultiBandImage read_pnm(const std::filesystem::path& path);
void write_pnm(const MultiBandImage& img, const std::filesystem::path& path);

// Extension dispatch shared by load_image/write_image.
bool is_png(const std::filesystem::path& path);
bool is_pnm(const std::filesystem::path& path);

} // namespace ssf::detail
