#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace subit {

// W x H grid of {0,1}. Pixel (x,y), row-major, y down. Out-of-image reads
// are background; every morphological operator relies on that convention.
class BinaryImage {
public:
    BinaryImage() = default;
    BinaryImage(int width, int height, uint8_t fill = 0)
        : width_(width), height_(height), pixels_(static_cast<size_t>(width) * height, fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    size_t size() const { return pixels_.size(); }

    uint8_t& at(int x, int y) { return pixels_[static_cast<size_t>(y) * width_ + x]; }
    uint8_t at(int x, int y) const { return pixels_[static_cast<size_t>(y) * width_ + x]; }

    // Border-safe read: outside the image is background.
    uint8_t get(int x, int y) const {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return 0;
        return pixels_[static_cast<size_t>(y) * width_ + x];
    }

    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    const std::vector<uint8_t>& pixels() const { return pixels_; }
    std::vector<uint8_t>& pixels() { return pixels_; }

    int64_t count_foreground() const {
        int64_t n = 0;
        for (uint8_t p : pixels_) n += p;
        return n;
    }

    BinaryImage complement() const {
        BinaryImage out(width_, height_);
        for (size_t i = 0; i < pixels_.size(); ++i) out.pixels_[i] = pixels_[i] ? 0 : 1;
        return out;
    }

    bool operator==(const BinaryImage& o) const {
        return width_ == o.width_ && height_ == o.height_ && pixels_ == o.pixels_;
    }
    bool operator!=(const BinaryImage& o) const { return !(*this == o); }

    // 8-neighborhood code of (x,y); bit order NW,N,NE,W,E,SW,S,SE.
    unsigned neighborhood_code(int x, int y) const {
        unsigned code = 0;
        code |= static_cast<unsigned>(get(x - 1, y - 1)) << 0;
        code |= static_cast<unsigned>(get(x, y - 1)) << 1;
        code |= static_cast<unsigned>(get(x + 1, y - 1)) << 2;
        code |= static_cast<unsigned>(get(x - 1, y)) << 3;
        code |= static_cast<unsigned>(get(x + 1, y)) << 4;
        code |= static_cast<unsigned>(get(x - 1, y + 1)) << 5;
        code |= static_cast<unsigned>(get(x, y + 1)) << 6;
        code |= static_cast<unsigned>(get(x + 1, y + 1)) << 7;
        return code;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> pixels_;
};

// Binary PGM (P5), maxval 255, foreground stored as 255.
void write_pgm(const BinaryImage& img, const std::filesystem::path& path);
BinaryImage read_pgm(const std::filesystem::path& path);

// FNV-1a 64-bit, used for dataset checksums and config hashes.
uint64_t fnv1a(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t fnv1a(const std::string& s);
uint64_t file_checksum(const std::filesystem::path& path);

std::string render_ascii(const BinaryImage& img); // debugging aid: '#'/'.' rows

} // namespace subit
