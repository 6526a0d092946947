#include "subit/image.hpp"

#include <fstream>

#include "subit/errors.hpp"

namespace subit {

void write_pgm(const BinaryImage& img, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path.string());
    f << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<uint8_t> row(static_cast<size_t>(img.width()));
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) row[static_cast<size_t>(x)] = img.at(x, y) ? 255 : 0;
        f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!f) throw IoError("write failed: " + path.string());
}

BinaryImage read_pgm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for read: " + path.string());
    std::string magic;
    f >> magic;
    if (magic != "P5") throw IoError("not a binary PGM: " + path.string());
    auto next_int = [&f, &path]() {
        // PGM headers allow '#' comments between tokens.
        for (;;) {
            int c = f.peek();
            if (c == '#') {
                std::string line;
                std::getline(f, line);
            } else if (std::isspace(c)) {
                f.get();
            } else {
                break;
            }
        }
        int v = -1;
        if (!(f >> v)) throw IoError("bad PGM header: " + path.string());
        return v;
    };
    const int w = next_int();
    const int h = next_int();
    const int maxval = next_int();
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) throw IoError("bad PGM header: " + path.string());
    f.get(); // single whitespace after maxval
    BinaryImage img(w, h);
    std::vector<uint8_t> row(static_cast<size_t>(w));
    for (int y = 0; y < h; ++y) {
        f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!f) throw IoError("truncated PGM: " + path.string());
        for (int x = 0; x < w; ++x) img.at(x, y) = row[static_cast<size_t>(x)] >= 128 ? 1 : 0;
    }
    return img;
}

uint64_t fnv1a(const void* data, size_t len, uint64_t seed) {
    const auto* p = static_cast<const uint8_t*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

uint64_t file_checksum(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for checksum: " + path.string());
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[4096];
    while (f.read(buf, sizeof buf) || f.gcount() > 0) {
        h = fnv1a(buf, static_cast<size_t>(f.gcount()), h);
        if (f.eof()) break;
    }
    return h;
}

std::string render_ascii(const BinaryImage& img) {
    std::string out;
    out.reserve(static_cast<size_t>((img.width() + 1) * img.height()));
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) out += img.at(x, y) ? '#' : '.';
        out += '\n';
    }
    return out;
}

} // namespace subit
