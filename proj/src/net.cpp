#include "subit/net.hpp"

#include <fstream>

namespace subit {

namespace {
constexpr char kMagic[8] = {'S', 'B', 'N', 'E', 'T', 'P', 'R', '1'};
}

void save_params(const std::vector<float>& params, uint64_t spec_hash, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path.string());
    f.write(kMagic, sizeof kMagic);
    const uint64_t n = params.size();
    f.write(reinterpret_cast<const char*>(&spec_hash), sizeof spec_hash);
    f.write(reinterpret_cast<const char*>(&n), sizeof n);
    f.write(reinterpret_cast<const char*>(params.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!f) throw IoError("write failed: " + path.string());
}

std::vector<float> load_params(uint64_t expected_spec_hash, const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for read: " + path.string());
    char magic[8];
    f.read(magic, sizeof magic);
    if (!f || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw IoError("not a parameter file: " + path.string());
    uint64_t spec_hash = 0, n = 0;
    f.read(reinterpret_cast<char*>(&spec_hash), sizeof spec_hash);
    f.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!f) throw IoError("truncated parameter header: " + path.string());
    if (spec_hash != expected_spec_hash)
        throw SpecMismatch("parameter file was saved for a different network spec");
    std::vector<float> params(n);
    f.read(reinterpret_cast<char*>(params.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!f || f.gcount() != static_cast<std::streamsize>(n * sizeof(float)))
        throw IoError("truncated parameter data: " + path.string());
    return params;
}

} // namespace subit
