#include "subit/morpho.hpp"

#include "subit/errors.hpp"
#include "subit/topology.hpp"

namespace subit {

bool matches(const BinaryImage& img, int x, int y, const TemplateKernel& k) {
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const int8_t w = k.at(dx, dy);
            if (w == 0) continue;
            const bool fg = img.get(x + dx, y + dy) != 0;
            if ((w > 0) != fg) return false;
        }
    }
    return true;
}

int match_correlation(const BinaryImage& img, int x, int y, const TemplateKernel& k) {
    int corr = 0;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
            corr += k.at(dx, dy) * static_cast<int>(img.get(x + dx, y + dy));
    return corr;
}

BinaryImage prune_pass(const BinaryImage& img, std::span<const TemplateKernel> kernels) {
    const auto table = KernelBank::match_table(kernels);
    BinaryImage out = img;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (img.at(x, y) && table[img.neighborhood_code(x, y)]) out.at(x, y) = 0;
        }
    }
    return out;
}

namespace {

// In-place pass against a precomputed match table; returns pixels removed.
int64_t prune_pass_inplace(BinaryImage& img, BinaryImage& scratch, const std::array<uint8_t, 256>& table) {
    scratch = img;
    int64_t removed = 0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (scratch.at(x, y) && table[scratch.neighborhood_code(x, y)]) {
                img.at(x, y) = 0;
                ++removed;
            }
        }
    }
    return removed;
}

} // namespace

ShrinkTrace shrink(const BinaryImage& img, const KernelBank& bank, int max_cycles) {
    if (max_cycles <= 0) max_cycles = img.width() + img.height();
    if (max_cycles < 1) max_cycles = 1;
    const auto table_a = KernelBank::match_table(bank.kernels);
    const auto table_b = KernelBank::match_table(bank.rotated);

    ShrinkTrace trace;
    trace.fixed_point = img;
    BinaryImage scratch;
    for (int cycle = 0; cycle < max_cycles; ++cycle) {
        int64_t removed = prune_pass_inplace(trace.fixed_point, scratch, table_a);
        removed += prune_pass_inplace(trace.fixed_point, scratch, table_b);
        trace.pixels_removed.push_back(removed);
        ++trace.iterations;
        if (removed == 0) return trace;
    }
    throw NonConvergence("shrink: no fixed point within " + std::to_string(max_cycles) + " cycles");
}

int64_t subitize(const BinaryImage& img, const KernelBank& bank, bool strict) {
    if (strict && count_holes(img) > 0)
        throw HoleDetected("subitize: input has holes; the engine only counts hole-free objects");
    return shrink(img, bank).fixed_point.count_foreground();
}

BinaryImage polarity_normalize(const BinaryImage& img) {
    const int w = img.width();
    const int h = img.height();
    if (w < 2 || h < 2) return img;
    int64_t frame_fg = 0;
    int64_t frame_total = 2 * (w + h) - 4;
    for (int x = 0; x < w; ++x) frame_fg += img.at(x, 0) + img.at(x, h - 1);
    for (int y = 1; y < h - 1; ++y) frame_fg += img.at(0, y) + img.at(w - 1, y);
    return 2 * frame_fg > frame_total ? img.complement() : img;
}

BinaryImage to_boundary(const BinaryImage& img) {
    const BinaryImage norm = polarity_normalize(img);
    BinaryImage out(norm.width(), norm.height());
    for (int y = 0; y < norm.height(); ++y) {
        for (int x = 0; x < norm.width(); ++x) {
            if (!norm.at(x, y)) continue;
            const bool edge = !norm.get(x - 1, y) || !norm.get(x + 1, y) || !norm.get(x, y - 1) || !norm.get(x, y + 1);
            out.at(x, y) = edge ? 1 : 0;
        }
    }
    return out;
}

BinaryImage erode_one_layer(const BinaryImage& img) {
    BinaryImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (!img.at(x, y)) continue;
            const bool edge = !img.get(x - 1, y) || !img.get(x + 1, y) || !img.get(x, y - 1) || !img.get(x, y + 1);
            out.at(x, y) = edge ? 0 : 1;
        }
    }
    return out;
}

BinaryImage prune_cycle(const BinaryImage& img, const KernelBank& bank) {
    return prune_pass(prune_pass(img, bank.kernels), bank.rotated);
}

} // namespace subit
