#pragma once

#include <span>

#include "subit/image.hpp"
#include "subit/kernel.hpp"

namespace subit {

// True iff the 3x3 neighborhood of (x,y) satisfies every constrained cell of
// the template (out-of-image reads are background). Equivalent to the integer
// correlation sum(w * pix) reaching the template's +1 count.
bool matches(const BinaryImage& img, int x, int y, const TemplateKernel& k);

// Correlation form of the same test, exposed for the trainable-RCNN
// equivalence check.
int match_correlation(const BinaryImage& img, int x, int y, const TemplateKernel& k);

// Simultaneously deletes every foreground pixel matching any kernel in the
// list. Matching reads the input snapshot only.
BinaryImage prune_pass(const BinaryImage& img, std::span<const TemplateKernel> kernels);

struct ShrinkTrace {
    int iterations = 0;                  // full cycles run, including the final empty one
    std::vector<int64_t> pixels_removed; // per cycle; last entry is 0 at the fixed point
    BinaryImage fixed_point;
};

// Alternates prune_pass with the base kernels and the rotated set until a
// full cycle removes nothing. max_cycles <= 0 selects the default W+H.
ShrinkTrace shrink(const BinaryImage& img, const KernelBank& bank, int max_cycles = 0);

// Number of foreground pixels in the shrink fixed point; equals the
// component count when every component is hole-free. strict mode throws
// HoleDetected up front on hole-bearing input.
int64_t subitize(const BinaryImage& img, const KernelBank& bank, bool strict = false);

// Foreground = minority color of the border frame; complements when needed.
BinaryImage polarity_normalize(const BinaryImage& img);

// Polarity-normalizes, then keeps foreground pixels with at least one
// background 4-neighbor. Solid objects become one-pixel outlines.
BinaryImage to_boundary(const BinaryImage& img);

// Plain one-layer erosion: removes every foreground pixel with a background
// 4-neighbor. Not connectivity-preserving.
BinaryImage erode_one_layer(const BinaryImage& img);

// One full connectivity-preserving cycle (base pass then rotated pass); the
// reduction atom recursed by the composed counting pipeline.
BinaryImage prune_cycle(const BinaryImage& img, const KernelBank& bank);

} // namespace subit
