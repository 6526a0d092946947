#pragma once

#include "subit/image.hpp"

namespace subit {

// Connectivity convention everywhere: 8-connected foreground, 4-connected
// background (the Jordan-consistent pairing).
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<int32_t> labels; // 0 = background, components numbered 1..K
    int32_t max_label = 0;

    int32_t at(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
};

// Two-pass union-find labeling; labels assigned in raster-scan discovery order.
LabelMap label_components(const BinaryImage& img);

int count_components(const BinaryImage& img);

// 4-connected background regions not connected to the image border.
int count_holes(const BinaryImage& img);

// True iff all 8 neighbors of foreground pixel (x,y) are background.
// Throws OutOfBounds when (x,y) is outside the image.
bool is_isolated(const BinaryImage& img, int x, int y);

// Replaces every hole with foreground. Used to manufacture adversarial
// hole-free inputs for engine stress tests.
BinaryImage fill_holes(const BinaryImage& img);

} // namespace subit
