#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace subit {

// 3x3 hit-or-miss template. Cells row-major over (dx,dy) in {-1,0,1}^2:
// index 0 = (-1,-1) ... 4 = center ... 8 = (1,1). Weights: +1 foreground,
// -1 background, 0 don't-care. Invariants: center +1, at least one -1.
struct TemplateKernel {
    std::array<int8_t, 9> w{};

    int8_t at(int dx, int dy) const { return w[static_cast<size_t>((dy + 1) * 3 + (dx + 1))]; }

    TemplateKernel rotated180() const {
        TemplateKernel r;
        for (int i = 0; i < 9; ++i) r.w[static_cast<size_t>(i)] = w[static_cast<size_t>(8 - i)];
        return r;
    }

    int positive_count() const {
        int n = 0;
        for (int8_t v : w) n += (v > 0);
        return n;
    }

    bool operator==(const TemplateKernel&) const = default;
};

// The engine's six templates plus their point reflections. Passes alternate:
// first the base kernels, then the rotated set.
struct KernelBank {
    std::vector<TemplateKernel> kernels; // exactly 6
    std::vector<TemplateKernel> rotated; // rotated[i] == kernels[i].rotated180()

    static KernelBank from_kernels(std::vector<TemplateKernel> ks);

    // Per-pass match table: entry [neighborhood code] = 1 if a foreground
    // center with that 8-neighborhood matches any kernel of the pass.
    // Code bit order matches BinaryImage::neighborhood_code.
    static std::array<uint8_t, 256> match_table(std::span<const TemplateKernel> kernels);

    void validate() const; // throws DomainError on invariant violation
};

// Default bank: two edge peels (N, W), two staircase peels, two lone-diagonal
// tips. Verified by the exhaustive and randomized engine suites.
KernelBank default_kernel_bank();

// Text format: six blocks of three lines of three symbols from {+,-,0};
// blank lines between blocks optional, '#' starts a comment.
KernelBank parse_kernel_bank(const std::string& text);
KernelBank load_kernel_bank(const std::filesystem::path& path);
std::string format_kernel_bank(const KernelBank& bank);

} // namespace subit
