#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subit/kernel.hpp"

namespace subit {

struct VerifyResult {
    int64_t checked = 0;
    int64_t hole_free_checked = 0;
    int64_t failures = 0;
    int max_cycles_seen = 0;
    std::vector<std::string> failure_notes; // capped; first few offenders

    bool ok() const { return failures == 0; }
};

// Full dynamics on all 65,536 4x4 images: component count preserved by every
// pass, hole count never increases, and hole-free inputs reach a fixed point
// of isolated pixels (one per component).
VerifyResult verify_exhaustive_4x4(const KernelBank& bank);

// Local sufficiency checks on the match tables:
//  - no kernel deletes an isolated pixel,
//  - every deleted configuration keeps its foreground neighbors in a single
//    8-connected piece (single-deletion rerouting),
//  - every co-deletable 8-adjacent pair keeps all contact pixels in one
//    component of the joint window minus the pair (pair rerouting, all fills).
VerifyResult verify_local_safety(const KernelBank& bank);

// Randomized stress at the given image size: filled random blobs (hole-free
// by construction) must shrink to exactly one isolated pixel per component
// with per-pass count preservation; raw noise only needs count preservation.
VerifyResult verify_randomized(const KernelBank& bank, int images, uint64_t seed, int size = 64);

} // namespace subit
