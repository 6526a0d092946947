#pragma once

#include <array>

#include "subit/image.hpp"
#include "subit/kernel.hpp"

namespace subit {

// Recurrent convolutional engine with real-valued weights: six 3x3 kernels
// (54 trainable weights) applied alternately with their point reflections.
// Hard thresholding reproduces the template engine exactly; training runs a
// steep-sigmoid surrogate through a fixed unroll depth.
struct TrainableRcnn {
    std::array<std::array<double, 9>, 6> weights{}; // row-major 3x3 each
    std::array<double, 6> thresholds{};             // match when corr > threshold
    double temperature = 0.05;                      // surrogate sharpness
    int unroll_depth = 32;

    static TrainableRcnn from_bank(const KernelBank& bank);

    // Exact engine semantics: binary states, hard threshold, alternate
    // passes until a full cycle removes nothing (or max_cycles runs out).
    BinaryImage forward_hard(const BinaryImage& img, int max_cycles = 0) const;

    double distance_to(const TrainableRcnn& reference) const; // L2 over the 54 weights
};

struct RcnnStepStats {
    double loss = 0;
    double distance_to_reference = 0;
};

struct RcnnStudyResult {
    std::vector<RcnnStepStats> trajectory;
    double oscillation_fraction = 0; // fraction of steps where the loss increased
};

enum class RcnnInit { random, near_solution };
enum class RcnnLoss { count_cross_entropy, per_pixel };

struct RcnnTrainConfig {
    int steps = 2000;
    int batch_size = 16;
    double lr = 1e-2;
    uint64_t seed = 0;
    RcnnInit init = RcnnInit::random;
    double epsilon = 0.05; // near_solution perturbation scale
    RcnnLoss loss = RcnnLoss::count_cross_entropy;
};

// Gradient-descends the 54 kernel weights through the unrolled soft
// recurrence. Records the loss and the distance to the reference bank per
// step; makes no convergence promise (and the study expects none).
RcnnStudyResult train_rcnn_kernels(TrainableRcnn& rcnn, const std::vector<BinaryImage>& images,
                                   const std::vector<int>& labels, const KernelBank& reference,
                                   const RcnnTrainConfig& cfg);

// Soft unrolled forward pass final activations (testing/diagnostics).
std::vector<double> rcnn_soft_forward(const TrainableRcnn& rcnn, const BinaryImage& img);

} // namespace subit
