#include <doctest.h>

#include "subit/kernel.hpp"
#include "subit/morpho.hpp"
#include "subit/rcnn.hpp"
#include "subit/rng.hpp"
#include "subit/scene.hpp"

using namespace subit;

TEST_CASE("hard-threshold rcnn with reference weights reproduces shrink bit-exactly") {
    const KernelBank bank = default_kernel_bank();
    const TrainableRcnn rcnn = TrainableRcnn::from_bank(bank);
    Rng rng(24601);
    for (int trial = 0; trial < 300; ++trial) {
        BinaryImage img(24, 24);
        const double density = 0.05 + 0.5 * rng.next_double();
        for (auto& p : img.pixels()) p = rng.next_double() < density ? 1 : 0;
        const BinaryImage expect = shrink(img, bank, 8 * 48).fixed_point;
        const BinaryImage got = rcnn.forward_hard(img, 8 * 48);
        REQUIRE(got == expect);
    }
}

TEST_CASE("soft forward approaches the hard dynamics at low temperature") {
    const KernelBank bank = default_kernel_bank();
    TrainableRcnn rcnn = TrainableRcnn::from_bank(bank);
    rcnn.temperature = 0.02;
    rcnn.unroll_depth = 24;

    Rng rng(11);
    SceneSpec spec;
    spec.label = 2;
    spec.image_size = 24;
    spec.seed = 77;
    for (int i = 0; i < 2; ++i) {
        ObjectSpec obj;
        obj.kind = ShapeKind::circle;
        obj.size = 3.5;
        spec.objects.push_back(obj);
    }
    resolve_placement(spec, rng);
    const BinaryImage img = rasterize(spec);
    const auto soft = rcnn_soft_forward(rcnn, img);
    const BinaryImage hard = rcnn.forward_hard(img);
    // Binarized soft state equals the hard fixed point on a comfortable run.
    int mismatches = 0;
    for (size_t i = 0; i < soft.size(); ++i) mismatches += (soft[i] >= 0.5 ? 1 : 0) != hard.pixels()[i];
    CHECK(mismatches == 0);
}

TEST_CASE("distance to reference: zero at epsilon 0, positive after perturbation") {
    const KernelBank bank = default_kernel_bank();
    const TrainableRcnn ref = TrainableRcnn::from_bank(bank);
    TrainableRcnn same = ref;
    CHECK(same.distance_to(ref) == 0.0);
    same.weights[0][0] += 0.25;
    CHECK(same.distance_to(ref) == doctest::Approx(0.25));
}

TEST_CASE("kernel training records full trajectories and oscillation stats") {
    const KernelBank bank = default_kernel_bank();
    std::vector<BinaryImage> images;
    std::vector<int> labels;
    Rng master(5);
    for (int i = 0; i < 24; ++i) {
        Rng rng = master.spawn(static_cast<uint64_t>(i));
        const int n = 1 + static_cast<int>(rng.next_below(3));
        SceneSpec spec;
        spec.label = n;
        spec.image_size = 26;
        spec.seed = rng.next_u64();
        for (int j = 0; j < n; ++j) {
            ObjectSpec obj;
            obj.kind = ShapeKind::circle;
            obj.size = 3.0;
            spec.objects.push_back(obj);
        }
        resolve_placement(spec, rng);
        images.push_back(rasterize(spec));
        labels.push_back(n);
    }

    TrainableRcnn rcnn = TrainableRcnn::from_bank(bank);
    rcnn.unroll_depth = 12;
    RcnnTrainConfig cfg;
    cfg.steps = 30;
    cfg.batch_size = 4;
    cfg.seed = 99;
    cfg.init = RcnnInit::near_solution;
    cfg.epsilon = 0.0;
    const RcnnStudyResult r = train_rcnn_kernels(rcnn, images, labels, bank, cfg);
    REQUIRE(r.trajectory.size() == 30);
    // epsilon = 0 starts exactly at the reference.
    CHECK(r.trajectory.front().distance_to_reference == doctest::Approx(0.0).epsilon(1e-12));
    for (const auto& step : r.trajectory) {
        CHECK(std::isfinite(step.loss));
        CHECK(std::isfinite(step.distance_to_reference));
    }
    CHECK(r.oscillation_fraction >= 0.0);
    CHECK(r.oscillation_fraction <= 1.0);
}

TEST_CASE("kernel training with zero learning rate leaves trajectories flat") {
    const KernelBank bank = default_kernel_bank();
    std::vector<BinaryImage> images;
    std::vector<int> labels;
    BinaryImage img(16, 16);
    img.at(8, 8) = 1;
    images.push_back(img);
    labels.push_back(1);

    TrainableRcnn rcnn = TrainableRcnn::from_bank(bank);
    rcnn.unroll_depth = 8;
    RcnnTrainConfig cfg;
    cfg.steps = 10;
    cfg.batch_size = 2;
    cfg.lr = 0.0;
    cfg.seed = 3;
    cfg.init = RcnnInit::near_solution;
    cfg.epsilon = 0.0;
    const RcnnStudyResult r = train_rcnn_kernels(rcnn, images, labels, bank, cfg);
    for (const auto& step : r.trajectory) {
        CHECK(step.distance_to_reference == 0.0);
        CHECK(step.loss == doctest::Approx(r.trajectory.front().loss));
    }
}
