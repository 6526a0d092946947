#pragma once

#include <filesystem>
#include <optional>

#include "subit/confusion.hpp"
#include "subit/config.hpp"
#include "subit/kernel.hpp"
#include "subit/net.hpp"
#include "subit/optim.hpp"
#include "subit/rcnn.hpp"

namespace subit {

struct ExperimentReport {
    std::string id;
    uint64_t seed = 0;
    uint64_t config_hash = 0;
    uint64_t model_hash = 0;
    ConfusionMatrix matrix;
    double mean_diagonal = 0;
    double signed_error = 0;
    std::string reference_table; // embedded anchor name, empty when none
};

// Desk-scale defaults; every field has a config key under [battery].
struct BatterySettings {
    int train_per_class = 1200;
    int val_per_class = 120;
    int test_per_class = 1000;
    int epochs = 10;
    int batch_size = 32;
    double lr = 1e-3;
    int lr_decay_after = 5; // epoch from which the rate decays
    double lr_decay_factor = 0.3;
    double early_stop_val_acc = 0.995;
    int jobs = 0;
    int image_size = 64;
    int boundary_image_size = 96;   // edge-count window needs the headroom
    int boundary_train_per_class = 900;
    int erosion_train_scenes = 700; // trajectory states multiply this
    int erosion_epochs = 3;
    int counting_train_per_class = 400;
    int rcnn_steps = 1200;
    int rcnn_batch = 8;
    int rcnn_image_size = 32;
    int rcnn_train_scenes = 240;
    uint64_t seed = 20240801;

    static BatterySettings from_config(const Config& cfg);
};

// ---- trained-model wrappers ----

struct TrainedClassifier {
    Net<float> net{1, 1, 1};
    TrainHistory history;
    uint64_t params_hash = 0;

    int predict(const BinaryImage& img) const;

private:
    mutable std::optional<typename Net<float>::Workspace> ws_;
};

// Balanced, area-normalized baseline circle datasets of the Section 3 regime.
struct ClassificationData {
    std::vector<BinaryImage> images;
    std::vector<int> labels;        // 1..6
    std::vector<SceneSpec> scenes;
};

ClassificationData make_baseline_data(int per_class, uint64_t seed, int image_size = 64);

// Trains the Table 1 network on baseline circles. `seed` controls dataset,
// initialization and batching.
TrainedClassifier train_baseline_classifier(const BatterySettings& s, uint64_t seed);

// Experiments 1..4 on a trained baseline net.
ExperimentReport run_experiment(int which, const TrainedClassifier& model, const BatterySettings& s,
                                uint64_t seed);

// Section 4 regime: train on edge-normalized boundary maps, probe i.i.d.
// and +-50% scaling applied before boundary extraction.
struct BoundaryRegimeResult {
    TrainedClassifier model;
    ExperimentReport iid;
    ExperimentReport scaled_up;
    ExperimentReport scaled_down;
    double train_edge_corr = 0; // |corr(n, c)| on the training batch
};

BoundaryRegimeResult run_boundary_regime(const BatterySettings& s, uint64_t seed);

// Section 6 composition: erosion atom, reduction atom recursed to fixed
// points, counting head, composed evaluation against the black-box net.
struct Section6Result {
    double erosion_pixel_accuracy = 0;   // plain-erosion supervision holdout
    double reduction_pixel_accuracy = 0; // prune-cycle supervision holdout
    double counting_head_accuracy = 0;   // on exact engine fixed points
    ExperimentReport composed_shape;     // solid mixed shapes
    ExperimentReport composed_up;        // same scenes scaled +50%
    ExperimentReport composed_down;      // same scenes scaled -50%
    ExperimentReport blackbox_shape;     // baseline net on identical sets
    ExperimentReport blackbox_up;
    ExperimentReport blackbox_down;
};

Section6Result run_section6_pipeline(const BatterySettings& s, uint64_t seed, const KernelBank& bank,
                                     const TrainedClassifier& blackbox);

// Section 6 kernel-learning study: both initializations, full trajectories,
// plus the hard-threshold equivalence check against the template engine.
struct KernelStudyResult {
    RcnnStudyResult random_init;
    RcnnStudyResult near_init;
    int equivalence_images = 0;
    int equivalence_matches = 0;
    std::string trajectories_csv; // step,init,loss,distance_to_reference
};

KernelStudyResult run_kernel_learning_study(const BatterySettings& s, uint64_t seed, const KernelBank& bank);

// Report emission: confusion CSV, JSON summary, side-by-side comparison
// against the embedded paper anchors.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& json);

// Embedded paper reference tables, keyed by anchor name
// (exp1_sizes, exp2_triangles, exp2_squares, exp3_swapped, exp4_rings,
//  boundary_iid, boundary_scaled_up, boundary_scaled_down).
const std::map<std::string, std::string>& reference_tables();

ExperimentReport make_report(const std::string& id, uint64_t seed, uint64_t model_hash,
                             const ConfusionMatrix& cm, const std::string& reference);

uint64_t hash_params(const std::vector<float>& params);

} // namespace subit
