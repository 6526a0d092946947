#include <doctest.h>

#include <fstream>
#include <sstream>

#include "subit/confusion.hpp"
#include "subit/errors.hpp"
#include "subit/experiments.hpp"
#include "subit/kernel.hpp"
#include "subit/morpho.hpp"
#include "subit/rng.hpp"
#include "subit/topology.hpp"

using namespace subit;

namespace {

std::pair<std::vector<BinaryImage>, std::vector<int>> balanced_scenes(int per_class, uint64_t seed) {
    std::vector<BinaryImage> images;
    std::vector<int> labels;
    Rng master(seed);
    uint64_t idx = 0;
    for (int n = 1; n <= 6; ++n)
        for (int i = 0; i < per_class; ++i) {
            Rng rng = master.spawn(idx++);
            images.push_back(rasterize(sample_training_scene(n, Family::mixed_solid_shapes, rng)));
            labels.push_back(n);
        }
    return {images, labels};
}

} // namespace

TEST_CASE("perfect oracle model gives the identity matrix") {
    auto [images, labels] = balanced_scenes(5, 4001);
    const ConfusionMatrix cm =
        evaluate([](const BinaryImage& img) { return count_components(img); }, images, labels);
    for (int n = 1; n <= 6; ++n)
        for (int m = 1; m <= 6; ++m) CHECK(cm.prob(n, m) == (n == m ? 1.0 : 0.0));
    CHECK(cm.mean_diagonal_accuracy() == 1.0);
    CHECK(cm.signed_mean_error() == 0.0);
}

TEST_CASE("constant-1 model on balanced data") {
    auto [images, labels] = balanced_scenes(4, 4002);
    const ConfusionMatrix cm = evaluate([](const BinaryImage&) { return 1; }, images, labels);
    for (int n = 1; n <= 6; ++n) CHECK(cm.prob(n, 1) == 1.0);
    CHECK(cm.mean_diagonal_accuracy() == doctest::Approx(1.0 / 6));
    CHECK(cm.signed_mean_error() < 0); // constant underestimation
}

TEST_CASE("probs rows sum to one within 1e-9") {
    auto [images, labels] = balanced_scenes(7, 4003);
    Rng noise(5);
    const ConfusionMatrix cm = evaluate(
        [&](const BinaryImage&) { return 1 + static_cast<int>(noise.next_below(6)); }, images, labels);
    for (int n = 1; n <= 6; ++n) {
        double sum = 0;
        for (int m = 1; m <= 6; ++m) sum += cm.prob(n, m);
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("evaluate raises EmptyClass") {
    auto [images, labels] = balanced_scenes(2, 4004);
    // Drop every class-6 sample.
    std::vector<BinaryImage> imgs;
    std::vector<int> labs;
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != 6) {
            imgs.push_back(images[i]);
            labs.push_back(labels[i]);
        }
    CHECK_THROWS_AS((void)evaluate([](const BinaryImage&) { return 1; }, imgs, labs), EmptyClass);
}

TEST_CASE("subitize on hole-free mixed scenes is exactly the identity matrix") {
    const KernelBank bank = default_kernel_bank();
    auto [images, labels] = balanced_scenes(25, 4005);
    const ConfusionMatrix cm = evaluate(
        [&](const BinaryImage& img) { return static_cast<int>(subitize(polarity_normalize(img), bank)); },
        images, labels);
    for (int n = 1; n <= 6; ++n) CHECK(cm.prob(n, n) == 1.0);
}

TEST_CASE("confusion csv round trip") {
    ConfusionMatrix cm;
    Rng rng(9);
    for (int i = 0; i < 5000; ++i)
        cm.add(1 + static_cast<int>(rng.next_below(6)), 1 + static_cast<int>(rng.next_below(6)));
    const ConfusionMatrix back = confusion_from_csv(cm.to_csv());
    for (int n = 1; n <= 6; ++n)
        for (int m = 1; m <= 6; ++m) CHECK(back.prob(n, m) == doctest::Approx(cm.prob(n, m)).epsilon(1e-5));
}

TEST_CASE("embedded reference tables carry the anchor values") {
    const auto& tables = reference_tables();
    REQUIRE(tables.count("exp1_sizes") == 1);
    const ConfusionMatrix t2 = confusion_from_csv(tables.at("exp1_sizes"));
    CHECK(t2.prob(5, 4) == doctest::Approx(0.328).epsilon(1e-6)); // the Table 2 anchor
    CHECK(t2.prob(5, 5) == doctest::Approx(0.672).epsilon(1e-6));
    CHECK(t2.prob(6, 6) == doctest::Approx(0.549).epsilon(1e-6));

    const ConfusionMatrix rings = confusion_from_csv(tables.at("exp4_rings"));
    CHECK(rings.prob(1, 1) == doctest::Approx(0.004).epsilon(1e-6));
    CHECK(rings.signed_mean_error() > 0.5); // catastrophic overestimation

    const ConfusionMatrix up = confusion_from_csv(tables.at("boundary_scaled_up"));
    CHECK(up.prob(4, 3) == doctest::Approx(0.793).epsilon(1e-6));
    CHECK(up.signed_mean_error() < -0.3);
    const ConfusionMatrix down = confusion_from_csv(tables.at("boundary_scaled_down"));
    CHECK(down.prob(2, 3) == doctest::Approx(0.583).epsilon(1e-6));
    CHECK(down.signed_mean_error() > 0.3);
    const ConfusionMatrix iid = confusion_from_csv(tables.at("boundary_iid"));
    CHECK(iid.prob(1, 1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(iid.prob(5, 5) == doctest::Approx(0.79).epsilon(1e-6));
}

TEST_CASE("reference CSV assets on disk match the embedded tables") {
    const std::filesystem::path dir = std::filesystem::path(SUBIT_DATA_DIR) / "reference";
    for (const auto& [name, text] : reference_tables()) {
        const auto path = dir / ("table_" + name + ".csv");
        REQUIRE_MESSAGE(std::filesystem::exists(path), path.string());
        std::ifstream f(path);
        std::stringstream ss;
        ss << f.rdbuf();
        const ConfusionMatrix on_disk = confusion_from_csv(ss.str());
        const ConfusionMatrix embedded = confusion_from_csv(text);
        for (int n = 1; n <= 6; ++n)
            for (int m = 1; m <= 6; ++m)
                CHECK(on_disk.prob(n, m) == doctest::Approx(embedded.prob(n, m)).epsilon(1e-9));
    }
}

TEST_CASE("report json round trip and emit_report files") {
    ConfusionMatrix cm;
    for (int n = 1; n <= 6; ++n) cm.counts[n - 1][n - 1] = 100;
    ExperimentReport r = make_report("test_probe", 42, 0xabcd, cm, "exp1_sizes");
    const ExperimentReport back = report_from_json(report_to_json(r));
    CHECK(back.id == r.id);
    CHECK(back.mean_diagonal == doctest::Approx(1.0));
    for (int n = 0; n < 6; ++n)
        for (int m = 0; m < 6; ++m) CHECK(back.matrix.counts[n][m] == r.matrix.counts[n][m]);

    const auto dir = std::filesystem::temp_directory_path() / "subit_tests" / "report";
    std::filesystem::remove_all(dir);
    emit_report(r, dir);
    CHECK(std::filesystem::exists(dir / "confusion.csv"));
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "comparison.csv"));

    // Identity matrix prints a diagonal of 1.000000.
    std::ifstream f(dir / "confusion.csv");
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(text.find("1,1.000000") != std::string::npos);

    // The comparison carries the paper anchor 0.328 at (n=5, m=4).
    std::ifstream c(dir / "comparison.csv");
    std::string ctext((std::istreambuf_iterator<char>(c)), std::istreambuf_iterator<char>());
    CHECK(ctext.find("5,4,0.000000,0.328000") != std::string::npos);
}
