#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "subit/dataset.hpp"
#include "subit/errors.hpp"
#include "subit/morpho.hpp"
#include "subit/rng.hpp"

using namespace subit;

namespace {

std::filesystem::path temp_dir(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / "subit_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("pgm round trip is bit exact") {
    Rng rng(4);
    BinaryImage img(64, 64);
    for (auto& p : img.pixels()) p = rng.next_double() < 0.3 ? 1 : 0;
    const auto dir = temp_dir("pgm");
    write_pgm(img, dir / "a.pgm");
    CHECK(read_pgm(dir / "a.pgm") == img);
}

TEST_CASE("scene json round trip is field exact") {
    Rng rng(1234);
    for (Family f : {Family::baseline_circles, Family::mixed_section4, Family::exp4_rings}) {
        const SceneSpec spec = sample_training_scene(4, f, rng);
        const SceneSpec back = scene_from_json(scene_to_json(spec));
        CHECK(back == spec);
    }
}

TEST_CASE("dataset write/read round trip") {
    const auto scenes = generate_scenes(Family::baseline_circles, 2, 99);
    Dataset ds = build_dataset(scenes, 99, NormalizationMode::none);
    const auto dir = temp_dir("roundtrip");
    write_dataset(ds, dir);

    const Dataset back = read_dataset(dir);
    REQUIRE(back.images.size() == ds.images.size());
    for (size_t i = 0; i < ds.images.size(); ++i) {
        CHECK(back.images[i] == ds.images[i]);
        CHECK(back.manifest.entries[i].spec == ds.manifest.entries[i].spec);
        CHECK(back.manifest.entries[i].label == ds.manifest.entries[i].label);
    }
    CHECK(back.manifest.global_seed == 99);
}

TEST_CASE("read_dataset error paths") {
    const auto empty = temp_dir("empty");
    CHECK_THROWS_AS((void)read_dataset(empty), ManifestCorrupt);

    // Corrupt an image after writing: checksum must catch it.
    const auto scenes = generate_scenes(Family::baseline_circles, 1, 7);
    Dataset ds = build_dataset(scenes, 7, NormalizationMode::none);
    const auto dir = temp_dir("corrupt");
    write_dataset(ds, dir);
    {
        std::ofstream f(dir / ds.manifest.entries[0].file, std::ios::binary | std::ios::app);
        f << "garbage";
    }
    CHECK_THROWS_AS((void)read_dataset(dir), ManifestCorrupt);

    // Missing image file.
    const auto dir2 = temp_dir("missing");
    Dataset ds2 = build_dataset(scenes, 7, NormalizationMode::none);
    write_dataset(ds2, dir2);
    std::filesystem::remove(dir2 / ds2.manifest.entries[1].file);
    CHECK_THROWS_AS((void)read_dataset(dir2), ManifestCorrupt);
}

TEST_CASE("dataset generation is bit reproducible") {
    const auto scenes_a = generate_scenes(Family::mixed_section4, 3, 2025);
    const auto scenes_b = generate_scenes(Family::mixed_section4, 3, 2025);
    REQUIRE(scenes_a.size() == scenes_b.size());
    for (size_t i = 0; i < scenes_a.size(); ++i) CHECK(scenes_a[i] == scenes_b[i]);

    Dataset da = build_dataset(scenes_a, 2025, NormalizationMode::none);
    Dataset db = build_dataset(scenes_b, 2025, NormalizationMode::none);
    for (size_t i = 0; i < da.images.size(); ++i) CHECK(da.images[i] == db.images[i]);
}

TEST_CASE("build_dataset with boundary post-processing") {
    const auto scenes = generate_scenes(Family::mixed_section4, 1, 5);
    Dataset ds = build_dataset(scenes, 5, NormalizationMode::none,
                               [](const BinaryImage& img) { return to_boundary(img); });
    for (const auto& img : ds.images) {
        // Boundary maps are thin: every foreground pixel has a background 4-neighbor.
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                if (img.at(x, y))
                    CHECK((!img.get(x - 1, y) || !img.get(x + 1, y) || !img.get(x, y - 1) || !img.get(x, y + 1)));
    }
}
