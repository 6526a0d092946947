#include <doctest.h>

#include "subit/engine_verify.hpp"
#include "subit/errors.hpp"
#include "subit/image.hpp"
#include "subit/kernel.hpp"
#include "subit/morpho.hpp"
#include "subit/rng.hpp"
#include "subit/scene.hpp"
#include "subit/topology.hpp"

using namespace subit;

namespace {

BinaryImage from_rows(std::initializer_list<const char*> rows) {
    const int h = static_cast<int>(rows.size());
    const int w = static_cast<int>(std::string(*rows.begin()).size());
    BinaryImage img(w, h);
    int y = 0;
    for (const char* row : rows) {
        for (int x = 0; x < w; ++x) img.at(x, y) = row[x] == '#' ? 1 : 0;
        ++y;
    }
    return img;
}

BinaryImage solid_disk(int size, double cx, double cy, double r) {
    BinaryImage img(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double dx = x + 0.5 - cx;
            const double dy = y + 0.5 - cy;
            if (dx * dx + dy * dy <= r * r) img.at(x, y) = 1;
        }
    return img;
}

} // namespace

TEST_CASE("bank invariants") {
    const KernelBank bank = default_kernel_bank();
    CHECK(bank.kernels.size() == 6);
    CHECK(bank.rotated.size() == 6);
    for (size_t i = 0; i < 6; ++i) {
        CHECK(bank.kernels[i].w[4] == 1);
        CHECK(bank.rotated[i] == bank.kernels[i].rotated180());
        bool has_minus = false;
        for (int8_t v : bank.kernels[i].w) has_minus |= v == -1;
        CHECK(has_minus);
    }
}

TEST_CASE("kernel bank text round trip") {
    const KernelBank bank = default_kernel_bank();
    const std::string text = format_kernel_bank(bank);
    const KernelBank parsed = parse_kernel_bank(text);
    CHECK(parsed.kernels == bank.kernels);
    CHECK_THROWS_AS(parse_kernel_bank("---\n0+0\n"), DomainError);     // partial kernel
    CHECK_THROWS_AS(parse_kernel_bank("abc\ndef\nghi\n"), DomainError); // junk
}

TEST_CASE("matches agrees with per-cell comparison on all 512 patches x bank") {
    const KernelBank bank = default_kernel_bank();
    std::vector<TemplateKernel> all = bank.kernels;
    all.insert(all.end(), bank.rotated.begin(), bank.rotated.end());
    for (unsigned patch = 0; patch < 512; ++patch) {
        BinaryImage img(3, 3);
        for (int i = 0; i < 9; ++i) img.pixels()[static_cast<size_t>(i)] = (patch >> i) & 1u;
        for (const auto& k : all) {
            bool expect = true;
            for (int dy = -1; dy <= 1 && expect; ++dy)
                for (int dx = -1; dx <= 1 && expect; ++dx) {
                    const int8_t w = k.at(dx, dy);
                    if (w == 0) continue;
                    expect = (w > 0) == (img.at(1 + dx, 1 + dy) != 0);
                }
            CHECK(matches(img, 1, 1, k) == expect);
            // Correlation form: match iff the correlation hits the +1 count.
            CHECK((match_correlation(img, 1, 1, k) == k.positive_count()) == expect);
        }
    }
}

TEST_CASE("matches is false on background centers") {
    const KernelBank bank = default_kernel_bank();
    BinaryImage img(5, 5, 1);
    img.at(2, 2) = 0;
    for (const auto& k : bank.kernels) CHECK_FALSE(matches(img, 2, 2, k));
}

TEST_CASE("prune_pass basics") {
    const KernelBank bank = default_kernel_bank();

    BinaryImage empty(8, 8);
    CHECK(prune_pass(empty, bank.kernels) == empty);

    // No kernel of either pass may match an isolated pixel.
    BinaryImage lone(8, 8);
    lone.at(3, 3) = 1;
    CHECK(prune_pass(lone, bank.kernels) == lone);
    CHECK(prune_pass(lone, bank.rotated) == lone);

    // Monotonicity on random images.
    Rng rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        BinaryImage img(16, 16);
        for (auto& p : img.pixels()) p = rng.next_double() < 0.45 ? 1 : 0;
        const BinaryImage out = prune_pass(img, bank.kernels);
        for (size_t i = 0; i < img.size(); ++i) CHECK(out.pixels()[i] <= img.pixels()[i]);
    }
}

TEST_CASE("local safety: single and pair rerouting, both passes") {
    const VerifyResult r = verify_local_safety(default_kernel_bank());
    for (const auto& n : r.failure_notes) MESSAGE(n);
    CHECK(r.failures == 0);
}

TEST_CASE("exhaustive 4x4 dynamics") {
    const VerifyResult r = verify_exhaustive_4x4(default_kernel_bank());
    for (const auto& n : r.failure_notes) MESSAGE(n);
    CHECK(r.checked == 65536);
    CHECK(r.failures == 0);
}

TEST_CASE("randomized engine stress") {
    const VerifyResult r = verify_randomized(default_kernel_bank(), 400, 123456, 64);
    for (const auto& n : r.failure_notes) MESSAGE(n);
    CHECK(r.failures == 0);
}

TEST_CASE("shrink on simple shapes") {
    const KernelBank bank = default_kernel_bank();

    BinaryImage lone(16, 16);
    lone.at(8, 8) = 1;
    const ShrinkTrace t1 = shrink(lone, bank);
    CHECK(t1.iterations == 1);
    CHECK(t1.pixels_removed.back() == 0);
    CHECK(t1.fixed_point == lone);

    const BinaryImage disk = solid_disk(32, 16, 16, 10);
    const ShrinkTrace t2 = shrink(disk, bank);
    CHECK(t2.fixed_point.count_foreground() == 1);
    for (size_t i = 0; i + 1 < t2.pixels_removed.size(); ++i) CHECK(t2.pixels_removed[i] > 0);
    CHECK(t2.pixels_removed.back() == 0);

    // Fixed-point survivors are isolated.
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            if (t2.fixed_point.at(x, y)) CHECK(is_isolated(t2.fixed_point, x, y));
}

TEST_CASE("subitize") {
    const KernelBank bank = default_kernel_bank();

    CHECK(subitize(BinaryImage(32, 32), bank) == 0);

    BinaryImage two(32, 32);
    for (int y = 4; y < 10; ++y)
        for (int x = 4; x < 10; ++x) two.at(x, y) = 1;
    for (int y = 18; y < 28; ++y)
        for (int x = 18; x < 26; ++x) two.at(x, y) = 1;
    CHECK(subitize(two, bank) == 2);

    // Ring: strict mode refuses, lenient mode runs but overcounts.
    const auto ring = from_rows({
        "........",
        ".#####..",
        ".#...#..",
        ".#...#..",
        ".#####..",
        "........",
    });
    CHECK_THROWS_AS((void)subitize(ring, bank, true), HoleDetected);
    CHECK(subitize(ring, bank, false) >= 1);
}

TEST_CASE("shrink converges within the diameter bound on disks") {
    const KernelBank bank = default_kernel_bank();
    for (int r = 2; r <= 14; ++r) {
        const BinaryImage disk = solid_disk(40, 20, 20, r);
        const ShrinkTrace t = shrink(disk, bank);
        CHECK(t.iterations <= 2 * r + 2);
    }
}

TEST_CASE("shrink converges within max-object-diameter + 2 cycles on scenes") {
    const KernelBank bank = default_kernel_bank();
    Rng master(1312);
    uint64_t idx = 0;
    for (int rep = 0; rep < 60; ++rep) {
        Rng rng = master.spawn(idx++);
        const int n = 1 + static_cast<int>(rng.next_below(6));
        const SceneSpec spec = sample_training_scene(n, Family::mixed_solid_shapes, rng);
        double diameter = 0;
        for (const auto& obj : spec.objects) diameter = std::max(diameter, 2.0 * object_max_extent(obj));
        const ShrinkTrace t = shrink(rasterize(spec), bank);
        CHECK(t.iterations <= static_cast<int>(std::ceil(diameter)) + 2);
    }
}

TEST_CASE("pixels of distinct components never become adjacent during shrink") {
    // Deletion-only dynamics: foreground sets only shrink, so components of
    // the input can never gain adjacency. Verified directly on one run.
    const KernelBank bank = default_kernel_bank();
    Rng rng(77);
    BinaryImage img(48, 48);
    for (auto& p : img.pixels()) p = rng.next_double() < 0.3 ? 1 : 0;
    const BinaryImage filled = fill_holes(img);
    const LabelMap labels = label_components(filled);

    BinaryImage cur = filled;
    for (int cycle = 0; cycle < 8; ++cycle) {
        cur = prune_cycle(cur, bank);
        for (int y = 0; y < cur.height(); ++y)
            for (int x = 0; x < cur.width(); ++x) {
                if (!cur.at(x, y)) continue;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (!cur.get(x + dx, y + dy)) continue;
                        CHECK(labels.at(x, y) == labels.at(x + dx, y + dy));
                    }
            }
    }
}

TEST_CASE("to_boundary") {
    // Solid 5x5 square -> its 16-pixel perimeter.
    BinaryImage sq(9, 9);
    for (int y = 2; y < 7; ++y)
        for (int x = 2; x < 7; ++x) sq.at(x, y) = 1;
    const BinaryImage b = to_boundary(sq);
    CHECK(b.count_foreground() == 16);
    for (int y = 3; y < 6; ++y)
        for (int x = 3; x < 6; ++x) CHECK(b.at(x, y) == 0);

    // Complemented input produces an equal component count after
    // normalization, with at most one pixel of dilation ambiguity.
    const BinaryImage bc = to_boundary(sq.complement());
    CHECK(count_components(bc) == count_components(b));

    // Boundary of a boundary keeps the component count.
    CHECK(count_components(to_boundary(b)) == count_components(b));
}

TEST_CASE("erode_one_layer") {
    BinaryImage sq(7, 7);
    for (int y = 2; y < 5; ++y)
        for (int x = 2; x < 5; ++x) sq.at(x, y) = 1;
    const BinaryImage e = erode_one_layer(sq);
    CHECK(e.count_foreground() == 1);
    CHECK(e.at(3, 3) == 1);

    BinaryImage line(8, 8);
    for (int x = 1; x < 7; ++x) line.at(x, 4) = 1;
    CHECK(erode_one_layer(line).count_foreground() == 0);

    // img \ to_boundary(img) == erode_one_layer(img) for white-on-black input.
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        BinaryImage img(16, 16);
        for (int y = 4; y < 12; ++y)
            for (int x = 4; x < 12; ++x) img.at(x, y) = rng.next_double() < 0.7 ? 1 : 0;
        const BinaryImage eroded = erode_one_layer(img);
        const BinaryImage boundary = to_boundary(img);
        for (size_t i = 0; i < img.size(); ++i)
            CHECK(eroded.pixels()[i] == (img.pixels()[i] && !boundary.pixels()[i] ? 1 : 0));
    }
}

TEST_CASE("shrink raises NonConvergence when the budget is too small") {
    const KernelBank bank = default_kernel_bank();
    const BinaryImage disk = solid_disk(48, 24, 24, 16);
    CHECK_THROWS_AS((void)shrink(disk, bank, 2), NonConvergence);
}
