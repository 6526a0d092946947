#include <doctest.h>

#include "subit/errors.hpp"
#include "subit/image.hpp"
#include "subit/rng.hpp"
#include "subit/topology.hpp"

using namespace subit;

namespace {

// Independent flood-fill counter used as the oracle's oracle. Kept free of
// union-find on purpose.
int flood_fill_count(const BinaryImage& img) {
    const int w = img.width();
    const int h = img.height();
    std::vector<uint8_t> seen(static_cast<size_t>(w) * h, 0);
    std::vector<std::pair<int, int>> stack;
    int count = 0;
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            if (!img.at(sx, sy) || seen[static_cast<size_t>(sy) * w + sx]) continue;
            ++count;
            stack.emplace_back(sx, sy);
            seen[static_cast<size_t>(sy) * w + sx] = 1;
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        if (!img.at(nx, ny) || seen[static_cast<size_t>(ny) * w + nx]) continue;
                        seen[static_cast<size_t>(ny) * w + nx] = 1;
                        stack.emplace_back(nx, ny);
                    }
                }
            }
        }
    }
    return count;
}

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

} // namespace

TEST_CASE("count_components basics") {
    CHECK(count_components(BinaryImage(8, 8)) == 0);

    BinaryImage single(8, 8);
    single.at(5, 5) = 1;
    CHECK(count_components(single) == 1);

    BinaryImage diag(8, 8);
    diag.at(2, 2) = 1;
    diag.at(3, 3) = 1; // diagonal touch joins under 8-connectivity
    CHECK(count_components(diag) == 1);

    BinaryImage apart(8, 8);
    apart.at(1, 1) = 1;
    apart.at(4, 1) = 1;
    CHECK(count_components(apart) == 2);
}

TEST_CASE("label_components raster discovery order") {
    const auto img = from_rows({
        "##..##",
        "##..##",
        "......",
    });
    const LabelMap map = label_components(img);
    CHECK(map.max_label == 2);
    CHECK(map.at(0, 0) == 1);
    CHECK(map.at(4, 0) == 2);
    CHECK(map.at(1, 1) == 1);
    CHECK(map.at(5, 1) == 2);
    // Labels partition the foreground exactly.
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) CHECK((map.at(x, y) > 0) == (img.at(x, y) != 0));
}

TEST_CASE("count_components agrees with flood fill: exhaustive 4x4") {
    for (uint32_t bits = 0; bits < 65536u; ++bits) {
        BinaryImage img(4, 4);
        for (int i = 0; i < 16; ++i) img.pixels()[static_cast<size_t>(i)] = (bits >> i) & 1u;
        REQUIRE(count_components(img) == flood_fill_count(img));
    }
}

TEST_CASE("count_components agrees with flood fill: random 64x64") {
    Rng rng(20240811);
    for (int trial = 0; trial < 10000; ++trial) {
        BinaryImage img(64, 64);
        const double density = 0.02 + 0.9 * rng.next_double();
        for (auto& p : img.pixels()) p = rng.next_double() < density ? 1 : 0;
        REQUIRE(count_components(img) == flood_fill_count(img));
    }
}

TEST_CASE("adding one pixel changes the count by at most +1 and at least -7") {
    Rng rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
        BinaryImage img(10, 10);
        for (auto& p : img.pixels()) p = rng.next_double() < 0.4 ? 1 : 0;
        const int before = count_components(img);
        const int x = rng.next_int(0, 9);
        const int y = rng.next_int(0, 9);
        if (img.at(x, y)) continue;
        img.at(x, y) = 1;
        const int after = count_components(img);
        CHECK(after <= before + 1);
        CHECK(after >= before - 7);
    }
}

TEST_CASE("count_holes") {
    CHECK(count_holes(from_rows({"...", ".#.", "..."})) == 0);

    const auto ring = from_rows({
        ".....",
        ".###.",
        ".#.#.",
        ".###.",
        ".....",
    });
    CHECK(count_holes(ring) == 1);
    CHECK(count_components(ring) == 1);

    // Solid disk-ish blob: no holes.
    const auto blob = from_rows({
        ".##.",
        "####",
        "####",
        ".##.",
    });
    CHECK(count_holes(blob) == 0);

    // Background corridor touching the border is not a hole.
    const auto open_c = from_rows({
        "###",
        "#.#",
        "#.#",
    });
    CHECK(count_holes(open_c) == 0);
}

TEST_CASE("is_isolated") {
    BinaryImage img(6, 6);
    img.at(2, 2) = 1;
    CHECK(is_isolated(img, 2, 2));
    img.at(3, 2) = 1;
    CHECK_FALSE(is_isolated(img, 2, 2));
    CHECK_THROWS_AS((void)is_isolated(img, -1, 0), OutOfBounds);
}

TEST_CASE("fill_holes removes all holes") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        BinaryImage img(32, 32);
        const double density = 0.2 + 0.5 * rng.next_double();
        for (auto& p : img.pixels()) p = rng.next_double() < density ? 1 : 0;
        const BinaryImage filled = fill_holes(img);
        CHECK(count_holes(filled) == 0);
        // Filling can only merge nested components, never split or create.
        CHECK(count_components(filled) <= std::max(count_components(img), 1));
        for (size_t i = 0; i < img.size(); ++i) CHECK(filled.pixels()[i] >= img.pixels()[i]);
    }
}
