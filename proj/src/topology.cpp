#include "subit/topology.hpp"

#include <numeric>

#include "subit/errors.hpp"

namespace subit {

namespace {

class UnionFind {
public:
    explicit UnionFind(size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int32_t find(int32_t a) {
        int32_t root = a;
        while (parent_[static_cast<size_t>(root)] != root) root = parent_[static_cast<size_t>(root)];
        while (parent_[static_cast<size_t>(a)] != root) { // path compression
            int32_t next = parent_[static_cast<size_t>(a)];
            parent_[static_cast<size_t>(a)] = root;
            a = next;
        }
        return root;
    }

    void unite(int32_t a, int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[static_cast<size_t>(a)] < rank_[static_cast<size_t>(b)]) std::swap(a, b);
        parent_[static_cast<size_t>(b)] = a;
        if (rank_[static_cast<size_t>(a)] == rank_[static_cast<size_t>(b)]) ++rank_[static_cast<size_t>(a)];
    }

private:
    std::vector<int32_t> parent_;
    std::vector<uint8_t> rank_;
};

} // namespace

LabelMap label_components(const BinaryImage& img) {
    const int w = img.width();
    const int h = img.height();
    LabelMap map;
    map.width = w;
    map.height = h;
    map.labels.assign(static_cast<size_t>(w) * h, 0);
    if (w == 0 || h == 0) return map;

    // First pass: provisional labels, merging against the four already-seen
    // neighbors (W, NW, N, NE).
    std::vector<int32_t> provisional(static_cast<size_t>(w) * h, 0);
    UnionFind uf(static_cast<size_t>(w) * h / 2 + 2);
    int32_t next = 1;
    auto prov = [&](int x, int y) -> int32_t {
        if (x < 0 || y < 0 || x >= w) return 0;
        return provisional[static_cast<size_t>(y) * w + x];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!img.at(x, y)) continue;
            const int32_t nb[4] = {prov(x - 1, y), prov(x - 1, y - 1), prov(x, y - 1), prov(x + 1, y - 1)};
            int32_t lab = 0;
            for (int32_t n : nb) {
                if (n == 0) continue;
                if (lab == 0) lab = n;
                else uf.unite(lab, n);
            }
            if (lab == 0) lab = next++;
            provisional[static_cast<size_t>(y) * w + x] = lab;
        }
    }

    // Second pass: compact roots to 1..K in raster-scan discovery order.
    std::vector<int32_t> compact(static_cast<size_t>(next), 0);
    int32_t k = 0;
    for (size_t i = 0; i < provisional.size(); ++i) {
        if (provisional[i] == 0) continue;
        const int32_t root = uf.find(provisional[i]);
        if (compact[static_cast<size_t>(root)] == 0) compact[static_cast<size_t>(root)] = ++k;
        map.labels[i] = compact[static_cast<size_t>(root)];
    }
    map.max_label = k;
    return map;
}

int count_components(const BinaryImage& img) { return label_components(img).max_label; }

int count_holes(const BinaryImage& img) {
    const int w = img.width();
    const int h = img.height();
    if (w == 0 || h == 0) return 0;
    // Flood the border-connected background first (4-connectivity), then
    // count the leftover background regions.
    std::vector<uint8_t> visited(static_cast<size_t>(w) * h, 0);
    std::vector<int> stack;
    auto idx = [w](int x, int y) { return static_cast<size_t>(y) * w + x; };
    auto push_if_bg = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        const size_t i = idx(x, y);
        if (!visited[i] && !img.at(x, y)) {
            visited[i] = 1;
            stack.push_back(static_cast<int>(i));
        }
    };
    for (int x = 0; x < w; ++x) {
        push_if_bg(x, 0);
        push_if_bg(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push_if_bg(0, y);
        push_if_bg(w - 1, y);
    }
    auto drain = [&]() {
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            const int x = i % w;
            const int y = i / w;
            push_if_bg(x - 1, y);
            push_if_bg(x + 1, y);
            push_if_bg(x, y - 1);
            push_if_bg(x, y + 1);
        }
    };
    drain();
    int holes = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = idx(x, y);
            if (!img.at(x, y) && !visited[i]) {
                ++holes;
                visited[i] = 1;
                stack.push_back(static_cast<int>(i));
                drain();
            }
        }
    }
    return holes;
}

bool is_isolated(const BinaryImage& img, int x, int y) {
    if (!img.in_bounds(x, y)) throw OutOfBounds("is_isolated: pixel outside image");
    return img.at(x, y) != 0 && img.neighborhood_code(x, y) == 0;
}

BinaryImage fill_holes(const BinaryImage& img) {
    const int w = img.width();
    const int h = img.height();
    BinaryImage out = img;
    if (w == 0 || h == 0) return out;
    std::vector<uint8_t> border_bg(static_cast<size_t>(w) * h, 0);
    std::vector<int> stack;
    auto idx = [w](int x, int y) { return static_cast<size_t>(y) * w + x; };
    auto push_if_bg = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        const size_t i = idx(x, y);
        if (!border_bg[i] && !img.at(x, y)) {
            border_bg[i] = 1;
            stack.push_back(static_cast<int>(i));
        }
    };
    for (int x = 0; x < w; ++x) {
        push_if_bg(x, 0);
        push_if_bg(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push_if_bg(0, y);
        push_if_bg(w - 1, y);
    }
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const int x = i % w;
        const int y = i / w;
        push_if_bg(x - 1, y);
        push_if_bg(x + 1, y);
        push_if_bg(x, y - 1);
        push_if_bg(x, y + 1);
    }
    for (size_t i = 0; i < border_bg.size(); ++i) {
        if (!img.pixels()[i] && !border_bg[i]) out.pixels()[i] = 1;
    }
    return out;
}

} // namespace subit
