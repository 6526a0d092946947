#include "subit/engine_verify.hpp"

#include "subit/image.hpp"
#include "subit/morpho.hpp"
#include "subit/rng.hpp"
#include "subit/topology.hpp"

namespace subit {

namespace {

void note(VerifyResult& r, const std::string& msg) {
    ++r.failures;
    if (r.failure_notes.size() < 16) r.failure_notes.push_back(msg);
}

bool all_isolated(const BinaryImage& img) {
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (img.at(x, y) && img.neighborhood_code(x, y) != 0) return false;
    return true;
}

// Shrink step by step, checking invariants after every pass.
void check_dynamics(VerifyResult& r, const BinaryImage& input, const KernelBank& bank, int max_cycles,
                    const std::string& tag) {
    const int components = count_components(input);
    const int holes = count_holes(input);
    const bool hole_free = holes == 0;
    ++r.checked;
    if (hole_free) ++r.hole_free_checked;

    BinaryImage cur = input;
    int cycles = 0;
    for (; cycles < max_cycles; ++cycles) {
        int64_t removed = 0;
        for (int half = 0; half < 2; ++half) {
            const BinaryImage next = prune_pass(cur, half == 0 ? bank.kernels : bank.rotated);
            removed += cur.count_foreground() - next.count_foreground();
            if (count_components(next) != components) {
                note(r, tag + ": component count changed during pass");
                return;
            }
            if (count_holes(next) > count_holes(cur)) {
                note(r, tag + ": hole count increased during pass");
                return;
            }
            cur = next;
        }
        if (removed == 0) break;
    }
    if (cycles >= max_cycles) {
        note(r, tag + ": no fixed point within " + std::to_string(max_cycles) + " cycles");
        return;
    }
    r.max_cycles_seen = std::max(r.max_cycles_seen, cycles + 1);
    if (hole_free) {
        if (!all_isolated(cur)) {
            note(r, tag + ": hole-free fixed point has non-isolated pixels");
            return;
        }
        if (cur.count_foreground() != components) {
            note(r, tag + ": fixed point pixel count != component count");
            return;
        }
    }
}

// Count 8-connected groups among a set of cells given as (x,y) pairs.
int component_count_of_cells(const std::vector<std::pair<int, int>>& cells) {
    const size_t n = cells.size();
    std::vector<int> parent(n);
    for (size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    auto find = [&](int a) {
        while (parent[static_cast<size_t>(a)] != a) a = parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
        return a;
    };
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (std::abs(cells[i].first - cells[j].first) <= 1 && std::abs(cells[i].second - cells[j].second) <= 1)
                parent[static_cast<size_t>(find(static_cast<int>(j)))] = find(static_cast<int>(i));
    int count = 0;
    for (size_t i = 0; i < n; ++i) count += find(static_cast<int>(i)) == static_cast<int>(i);
    return count;
}

} // namespace

VerifyResult verify_exhaustive_4x4(const KernelBank& bank) {
    VerifyResult r;
    for (uint32_t bits = 0; bits < 65536u; ++bits) {
        BinaryImage img(4, 4);
        for (int i = 0; i < 16; ++i) img.pixels()[static_cast<size_t>(i)] = (bits >> i) & 1u;
        check_dynamics(r, img, bank, 32, "4x4 #" + std::to_string(bits));
    }
    return r;
}

VerifyResult verify_local_safety(const KernelBank& bank) {
    VerifyResult r;
    const auto table_a = KernelBank::match_table(bank.kernels);
    const auto table_b = KernelBank::match_table(bank.rotated);

    for (int pass = 0; pass < 2; ++pass) {
        const auto& table = pass == 0 ? table_a : table_b;
        const std::string tag = pass == 0 ? "passA" : "passB";

        // Isolated pixel must never match.
        ++r.checked;
        if (table[0]) note(r, tag + ": isolated pixel deletable");

        // Single-deletion rerouting: foreground neighbors of a deleted pixel
        // must form exactly one 8-connected group.
        static constexpr int kBitDx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
        static constexpr int kBitDy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
        for (unsigned code = 1; code < 256; ++code) {
            if (!table[code]) continue;
            ++r.checked;
            std::vector<std::pair<int, int>> fg;
            for (int b = 0; b < 8; ++b)
                if ((code >> b) & 1u) fg.emplace_back(kBitDx[b], kBitDy[b]);
            if (component_count_of_cells(fg) != 1)
                note(r, tag + ": single deletion can split, code " + std::to_string(code));
        }

        // Pair rerouting over the joint window of two 8-adjacent deletions.
        const std::pair<int, int> offsets[4] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
        for (auto [qx, qy] : offsets) {
            std::vector<std::pair<int, int>> cells; // window minus the two centers
            for (int y = -1; y <= qy + 1; ++y)
                for (int x = std::min(-1, qx - 1); x <= std::max(1, qx + 1); ++x) {
                    if (std::abs(x) > 1 && (std::abs(x - qx) > 1 || std::abs(y - qy) > 1)) continue;
                    if (std::abs(y) > 1 && (std::abs(x - qx) > 1 || std::abs(y - qy) > 1)) continue;
                    if ((x == 0 && y == 0) || (x == qx && y == qy)) continue;
                    cells.emplace_back(x, y);
                }
            const size_t n = cells.size();
            for (uint32_t fill = 0; fill < (1u << n); ++fill) {
                auto lookup = [&](int x, int y) -> uint8_t {
                    if ((x == 0 && y == 0) || (x == qx && y == qy)) return 1;
                    for (size_t i = 0; i < n; ++i)
                        if (cells[i] == std::pair<int, int>{x, y}) return (fill >> i) & 1u;
                    return 0; // outside window: background (worst case for rerouting)
                };
                auto code_at = [&](int cx, int cy) {
                    unsigned code = 0;
                    int bit = 0;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            if (dx == 0 && dy == 0) continue;
                            code |= static_cast<unsigned>(lookup(cx + dx, cy + dy)) << bit;
                            ++bit;
                        }
                    return code;
                };
                if (!table[code_at(0, 0)] || !table[code_at(qx, qy)]) continue;
                ++r.checked;
                // Contact cells: foreground window cells adjacent to either center.
                std::vector<std::pair<int, int>> contacts;
                for (size_t i = 0; i < n; ++i) {
                    if (!((fill >> i) & 1u)) continue;
                    const auto [x, y] = cells[i];
                    const bool near_p = std::abs(x) <= 1 && std::abs(y) <= 1;
                    const bool near_q = std::abs(x - qx) <= 1 && std::abs(y - qy) <= 1;
                    if (near_p || near_q) contacts.emplace_back(x, y);
                }
                if (contacts.empty()) {
                    note(r, tag + ": pair deletion annihilates a 2-pixel component");
                    continue;
                }
                // All foreground window cells (pair removed) must leave the
                // contacts in a single component.
                std::vector<std::pair<int, int>> fgcells;
                for (size_t i = 0; i < n; ++i)
                    if ((fill >> i) & 1u) fgcells.push_back(cells[i]);
                // Union-find over fgcells, then check contacts share a root.
                std::vector<int> parent(fgcells.size());
                for (size_t i = 0; i < fgcells.size(); ++i) parent[i] = static_cast<int>(i);
                auto find = [&](int a) {
                    while (parent[static_cast<size_t>(a)] != a)
                        a = parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
                    return a;
                };
                for (size_t i = 0; i < fgcells.size(); ++i)
                    for (size_t j = i + 1; j < fgcells.size(); ++j)
                        if (std::abs(fgcells[i].first - fgcells[j].first) <= 1 &&
                            std::abs(fgcells[i].second - fgcells[j].second) <= 1)
                            parent[static_cast<size_t>(find(static_cast<int>(j)))] = find(static_cast<int>(i));
                int root = -1;
                bool split = false;
                for (const auto& c : contacts) {
                    for (size_t i = 0; i < fgcells.size(); ++i) {
                        if (fgcells[i] == c) {
                            const int rt = find(static_cast<int>(i));
                            if (root == -1) root = rt;
                            else if (rt != root) split = true;
                        }
                    }
                }
                if (split)
                    note(r, tag + ": pair deletion at offset (" + std::to_string(qx) + "," + std::to_string(qy) +
                                ") can split, fill " + std::to_string(fill));
            }
        }
    }
    return r;
}

VerifyResult verify_randomized(const KernelBank& bank, int images, uint64_t seed, int size) {
    VerifyResult r;
    Rng master(seed);
    for (int i = 0; i < images; ++i) {
        Rng rng = master.spawn(static_cast<uint64_t>(i));
        const double density = 0.05 + 0.55 * rng.next_double();
        BinaryImage noise(size, size);
        for (auto& p : noise.pixels()) p = rng.next_double() < density ? 1 : 0;
        if (i % 2 == 0) {
            // Hole-filled variant: arbitrary hole-free blobs, full contract.
            check_dynamics(r, fill_holes(noise), bank, 8 * size, "filled noise #" + std::to_string(i));
        } else {
            // Raw noise: count preservation only (holes may stall the engine).
            const int components = count_components(noise);
            BinaryImage cur = noise;
            for (int cycle = 0; cycle < 4; ++cycle) {
                cur = prune_cycle(cur, bank);
            }
            ++r.checked;
            if (count_components(cur) != components) note(r, "raw noise #" + std::to_string(i) + ": count changed");
        }
    }
    return r;
}

} // namespace subit
