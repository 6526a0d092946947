#include "subit/kernel.hpp"

#include <fstream>
#include <sstream>

#include "subit/errors.hpp"

namespace subit {

KernelBank KernelBank::from_kernels(std::vector<TemplateKernel> ks) {
    KernelBank bank;
    bank.kernels = std::move(ks);
    bank.rotated.reserve(bank.kernels.size());
    for (const auto& k : bank.kernels) bank.rotated.push_back(k.rotated180());
    bank.validate();
    return bank;
}

void KernelBank::validate() const {
    if (kernels.size() != 6) throw DomainError("kernel bank must hold exactly 6 kernels");
    if (rotated.size() != kernels.size()) throw DomainError("rotated set size mismatch");
    for (size_t i = 0; i < kernels.size(); ++i) {
        const auto& k = kernels[i];
        if (k.w[4] != 1) throw DomainError("kernel center weight must be +1");
        bool has_minus = false;
        for (int8_t v : k.w) {
            if (v < -1 || v > 1) throw DomainError("kernel weights must be in {-1,0,+1}");
            has_minus |= (v == -1);
        }
        if (!has_minus) throw DomainError("kernel needs at least one -1 entry");
        if (rotated[i] != k.rotated180()) throw DomainError("rotated[i] must be the point reflection of kernels[i]");
    }
}

std::array<uint8_t, 256> KernelBank::match_table(std::span<const TemplateKernel> kernels) {
    // Neighborhood code bit order: NW,N,NE,W,E,SW,S,SE -> bits 0..7.
    static constexpr int kCellToBit[9] = {0, 1, 2, 3, -1, 4, 5, 6, 7};
    std::array<uint8_t, 256> table{};
    for (unsigned code = 0; code < 256; ++code) {
        bool any = false;
        for (const auto& k : kernels) {
            bool ok = true;
            for (int c = 0; c < 9 && ok; ++c) {
                if (c == 4) continue; // center is foreground by definition here
                const int8_t w = k.w[static_cast<size_t>(c)];
                if (w == 0) continue;
                const bool fg = (code >> kCellToBit[c]) & 1u;
                ok = (w > 0) == fg;
            }
            if (ok) {
                any = true;
                break;
            }
        }
        table[code] = any ? 1 : 0;
    }
    return table;
}

KernelBank default_kernel_bank() {
    auto K = [](const char* rows) {
        TemplateKernel k;
        int i = 0;
        for (const char* p = rows; *p; ++p) {
            if (*p == '+') k.w[static_cast<size_t>(i++)] = 1;
            else if (*p == '-') k.w[static_cast<size_t>(i++)] = -1;
            else if (*p == '0') k.w[static_cast<size_t>(i++)] = 0;
        }
        if (i != 9) throw DomainError("bad kernel literal");
        return k;
    };
    // Row order: (NW N NE) / (W C E) / (SW S SE).
    return KernelBank::from_kernels({
        K("--- 0+0 0+0"), // peel north edge: clear row above, supported below
        K("-00 -++ -00"), // peel west edge: clear column left, supported right
        K("--+ 0++ 0+0"), // north staircase step (NE ascent)
        K("-00 -++ ++0"), // west staircase step (SW descent)
        K("--- -+- --+"), // lone SE-diagonal tip
        K("--- -+- +--"), // lone SW-diagonal tip
    });
}

KernelBank parse_kernel_bank(const std::string& text) {
    std::vector<TemplateKernel> kernels;
    TemplateKernel cur{};
    int row = 0;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string cells;
        for (char c : line) {
            if (c == '+' || c == '-' || c == '0') cells += c;
            else if (!std::isspace(static_cast<unsigned char>(c)))
                throw DomainError("kernel bank: invalid character at line " + std::to_string(lineno));
        }
        if (cells.empty()) continue;
        if (cells.size() != 3) throw DomainError("kernel bank: expected 3 symbols at line " + std::to_string(lineno));
        for (int i = 0; i < 3; ++i) {
            const char c = cells[static_cast<size_t>(i)];
            cur.w[static_cast<size_t>(row * 3 + i)] = c == '+' ? 1 : (c == '-' ? -1 : 0);
        }
        if (++row == 3) {
            kernels.push_back(cur);
            cur = TemplateKernel{};
            row = 0;
        }
    }
    if (row != 0) throw DomainError("kernel bank: trailing partial kernel");
    return KernelBank::from_kernels(std::move(kernels));
}

KernelBank load_kernel_bank(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open kernel bank: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_kernel_bank(ss.str());
}

std::string format_kernel_bank(const KernelBank& bank) {
    std::string out = "# 3x3 hit-or-miss templates: + foreground, - background, 0 don't-care\n";
    for (const auto& k : bank.kernels) {
        out += '\n';
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                const int8_t v = k.w[static_cast<size_t>(r * 3 + c)];
                out += v > 0 ? '+' : (v < 0 ? '-' : '0');
            }
            out += '\n';
        }
    }
    return out;
}

} // namespace subit
