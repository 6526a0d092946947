#include "subit/confusion.hpp"

#include <cstdio>
#include <sstream>

#include "subit/errors.hpp"

namespace subit {

std::string ConfusionMatrix::to_csv() const {
    std::string out = "n\\m,1,2,3,4,5,6\n";
    char buf[32];
    for (int n = 1; n <= 6; ++n) {
        out += std::to_string(n);
        for (int m = 1; m <= 6; ++m) {
            std::snprintf(buf, sizeof buf, ",%.6f", prob(n, m));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

ConfusionMatrix confusion_from_csv(const std::string& text) {
    // Parses the probability CSV back into approximate counts at 1e6 scale;
    // used for the embedded reference tables.
    ConfusionMatrix cm;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line); // header
    int n = 1;
    while (std::getline(in, line) && n <= 6) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ','); // row label
        for (int m = 1; m <= 6; ++m) {
            if (!std::getline(row, cell, ',')) throw IoError("confusion csv: short row");
            cm.counts[n - 1][m - 1] = static_cast<int64_t>(std::stod(cell) * 1e6 + 0.5);
        }
        ++n;
    }
    if (n != 7) throw IoError("confusion csv: expected 6 rows");
    return cm;
}

ConfusionMatrix evaluate(const std::function<int(const BinaryImage&)>& model,
                         const std::vector<BinaryImage>& images, const std::vector<int>& labels) {
    if (images.size() != labels.size()) throw DomainError("evaluate: images/labels size mismatch");
    ConfusionMatrix cm;
    for (size_t i = 0; i < images.size(); ++i) {
        const int n = labels[i];
        if (n < 1 || n > 6) throw DomainError("evaluate: label outside 1..6");
        int m = model(images[i]);
        if (m < 1) m = 1;
        if (m > 6) m = 6;
        cm.add(n, m);
    }
    for (int n = 1; n <= 6; ++n)
        if (cm.row_total(n) == 0) throw EmptyClass("evaluate: class " + std::to_string(n) + " has no samples");
    return cm;
}

ConfusionMatrix evaluate(const std::function<int(const BinaryImage&)>& model, const Dataset& ds) {
    std::vector<int> labels;
    labels.reserve(ds.manifest.entries.size());
    for (const auto& e : ds.manifest.entries) labels.push_back(e.label);
    return evaluate(model, ds.images, labels);
}

} // namespace subit
