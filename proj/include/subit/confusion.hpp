#pragma once

#include <functional>
#include <string>

#include "subit/dataset.hpp"
#include "subit/image.hpp"

namespace subit {

// 6x6 confusion matrix: rows = true n (1..6), columns = perceived m.
struct ConfusionMatrix {
    int64_t counts[6][6] = {{0}};

    void add(int true_n, int perceived_m) { ++counts[true_n - 1][perceived_m - 1]; }

    int64_t row_total(int n) const {
        int64_t t = 0;
        for (int m = 0; m < 6; ++m) t += counts[n - 1][m];
        return t;
    }

    // P(perceive m | true n); rows sum to 1 within 1e-9 given samples.
    double prob(int n, int m) const {
        const int64_t t = row_total(n);
        return t == 0 ? 0.0 : static_cast<double>(counts[n - 1][m - 1]) / static_cast<double>(t);
    }

    double mean_diagonal_accuracy() const {
        double acc = 0;
        for (int n = 1; n <= 6; ++n) acc += prob(n, n);
        return acc / 6.0;
    }

    // sum_{n,m} P(m|n) (m-n) / 6: positive = overestimation.
    double signed_mean_error() const {
        double err = 0;
        for (int n = 1; n <= 6; ++n)
            for (int m = 1; m <= 6; ++m) err += prob(n, m) * (m - n);
        return err / 6.0;
    }

    std::string to_csv() const; // 6 decimal places, rows = n
};

ConfusionMatrix confusion_from_csv(const std::string& text);

// Runs the classifier over the dataset. `model` returns the perceived count
// in 1..6; ties inside the model must already resolve to the lowest index.
// Throws EmptyClass when some class has no samples.
ConfusionMatrix evaluate(const std::function<int(const BinaryImage&)>& model, const Dataset& ds);
ConfusionMatrix evaluate(const std::function<int(const BinaryImage&)>& model,
                         const std::vector<BinaryImage>& images, const std::vector<int>& labels);

} // namespace subit
