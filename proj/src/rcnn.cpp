#include "subit/rcnn.hpp"

#include <cmath>

#include "subit/errors.hpp"
#include "subit/rng.hpp"

namespace subit {

namespace {

// dx,dy offsets in kernel cell order (row-major 3x3).
constexpr int kDx[9] = {-1, 0, 1, -1, 0, 1, -1, 0, 1};
constexpr int kDy[9] = {-1, -1, -1, 0, 0, 0, 1, 1, 1};

std::array<std::array<double, 9>, 6> reflect(const std::array<std::array<double, 9>, 6>& w) {
    std::array<std::array<double, 9>, 6> r{};
    for (size_t k = 0; k < 6; ++k)
        for (int i = 0; i < 9; ++i) r[k][static_cast<size_t>(i)] = w[k][static_cast<size_t>(8 - i)];
    return r;
}

} // namespace

TrainableRcnn TrainableRcnn::from_bank(const KernelBank& bank) {
    TrainableRcnn r;
    for (size_t k = 0; k < 6; ++k) {
        int n_plus = 0;
        for (int i = 0; i < 9; ++i) {
            r.weights[k][static_cast<size_t>(i)] = bank.kernels[k].w[static_cast<size_t>(i)];
            n_plus += bank.kernels[k].w[static_cast<size_t>(i)] > 0;
        }
        // Integer correlation can only reach n_plus on an exact match.
        r.thresholds[k] = n_plus - 0.5;
    }
    return r;
}

double TrainableRcnn::distance_to(const TrainableRcnn& reference) const {
    double sum = 0;
    for (size_t k = 0; k < 6; ++k)
        for (int i = 0; i < 9; ++i) {
            const double d = weights[k][static_cast<size_t>(i)] - reference.weights[k][static_cast<size_t>(i)];
            sum += d * d;
        }
    return std::sqrt(sum);
}

BinaryImage TrainableRcnn::forward_hard(const BinaryImage& img, int max_cycles) const {
    if (max_cycles <= 0) max_cycles = img.width() + img.height();
    const auto rot = reflect(weights);
    BinaryImage cur = img;
    BinaryImage snapshot;
    const int w = img.width();
    const int h = img.height();
    for (int cycle = 0; cycle < max_cycles; ++cycle) {
        int64_t removed = 0;
        for (int half = 0; half < 2; ++half) {
            const auto& wset = half == 0 ? weights : rot;
            snapshot = cur;
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (!snapshot.at(x, y)) continue;
                    bool matched = false;
                    for (size_t k = 0; k < 6 && !matched; ++k) {
                        double corr = 0;
                        for (int c = 0; c < 9; ++c)
                            corr += wset[k][static_cast<size_t>(c)] * snapshot.get(x + kDx[c], y + kDy[c]);
                        matched = corr > thresholds[k];
                    }
                    if (matched) {
                        cur.at(x, y) = 0;
                        ++removed;
                    }
                }
            }
        }
        if (removed == 0) return cur;
    }
    throw NonConvergence("trainable rcnn: no fixed point within cycle budget");
}

namespace {

struct SoftTrace {
    // states[t] for t = 0..D, match activations m[t][k] for t = 0..D-1
    std::vector<std::vector<double>> states;
    std::vector<std::array<std::vector<double>, 6>> matches;
};

void soft_forward(const TrainableRcnn& rcnn, const BinaryImage& img, SoftTrace& trace) {
    const int w = img.width();
    const int h = img.height();
    const size_t hw = static_cast<size_t>(w) * h;
    const auto rot = reflect(rcnn.weights);
    trace.states.assign(static_cast<size_t>(rcnn.unroll_depth) + 1, std::vector<double>(hw));
    trace.matches.assign(static_cast<size_t>(rcnn.unroll_depth), {});
    for (size_t i = 0; i < hw; ++i) trace.states[0][i] = img.pixels()[i];

    auto at = [&](const std::vector<double>& s, int x, int y) -> double {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
        return s[static_cast<size_t>(y) * w + x];
    };

    for (int t = 0; t < rcnn.unroll_depth; ++t) {
        const auto& wset = t % 2 == 0 ? rcnn.weights : rot;
        const auto& x = trace.states[static_cast<size_t>(t)];
        auto& nx = trace.states[static_cast<size_t>(t) + 1];
        for (size_t k = 0; k < 6; ++k) trace.matches[static_cast<size_t>(t)][k].assign(hw, 0.0);
        for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < w; ++xx) {
                const size_t p = static_cast<size_t>(y) * w + xx;
                double keep = 1.0;
                for (size_t k = 0; k < 6; ++k) {
                    double corr = 0;
                    for (int c = 0; c < 9; ++c) corr += wset[k][static_cast<size_t>(c)] * at(x, xx + kDx[c], y + kDy[c]);
                    const double m = 1.0 / (1.0 + std::exp(-(corr - rcnn.thresholds[k]) / rcnn.temperature));
                    trace.matches[static_cast<size_t>(t)][k][p] = m;
                    keep *= 1.0 - m;
                }
                nx[p] = x[p] * keep;
            }
        }
    }
}

// Backward through the unrolled recurrence; accumulates weight gradients.
void soft_backward(const TrainableRcnn& rcnn, const SoftTrace& trace, int w, int h,
                   std::vector<double>& dfinal, std::array<std::array<double, 9>, 6>& gw) {
    const size_t hw = static_cast<size_t>(w) * h;
    const auto rot = reflect(rcnn.weights);
    std::vector<double> dx = dfinal; // gradient w.r.t. states[t+1], walking down
    std::vector<double> dprev(hw);

    for (int t = rcnn.unroll_depth - 1; t >= 0; --t) {
        const bool even = t % 2 == 0;
        const auto& wset = even ? rcnn.weights : rot;
        const auto& x = trace.states[static_cast<size_t>(t)];
        const auto& m = trace.matches[static_cast<size_t>(t)];
        std::fill(dprev.begin(), dprev.end(), 0.0);

        auto at = [&](const std::vector<double>& s, int xx, int yy) -> double {
            if (xx < 0 || yy < 0 || xx >= w || yy >= h) return 0.0;
            return s[static_cast<size_t>(yy) * w + xx];
        };

        for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < w; ++xx) {
                const size_t p = static_cast<size_t>(y) * w + xx;
                const double g = dx[p];
                // keep = prod_k (1 - m_k) computed from stored matches
                double keep = 1.0;
                for (size_t k = 0; k < 6; ++k) keep *= 1.0 - m[k][p];
                if (g != 0.0) dprev[p] += g * keep;
                const double gx = g * x[p];
                if (gx == 0.0) continue;
                for (size_t k = 0; k < 6; ++k) {
                    const double mk = m[k][p];
                    const double denom = std::max(1.0 - mk, 1e-12);
                    const double dm = -gx * keep / denom;          // dL/dm_k
                    const double dcorr = dm * mk * (1.0 - mk) / rcnn.temperature;
                    if (dcorr == 0.0) continue;
                    for (int c = 0; c < 9; ++c) {
                        const int sx = xx + kDx[c];
                        const int sy = y + kDy[c];
                        const double xv = at(x, sx, sy);
                        // weight gradient: reflected pass shares weights
                        const size_t wc = even ? static_cast<size_t>(c) : static_cast<size_t>(8 - c);
                        gw[k][wc] += dcorr * xv;
                        if (sx >= 0 && sy >= 0 && sx < w && sy < h)
                            dprev[static_cast<size_t>(sy) * w + sx] += dcorr * wset[k][static_cast<size_t>(c)];
                    }
                }
            }
        }
        std::swap(dx, dprev);
    }
}

} // namespace

std::vector<double> rcnn_soft_forward(const TrainableRcnn& rcnn, const BinaryImage& img) {
    SoftTrace trace;
    soft_forward(rcnn, img, trace);
    return trace.states.back();
}

RcnnStudyResult train_rcnn_kernels(TrainableRcnn& rcnn, const std::vector<BinaryImage>& images,
                                   const std::vector<int>& labels, const KernelBank& reference,
                                   const RcnnTrainConfig& cfg) {
    if (images.empty()) throw DomainError("empty rcnn training set");
    const TrainableRcnn ref = TrainableRcnn::from_bank(reference);
    Rng rng(cfg.seed ^ 0x52434e4eull);

    if (cfg.init == RcnnInit::random) {
        for (auto& k : rcnn.weights)
            for (auto& v : k) v = rng.gaussian() * 0.5;
    } else {
        rcnn.weights = ref.weights;
        for (auto& k : rcnn.weights)
            for (auto& v : k) v += cfg.epsilon * rng.gaussian();
    }
    rcnn.thresholds = ref.thresholds;

    RcnnStudyResult result;
    result.trajectory.reserve(static_cast<size_t>(cfg.steps));
    int increases = 0;

    SoftTrace trace;
    for (int step = 0; step < cfg.steps; ++step) {
        std::array<std::array<double, 9>, 6> gw{};
        double loss = 0;
        for (int b = 0; b < cfg.batch_size; ++b) {
            const size_t idx = static_cast<size_t>(rng.next_below(images.size()));
            const BinaryImage& img = images[idx];
            soft_forward(rcnn, img, trace);
            const auto& final_state = trace.states.back();
            const size_t hw = final_state.size();
            std::vector<double> dfinal(hw, 0.0);

            if (cfg.loss == RcnnLoss::count_cross_entropy) {
                double count = 0;
                for (double v : final_state) count += v;
                // class logits from the squared distance of the soft count
                // to each candidate number
                double logits[6];
                double mx = -1e300;
                for (int m = 0; m < 6; ++m) {
                    logits[m] = -(count - (m + 1)) * (count - (m + 1));
                    mx = std::max(mx, logits[m]);
                }
                double sum = 0;
                for (int m = 0; m < 6; ++m) sum += std::exp(logits[m] - mx);
                const int label = labels[idx] - 1;
                loss += std::log(sum) + mx - logits[label];
                double dcount = 0;
                for (int m = 0; m < 6; ++m) {
                    const double pm = std::exp(logits[m] - mx) / sum;
                    const double indicator = m == label ? 1.0 : 0.0;
                    dcount += (pm - indicator) * (-2.0 * (count - (m + 1)));
                }
                for (auto& v : dfinal) v = dcount;
            } else {
                // per-pixel squared error against the exact engine fixed point
                const BinaryImage target = ref.forward_hard(img);
                double l = 0;
                for (size_t i = 0; i < hw; ++i) {
                    const double diff = final_state[i] - target.pixels()[i];
                    l += diff * diff;
                    dfinal[i] = 2.0 * diff / static_cast<double>(hw);
                }
                loss += l / static_cast<double>(hw);
            }
            soft_backward(rcnn, trace, img.width(), img.height(), dfinal, gw);
        }
        loss /= cfg.batch_size;
        if (!std::isfinite(loss)) throw Divergence("rcnn kernel training loss became non-finite");
        // Record the state the loss was measured at, then step.
        if (!result.trajectory.empty() && loss > result.trajectory.back().loss) ++increases;
        result.trajectory.push_back({loss, rcnn.distance_to(ref)});
        for (size_t k = 0; k < 6; ++k)
            for (int c = 0; c < 9; ++c)
                rcnn.weights[k][static_cast<size_t>(c)] -= cfg.lr * gw[k][static_cast<size_t>(c)] / cfg.batch_size;
    }
    if (result.trajectory.size() > 1)
        result.oscillation_fraction =
            static_cast<double>(increases) / static_cast<double>(result.trajectory.size() - 1);
    return result;
}

} // namespace subit
