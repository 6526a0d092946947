#pragma once

#include <functional>

#include "subit/net.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace subit {

enum class OptimizerKind { sgd, adam };
enum class LossKind { cross_entropy, per_pixel_binary_cross_entropy };

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::adam;
    double lr = 1e-3;
    double momentum = 0.9;  // sgd
    double beta1 = 0.9;     // adam
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 64;
    int epochs = 30;
    LossKind loss = LossKind::cross_entropy;
    uint64_t seed = 0;
    double early_stop_val_acc = 0.995;
    int jobs = 0;             // 0 = hardware default
    int lr_decay_after = 0;   // 0 = constant lr; otherwise decay from this epoch (1-based)
    double lr_decay_factor = 0.3;

    void validate() const {
        if (lr < 0) throw DomainError("learning rate must be non-negative");
        if (batch_size < 1) throw DomainError("batch size must be >= 1");
    }
};

template <typename T>
class Optimizer {
public:
    Optimizer(const TrainConfig& cfg, size_t n) : cfg_(cfg) {
        if (cfg.optimizer == OptimizerKind::adam) {
            m_.assign(n, T(0));
            v_.assign(n, T(0));
        } else if (cfg.momentum > 0) {
            m_.assign(n, T(0));
        }
    }

    void set_lr(double lr) { cfg_.lr = lr; }

    void step(std::vector<T>& params, const std::vector<T>& grad) {
        ++t_;
        const T lr = static_cast<T>(cfg_.lr);
        if (cfg_.optimizer == OptimizerKind::sgd) {
            if (m_.empty()) {
                for (size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
            } else {
                const T mu = static_cast<T>(cfg_.momentum);
                for (size_t i = 0; i < params.size(); ++i) {
                    m_[i] = mu * m_[i] + grad[i];
                    params[i] -= lr * m_[i];
                }
            }
            return;
        }
        const T b1 = static_cast<T>(cfg_.beta1);
        const T b2 = static_cast<T>(cfg_.beta2);
        const T eps = static_cast<T>(cfg_.eps);
        const T bc1 = T(1) - static_cast<T>(std::pow(cfg_.beta1, t_));
        const T bc2 = T(1) - static_cast<T>(std::pow(cfg_.beta2, t_));
        for (size_t i = 0; i < params.size(); ++i) {
            m_[i] = b1 * m_[i] + (T(1) - b1) * grad[i];
            v_[i] = b2 * v_[i] + (T(1) - b2) * grad[i] * grad[i];
            params[i] -= lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps);
        }
    }

private:
    TrainConfig cfg_;
    std::vector<T> m_, v_;
    int64_t t_ = 0;
};

struct EpochStats {
    double train_loss = 0;
    double train_acc = 0;
    double val_loss = 0;
    double val_acc = 0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    bool early_stopped = false;
};

// Classification dataset view: images plus labels in 0-based class indices.
// Per-pixel training supplies target masks instead of labels.
struct TrainView {
    const std::vector<BinaryImage>* images = nullptr;
    const std::vector<int>* labels = nullptr;        // cross_entropy
    const std::vector<BinaryImage>* targets = nullptr; // per-pixel BCE
    size_t size() const { return images ? images->size() : 0; }
};

namespace detail {

inline int resolve_jobs(int jobs) {
#ifdef _OPENMP
    return jobs > 0 ? jobs : omp_get_max_threads();
#else
    (void)jobs;
    return 1;
#endif
}

} // namespace detail

template <typename T>
std::pair<double, double> evaluate_loss(Net<T>& net, const TrainView& view, LossKind loss, int jobs_in = 0);

// Mini-batch training driver. Deterministic for a fixed config (including
// `jobs`) on one platform: sample order is seeded, per-thread gradients are
// reduced in thread order.
template <typename T>
TrainHistory train(Net<T>& net, const TrainView& train_set, const TrainView& val_set, const TrainConfig& cfg) {
    cfg.validate();
    const size_t n = train_set.size();
    if (n == 0) throw DomainError("empty training set");
    const int jobs = detail::resolve_jobs(cfg.jobs);

    std::vector<typename Net<T>::Workspace> ws;
    ws.reserve(static_cast<size_t>(jobs));
    for (int j = 0; j < jobs; ++j) ws.push_back(net.make_workspace());

    Optimizer<T> opt(cfg, net.params().size());
    std::vector<T> grad(net.params().size());
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffle_rng(cfg.seed ^ 0x7261696e6c6f6f70ull);

    TrainHistory history;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.lr_decay_after > 0 && epoch + 1 > cfg.lr_decay_after)
            opt.set_lr(cfg.lr * std::pow(cfg.lr_decay_factor, epoch + 1 - cfg.lr_decay_after));
        for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);

        double epoch_loss = 0;
        int64_t epoch_correct = 0;
        int64_t epoch_units = 0; // samples or pixels depending on the loss
        for (size_t start = 0; start < n; start += static_cast<size_t>(cfg.batch_size)) {
            const size_t end = std::min(n, start + static_cast<size_t>(cfg.batch_size));
            const int bs = static_cast<int>(end - start);
            std::vector<double> losses(static_cast<size_t>(bs), 0.0);
            std::vector<int64_t> corrects(static_cast<size_t>(bs), 0);
#ifdef _OPENMP
#pragma omp parallel for num_threads(jobs) schedule(static)
#endif
            for (int bi = 0; bi < bs; ++bi) {
#ifdef _OPENMP
                auto& w = ws[static_cast<size_t>(omp_get_thread_num())];
#else
                auto& w = ws[0];
#endif
                const size_t si = order[start + static_cast<size_t>(bi)];
                net.load_input(w, (*train_set.images)[si]);
                const auto logits = net.forward_sample(w);
                std::vector<T> dlogits(logits.size());
                if (cfg.loss == LossKind::cross_entropy) {
                    int pred = 0;
                    const T loss =
                        softmax_cross_entropy<T>(logits, (*train_set.labels)[si], dlogits, pred);
                    losses[static_cast<size_t>(bi)] = static_cast<double>(loss);
                    corrects[static_cast<size_t>(bi)] = pred == (*train_set.labels)[si] ? 1 : 0;
                } else {
                    int64_t correct = 0;
                    const T loss = pixel_binary_cross_entropy<T>(
                        logits, (*train_set.targets)[si].pixels().data(), dlogits, correct);
                    losses[static_cast<size_t>(bi)] = static_cast<double>(loss);
                    corrects[static_cast<size_t>(bi)] = correct;
                }
                for (auto& g : dlogits) g /= static_cast<T>(bs);
                net.backward_sample(w, dlogits.data());
            }
            // Deterministic reduction: thread buffers in fixed order.
            std::fill(grad.begin(), grad.end(), T(0));
            for (auto& w : ws) {
                for (size_t i = 0; i < grad.size(); ++i) grad[i] += w.grad[i];
                std::fill(w.grad.begin(), w.grad.end(), T(0));
            }
            opt.step(net.params(), grad);
            for (int bi = 0; bi < bs; ++bi) {
                epoch_loss += losses[static_cast<size_t>(bi)];
                epoch_correct += corrects[static_cast<size_t>(bi)];
            }
            epoch_units += cfg.loss == LossKind::cross_entropy
                               ? bs
                               : static_cast<int64_t>(bs) * net.output_n();
            if (!std::isfinite(epoch_loss)) throw Divergence("training loss became non-finite");
        }

        EpochStats stats;
        stats.train_loss = epoch_loss / static_cast<double>(n);
        stats.train_acc = static_cast<double>(epoch_correct) / static_cast<double>(epoch_units);
        if (val_set.size() > 0) {
            const auto [vl, va] = evaluate_loss<T>(net, val_set, cfg.loss, jobs);
            stats.val_loss = vl;
            stats.val_acc = va;
        }
        history.epochs.push_back(stats);
        if (val_set.size() > 0 && stats.val_acc >= cfg.early_stop_val_acc) {
            history.early_stopped = true;
            break;
        }
    }
    return history;
}

// Mean loss and accuracy (sample accuracy for classification, pixel accuracy
// for per-pixel losses) without touching gradients.
template <typename T>
std::pair<double, double> evaluate_loss(Net<T>& net, const TrainView& view, LossKind loss, int jobs_in) {
    const size_t n = view.size();
    const int jobs = detail::resolve_jobs(jobs_in);
    std::vector<typename Net<T>::Workspace> ws;
    for (int j = 0; j < jobs; ++j) ws.push_back(net.make_workspace());
    std::vector<double> losses(n, 0.0);
    std::vector<int64_t> corrects(n, 0);
#ifdef _OPENMP
#pragma omp parallel for num_threads(jobs) schedule(static)
#endif
    for (int64_t i = 0; i < static_cast<int64_t>(n); ++i) {
#ifdef _OPENMP
        auto& w = ws[static_cast<size_t>(omp_get_thread_num())];
#else
        auto& w = ws[0];
#endif
        net.load_input(w, (*view.images)[static_cast<size_t>(i)]);
        const auto logits = net.forward_sample(w);
        std::vector<T> scratch(logits.size());
        if (loss == LossKind::cross_entropy) {
            int pred = 0;
            losses[static_cast<size_t>(i)] = static_cast<double>(
                softmax_cross_entropy<T>(logits, (*view.labels)[static_cast<size_t>(i)], scratch, pred));
            corrects[static_cast<size_t>(i)] = pred == (*view.labels)[static_cast<size_t>(i)] ? 1 : 0;
        } else {
            int64_t correct = 0;
            losses[static_cast<size_t>(i)] = static_cast<double>(pixel_binary_cross_entropy<T>(
                logits, (*view.targets)[static_cast<size_t>(i)].pixels().data(), scratch, correct));
            corrects[static_cast<size_t>(i)] = correct;
        }
    }
    double total_loss = 0;
    int64_t total_correct = 0;
    for (size_t i = 0; i < n; ++i) {
        total_loss += losses[i];
        total_correct += corrects[i];
    }
    const int64_t units =
        loss == LossKind::cross_entropy ? static_cast<int64_t>(n) : static_cast<int64_t>(n) * net.output_n();
    return {total_loss / static_cast<double>(n), static_cast<double>(total_correct) / static_cast<double>(units)};
}

// Argmax class prediction, ties to the lowest index.
template <typename T>
int predict_class(const Net<T>& net, typename Net<T>::Workspace& ws, const BinaryImage& img) {
    net.load_input(ws, img);
    const auto logits = net.forward_sample(ws);
    int best = 0;
    for (size_t i = 1; i < logits.size(); ++i)
        if (logits[i] > logits[best]) best = static_cast<int>(i);
    return best;
}

} // namespace subit
