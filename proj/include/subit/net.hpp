#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>

#include "subit/image.hpp"
#include "subit/rng.hpp"
#include "subit/tensor.hpp"

namespace subit {

// Sequential CNN with a flat parameter store. Layers record offsets into the
// store, which keeps the optimizer, serialization and the spec hash trivial.
// Templated on the scalar: double for finite-difference checks, float for
// training throughput.
template <typename T>
class Net {
public:
    enum class Kind { conv, relu, maxpool, fc, residual };

    struct LayerDef {
        Kind kind{};
        int in_c = 0, in_h = 0, in_w = 0;
        int out_c = 0, out_h = 0, out_w = 0;
        int k = 0;                                  // conv kernel size
        int64_t w_off = 0, b_off = 0;               // conv/fc
        int64_t w2_off = 0, b2_off = 0;             // residual second conv
        int64_t weight_count = 0, weight2_count = 0;
    };

    Net(int in_c, int in_h, int in_w) : in_c_(in_c), in_h_(in_h), in_w_(in_w) {
        spec_ = "in:" + std::to_string(in_c) + "x" + std::to_string(in_h) + "x" + std::to_string(in_w);
    }

    Net& conv(int out_c, int k) {
        LayerDef d = next_def(Kind::conv);
        d.out_c = out_c;
        d.out_h = d.in_h;
        d.out_w = d.in_w;
        d.k = k;
        d.weight_count = static_cast<int64_t>(out_c) * d.in_c * k * k;
        d.w_off = alloc(d.weight_count);
        d.b_off = alloc(out_c);
        push(d, "conv:" + std::to_string(k) + "x" + std::to_string(out_c));
        return *this;
    }

    Net& relu() {
        LayerDef d = next_def(Kind::relu);
        d.out_c = d.in_c;
        d.out_h = d.in_h;
        d.out_w = d.in_w;
        push(d, "relu");
        return *this;
    }

    Net& maxpool() {
        LayerDef d = next_def(Kind::maxpool);
        d.out_c = d.in_c;
        d.out_h = d.in_h / 2;
        d.out_w = d.in_w / 2;
        push(d, "pool");
        return *this;
    }

    Net& fc(int out_n) {
        LayerDef d = next_def(Kind::fc);
        d.out_c = out_n;
        d.out_h = 1;
        d.out_w = 1;
        d.weight_count = static_cast<int64_t>(out_n) * d.in_c * d.in_h * d.in_w;
        d.w_off = alloc(d.weight_count);
        d.b_off = alloc(out_n);
        push(d, "fc:" + std::to_string(out_n));
        return *this;
    }

    // Two 3x3 convolutions with one inner ReLU and an identity skip.
    Net& residual() {
        LayerDef d = next_def(Kind::residual);
        d.out_c = d.in_c;
        d.out_h = d.in_h;
        d.out_w = d.in_w;
        d.k = 3;
        d.weight_count = static_cast<int64_t>(d.in_c) * d.in_c * 9;
        d.weight2_count = d.weight_count;
        d.w_off = alloc(d.weight_count);
        d.b_off = alloc(d.in_c);
        d.w2_off = alloc(d.weight2_count);
        d.b2_off = alloc(d.in_c);
        push(d, "res:3x" + std::to_string(d.in_c));
        return *this;
    }

    void init_params(uint64_t seed) {
        Rng rng(seed ^ fnv1a(spec_));
        for (const auto& d : layers_) {
            if (d.kind == Kind::conv || d.kind == Kind::fc) {
                he_init(rng, d.w_off, d.weight_count, fan_in(d));
                zero(d.b_off, d.out_c);
            } else if (d.kind == Kind::residual) {
                he_init(rng, d.w_off, d.weight_count, d.in_c * 9);
                zero(d.b_off, d.in_c);
                he_init(rng, d.w2_off, d.weight2_count, d.in_c * 9);
                zero(d.b2_off, d.in_c);
            }
        }
    }

    const std::string& spec_string() const { return spec_; }
    uint64_t spec_hash() const { return fnv1a(spec_); }
    int64_t param_count() const { return static_cast<int64_t>(params_.size()); }
    std::vector<T>& params() { return params_; }
    const std::vector<T>& params() const { return params_; }
    const std::vector<LayerDef>& layers() const { return layers_; }
    int input_c() const { return in_c_; }
    int input_h() const { return in_h_; }
    int input_w() const { return in_w_; }
    int output_n() const {
        const auto& d = layers_.back();
        return d.out_c * d.out_h * d.out_w;
    }

    // Per-sample scratch: activations at every layer boundary plus layer
    // internals needed by backward. One workspace per thread.
    struct Workspace {
        std::vector<std::vector<T>> acts;     // acts[l] = output of layer l-1 (acts[0] = input)
        std::vector<std::vector<int>> pool_idx;
        std::vector<std::vector<T>> res_pre;  // residual: first conv pre-activation
        std::vector<std::vector<T>> res_mid;  // residual: relu output
        // im2col results cached by forward_sample and reused by the
        // immediately following backward_sample on the same sample.
        std::vector<std::vector<T>> col_cache;  // conv & residual-first
        std::vector<std::vector<T>> col_cache2; // residual-second
        std::vector<T> dcol, dx, dy;
        std::vector<T> res_mid_grad;
        std::vector<T> grad; // flat, aligned with params
    };

    Workspace make_workspace() const {
        Workspace ws;
        ws.acts.resize(layers_.size() + 1);
        ws.acts[0].resize(static_cast<size_t>(in_c_) * in_h_ * in_w_);
        ws.pool_idx.resize(layers_.size());
        ws.res_pre.resize(layers_.size());
        ws.res_mid.resize(layers_.size());
        ws.col_cache.resize(layers_.size());
        ws.col_cache2.resize(layers_.size());
        size_t max_col = 1;
        for (size_t l = 0; l < layers_.size(); ++l) {
            const auto& d = layers_[l];
            ws.acts[l + 1].resize(static_cast<size_t>(d.out_c) * d.out_h * d.out_w);
            if (d.kind == Kind::maxpool) ws.pool_idx[l].resize(ws.acts[l + 1].size());
            if (d.kind == Kind::conv) {
                const size_t col_n = static_cast<size_t>(d.in_c) * d.k * d.k * d.in_h * d.in_w;
                ws.col_cache[l].resize(col_n);
                max_col = std::max(max_col, col_n);
            }
            if (d.kind == Kind::residual) {
                ws.res_pre[l].resize(ws.acts[l + 1].size());
                ws.res_mid[l].resize(ws.acts[l + 1].size());
                const size_t col_n = static_cast<size_t>(d.in_c) * 9 * d.in_h * d.in_w;
                ws.col_cache[l].resize(col_n);
                ws.col_cache2[l].resize(col_n);
                max_col = std::max(max_col, col_n);
            }
        }
        ws.dcol.resize(max_col);
        size_t max_act = 0;
        for (const auto& a : ws.acts) max_act = std::max(max_act, a.size());
        ws.dx.resize(max_act);
        ws.dy.resize(max_act);
        ws.grad.assign(params_.size(), T(0));
        return ws;
    }

    // Forward one sample already written to ws.acts[0]; returns the logits.
    std::span<const T> forward_sample(Workspace& ws) const {
        for (size_t l = 0; l < layers_.size(); ++l) {
            const auto& d = layers_[l];
            const T* x = ws.acts[l].data();
            T* y = ws.acts[l + 1].data();
            switch (d.kind) {
                case Kind::conv:
                    im2col(d, x, ws.col_cache[l].data());
                    conv_core_forward(d, ws.col_cache[l].data(), y, d.w_off, d.b_off, d.out_c);
                    break;
                case Kind::relu:
                    for (size_t i = 0; i < ws.acts[l + 1].size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
                    break;
                case Kind::maxpool: pool_forward(d, x, y, ws.pool_idx[l].data()); break;
                case Kind::fc: fc_forward(d, x, y); break;
                case Kind::residual: residual_forward(d, x, y, ws, l); break;
            }
        }
        return {ws.acts.back().data(), ws.acts.back().size()};
    }

    // Backward from dlogits (written to ws.dy) accumulating into ws.grad.
    void backward_sample(Workspace& ws, const T* dlogits) const {
        std::copy(dlogits, dlogits + ws.acts.back().size(), ws.dy.begin());
        for (size_t li = layers_.size(); li-- > 0;) {
            const auto& d = layers_[li];
            const T* x = ws.acts[li].data();
            const size_t in_n = ws.acts[li].size();
            std::fill(ws.dx.begin(), ws.dx.begin() + static_cast<long>(in_n), T(0));
            switch (d.kind) {
                case Kind::conv:
                    conv_core_backward(d, ws.col_cache[li].data(), ws.dy.data(), ws.dx.data(), ws, d.w_off,
                                       d.b_off, d.out_c);
                    break;
                case Kind::relu: {
                    const T* y = ws.acts[li + 1].data();
                    for (size_t i = 0; i < in_n; ++i) ws.dx[i] = y[i] > T(0) ? ws.dy[i] : T(0);
                    break;
                }
                case Kind::maxpool: {
                    const size_t out_n = ws.acts[li + 1].size();
                    for (size_t i = 0; i < out_n; ++i) ws.dx[static_cast<size_t>(ws.pool_idx[li][i])] += ws.dy[i];
                    break;
                }
                case Kind::fc: fc_backward(d, x, ws); break;
                case Kind::residual: residual_backward(d, x, ws, li); break;
            }
            std::swap(ws.dx, ws.dy);
        }
    }

    void load_input(Workspace& ws, const BinaryImage& img) const {
        if (img.width() != in_w_ || img.height() != in_h_ || in_c_ != 1)
            throw ShapeMismatch("input image does not match the network input");
        for (size_t i = 0; i < ws.acts[0].size(); ++i) ws.acts[0][i] = static_cast<T>(img.pixels()[i]);
    }

private:
    LayerDef next_def(Kind kind) const {
        LayerDef d;
        d.kind = kind;
        if (layers_.empty()) {
            d.in_c = in_c_;
            d.in_h = in_h_;
            d.in_w = in_w_;
        } else {
            const auto& p = layers_.back();
            d.in_c = p.out_c;
            d.in_h = p.out_h;
            d.in_w = p.out_w;
        }
        return d;
    }

    int64_t alloc(int64_t n) {
        const int64_t off = static_cast<int64_t>(params_.size());
        params_.resize(params_.size() + static_cast<size_t>(n), T(0));
        return off;
    }

    void push(const LayerDef& d, const std::string& tag) {
        layers_.push_back(d);
        spec_ += ";" + tag;
    }

    static int fan_in(const LayerDef& d) {
        return d.kind == Kind::fc ? d.in_c * d.in_h * d.in_w : d.in_c * d.k * d.k;
    }

    void he_init(Rng& rng, int64_t off, int64_t n, int fan) {
        const double limit = std::sqrt(6.0 / fan);
        for (int64_t i = 0; i < n; ++i) params_[static_cast<size_t>(off + i)] = static_cast<T>(rng.uniform(-limit, limit));
    }

    void zero(int64_t off, int64_t n) {
        for (int64_t i = 0; i < n; ++i) params_[static_cast<size_t>(off + i)] = T(0);
    }

    // ---- convolution (stride 1, same padding, k odd) ----

    void im2col(const LayerDef& d, const T* x, T* col) const {
        const int h = d.in_h, w = d.in_w, k = d.k, pad = d.k / 2;
        const int hw = h * w;
        for (int ic = 0; ic < d.in_c; ++ic) {
            const T* xc = x + static_cast<int64_t>(ic) * hw;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    T* row = col + (static_cast<int64_t>(ic) * k * k + ky * k + kx) * hw;
                    for (int y = 0; y < h; ++y) {
                        const int sy = y + ky - pad;
                        if (sy < 0 || sy >= h) {
                            std::fill(row + y * w, row + (y + 1) * w, T(0));
                            continue;
                        }
                        const T* src = xc + sy * w;
                        for (int xx = 0; xx < w; ++xx) {
                            const int sx = xx + kx - pad;
                            row[y * w + xx] = (sx < 0 || sx >= w) ? T(0) : src[sx];
                        }
                    }
                }
            }
        }
    }

    // y[oc] = b[oc] + sum_t w[oc][t] * col[t], with 4-way output blocking so
    // each streamed col row feeds four accumulating rows.
    void conv_core_forward(const LayerDef& d, const T* col, T* y, int64_t w_off, int64_t b_off,
                           int out_c) const {
        const int hw = d.in_h * d.in_w;
        const int kk = d.in_c * d.k * d.k;
        const T* wp = params_.data() + w_off;
        const T* bp = params_.data() + b_off;
        int oc = 0;
        for (; oc + 4 <= out_c; oc += 4) {
            T* y0 = y + static_cast<int64_t>(oc) * hw;
            T* y1 = y0 + hw;
            T* y2 = y1 + hw;
            T* y3 = y2 + hw;
            std::fill(y0, y0 + hw, bp[oc]);
            std::fill(y1, y1 + hw, bp[oc + 1]);
            std::fill(y2, y2 + hw, bp[oc + 2]);
            std::fill(y3, y3 + hw, bp[oc + 3]);
            const T* w0 = wp + static_cast<int64_t>(oc) * kk;
            for (int t = 0; t < kk; ++t) {
                const T a0 = w0[t], a1 = w0[kk + t], a2 = w0[2 * kk + t], a3 = w0[3 * kk + t];
                const T* c = col + static_cast<int64_t>(t) * hw;
                for (int p = 0; p < hw; ++p) {
                    const T cv = c[p];
                    y0[p] += a0 * cv;
                    y1[p] += a1 * cv;
                    y2[p] += a2 * cv;
                    y3[p] += a3 * cv;
                }
            }
        }
        for (; oc < out_c; ++oc) {
            T* yo = y + static_cast<int64_t>(oc) * hw;
            std::fill(yo, yo + hw, bp[oc]);
            const T* wrow = wp + static_cast<int64_t>(oc) * kk;
            for (int t = 0; t < kk; ++t) {
                const T a = wrow[t];
                const T* c = col + static_cast<int64_t>(t) * hw;
                for (int p = 0; p < hw; ++p) yo[p] += a * c[p];
            }
        }
    }

    // Consumes the cached im2col of the layer input: accumulates dW/db and
    // scatters dcol back into dx.
    void conv_core_backward(const LayerDef& d, const T* col, const T* dy, T* dx, Workspace& ws, int64_t w_off,
                            int64_t b_off, int out_c) const {
        const int hw = d.in_h * d.in_w;
        const int kk = d.in_c * d.k * d.k;
        T* gw = ws.grad.data() + w_off;
        T* gb = ws.grad.data() + b_off;
        const T* wp = params_.data() + w_off;
        for (int oc = 0; oc < out_c; ++oc) {
            const T* dyo = dy + static_cast<int64_t>(oc) * hw;
            T acc = T(0);
            for (int p = 0; p < hw; ++p) acc += dyo[p];
            gb[oc] += acc;
        }
        // dW blocked over output channels so each col row is streamed once
        // per block of four dy rows (kept hot) instead of once per channel.
        int ob = 0;
        for (; ob + 4 <= out_c; ob += 4) {
            const T* g0 = dy + static_cast<int64_t>(ob) * hw;
            const T* g1 = g0 + hw;
            const T* g2 = g1 + hw;
            const T* g3 = g2 + hw;
            for (int t = 0; t < kk; ++t) {
                const T* c = col + static_cast<int64_t>(t) * hw;
                T d0 = T(0), d1 = T(0), d2 = T(0), d3 = T(0);
                for (int p = 0; p < hw; ++p) {
                    const T cv = c[p];
                    d0 += g0[p] * cv;
                    d1 += g1[p] * cv;
                    d2 += g2[p] * cv;
                    d3 += g3[p] * cv;
                }
                gw[static_cast<int64_t>(ob) * kk + t] += d0;
                gw[static_cast<int64_t>(ob + 1) * kk + t] += d1;
                gw[static_cast<int64_t>(ob + 2) * kk + t] += d2;
                gw[static_cast<int64_t>(ob + 3) * kk + t] += d3;
            }
        }
        for (; ob < out_c; ++ob) {
            const T* dyo = dy + static_cast<int64_t>(ob) * hw;
            T* gwrow = gw + static_cast<int64_t>(ob) * kk;
            for (int t = 0; t < kk; ++t) {
                const T* c = col + static_cast<int64_t>(t) * hw;
                T dot = T(0);
                for (int p = 0; p < hw; ++p) dot += dyo[p] * c[p];
                gwrow[t] += dot;
            }
        }
        // dcol = W^T * dy fused with the col2im scatter, tiled over a block
        // of col rows so dy stays cache-resident while each tile of drow
        // accumulators stays hot.
        const int h = d.in_h, w = d.in_w, k = d.k, pad = d.k / 2;
        constexpr int kTile = 8;
        T* drows = ws.dcol.data(); // kTile rows of hw
        for (int t0 = 0; t0 < kk; t0 += kTile) {
            const int tn = std::min(kTile, kk - t0);
            std::fill(drows, drows + static_cast<int64_t>(tn) * hw, T(0));
            int oc = 0;
            for (; oc + 4 <= out_c; oc += 4) {
                const T* g0 = dy + static_cast<int64_t>(oc) * hw;
                const T* g1 = g0 + hw;
                const T* g2 = g1 + hw;
                const T* g3 = g2 + hw;
                for (int ti = 0; ti < tn; ++ti) {
                    const int t = t0 + ti;
                    const T a0 = wp[static_cast<int64_t>(oc) * kk + t];
                    const T a1 = wp[static_cast<int64_t>(oc + 1) * kk + t];
                    const T a2 = wp[static_cast<int64_t>(oc + 2) * kk + t];
                    const T a3 = wp[static_cast<int64_t>(oc + 3) * kk + t];
                    T* drow = drows + static_cast<int64_t>(ti) * hw;
                    for (int p = 0; p < hw; ++p)
                        drow[p] += a0 * g0[p] + a1 * g1[p] + a2 * g2[p] + a3 * g3[p];
                }
            }
            for (; oc < out_c; ++oc) {
                const T* dyo = dy + static_cast<int64_t>(oc) * hw;
                for (int ti = 0; ti < tn; ++ti) {
                    const T a = wp[static_cast<int64_t>(oc) * kk + t0 + ti];
                    T* drow = drows + static_cast<int64_t>(ti) * hw;
                    for (int p = 0; p < hw; ++p) drow[p] += a * dyo[p];
                }
            }
            for (int ti = 0; ti < tn; ++ti) {
                const int t = t0 + ti;
                const int ic = t / (k * k);
                const int ky = (t / k) % k;
                const int kx = t % k;
                const T* drow = drows + static_cast<int64_t>(ti) * hw;
                T* xc = dx + static_cast<int64_t>(ic) * hw;
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky - pad;
                    if (sy < 0 || sy >= h) continue;
                    T* dst = xc + sy * w;
                    const T* src = drow + y * w;
                    const int x0 = std::max(0, pad - kx);
                    const int x1 = std::min(w, w + pad - kx);
                    for (int xx = x0; xx < x1; ++xx) dst[xx + kx - pad] += src[xx];
                }
            }
        }
    }

    void pool_forward(const LayerDef& d, const T* x, T* y, int* idx) const {
        const int oh = d.out_h, ow = d.out_w, w = d.in_w;
        for (int c = 0; c < d.in_c; ++c) {
            const T* xc = x + static_cast<int64_t>(c) * d.in_h * d.in_w;
            T* yc = y + static_cast<int64_t>(c) * oh * ow;
            int* ic = idx + static_cast<int64_t>(c) * oh * ow;
            for (int yy = 0; yy < oh; ++yy) {
                for (int xx = 0; xx < ow; ++xx) {
                    const int base = (2 * yy) * w + 2 * xx;
                    int best = base;
                    T v = xc[base];
                    if (xc[base + 1] > v) { v = xc[base + 1]; best = base + 1; }
                    if (xc[base + w] > v) { v = xc[base + w]; best = base + w; }
                    if (xc[base + w + 1] > v) { v = xc[base + w + 1]; best = base + w + 1; }
                    yc[yy * ow + xx] = v;
                    ic[yy * ow + xx] = static_cast<int>(c * d.in_h * d.in_w + best);
                }
            }
        }
    }

    void fc_forward(const LayerDef& d, const T* x, T* y) const {
        const int in_n = d.in_c * d.in_h * d.in_w;
        const T* wp = params_.data() + d.w_off;
        const T* bp = params_.data() + d.b_off;
        for (int o = 0; o < d.out_c; ++o) {
            const T* wrow = wp + static_cast<int64_t>(o) * in_n;
            T acc = bp[o];
            for (int i = 0; i < in_n; ++i) acc += wrow[i] * x[i];
            y[o] = acc;
        }
    }

    void fc_backward(const LayerDef& d, const T* x, Workspace& ws) const {
        const int in_n = d.in_c * d.in_h * d.in_w;
        const T* dy = ws.dy.data();
        const T* wp = params_.data() + d.w_off;
        T* gw = ws.grad.data() + d.w_off;
        T* gb = ws.grad.data() + d.b_off;
        for (int o = 0; o < d.out_c; ++o) {
            const T g = dy[o];
            gb[o] += g;
            T* gwrow = gw + static_cast<int64_t>(o) * in_n;
            const T* wrow = wp + static_cast<int64_t>(o) * in_n;
            if (g != T(0)) {
                for (int i = 0; i < in_n; ++i) {
                    gwrow[i] += g * x[i];
                    ws.dx[static_cast<size_t>(i)] += g * wrow[i];
                }
            }
        }
    }

    void residual_forward(const LayerDef& d, const T* x, T* y, Workspace& ws, size_t l) const {
        LayerDef inner = d;
        inner.out_c = d.in_c;
        im2col(inner, x, ws.col_cache[l].data());
        conv_core_forward(inner, ws.col_cache[l].data(), ws.res_pre[l].data(), d.w_off, d.b_off, d.in_c);
        auto& mid = ws.res_mid[l];
        for (size_t i = 0; i < mid.size(); ++i) {
            const T v = ws.res_pre[l][i];
            mid[i] = v > T(0) ? v : T(0);
        }
        im2col(inner, mid.data(), ws.col_cache2[l].data());
        conv_core_forward(inner, ws.col_cache2[l].data(), y, d.w2_off, d.b2_off, d.in_c);
        const size_t n = mid.size();
        for (size_t i = 0; i < n; ++i) y[i] += x[i];
    }

    void residual_backward(const LayerDef& d, const T* /*x*/, Workspace& ws, size_t l) const {
        LayerDef inner = d;
        inner.out_c = d.in_c;
        const size_t n = ws.res_mid[l].size();
        // skip connection
        for (size_t i = 0; i < n; ++i) ws.dx[i] += ws.dy[i];
        // through conv2
        std::vector<T>& dmid = ws.res_mid_grad;
        dmid.assign(n, T(0));
        conv_core_backward(inner, ws.col_cache2[l].data(), ws.dy.data(), dmid.data(), ws, d.w2_off, d.b2_off,
                           d.in_c);
        // inner relu
        for (size_t i = 0; i < n; ++i)
            if (ws.res_pre[l][i] <= T(0)) dmid[i] = T(0);
        // through conv1
        conv_core_backward(inner, ws.col_cache[l].data(), dmid.data(), ws.dx.data(), ws, d.w_off, d.b_off,
                           d.in_c);
    }

    int in_c_, in_h_, in_w_;
    std::vector<LayerDef> layers_;
    std::vector<T> params_;
    std::string spec_;
};

// Softmax cross-entropy on a logits row; returns the loss, fills dlogits and
// the argmax prediction (ties resolved to the lowest index).
template <typename T>
T softmax_cross_entropy(std::span<const T> logits, int label, std::span<T> dlogits, int& pred) {
    const size_t n = logits.size();
    T mx = logits[0];
    pred = 0;
    for (size_t i = 1; i < n; ++i)
        if (logits[i] > mx) { mx = logits[i]; pred = static_cast<int>(i); }
    T sum = T(0);
    for (size_t i = 0; i < n; ++i) sum += std::exp(logits[i] - mx);
    const T logsum = std::log(sum) + mx;
    for (size_t i = 0; i < n; ++i) {
        const T p = std::exp(logits[i] - logsum);
        dlogits[i] = p - (static_cast<int>(i) == label ? T(1) : T(0));
    }
    return logsum - logits[static_cast<size_t>(label)];
}

template <typename T>
void softmax_row(std::span<const T> logits, std::span<T> probs) {
    T mx = logits[0];
    for (size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
    T sum = T(0);
    for (size_t i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - mx);
    for (size_t i = 0; i < logits.size(); ++i) probs[i] = std::exp(logits[i] - mx) / sum;
}

// Per-pixel binary cross-entropy with logits; returns mean loss over pixels,
// fills dlogits (already divided by the pixel count) and counts correct
// pixels at the 0.5 decision threshold.
template <typename T>
T pixel_binary_cross_entropy(std::span<const T> logits, const uint8_t* target, std::span<T> dlogits,
                             int64_t& correct) {
    const size_t n = logits.size();
    T loss = T(0);
    correct = 0;
    const T inv = T(1) / static_cast<T>(n);
    for (size_t i = 0; i < n; ++i) {
        const T z = logits[i];
        const T t = static_cast<T>(target[i]);
        // log(1+exp(-|z|)) form for stability
        const T abs_z = z >= T(0) ? z : -z;
        loss += std::max(z, T(0)) - z * t + std::log1p(std::exp(-abs_z));
        const T p = T(1) / (T(1) + std::exp(-z));
        dlogits[i] = (p - t) * inv;
        correct += ((z >= T(0)) == (target[i] != 0)) ? 1 : 0;
    }
    return loss * inv;
}

// Table 1 subitizing network for a square input.
template <typename T>
Net<T> make_subitizing_net(int input_size) {
    Net<T> net(1, input_size, input_size);
    net.conv(32, 7).relu().maxpool();
    net.conv(32, 5).relu().maxpool();
    net.conv(64, 3).relu();
    net.conv(64, 3).relu();
    net.conv(128, 3).relu().maxpool();
    net.fc(128).relu();
    net.fc(6);
    return net;
}

// Fully convolutional erosion atom: lift, 4 residual blocks, project to
// per-pixel logits.
template <typename T>
Net<T> make_erosion_atom_net(int input_size, int channels = 12) {
    Net<T> net(1, input_size, input_size);
    net.conv(channels, 3).relu();
    net.residual().residual().residual().residual();
    net.conv(1, 3);
    return net;
}

// Counting head applied to shrink fixed points.
template <typename T>
Net<T> make_counting_head(int input_size) {
    Net<T> net(1, input_size, input_size);
    net.fc(32).relu();
    net.fc(6);
    return net;
}

void save_params(const std::vector<float>& params, uint64_t spec_hash, const std::filesystem::path& path);
std::vector<float> load_params(uint64_t expected_spec_hash, const std::filesystem::path& path);

} // namespace subit
