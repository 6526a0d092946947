#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "subit/net.hpp"
#include "subit/optim.hpp"
#include "subit/rng.hpp"

using namespace subit;

namespace {

std::vector<BinaryImage> random_images(int n, int size, double density, uint64_t seed) {
    Rng rng(seed);
    std::vector<BinaryImage> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        BinaryImage img(size, size);
        for (auto& p : img.pixels()) p = rng.next_double() < density ? 1 : 0;
        out.push_back(std::move(img));
    }
    return out;
}

// Loss of the whole (tiny) batch as a pure function of the parameters;
// the independent oracle for the backward pass.
double batch_loss(Net<double>& net, const std::vector<BinaryImage>& images, const std::vector<int>& labels) {
    auto ws = net.make_workspace();
    double total = 0;
    for (size_t i = 0; i < images.size(); ++i) {
        net.load_input(ws, images[i]);
        const auto logits = net.forward_sample(ws);
        std::vector<double> scratch(logits.size());
        int pred = 0;
        total += softmax_cross_entropy<double>(logits, labels[i], scratch, pred);
    }
    return total / static_cast<double>(images.size());
}

} // namespace

TEST_CASE("forward: zero weights give uniform softmax rows") {
    Net<float> net = make_subitizing_net<float>(64);
    std::fill(net.params().begin(), net.params().end(), 0.0f);
    auto ws = net.make_workspace();
    const auto imgs = random_images(3, 64, 0.2, 99);
    for (const auto& img : imgs) {
        net.load_input(ws, img);
        const auto logits = net.forward_sample(ws);
        REQUIRE(logits.size() == 6);
        std::vector<float> probs(6);
        softmax_row<float>(logits, probs);
        for (float p : probs) CHECK(p == doctest::Approx(1.0f / 6).epsilon(1e-5));
    }
}

TEST_CASE("forward: deterministic and shape-checked") {
    Net<float> net = make_subitizing_net<float>(64);
    net.init_params(7);
    auto ws1 = net.make_workspace();
    auto ws2 = net.make_workspace();
    const auto imgs = random_images(1, 64, 0.3, 5);
    net.load_input(ws1, imgs[0]);
    net.load_input(ws2, imgs[0]);
    const auto a = net.forward_sample(ws1);
    const auto b = net.forward_sample(ws2);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    BinaryImage wrong(32, 32);
    CHECK_THROWS_AS(net.load_input(ws1, wrong), ShapeMismatch);
}

TEST_CASE("table 1 shape algebra: 64 -> 32 -> 16 -> 8, fc input 8*8*128") {
    Net<float> net = make_subitizing_net<float>(64);
    const auto& layers = net.layers();
    // find the fc layer and check its input geometry
    bool found_fc = false;
    for (const auto& d : layers) {
        if (d.kind == Net<float>::Kind::fc && !found_fc) {
            CHECK(d.in_c == 128);
            CHECK(d.in_h == 8);
            CHECK(d.in_w == 8);
            CHECK(d.weight_count == 128 * 8 * 8 * 128);
            found_fc = true;
        }
    }
    CHECK(found_fc);
    CHECK(net.output_n() == 6);
}

TEST_CASE("softmax rows are stochastic on random nets") {
    Net<float> net = make_subitizing_net<float>(64);
    net.init_params(2024);
    auto ws = net.make_workspace();
    for (const auto& img : random_images(8, 64, 0.25, 11)) {
        net.load_input(ws, img);
        const auto logits = net.forward_sample(ws);
        std::vector<float> probs(6);
        softmax_row<float>(logits, probs);
        float sum = 0;
        for (float p : probs) {
            CHECK(p >= 0.0f);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0f) < 1e-6f);
    }
}

TEST_CASE("gradient check: analytic backward vs central differences < 1e-4") {
    // Small but representative net: conv, pool, relu, residual, fc.
    Net<double> net(1, 8, 8);
    net.conv(4, 3).relu().maxpool();
    net.residual();
    net.fc(3);
    net.init_params(31415);

    const auto images = random_images(3, 8, 0.4, 271828);
    const std::vector<int> labels = {0, 2, 1};

    // Analytic gradient of the mean batch loss.
    auto ws = net.make_workspace();
    std::fill(ws.grad.begin(), ws.grad.end(), 0.0);
    for (size_t i = 0; i < images.size(); ++i) {
        net.load_input(ws, images[i]);
        const auto logits = net.forward_sample(ws);
        std::vector<double> dlogits(logits.size());
        int pred = 0;
        softmax_cross_entropy<double>(logits, labels[i], dlogits, pred);
        for (auto& g : dlogits) g /= static_cast<double>(images.size());
        net.backward_sample(ws, dlogits.data());
    }

    Rng pick(999);
    const double h = 1e-5;
    double max_rel = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const size_t pi = static_cast<size_t>(pick.next_below(net.params().size()));
        const double orig = net.params()[pi];
        net.params()[pi] = orig + h;
        const double lp = batch_loss(net, images, labels);
        net.params()[pi] = orig - h;
        const double lm = batch_loss(net, images, labels);
        net.params()[pi] = orig;
        const double numeric = (lp - lm) / (2 * h);
        const double analytic = ws.grad[pi];
        const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    MESSAGE("max relative gradient error: " << max_rel);
    CHECK(max_rel < 1e-4);
}

TEST_CASE("gradient check: per-pixel BCE head") {
    Net<double> net = make_erosion_atom_net<double>(8, 4);
    net.init_params(777);
    const auto images = random_images(2, 8, 0.5, 3);
    const auto targets = random_images(2, 8, 0.5, 4);

    auto ws = net.make_workspace();
    std::fill(ws.grad.begin(), ws.grad.end(), 0.0);
    auto loss_fn = [&]() {
        auto w2 = net.make_workspace();
        double total = 0;
        for (size_t i = 0; i < images.size(); ++i) {
            net.load_input(w2, images[i]);
            const auto logits = net.forward_sample(w2);
            std::vector<double> scratch(logits.size());
            int64_t c = 0;
            total += pixel_binary_cross_entropy<double>(logits, targets[i].pixels().data(), scratch, c);
        }
        return total / static_cast<double>(images.size());
    };
    for (size_t i = 0; i < images.size(); ++i) {
        net.load_input(ws, images[i]);
        const auto logits = net.forward_sample(ws);
        std::vector<double> dlogits(logits.size());
        int64_t c = 0;
        pixel_binary_cross_entropy<double>(logits, targets[i].pixels().data(), dlogits, c);
        for (auto& g : dlogits) g /= static_cast<double>(images.size());
        net.backward_sample(ws, dlogits.data());
    }
    Rng pick(1001);
    const double h = 1e-5;
    double max_rel = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const size_t pi = static_cast<size_t>(pick.next_below(net.params().size()));
        const double orig = net.params()[pi];
        net.params()[pi] = orig + h;
        const double lp = loss_fn();
        net.params()[pi] = orig - h;
        const double lm = loss_fn();
        net.params()[pi] = orig;
        const double numeric = (lp - lm) / (2 * h);
        const double rel =
            std::abs(numeric - ws.grad[pi]) / std::max({std::abs(numeric), std::abs(ws.grad[pi]), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    MESSAGE("max relative gradient error (bce): " << max_rel);
    CHECK(max_rel < 1e-4);
}

TEST_CASE("training reduces loss on a separable toy problem") {
    // Two classes: nearly-empty vs nearly-full 8x8 images.
    std::vector<BinaryImage> images;
    std::vector<int> labels;
    Rng rng(52);
    for (int i = 0; i < 64; ++i) {
        const int cls = i % 2;
        BinaryImage img(8, 8);
        for (auto& p : img.pixels()) p = rng.next_double() < (cls ? 0.8 : 0.2) ? 1 : 0;
        images.push_back(std::move(img));
        labels.push_back(cls);
    }
    Net<float> net(1, 8, 8);
    net.conv(4, 3).relu().maxpool().fc(2);
    net.init_params(8);

    TrainConfig cfg;
    cfg.epochs = 12;
    cfg.batch_size = 16;
    cfg.lr = 3e-3;
    cfg.seed = 5;
    cfg.early_stop_val_acc = 2.0; // never early-stop
    TrainView view{&images, &labels, nullptr};
    const TrainHistory h = train(net, view, TrainView{}, cfg);
    REQUIRE(h.epochs.size() >= 4);
    CHECK(h.epochs.back().train_loss < h.epochs.front().train_loss);
    CHECK(h.epochs.back().train_acc > 0.9);
}

TEST_CASE("training is deterministic under a fixed seed") {
    std::vector<BinaryImage> images = random_images(32, 8, 0.4, 1);
    std::vector<int> labels;
    for (size_t i = 0; i < images.size(); ++i) labels.push_back(static_cast<int>(i % 3));
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.seed = 77;
    cfg.jobs = 1;
    cfg.early_stop_val_acc = 2.0;

    auto run = [&]() {
        Net<float> net(1, 8, 8);
        net.conv(3, 3).relu().maxpool().fc(3);
        net.init_params(4);
        TrainView view{&images, &labels, nullptr};
        train(net, view, TrainView{}, cfg);
        return net.params();
    };
    const auto a = run();
    const auto b = run();
    CHECK(a == b);
}

TEST_CASE("zero-gradient for untouched parameters") {
    // With zero upstream signal everywhere, all gradients are zero.
    Net<double> net(1, 8, 8);
    net.conv(2, 3).relu().fc(4);
    net.init_params(3);
    auto ws = net.make_workspace();
    BinaryImage img(8, 8);
    img.at(3, 3) = 1;
    net.load_input(ws, img);
    (void)net.forward_sample(ws);
    std::vector<double> dlogits(4, 0.0);
    net.backward_sample(ws, dlogits.data());
    for (double g : ws.grad) CHECK(g == 0.0);
}

TEST_CASE("save/load params round trip and spec mismatch") {
    Net<float> net = make_counting_head<float>(16);
    net.init_params(10);
    const auto dir = std::filesystem::temp_directory_path() / "subit_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / "params.bin";
    save_params(net.params(), net.spec_hash(), path);

    Net<float> same = make_counting_head<float>(16);
    same.params() = load_params(same.spec_hash(), path);
    auto ws1 = net.make_workspace();
    auto ws2 = same.make_workspace();
    BinaryImage img(16, 16);
    img.at(5, 5) = 1;
    img.at(10, 11) = 1;
    net.load_input(ws1, img);
    same.load_input(ws2, img);
    const auto a = ws1.acts[0]; // silence unused warnings by touching
    (void)a;
    const auto la = net.forward_sample(ws1);
    const auto lb = same.forward_sample(ws2);
    for (size_t i = 0; i < la.size(); ++i) CHECK(la[i] == lb[i]);

    Net<float> other = make_counting_head<float>(32);
    CHECK_THROWS_AS((void)load_params(other.spec_hash(), path), SpecMismatch);

    // Truncation: no partial state.
    std::filesystem::resize_file(path, 24);
    CHECK_THROWS_AS((void)load_params(net.spec_hash(), path), IoError);
}
