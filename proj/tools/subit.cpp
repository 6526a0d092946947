#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "subit/confusion.hpp"
#include "subit/dataset.hpp"
#include "subit/engine_verify.hpp"
#include "subit/errors.hpp"
#include "subit/experiments.hpp"
#include "subit/morpho.hpp"
#include "subit/topology.hpp"

using namespace subit;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDomain = 2;
constexpr int kExitIo = 3;

KernelBank bank_from_option(const std::string& bank_path) {
    return bank_path.empty() ? default_kernel_bank() : load_kernel_bank(bank_path);
}

Config config_from_option(const std::string& config_path) {
    return config_path.empty() ? Config{} : Config::load(config_path);
}

void stamp_run(const fs::path& out, const Config& cfg, uint64_t seed) {
    fs::create_directories(out);
    std::ofstream f(out / "run.json");
    nlohmann::json j;
    j["seed"] = seed;
    j["config_hash"] = cfg.hash();
    j["config"] = cfg.canonical();
    f << j.dump(1, '\t') << '\n';
}

int cmd_generate(const std::string& family_name, int per_class, uint64_t seed, const std::string& normalize,
                 int image_size, bool boundary_maps, const fs::path& out, const Config& cfg) {
    const Family family = family_from_string(family_name);
    auto scenes = generate_scenes(family, per_class, seed, image_size);
    NormalizationMode mode = NormalizationMode::none;
    Rng norm_rng(seed ^ 0x4e4f524dull);
    if (normalize == "area") {
        normalize_total_area(scenes, norm_rng);
        mode = NormalizationMode::area_independent;
    } else if (normalize == "edge") {
        normalize_edge_count(scenes, norm_rng);
        mode = NormalizationMode::edge_count_independent;
    } else if (normalize != "none") {
        throw ConfigError("--normalize must be none, area or edge");
    }
    Dataset ds = boundary_maps
                     ? build_dataset(scenes, seed, mode, [](const BinaryImage& i) { return to_boundary(i); })
                     : build_dataset(scenes, seed, mode);
    write_dataset(ds, out);
    stamp_run(out, cfg, seed);
    std::cout << "wrote " << ds.images.size() << " images to " << out << "\n";
    return kExitOk;
}

int cmd_subitize(const std::string& target, const std::string& bank_path, bool strict, bool lenient) {
    const KernelBank bank = bank_from_option(bank_path);
    const bool strict_mode = strict || !lenient; // strict is the default
    std::vector<fs::path> files;
    if (fs::is_directory(target)) {
        for (const auto& e : fs::directory_iterator(target))
            if (e.path().extension() == ".pgm") files.push_back(e.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(target);
    }
    if (files.empty()) throw IoError("no .pgm files under " + target);
    for (const auto& f : files) {
        const BinaryImage img = polarity_normalize(read_pgm(f));
        const int64_t count = subitize(img, bank, strict_mode);
        if (files.size() == 1) std::cout << count << "\n";
        else std::cout << f.filename().string() << "\t" << count << "\n";
    }
    return kExitOk;
}

int cmd_verify(const std::string& bank_path, int randomized, uint64_t seed) {
    const KernelBank bank = bank_from_option(bank_path);
    const VerifyResult local = verify_local_safety(bank);
    std::cout << (local.ok() ? "PASS" : "FAIL") << " local safety (" << local.checked << " configurations)\n";
    const VerifyResult ex = verify_exhaustive_4x4(bank);
    std::cout << (ex.ok() ? "PASS" : "FAIL") << " " << (ex.checked - ex.failures) << "/" << ex.checked
              << " exhaustive 4x4\n";
    const VerifyResult rnd = verify_randomized(bank, randomized, seed);
    std::cout << (rnd.ok() ? "PASS" : "FAIL") << " " << (rnd.checked - rnd.failures) << "/" << rnd.checked
              << " randomized (max " << rnd.max_cycles_seen << " cycles)\n";
    for (const auto& note : local.failure_notes) std::cout << "  " << note << "\n";
    for (const auto& note : ex.failure_notes) std::cout << "  " << note << "\n";
    for (const auto& note : rnd.failure_notes) std::cout << "  " << note << "\n";
    return local.ok() && ex.ok() && rnd.ok() ? kExitOk : kExitDomain;
}

int cmd_train(const fs::path& dataset_dir, const fs::path& out, const Config& cfg, uint64_t seed, int jobs) {
    const Dataset ds = read_dataset(dataset_dir);
    const int image_size = ds.images.empty() ? 64 : ds.images.front().width();

    std::vector<int> labels;
    labels.reserve(ds.manifest.entries.size());
    for (const auto& e : ds.manifest.entries) labels.push_back(e.label - 1);

    // Holdout: every 10th image.
    std::vector<BinaryImage> train_images, val_images;
    std::vector<int> train_labels, val_labels;
    for (size_t i = 0; i < ds.images.size(); ++i) {
        if (i % 10 == 9) {
            val_images.push_back(ds.images[i]);
            val_labels.push_back(labels[i]);
        } else {
            train_images.push_back(ds.images[i]);
            train_labels.push_back(labels[i]);
        }
    }

    Net<float> net = make_subitizing_net<float>(image_size);
    net.init_params(seed);
    TrainConfig tc;
    tc.lr = cfg.get_double("train.lr", 1e-3);
    tc.batch_size = static_cast<int>(cfg.get_int("train.batch_size", 64));
    tc.epochs = static_cast<int>(cfg.get_int("train.epochs", 10));
    tc.seed = seed;
    tc.jobs = jobs;
    tc.early_stop_val_acc = cfg.get_double("train.early_stop_val_acc", 0.995);

    TrainView train_view{&train_images, &train_labels, nullptr};
    TrainView val_view{&val_images, &val_labels, nullptr};
    const TrainHistory history = train(net, train_view, val_view, tc);

    fs::create_directories(out);
    save_params(net.params(), net.spec_hash(), out / "params.bin");
    nlohmann::json j;
    j["spec"] = net.spec_string();
    j["seed"] = seed;
    j["config_hash"] = cfg.hash();
    j["params_hash"] = hash_params(net.params());
    j["early_stopped"] = history.early_stopped;
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : history.epochs)
        epochs.push_back({{"train_loss", e.train_loss},
                          {"train_acc", e.train_acc},
                          {"val_loss", e.val_loss},
                          {"val_acc", e.val_acc}});
    j["epochs"] = epochs;
    std::ofstream f(out / "history.json");
    f << j.dump(1, '\t') << '\n';
    stamp_run(out, cfg, seed);
    std::cout << "trained " << history.epochs.size() << " epochs, final val_acc="
              << (history.epochs.empty() ? 0.0 : history.epochs.back().val_acc) << "\n";
    return kExitOk;
}

int cmd_battery(const fs::path& out, const Config& cfg, uint64_t seed, int jobs) {
    BatterySettings s = BatterySettings::from_config(cfg);
    if (seed != 0) s.seed = seed;
    if (jobs != 0) s.jobs = jobs;
    const KernelBank bank = bank_from_option(cfg.get_string("battery.kernel_bank", ""));
    fs::create_directories(out);
    stamp_run(out, cfg, s.seed);

    nlohmann::json summary;
    summary["seed"] = s.seed;
    summary["config_hash"] = cfg.hash();

    // Deterministic engine over the probe families first.
    {
        std::vector<BinaryImage> images;
        std::vector<int> labels;
        Rng master(s.seed ^ 0x656e67ull);
        uint64_t idx = 0;
        for (int n = 1; n <= 6; ++n)
            for (int i = 0; i < std::max(50, s.test_per_class / 5); ++i) {
                Rng rng = master.spawn(idx++);
                images.push_back(rasterize(sample_training_scene(n, Family::mixed_solid_shapes, rng, s.image_size)));
                labels.push_back(n);
            }
        const ConfusionMatrix cm = evaluate(
            [&](const BinaryImage& img) { return static_cast<int>(subitize(polarity_normalize(img), bank)); },
            images, labels);
        auto rep = make_report("engine_mixed_scenes", s.seed, 0, cm, "");
        emit_report(rep, out / "engine_mixed_scenes");
        summary["engine_mean_diagonal"] = rep.mean_diagonal;
    }

    const int n_seeds = static_cast<int>(cfg.get_int("battery.training_seeds", 3));
    nlohmann::json exp_json = nlohmann::json::array();
    for (int si = 0; si < n_seeds; ++si) {
        const uint64_t run_seed = s.seed + static_cast<uint64_t>(si) * 1000003ull;
        std::cout << "[battery] training baseline classifier, seed " << run_seed << "\n";
        const TrainedClassifier model = train_baseline_classifier(s, run_seed);
        nlohmann::json run;
        run["seed"] = run_seed;
        run["val_acc"] = model.history.epochs.empty() ? 0.0 : model.history.epochs.back().val_acc;
        for (int which = 1; which <= 4; ++which) {
            const ExperimentReport rep = run_experiment(which, model, s, run_seed);
            emit_report(rep, out / ("seed" + std::to_string(si)) / rep.id);
            run[rep.id] = {{"mean_diagonal", rep.mean_diagonal}, {"signed_error", rep.signed_error}};
            std::cout << "[battery]   " << rep.id << ": diag=" << rep.mean_diagonal
                      << " signed=" << rep.signed_error << "\n";
        }
        exp_json.push_back(run);
    }
    summary["experiments"] = exp_json;

    std::cout << "[battery] boundary regime\n";
    const BoundaryRegimeResult boundary = run_boundary_regime(s, s.seed);
    emit_report(boundary.iid, out / "boundary" / "iid");
    emit_report(boundary.scaled_up, out / "boundary" / "scaled_up");
    emit_report(boundary.scaled_down, out / "boundary" / "scaled_down");
    summary["boundary"] = {{"train_edge_corr", boundary.train_edge_corr},
                           {"iid_mean_diagonal", boundary.iid.mean_diagonal},
                           {"scaled_up_signed_error", boundary.scaled_up.signed_error},
                           {"scaled_down_signed_error", boundary.scaled_down.signed_error}};

    std::cout << "[battery] section 6 composition\n";
    const TrainedClassifier blackbox = train_baseline_classifier(s, s.seed ^ 0xbbull);
    const Section6Result s6 = run_section6_pipeline(s, s.seed, bank, blackbox);
    emit_report(s6.composed_shape, out / "section6" / "composed_shape");
    emit_report(s6.composed_up, out / "section6" / "composed_up");
    emit_report(s6.composed_down, out / "section6" / "composed_down");
    emit_report(s6.blackbox_shape, out / "section6" / "blackbox_shape");
    emit_report(s6.blackbox_up, out / "section6" / "blackbox_up");
    emit_report(s6.blackbox_down, out / "section6" / "blackbox_down");
    summary["section6"] = {{"erosion_pixel_accuracy", s6.erosion_pixel_accuracy},
                           {"reduction_pixel_accuracy", s6.reduction_pixel_accuracy},
                           {"counting_head_accuracy", s6.counting_head_accuracy},
                           {"composed_shape", s6.composed_shape.mean_diagonal},
                           {"composed_up", s6.composed_up.mean_diagonal},
                           {"composed_down", s6.composed_down.mean_diagonal},
                           {"blackbox_shape", s6.blackbox_shape.mean_diagonal},
                           {"blackbox_up", s6.blackbox_up.mean_diagonal},
                           {"blackbox_down", s6.blackbox_down.mean_diagonal}};

    std::cout << "[battery] kernel learning study\n";
    const KernelStudyResult study = run_kernel_learning_study(s, s.seed, bank);
    {
        fs::create_directories(out / "kernel_study");
        std::ofstream f(out / "kernel_study" / "trajectories.csv");
        f << study.trajectories_csv;
    }
    summary["kernel_study"] = {
        {"random_oscillation", study.random_init.oscillation_fraction},
        {"near_oscillation", study.near_init.oscillation_fraction},
        {"near_final_distance", study.near_init.trajectory.back().distance_to_reference},
        {"equivalence", std::to_string(study.equivalence_matches) + "/" +
                            std::to_string(study.equivalence_images)}};

    std::ofstream f(out / "battery_summary.json");
    f << summary.dump(1, '\t') << '\n';
    std::cout << "[battery] summary written to " << (out / "battery_summary.json") << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"subitizing laboratory: morphological engine, stimulus generator, experiment battery"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "INI-style configuration file")->capture_default_str();

    // generate
    auto* gen = app.add_subcommand("generate", "generate a stimulus dataset");
    std::string g_family = "baseline_circles";
    int g_per_class = 100;
    uint64_t g_seed = 1;
    std::string g_normalize = "none";
    int g_image_size = 64;
    bool g_boundary = false;
    std::string g_out = "dataset";
    gen->add_option("--family", g_family, "stimulus family")->capture_default_str();
    gen->add_option("--per-class", g_per_class, "scenes per class (labels 1..6)")->capture_default_str();
    gen->add_option("--seed", g_seed, "global seed")->capture_default_str();
    gen->add_option("--normalize", g_normalize, "none|area|edge")->capture_default_str();
    gen->add_option("--image-size", g_image_size, "canvas size in pixels")->capture_default_str();
    gen->add_flag("--boundary-maps", g_boundary, "store boundary maps instead of raw scenes");
    gen->add_option("--out", g_out, "output directory")->capture_default_str();

    // subitize
    auto* sub = app.add_subcommand("subitize", "count objects in PGM images with the deterministic engine");
    std::string s_target;
    std::string s_bank;
    bool s_strict = false;
    bool s_lenient = false;
    sub->add_option("target", s_target, "PGM file or directory")->required();
    sub->add_option("--bank", s_bank, "kernel bank file (default: built-in bank)");
    sub->add_flag("--strict", s_strict, "refuse inputs with holes (default)");
    sub->add_flag("--lenient", s_lenient, "count hole-bearing inputs anyway");

    // train
    auto* tr = app.add_subcommand("train", "train the subitizing network on a dataset directory");
    std::string t_dataset;
    std::string t_out = "model";
    uint64_t t_seed = 1;
    int t_jobs = 0;
    tr->add_option("dataset", t_dataset, "dataset directory (manifest.json + PGMs)")->required();
    tr->add_option("--out", t_out, "output directory")->capture_default_str();
    tr->add_option("--seed", t_seed, "training seed")->capture_default_str();
    tr->add_option("--jobs", t_jobs, "worker threads (0 = logical cores)")->capture_default_str();

    // battery
    auto* bat = app.add_subcommand("battery", "full reproduction pipeline with reports");
    std::string b_out = "battery";
    uint64_t b_seed = 0;
    int b_jobs = 0;
    bat->add_option("--out", b_out, "output directory")->capture_default_str();
    bat->add_option("--seed", b_seed, "master seed (0 = config/default)")->capture_default_str();
    bat->add_option("--jobs", b_jobs, "worker threads")->capture_default_str();

    // verify
    auto* ver = app.add_subcommand("verify", "run the engine verification suites against a kernel bank");
    std::string v_bank;
    int v_randomized = 10000;
    uint64_t v_seed = 987654321;
    ver->add_option("--bank", v_bank, "kernel bank file (default: built-in bank)");
    ver->add_option("--randomized", v_randomized, "randomized image count")->capture_default_str();
    ver->add_option("--seed", v_seed, "randomized suite seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        const Config cfg = config_from_option(config_path);
        if (gen->parsed())
            return cmd_generate(g_family, g_per_class, g_seed, g_normalize, g_image_size, g_boundary, g_out,
                                cfg);
        if (sub->parsed()) return cmd_subitize(s_target, s_bank, s_strict, s_lenient);
        if (tr->parsed()) return cmd_train(t_dataset, t_out, cfg, t_seed, t_jobs);
        if (bat->parsed()) return cmd_battery(b_out, cfg, b_seed, b_jobs);
        if (ver->parsed()) return cmd_verify(v_bank, v_randomized, v_seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
