#pragma once

#include <filesystem>
#include <functional>

#include "subit/image.hpp"
#include "subit/scene.hpp"

namespace subit {

enum class NormalizationMode { none, area_independent, edge_count_independent };

const char* to_string(NormalizationMode m);
NormalizationMode normalization_mode_from_string(const std::string& s);

struct DatasetEntry {
    std::string file; // relative to the dataset directory
    SceneSpec spec;
    int label = 0;
    uint64_t checksum = 0; // FNV-1a of the image file bytes
};

struct DatasetManifest {
    int schema_version = 1;
    std::string generator_version = "subit-1";
    uint64_t global_seed = 0;
    NormalizationMode normalization = NormalizationMode::none;
    std::vector<DatasetEntry> entries;
};

// In-memory dataset: manifest plus the rasterized images, index-aligned
// with manifest.entries.
struct Dataset {
    DatasetManifest manifest;
    std::vector<BinaryImage> images;
};

// Writes `manifest.json` plus one PGM per entry; fills in checksums.
void write_dataset(Dataset& ds, const std::filesystem::path& dir);

// Reads a dataset directory; throws ManifestCorrupt on missing/garbled
// manifest, unresolvable files or checksum mismatches.
Dataset read_dataset(const std::filesystem::path& dir);

std::string scene_to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const std::string& json);

// Balanced scene generation: `per_class` scenes for each label 1..6, using
// per-scene rng substreams of `seed`. Optional transform applied per spec.
std::vector<SceneSpec> generate_scenes(Family family, int per_class, uint64_t seed, int image_size = 64);

// Rasterizes scenes into a Dataset (optionally mapping each image through a
// post-processing hook such as to_boundary).
Dataset build_dataset(const std::vector<SceneSpec>& scenes, uint64_t seed, NormalizationMode mode,
                      const std::function<BinaryImage(const BinaryImage&)>& post = {});

} // namespace subit
