#include "subit/dataset.hpp"

#include <fstream>
#include <json.hpp>

#include "subit/errors.hpp"

namespace subit {

using nlohmann::json;

const char* to_string(NormalizationMode m) {
    switch (m) {
        case NormalizationMode::none: return "none";
        case NormalizationMode::area_independent: return "area_independent";
        case NormalizationMode::edge_count_independent: return "edge_count_independent";
    }
    return "?";
}

NormalizationMode normalization_mode_from_string(const std::string& s) {
    if (s == "none") return NormalizationMode::none;
    if (s == "area_independent") return NormalizationMode::area_independent;
    if (s == "edge_count_independent") return NormalizationMode::edge_count_independent;
    throw ManifestCorrupt("unknown normalization mode: " + s);
}

namespace {

json object_to_json(const ObjectSpec& obj) {
    json j;
    j["kind"] = to_string(obj.kind);
    if (obj.kind == ShapeKind::regular_ngon) j["sides"] = obj.ngon_sides;
    if (obj.kind == ShapeKind::simple_polygon) {
        json verts = json::array();
        for (const auto& [x, y] : obj.polygon) verts.push_back({x, y});
        j["polygon"] = verts;
    }
    j["size"] = obj.size;
    j["cx"] = obj.cx;
    j["cy"] = obj.cy;
    j["rotation"] = obj.rotation;
    j["style"] = to_string(obj.style);
    j["polarity"] = to_string(obj.polarity);
    return j;
}

ObjectSpec object_from_json(const json& j) {
    ObjectSpec obj;
    obj.kind = shape_kind_from_string(j.at("kind").get<std::string>());
    if (obj.kind == ShapeKind::regular_ngon) obj.ngon_sides = j.at("sides").get<int>();
    if (obj.kind == ShapeKind::simple_polygon)
        for (const auto& v : j.at("polygon")) obj.polygon.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    obj.size = j.at("size").get<double>();
    obj.cx = j.at("cx").get<double>();
    obj.cy = j.at("cy").get<double>();
    obj.rotation = j.at("rotation").get<double>();
    obj.style = object_style_from_string(j.at("style").get<std::string>());
    obj.polarity = polarity_from_string(j.at("polarity").get<std::string>());
    return obj;
}

json scene_to_json_obj(const SceneSpec& spec) {
    json j;
    j["label"] = spec.label;
    j["image_size"] = spec.image_size;
    j["seed"] = spec.seed;
    json objs = json::array();
    for (const auto& obj : spec.objects) objs.push_back(object_to_json(obj));
    j["objects"] = objs;
    return j;
}

SceneSpec scene_from_json_obj(const json& j) {
    SceneSpec spec;
    spec.label = j.at("label").get<int>();
    spec.image_size = j.at("image_size").get<int>();
    spec.seed = j.at("seed").get<uint64_t>();
    for (const auto& o : j.at("objects")) spec.objects.push_back(object_from_json(o));
    return spec;
}

} // namespace

std::string scene_to_json(const SceneSpec& spec) { return scene_to_json_obj(spec).dump(); }

SceneSpec scene_from_json(const std::string& text) { return scene_from_json_obj(json::parse(text)); }

void write_dataset(Dataset& ds, const std::filesystem::path& dir) {
    if (ds.manifest.entries.size() != ds.images.size())
        throw IoError("dataset entries and images out of sync");
    std::filesystem::create_directories(dir);
    for (size_t i = 0; i < ds.images.size(); ++i) {
        auto& entry = ds.manifest.entries[i];
        if (entry.file.empty()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "img_%06zu.pgm", i);
            entry.file = buf;
        }
        write_pgm(ds.images[i], dir / entry.file);
        entry.checksum = file_checksum(dir / entry.file);
    }
    json j;
    j["schema_version"] = ds.manifest.schema_version;
    j["generator_version"] = ds.manifest.generator_version;
    j["global_seed"] = ds.manifest.global_seed;
    j["normalization"] = to_string(ds.manifest.normalization);
    json entries = json::array();
    for (const auto& e : ds.manifest.entries) {
        json je;
        je["file"] = e.file;
        je["label"] = e.label;
        je["checksum"] = e.checksum;
        je["spec"] = scene_to_json_obj(e.spec);
        entries.push_back(je);
    }
    j["entries"] = entries;
    std::ofstream f(dir / "manifest.json");
    if (!f) throw IoError("cannot write manifest: " + (dir / "manifest.json").string());
    f << j.dump(1, '\t') << '\n';
    if (!f) throw IoError("manifest write failed");
}

Dataset read_dataset(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream f(manifest_path);
    if (!f) throw ManifestCorrupt("missing manifest: " + manifest_path.string());
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ManifestCorrupt("unparseable manifest: " + std::string(e.what()));
    }
    Dataset ds;
    try {
        ds.manifest.schema_version = j.at("schema_version").get<int>();
        ds.manifest.generator_version = j.at("generator_version").get<std::string>();
        ds.manifest.global_seed = j.at("global_seed").get<uint64_t>();
        ds.manifest.normalization = normalization_mode_from_string(j.at("normalization").get<std::string>());
        for (const auto& je : j.at("entries")) {
            DatasetEntry e;
            e.file = je.at("file").get<std::string>();
            e.label = je.at("label").get<int>();
            e.checksum = je.at("checksum").get<uint64_t>();
            e.spec = scene_from_json_obj(je.at("spec"));
            if (e.label < 1 || e.label > 6) throw ManifestCorrupt("label out of range in manifest");
            ds.manifest.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw ManifestCorrupt("manifest field error: " + std::string(e.what()));
    }
    ds.images.reserve(ds.manifest.entries.size());
    for (const auto& e : ds.manifest.entries) {
        const auto path = dir / e.file;
        if (!std::filesystem::exists(path)) throw ManifestCorrupt("missing image: " + path.string());
        if (file_checksum(path) != e.checksum) throw ManifestCorrupt("checksum mismatch: " + path.string());
        ds.images.push_back(read_pgm(path));
    }
    return ds;
}

std::vector<SceneSpec> generate_scenes(Family family, int per_class, uint64_t seed, int image_size) {
    Rng master(seed);
    std::vector<SceneSpec> scenes;
    scenes.reserve(static_cast<size_t>(per_class) * 6);
    uint64_t index = 0;
    for (int n = 1; n <= 6; ++n) {
        for (int i = 0; i < per_class; ++i) {
            Rng rng = master.spawn(index++);
            scenes.push_back(sample_training_scene(n, family, rng, image_size));
        }
    }
    return scenes;
}

Dataset build_dataset(const std::vector<SceneSpec>& scenes, uint64_t seed, NormalizationMode mode,
                      const std::function<BinaryImage(const BinaryImage&)>& post) {
    Dataset ds;
    ds.manifest.global_seed = seed;
    ds.manifest.normalization = mode;
    ds.manifest.entries.reserve(scenes.size());
    ds.images.reserve(scenes.size());
    for (const auto& spec : scenes) {
        DatasetEntry e;
        e.spec = spec;
        e.label = spec.label;
        ds.manifest.entries.push_back(e);
        BinaryImage img = rasterize(spec);
        ds.images.push_back(post ? post(img) : std::move(img));
    }
    return ds;
}

} // namespace subit
