#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "subit/dataset.hpp"
#include "subit/engine_verify.hpp"
#include "subit/kernel.hpp"
#include "subit/morpho.hpp"
#include "subit/rcnn.hpp"
#include "subit/scene.hpp"
#include "subit/topology.hpp"

namespace py = pybind11;
using namespace subit;

namespace {

BinaryImage image_from_array(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw std::invalid_argument("expected a 2D uint8 array");
    BinaryImage img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    const auto view = arr.unchecked<2>();
    for (py::ssize_t y = 0; y < arr.shape(0); ++y)
        for (py::ssize_t x = 0; x < arr.shape(1); ++x) img.at(static_cast<int>(x), static_cast<int>(y)) = view(y, x) ? 1 : 0;
    return img;
}

py::array_t<uint8_t> image_to_array(const BinaryImage& img) {
    py::array_t<uint8_t> arr({img.height(), img.width()});
    auto view = arr.mutable_unchecked<2>();
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) view(y, x) = img.at(x, y);
    return arr;
}

} // namespace

PYBIND11_MODULE(_subit, m) {
    m.doc() = "deterministic subitizing engine, stimulus generator and topology oracles";

    py::class_<KernelBank>(m, "KernelBank")
        .def_static("default_bank", &default_kernel_bank)
        .def_static("parse", &parse_kernel_bank, py::arg("text"))
        .def("__str__", &format_kernel_bank);

    py::class_<ShrinkTrace>(m, "ShrinkTrace")
        .def_readonly("iterations", &ShrinkTrace::iterations)
        .def_readonly("pixels_removed", &ShrinkTrace::pixels_removed)
        .def_property_readonly("fixed_point",
                               [](const ShrinkTrace& t) { return image_to_array(t.fixed_point); });

    m.def(
        "count_components",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
            return count_components(image_from_array(a));
        },
        py::arg("image"), "number of 8-connected foreground components");
    m.def(
        "count_holes",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
            return count_holes(image_from_array(a));
        },
        py::arg("image"), "number of enclosed 4-connected background regions");
    m.def(
        "label_components",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
            const LabelMap map = label_components(image_from_array(a));
            py::array_t<int32_t> out({map.height, map.width});
            auto view = out.mutable_unchecked<2>();
            for (int y = 0; y < map.height; ++y)
                for (int x = 0; x < map.width; ++x) view(y, x) = map.at(x, y);
            return out;
        },
        py::arg("image"));

    m.def(
        "subitize",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a, bool strict,
           const KernelBank* bank) {
            return subitize(image_from_array(a), bank ? *bank : default_kernel_bank(), strict);
        },
        py::arg("image"), py::arg("strict") = false, py::arg("bank") = nullptr,
        "pixel count of the shrink fixed point; equals the component count on hole-free input");
    m.def(
        "shrink",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a, int max_cycles,
           const KernelBank* bank) {
            return shrink(image_from_array(a), bank ? *bank : default_kernel_bank(), max_cycles);
        },
        py::arg("image"), py::arg("max_cycles") = 0, py::arg("bank") = nullptr);
    m.def(
        "prune_cycle",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a, const KernelBank* bank) {
            return image_to_array(prune_cycle(image_from_array(a), bank ? *bank : default_kernel_bank()));
        },
        py::arg("image"), py::arg("bank") = nullptr, "one connectivity-preserving pruning cycle");
    m.def(
        "to_boundary",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
            return image_to_array(to_boundary(image_from_array(a)));
        },
        py::arg("image"));
    m.def(
        "erode_one_layer",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
            return image_to_array(erode_one_layer(image_from_array(a)));
        },
        py::arg("image"));
    m.def(
        "polarity_normalize",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
            return image_to_array(polarity_normalize(image_from_array(a)));
        },
        py::arg("image"));

    m.def(
        "sample_scene",
        [](int n, const std::string& family, uint64_t seed, int image_size) {
            Rng rng(seed);
            const SceneSpec spec = sample_training_scene(n, family_from_string(family), rng, image_size);
            return py::make_tuple(image_to_array(rasterize(spec)), scene_to_json(spec));
        },
        py::arg("n"), py::arg("family") = "baseline_circles", py::arg("seed") = 0, py::arg("image_size") = 64,
        "deterministically sample one scene; returns (image, scene_json)");
    m.def(
        "rasterize_scene",
        [](const std::string& scene_json) { return image_to_array(rasterize(scene_from_json(scene_json))); },
        py::arg("scene_json"));

    m.def(
        "verify_bank",
        [](const KernelBank* bank, int randomized, uint64_t seed) {
            const KernelBank& b = bank ? *bank : default_kernel_bank();
            const auto local = verify_local_safety(b);
            const auto ex = verify_exhaustive_4x4(b);
            const auto rnd = verify_randomized(b, randomized, seed);
            py::dict out;
            out["local_ok"] = local.ok();
            out["exhaustive_ok"] = ex.ok();
            out["exhaustive_checked"] = ex.checked;
            out["randomized_ok"] = rnd.ok();
            out["randomized_checked"] = rnd.checked;
            return out;
        },
        py::arg("bank") = nullptr, py::arg("randomized") = 200, py::arg("seed") = 7);
}
