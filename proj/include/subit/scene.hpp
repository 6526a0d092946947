#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subit/image.hpp"
#include "subit/rng.hpp"

namespace subit {

enum class ShapeKind { circle, regular_ngon, simple_polygon, ring };
enum class ObjectStyle { solid, outline };
enum class Polarity { white_on_black, black_on_white };

const char* to_string(ShapeKind k);
const char* to_string(ObjectStyle s);
const char* to_string(Polarity p);
ShapeKind shape_kind_from_string(const std::string& s);
ObjectStyle object_style_from_string(const std::string& s);
Polarity polarity_from_string(const std::string& s);

struct ObjectSpec {
    ShapeKind kind = ShapeKind::circle;
    int ngon_sides = 0; // 3..6 when kind == regular_ngon
    // Unit-scale vertex loop for simple_polygon; scaled by `size`, rotated by
    // `rotation` and translated to the center at rasterization time.
    std::vector<std::pair<double, double>> polygon;
    double size = 0.0; // characteristic radius in pixels, >= 3
    double cx = 0.0;
    double cy = 0.0;
    double rotation = 0.0;
    ObjectStyle style = ObjectStyle::solid;
    Polarity polarity = Polarity::white_on_black;

    bool operator==(const ObjectSpec&) const = default;
};

struct SceneSpec {
    int label = 1; // 1..6, == objects.size()
    std::vector<ObjectSpec> objects;
    int image_size = 64;
    uint64_t seed = 0;

    bool operator==(const SceneSpec&) const = default;
};

// Stimulus families used across the experiment battery.
enum class Family {
    baseline_circles,    // solid white circles, radii U[4,10]
    exp1_size_variation, // circles with a 50% wider radius half-range
    exp2_triangles,      // solid equilateral triangles, area-matched
    exp2_squares,
    exp2_pentagons,
    exp3_swapped,        // baseline geometry, colors swapped
    exp4_rings,          // white rings of random size/position/orientation
    mixed_section4,      // circles/n-gons/polygons, solid or outline, both polarities
    mixed_solid_shapes,  // circles/n-gons/polygons, solid only, white on black
};

const char* to_string(Family f);
Family family_from_string(const std::string& s);

// Geometry helpers shared with the samplers and normalizers.
double object_area(const ObjectSpec& obj);          // continuous area of the solid shape
double object_max_extent(const ObjectSpec& obj);    // radius of the bounding circle

// Per-object solid mask on the scene grid (style/polarity ignored).
BinaryImage rasterize_object_solid(const ObjectSpec& obj, int image_size);

// Full scene rasterization: center-of-pixel point-in-shape test, outline
// style as the two outermost erosion layers of the solid mask, scene-wide
// polarity. Validates the SceneSpec invariants (margin >= 2 px from borders,
// pairwise Chebyshev separation >= 2) and throws PlacementInfeasible when
// they do not hold.
BinaryImage rasterize(const SceneSpec& spec);

// Deterministic sampling of one scene; identical rng state gives an
// identical SceneSpec. Throws PlacementInfeasible when rejection sampling
// plus shrink-and-retry cannot place the objects. The edge-normalized
// regime uses a larger canvas than the 64 px default so the boundary-count
// window has room to be class-independent.
SceneSpec sample_training_scene(int n, Family family, Rng& rng, int image_size = 64);

// Re-draws object centers, keeping everything else. Used after rescaling.
void resolve_placement(SceneSpec& spec, Rng& rng, int attempts_per_object = 1000);

// Rescales every scene so total foreground area is drawn from the pooled
// batch distribution, statistically independent of the label.
void normalize_total_area(std::vector<SceneSpec>& batch, Rng& rng);

// Same idea for the boundary-pixel count c measured on to_boundary(raster).
void normalize_edge_count(std::vector<SceneSpec>& batch, Rng& rng);

// All object sizes multiplied by `factor`; placement re-solved when the
// scaled objects no longer fit.
SceneSpec perturb_scale(const SceneSpec& spec, double factor);

SceneSpec swap_polarity(const SceneSpec& spec);

// Measured boundary-pixel count of the rasterized scene.
int64_t edge_pixel_count(const SceneSpec& spec);

} // namespace subit
