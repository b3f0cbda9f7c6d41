#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cprrtc {

using Vec3 = Eigen::Vector3d;

/// Closed axis-aligned box in world frame (meters).
struct Aabb {
    Vec3 min;
    Vec3 max;

    double volume() const { return (max - min).prod(); }
    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

struct Sphere {
    Vec3 center;
    double radius = 0.0;
};

/// Static environment. Immutable once loaded.
struct Scene {
    std::string name;
    std::vector<Aabb> boxes;
    std::vector<Sphere> spheres;

    std::size_t primitive_count() const { return boxes.size() + spheres.size(); }
};

/// Distance from the sphere center to the closed box minus the radius.
/// Negative iff the sphere overlaps the box. A center inside the box has
/// distance zero, so the result is then exactly -radius.
double sphere_aabb_clearance(const Sphere& s, const Aabb& b);

/// Center distance minus both radii.
double sphere_sphere_clearance(const Sphere& a, const Sphere& b);

/// Replaces every box with exactly `factor` boxes tiling it. Pieces are
/// produced by repeatedly halving the largest-volume piece along its longest
/// axis (lowest axis index on ties), so shared faces coincide bit-exactly and
/// the union is unchanged. Throws std::invalid_argument for factor == 0.
Scene subdivide_scene(const Scene& scene, std::size_t factor);

/// Splits one box into `count` pieces following the rule above.
std::vector<Aabb> subdivide_box(const Aabb& box, std::size_t count);

/// Throws validation_error naming the offending primitive and axis.
void validate_aabb(const Aabb& b, const std::string& label);
void validate_sphere(const Sphere& s, const std::string& label);
void validate_scene(const Scene& scene);

/// Reads the JSON scene document:
///   {"name": "...", "boxes": [{"min": [x,y,z], "max": [x,y,z]}],
///    "spheres": [{"center": [x,y,z], "radius": r}]}
/// Missing `boxes` / `spheres` are treated as empty lists.
Scene load_scene(std::istream& in);
Scene load_scene_file(const std::string& path);
std::string scene_to_json(const Scene& scene);

}  // namespace cprrtc
