#include "cprrtc/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cprrtc/errors.hpp"
#include "json_util.hpp"

namespace cprrtc {

double sphere_aabb_clearance(const Sphere& s, const Aabb& b) {
    const Vec3 closest = s.center.cwiseMax(b.min).cwiseMin(b.max);
    return (s.center - closest).norm() - s.radius;
}

double sphere_sphere_clearance(const Sphere& a, const Sphere& b) {
    return (a.center - b.center).norm() - (a.radius + b.radius);
}

std::vector<Aabb> subdivide_box(const Aabb& box, std::size_t count) {
    if (count == 0) throw std::invalid_argument("subdivision count must be >= 1");
    std::vector<Aabb> pieces{box};
    pieces.reserve(count);
    while (pieces.size() < count) {
        // Largest volume first; the earliest piece wins ties.
        std::size_t target = 0;
        double best = pieces[0].volume();
        for (std::size_t i = 1; i < pieces.size(); ++i) {
            const double v = pieces[i].volume();
            if (v > best) {
                best = v;
                target = i;
            }
        }
        Aabb& piece = pieces[target];
        const Vec3 extent = piece.max - piece.min;
        int axis = 0;
        for (int a = 1; a < 3; ++a)
            if (extent[a] > extent[axis]) axis = a;
        const double mid = 0.5 * (piece.min[axis] + piece.max[axis]);
        Aabb upper = piece;
        upper.min[axis] = mid;
        piece.max[axis] = mid;
        pieces.push_back(upper);
    }
    return pieces;
}

Scene subdivide_scene(const Scene& scene, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("densification factor must be >= 1");
    Scene out;
    out.name = scene.name;
    out.spheres = scene.spheres;
    out.boxes.reserve(scene.boxes.size() * factor);
    for (const Aabb& b : scene.boxes) {
        auto pieces = subdivide_box(b, factor);
        out.boxes.insert(out.boxes.end(), pieces.begin(), pieces.end());
    }
    return out;
}

namespace {

const char* axis_name(int axis) {
    static const char* names[] = {"x", "y", "z"};
    return names[axis];
}

}  // namespace

void validate_aabb(const Aabb& b, const std::string& label) {
    for (int a = 0; a < 3; ++a) {
        if (!std::isfinite(b.min[a]) || !std::isfinite(b.max[a]))
            throw validation_error(label + ": non-finite coordinate on axis " + axis_name(a));
        if (b.min[a] > b.max[a])
            throw validation_error(label + ": max < min on axis " + axis_name(a));
    }
}

void validate_sphere(const Sphere& s, const std::string& label) {
    if (!s.center.allFinite()) throw validation_error(label + ": non-finite center");
    if (!std::isfinite(s.radius) || !(s.radius > 0.0))
        throw validation_error(label + ": radius must be positive and finite");
}

void validate_scene(const Scene& scene) {
    for (std::size_t i = 0; i < scene.boxes.size(); ++i)
        validate_aabb(scene.boxes[i], "boxes[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < scene.spheres.size(); ++i)
        validate_sphere(scene.spheres[i], "spheres[" + std::to_string(i) + "]");
}

Scene load_scene(std::istream& in) {
    using detail::as_number;
    using detail::as_vec3;
    using detail::require;

    const auto doc = detail::parse_document(in);
    if (!doc.is_object()) throw parse_error("$", "scene document must be an object");

    Scene scene;
    if (auto it = doc.find("name"); it != doc.end()) {
        if (!it->is_string()) throw parse_error("$.name", "expected a string");
        scene.name = it->get<std::string>();
    }
    if (auto it = doc.find("boxes"); it != doc.end()) {
        if (!it->is_array()) throw parse_error("$.boxes", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string path = "$.boxes[" + std::to_string(i) + "]";
            const auto& entry = (*it)[i];
            Aabb b{as_vec3(require(entry, "min", path), path + ".min"),
                   as_vec3(require(entry, "max", path), path + ".max")};
            scene.boxes.push_back(b);
        }
    }
    if (auto it = doc.find("spheres"); it != doc.end()) {
        if (!it->is_array()) throw parse_error("$.spheres", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string path = "$.spheres[" + std::to_string(i) + "]";
            const auto& entry = (*it)[i];
            Sphere s{as_vec3(require(entry, "center", path), path + ".center"),
                     as_number(require(entry, "radius", path), path + ".radius")};
            scene.spheres.push_back(s);
        }
    }
    validate_scene(scene);
    return scene;
}

Scene load_scene_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene file " + path);
    return load_scene(in);
}

std::string scene_to_json(const Scene& scene) {
    detail::json doc;
    doc["name"] = scene.name;
    doc["boxes"] = detail::json::array();
    for (const auto& b : scene.boxes)
        doc["boxes"].push_back({{"min", detail::to_array(b.min)}, {"max", detail::to_array(b.max)}});
    doc["spheres"] = detail::json::array();
    for (const auto& s : scene.spheres)
        doc["spheres"].push_back({{"center", detail::to_array(s.center)}, {"radius", s.radius}});
    return doc.dump(2);
}

}  // namespace cprrtc
