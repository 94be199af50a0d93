#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geospark/cloud.hpp"
#include "geospark/common.hpp"

namespace geospark {

// Class ids used by the generator.
enum SceneClass : int {
    kFloor = 0,
    kWall = 1,
    kTable = 2,
    kChair = 3,
    kBoard = 4,
    kClutter = 5,
};
inline constexpr int kNumSceneClasses = 6;
const char* scene_class_name(int label);

struct SceneSpec {
    double room_x = 4.0;       // m
    double room_y = 4.0;
    double wall_height = 2.5;
    double density = 12.0;     // points per square meter
    double noise_sigma = 0.01; // m, isotropic Gaussian jitter
    int tables_min = 1, tables_max = 2;
    int chairs_min = 1, chairs_max = 3;
    int boards_min = 1, boards_max = 2;
    int clutter_min = 2, clutter_max = 4;
    std::uint64_t seed = 1;

    void validate() const;
    // throws ArgumentError on unknown key or unparsable value
    void set(const std::string& key, const std::string& value);
};

// Flat key=value file ('#' comments allowed).
SceneSpec load_scene_spec(const std::string& path);

struct ObjectRecord {
    int object_id = 0;
    int label = 0;
    Bbox bbox;
    int point_count = 0;
};

struct Scene {
    PointCloud cloud;  // labels and object_ids filled
    std::vector<ObjectRecord> inventory;
};

// Fully determined by spec (including seed).
Scene generate_scene(const SceneSpec& spec);

// Object ids holding fewer than `fraction` of the scene's points.
std::vector<int> small_object_ids(const Scene& scene, double fraction = 0.01);

}  // namespace geospark
