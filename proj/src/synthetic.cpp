#include "geospark/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace geospark {

const char* scene_class_name(int label) {
    switch (label) {
        case kFloor: return "floor";
        case kWall: return "wall";
        case kTable: return "table";
        case kChair: return "chair";
        case kBoard: return "board";
        case kClutter: return "clutter";
        default: return "unknown";
    }
}

void SceneSpec::validate() const {
    if (!(room_x > 0.2) || !(room_y > 0.2) || !(wall_height > 0.2))
        throw ArgumentError("scene extents too small");
    if (!(density > 0.0)) throw ArgumentError("density must be positive");
    if (noise_sigma < 0.0) throw ArgumentError("noise sigma must be nonnegative");
    if (tables_max < tables_min || chairs_max < chairs_min || boards_max < boards_min ||
        clutter_max < clutter_min)
        throw ArgumentError("count range inverted");
}

void SceneSpec::set(const std::string& key, const std::string& value) {
    if (key == "room_x") room_x = std::stod(value);
    else if (key == "room_y") room_y = std::stod(value);
    else if (key == "wall_height") wall_height = std::stod(value);
    else if (key == "density") density = std::stod(value);
    else if (key == "noise_sigma") noise_sigma = std::stod(value);
    else if (key == "tables_min") tables_min = std::stoi(value);
    else if (key == "tables_max") tables_max = std::stoi(value);
    else if (key == "chairs_min") chairs_min = std::stoi(value);
    else if (key == "chairs_max") chairs_max = std::stoi(value);
    else if (key == "boards_min") boards_min = std::stoi(value);
    else if (key == "boards_max") boards_max = std::stoi(value);
    else if (key == "clutter_min") clutter_min = std::stoi(value);
    else if (key == "clutter_max") clutter_max = std::stoi(value);
    else if (key == "seed") seed = std::stoull(value);
    else throw ArgumentError("scene spec: unknown key '" + key + "'");
}

SceneSpec load_scene_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scene spec: " + path);
    SceneSpec spec;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto trim = [](const std::string& s) -> std::string {
            auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos) return "";
            return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected key = value");
        spec.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    spec.validate();
    return spec;
}

namespace {

struct Builder {
    const SceneSpec& spec;
    SplitMix64 rng;
    Scene scene;
    int next_object = 0;

    explicit Builder(const SceneSpec& s) : spec(s), rng(s.seed) {}

    void emit(const Vec3& p, const Vec3& color, int label, int object_id) {
        Vec3 q = p;
        for (double& v : q) v += spec.noise_sigma * rng.gaussian();
        scene.cloud.coords.push_back(q);
        Vec3 c = color;
        for (double& v : c) v = std::clamp(v + 0.03 * rng.gaussian(), 0.0, 1.0);
        scene.cloud.colors.push_back(c);
        scene.cloud.labels.push_back(label);
        scene.cloud.object_ids.push_back(object_id);
    }

    int begin_object(int label) {
        scene.inventory.push_back({next_object, label, {}, 0});
        return next_object++;
    }

    void close_object() {
        ObjectRecord& rec = scene.inventory.back();
        std::size_t start = scene.cloud.size() - rec.point_count;
        if (rec.point_count > 0) {
            rec.bbox.min = rec.bbox.max = scene.cloud.coords[start];
            for (std::size_t i = start; i < scene.cloud.size(); ++i)
                for (int c = 0; c < 3; ++c) {
                    rec.bbox.min[c] = std::min(rec.bbox.min[c], scene.cloud.coords[i][c]);
                    rec.bbox.max[c] = std::max(rec.bbox.max[c], scene.cloud.coords[i][c]);
                }
        }
    }

    // Rectangle spanned by origin + s*u + t*v, s,t in [0,1].
    void rect(const Vec3& origin, const Vec3& u, const Vec3& v, const Vec3& color, int label,
              int object_id) {
        double area = std::sqrt(squared_norm(u)) * std::sqrt(squared_norm(v));
        int count = std::max(1, static_cast<int>(std::lround(area * spec.density)));
        for (int i = 0; i < count; ++i) {
            double s = rng.uniform(), t = rng.uniform();
            Vec3 p = {origin[0] + s * u[0] + t * v[0], origin[1] + s * u[1] + t * v[1],
                      origin[2] + s * u[2] + t * v[2]};
            emit(p, color, label, object_id);
        }
        scene.inventory[object_id].point_count += count;
    }

    // Axis-aligned box surface (top + 4 sides; no bottom).
    void box(const Vec3& lo, const Vec3& hi, const Vec3& color, int label, int object_id) {
        Vec3 d = hi - lo;
        rect({lo[0], lo[1], hi[2]}, {d[0], 0, 0}, {0, d[1], 0}, color, label, object_id);  // top
        rect(lo, {d[0], 0, 0}, {0, 0, d[2]}, color, label, object_id);
        rect({lo[0], hi[1], lo[2]}, {d[0], 0, 0}, {0, 0, d[2]}, color, label, object_id);
        rect(lo, {0, d[1], 0}, {0, 0, d[2]}, color, label, object_id);
        rect({hi[0], lo[1], lo[2]}, {0, d[1], 0}, {0, 0, d[2]}, color, label, object_id);
    }

    int count_in(int lo, int hi) { return lo + static_cast<int>(rng.below(hi - lo + 1)); }
};

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
    spec.validate();
    Builder b(spec);
    const Vec3 floor_color = {0.50, 0.50, 0.52};
    const Vec3 wall_color = {0.78, 0.74, 0.62};
    const Vec3 table_color = {0.48, 0.34, 0.20};
    const Vec3 chair_color = {0.42, 0.20, 0.16};
    // boards share the wall color on purpose: geometry context has to tell them apart
    const Vec3 board_color = wall_color;

    {
        int id = b.begin_object(kFloor);
        b.rect({0, 0, 0}, {spec.room_x, 0, 0}, {0, spec.room_y, 0}, floor_color, kFloor, id);
        b.close_object();
    }
    for (int w = 0; w < 4; ++w) {
        int id = b.begin_object(kWall);
        Vec3 origin, u;
        switch (w) {
            case 0: origin = {0, 0, 0}; u = {spec.room_x, 0, 0}; break;
            case 1: origin = {0, spec.room_y, 0}; u = {spec.room_x, 0, 0}; break;
            case 2: origin = {0, 0, 0}; u = {0, spec.room_y, 0}; break;
            default: origin = {spec.room_x, 0, 0}; u = {0, spec.room_y, 0}; break;
        }
        b.rect(origin, u, {0, 0, spec.wall_height}, wall_color, kWall, id);
        b.close_object();
    }

    int tables = b.count_in(spec.tables_min, spec.tables_max);
    std::vector<Vec3> table_tops;
    for (int t = 0; t < tables; ++t) {
        int id = b.begin_object(kTable);
        double sx = b.rng.uniform(0.8, 1.2), sy = b.rng.uniform(0.5, 0.8);
        double x = b.rng.uniform(0.4, spec.room_x - sx - 0.4);
        double y = b.rng.uniform(0.4, spec.room_y - sy - 0.4);
        double h = b.rng.uniform(0.65, 0.78);
        b.rect({x, y, h}, {sx, 0, 0}, {0, sy, 0}, table_color, kTable, id);
        table_tops.push_back({x + sx / 2, y + sy / 2, h});
        b.close_object();
    }

    int chairs = b.count_in(spec.chairs_min, spec.chairs_max);
    for (int c = 0; c < chairs; ++c) {
        int id = b.begin_object(kChair);
        double s = b.rng.uniform(0.35, 0.45);
        double x = b.rng.uniform(0.3, spec.room_x - s - 0.3);
        double y = b.rng.uniform(0.3, spec.room_y - s - 0.3);
        b.box({x, y, 0}, {x + s, y + s, b.rng.uniform(0.40, 0.50)}, chair_color, kChair, id);
        b.close_object();
    }

    int boards = b.count_in(spec.boards_min, spec.boards_max);
    for (int k = 0; k < boards; ++k) {
        int id = b.begin_object(kBoard);
        double w = b.rng.uniform(0.5, 0.8), h = b.rng.uniform(0.4, 0.6);
        double z = b.rng.uniform(1.0, 1.5);
        int wall = static_cast<int>(b.rng.below(4));
        double along = b.rng.uniform(0.3, (wall < 2 ? spec.room_x : spec.room_y) - w - 0.3);
        constexpr double off = 0.02;  // proud of the wall surface
        Vec3 origin, u = {0, 0, 0};
        switch (wall) {
            case 0: origin = {along, off, z}; u = {w, 0, 0}; break;
            case 1: origin = {along, spec.room_y - off, z}; u = {w, 0, 0}; break;
            case 2: origin = {off, along, z}; u = {0, w, 0}; break;
            default: origin = {spec.room_x - off, along, z}; u = {0, w, 0}; break;
        }
        b.rect(origin, u, {0, 0, h}, board_color, kBoard, id);
        b.close_object();
    }

    int clutter = b.count_in(spec.clutter_min, spec.clutter_max);
    for (int c = 0; c < clutter; ++c) {
        int id = b.begin_object(kClutter);
        Vec3 color = {b.rng.uniform(0.1, 0.9), b.rng.uniform(0.1, 0.9), b.rng.uniform(0.1, 0.9)};
        double s = b.rng.uniform(0.08, 0.18);
        Vec3 base;
        if (!table_tops.empty() && b.rng.uniform() < 0.5) {
            const Vec3& top = table_tops[b.rng.below(table_tops.size())];
            base = {top[0] + b.rng.uniform(-0.2, 0.2), top[1] + b.rng.uniform(-0.15, 0.15),
                    top[2]};
        } else {
            base = {b.rng.uniform(0.3, spec.room_x - 0.3), b.rng.uniform(0.3, spec.room_y - 0.3),
                    0.0};
        }
        b.box(base, {base[0] + s, base[1] + s, base[2] + s}, color, kClutter, id);
        b.close_object();
    }

    return std::move(b.scene);
}

std::vector<int> small_object_ids(const Scene& scene, double fraction) {
    std::vector<int> out;
    double threshold = fraction * static_cast<double>(scene.cloud.size());
    for (const ObjectRecord& rec : scene.inventory)
        if (rec.point_count < threshold) out.push_back(rec.object_id);
    return out;
}

}  // namespace geospark
