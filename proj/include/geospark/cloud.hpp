#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "geospark/common.hpp"

namespace geospark {

/// Point cloud container: coordinates in meters, optional RGB in [0,1],
/// optional integer class labels.
struct PointCloud {
    std::vector<Vec3> coords;
    std::vector<Vec3> colors;      // empty, or size() == coords.size()
    std::vector<int> labels;       // empty, or size() == coords.size()
    std::vector<int> object_ids;   // optional per-point object instance (synthetic scenes)

    std::size_t size() const { return coords.size(); }
    bool has_colors() const { return !colors.empty(); }
    bool has_labels() const { return !labels.empty(); }

    // Throws ArgumentError on non-finite coords, empty cloud, or label out of [0, num_classes).
    void validate(int num_classes = -1) const;
};

enum class CloudFormat { AsciiXyz, Ply };

PointCloud load_point_cloud(const std::string& path, CloudFormat format);
void save_point_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format);

// Guess from extension: ".ply" -> Ply, anything else ascii.
CloudFormat format_from_path(const std::string& path);

/// kd-tree over a fixed set of points. Immutable once built; concurrent
/// queries are safe.
class KnnIndex {
public:
    explicit KnnIndex(const std::vector<Vec3>& points);

    // Exactly min(k, n) distinct indices sorted by nondecreasing distance,
    // ties broken by lower index. k == 0 is an error.
    void query(const Vec3& p, std::size_t k,
               std::vector<int>& indices, std::vector<double>& distances) const;

    std::pair<std::vector<int>, std::vector<double>> query(const Vec3& p, std::size_t k) const;

    std::size_t size() const { return points_.size(); }

private:
    struct Node {
        int left = -1;
        int right = -1;
        int begin = 0;   // leaf range into order_
        int end = 0;
        int axis = 0;
        double split = 0.0;
    };

    int build(int begin, int end, int depth);

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

/// Undirected weighted graph over point indices; one stored copy per edge (i < j).
struct AdjacencyGraph {
    std::size_t num_vertices = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<double> weights;
};

// Symmetrized k-NN graph with weights w_ij = mean_edge_length / max(d_ij, 1e-9).
AdjacencyGraph build_adjacency(const PointCloud& cloud, std::size_t k_adj);

// Greedy farthest-point sampling starting at seed_index; ties broken by lowest index.
std::vector<int> fps_sample(const PointCloud& cloud, std::size_t count, int seed_index);

/// Integer voxel cell id (floor convention).
struct VoxelKey {
    std::int64_t x = 0, y = 0, z = 0;
    bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::int64_t v : {k.x, k.y, k.z}) {
            h ^= static_cast<std::uint64_t>(v);
            h *= 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

std::vector<VoxelKey> voxel_keys(const std::vector<Vec3>& coords, double cell, const Vec3& origin);

// Axis-aligned bounding box helpers.
struct Bbox {
    Vec3 min{0, 0, 0};
    Vec3 max{0, 0, 0};
    double diagonal() const {
        Vec3 d = max - min;
        return std::sqrt(squared_norm(d));
    }
};

Bbox bounding_box(const std::vector<Vec3>& coords, const std::vector<int>& subset = {});

}  // namespace geospark
