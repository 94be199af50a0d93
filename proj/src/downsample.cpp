#include "geospark/downsample.hpp"

#include <cmath>
#include <unordered_map>

namespace geospark {

namespace {

void finalize(DownsampleMap& map, const std::vector<Vec3>& coords) {
    std::size_t n2 = 0;
    for (int g : map.group_of) n2 = std::max<std::size_t>(n2, g + 1);
    map.parents.assign(n2, {});
    for (std::size_t i = 0; i < map.group_of.size(); ++i)
        map.parents[map.group_of[i]].push_back(static_cast<int>(i));
    map.coarse_coords.assign(n2, Vec3{0, 0, 0});
    for (std::size_t g = 0; g < n2; ++g) {
        for (int i : map.parents[g]) map.coarse_coords[g] = map.coarse_coords[g] + coords[i];
        double inv = 1.0 / static_cast<double>(map.parents[g].size());
        for (double& v : map.coarse_coords[g]) v *= inv;
    }
}

}  // namespace

DownsampleMap geometric_downsample_map(const std::vector<Vec3>& coords,
                                       const std::vector<int>& partition_ids, double a) {
    if (!(a > 0.0)) throw ArgumentError("geometric_downsample: target diameter must be positive");
    if (coords.size() != partition_ids.size())
        throw ArgumentError("geometric_downsample: coords/partition size mismatch");
    std::size_t n = coords.size();
    int m = 0;
    for (int p : partition_ids) {
        if (p < 0) throw ArgumentError("geometric_downsample: partition ids must be dense");
        m = std::max(m, p + 1);
    }
    std::vector<std::vector<int>> members(m);
    for (std::size_t i = 0; i < n; ++i) members[partition_ids[i]].push_back(static_cast<int>(i));

    DownsampleMap map;
    map.group_of.assign(n, -1);
    double cell = a / std::sqrt(3.0);
    int next = 0;
    for (int j = 0; j < m; ++j) {
        if (members[j].empty()) continue;
        Bbox box = bounding_box(coords, members[j]);
        if (box.diagonal() <= a) {
            for (int i : members[j]) map.group_of[i] = next;
            map.coarse_partition.push_back(j);
            ++next;
            continue;
        }
        std::vector<Vec3> sub;
        sub.reserve(members[j].size());
        for (int i : members[j]) sub.push_back(coords[i]);
        auto keys = voxel_keys(sub, cell, box.min);
        std::unordered_map<VoxelKey, int, VoxelKeyHash> cells;
        for (std::size_t k = 0; k < keys.size(); ++k) {
            auto [it, inserted] = cells.try_emplace(keys[k], next);
            if (inserted) {
                map.coarse_partition.push_back(j);
                ++next;
            }
            map.group_of[members[j][k]] = it->second;
        }
    }
    finalize(map, coords);
    return map;
}

DownsampleMap voxel_downsample_map(const std::vector<Vec3>& coords, double cell) {
    if (!(cell > 0.0)) throw ArgumentError("voxel_downsample: cell must be positive");
    Bbox box = bounding_box(coords);
    auto keys = voxel_keys(coords, cell, box.min);
    DownsampleMap map;
    map.group_of.assign(coords.size(), -1);
    std::unordered_map<VoxelKey, int, VoxelKeyHash> cells;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        auto [it, inserted] = cells.try_emplace(keys[i], static_cast<int>(cells.size()));
        map.group_of[i] = it->second;
    }
    map.coarse_partition.assign(cells.size(), -1);
    finalize(map, coords);
    return map;
}

Tape::Id fuse_features_on_tape(Tape& tape, Tape::Id features, const DownsampleMap& map,
                               Tape::Id d_weight, Tape::Id d_bias) {
    Tape::Id lifted = tape.affine(features, d_weight, d_bias);
    return tape.segment_max(lifted, map.group_of, map.output_count());
}

Matrix fuse_features(const Matrix& features, const DownsampleMap& map, const Tensor& d_weight,
                     const Tensor& d_bias) {
    Tape tape;
    Tape::Id f = tape.input(Tensor::from_matrix(features));
    Tape::Id out =
        fuse_features_on_tape(tape, f, map, tape.input(d_weight), tape.input(d_bias));
    Matrix result(tape.value(out).rows, tape.value(out).cols);
    result.data = tape.value(out).v;
    return result;
}

}  // namespace geospark
