#pragma once

#include <vector>

#include "geospark/cloud.hpp"
#include "geospark/common.hpp"
#include "geospark/tensor.hpp"

namespace geospark {

/// Grouping produced by a downsampling pass: every input point belongs to
/// exactly one output group.
struct DownsampleMap {
    std::vector<int> group_of;               // input point -> output group
    std::vector<std::vector<int>> parents;   // output group -> member input points
    std::vector<Vec3> coarse_coords;         // mean of member coords
    std::vector<int> coarse_partition;       // inherited partition id (-1 for voxel mode)

    std::size_t output_count() const { return parents.size(); }
};

/// Partition-guided grouping: partitions with bbox diagonal <= a collapse to
/// one group; larger ones are voxel-split with cell = a / sqrt(3), origin at
/// the partition bbox minimum.
DownsampleMap geometric_downsample_map(const std::vector<Vec3>& coords,
                                       const std::vector<int>& partition_ids, double a);

/// Scene-global voxel grouping (origin = scene bbox minimum).
DownsampleMap voxel_downsample_map(const std::vector<Vec3>& coords, double cell);

/// Feature fuse for a grouping: columnwise max of D(features) per group.
/// Tape form so gradients route through the argmax members.
Tape::Id fuse_features_on_tape(Tape& tape, Tape::Id features, const DownsampleMap& map,
                               Tape::Id d_weight, Tape::Id d_bias);

/// Convenience non-training form (D given as plain tensors).
Matrix fuse_features(const Matrix& features, const DownsampleMap& map, const Tensor& d_weight,
                     const Tensor& d_bias);

}  // namespace geospark
