#pragma once

#include <vector>

#include "geospark/cloud.hpp"
#include "geospark/common.hpp"
#include "geospark/partition.hpp"
#include "geospark/tensor.hpp"

namespace geospark {

/// One fused point per geometric partition: mean coordinate, max-pooled
/// embedded feature, global descriptor (diameter, member fraction).
struct SuperpointSet {
    std::vector<Vec3> coords;   // m
    Matrix features;            // m x c_out
    Matrix global_desc;         // m x 2
    std::vector<int> source;    // point -> superpoint id, total and surjective
};

inline constexpr std::size_t kGlobalDescDim = 2;

/// Affine T1 (+ReLU) before the pool, affine T2 after the descriptor concat.
struct SuperpointEmbedParams {
    Tensor t1_weight, t1_bias;  // c_in x c_mid
    Tensor t2_weight, t2_bias;  // (c_mid + 2) x c_out
};

// Bbox-diagonal diameter of every partition.
std::vector<double> partition_diameter(const PartitionResult& partition, const PointCloud& cloud);

SuperpointSet embed_superpoints(const Matrix& point_features, const PartitionResult& partition,
                                const PointCloud& cloud, const SuperpointEmbedParams& params);

/// Tape variant used inside the network; returns the m x c_out feature node.
/// `global_desc` rows are (diameter, member_count / n).
Tape::Id embed_superpoints_on_tape(Tape& tape, Tape::Id point_features,
                                   const PartitionResult& partition, Tape::Id t1_weight,
                                   Tape::Id t1_bias, Tape::Id t2_weight, Tape::Id t2_bias,
                                   const Matrix& global_desc);

Matrix superpoint_global_desc(const PartitionResult& partition, const PointCloud& cloud);

std::vector<Vec3> superpoint_coords(const PartitionResult& partition, const PointCloud& cloud);

/// Per-partition label distribution; rows sum to 1.
struct SoftLabelSet {
    Matrix w;  // m x L
};

SoftLabelSet soft_pseudo_labels(const std::vector<int>& labels, const PartitionResult& partition,
                                int num_classes);

}  // namespace geospark
