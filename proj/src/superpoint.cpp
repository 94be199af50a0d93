#include "geospark/superpoint.hpp"

#include <cmath>

namespace geospark {

std::vector<double> partition_diameter(const PartitionResult& partition, const PointCloud& cloud) {
    std::size_t m = partition.num_components();
    std::vector<std::vector<int>> members(m);
    for (std::size_t i = 0; i < partition.component.size(); ++i)
        members[partition.component[i]].push_back(static_cast<int>(i));
    std::vector<double> diameters(m, 0.0);
    for (std::size_t j = 0; j < m; ++j)
        diameters[j] = bounding_box(cloud.coords, members[j]).diagonal();
    return diameters;
}

std::vector<Vec3> superpoint_coords(const PartitionResult& partition, const PointCloud& cloud) {
    std::size_t m = partition.num_components();
    std::vector<Vec3> coords(m, Vec3{0, 0, 0});
    std::vector<double> counts(m, 0.0);
    for (std::size_t i = 0; i < partition.component.size(); ++i) {
        int j = partition.component[i];
        coords[j] = coords[j] + cloud.coords[i];
        counts[j] += 1.0;
    }
    for (std::size_t j = 0; j < m; ++j)
        coords[j] = {coords[j][0] / counts[j], coords[j][1] / counts[j],
                     coords[j][2] / counts[j]};
    return coords;
}

Matrix superpoint_global_desc(const PartitionResult& partition, const PointCloud& cloud) {
    std::size_t m = partition.num_components();
    std::size_t n = partition.component.size();
    Matrix desc(m, kGlobalDescDim);
    auto diameters = partition_diameter(partition, cloud);
    std::vector<double> counts(m, 0.0);
    for (int c : partition.component) counts[c] += 1.0;
    for (std::size_t j = 0; j < m; ++j) {
        desc(j, 0) = diameters[j];
        desc(j, 1) = counts[j] / static_cast<double>(n);
    }
    return desc;
}

Tape::Id embed_superpoints_on_tape(Tape& tape, Tape::Id point_features,
                                   const PartitionResult& partition, Tape::Id t1_weight,
                                   Tape::Id t1_bias, Tape::Id t2_weight, Tape::Id t2_bias,
                                   const Matrix& global_desc) {
    std::size_t m = partition.num_components();
    if (tape.value(point_features).rows != partition.component.size())
        throw ArgumentError("embed_superpoints: features/partition size mismatch");
    Tape::Id lifted = tape.relu(tape.affine(point_features, t1_weight, t1_bias));
    Tape::Id pooled = tape.segment_max(lifted, partition.component, m);
    Tape::Id desc = tape.input(Tensor::from_matrix(global_desc));
    Tape::Id joined = tape.concat_cols(pooled, desc);
    return tape.affine(joined, t2_weight, t2_bias);
}

SuperpointSet embed_superpoints(const Matrix& point_features, const PartitionResult& partition,
                                const PointCloud& cloud, const SuperpointEmbedParams& params) {
    SuperpointSet sp;
    sp.coords = superpoint_coords(partition, cloud);
    sp.global_desc = superpoint_global_desc(partition, cloud);
    sp.source = partition.component;

    Tape tape;
    Tape::Id feats = tape.input(Tensor::from_matrix(point_features));
    Tape::Id out = embed_superpoints_on_tape(
        tape, feats, partition, tape.input(params.t1_weight), tape.input(params.t1_bias),
        tape.input(params.t2_weight), tape.input(params.t2_bias), sp.global_desc);
    const Tensor& value = tape.value(out);
    sp.features = Matrix(value.rows, value.cols);
    sp.features.data = value.v;
    return sp;
}

SoftLabelSet soft_pseudo_labels(const std::vector<int>& labels, const PartitionResult& partition,
                                int num_classes) {
    if (labels.size() != partition.component.size())
        throw ArgumentError("soft_pseudo_labels: labels/partition size mismatch");
    std::size_t m = partition.num_components();
    SoftLabelSet out;
    out.w = Matrix(m, num_classes);
    std::vector<double> counts(m, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        int l = labels[i];
        if (l < 0 || l >= num_classes)
            throw ArgumentError("soft_pseudo_labels: label out of range");
        out.w(partition.component[i], l) += 1.0;
        counts[partition.component[i]] += 1.0;
    }
    for (std::size_t j = 0; j < m; ++j)
        for (int l = 0; l < num_classes; ++l) out.w(j, l) /= counts[j];
    return out;
}

}  // namespace geospark
