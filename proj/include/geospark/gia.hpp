#pragma once

#include <map>
#include <string>
#include <vector>

#include "geospark/common.hpp"
#include "geospark/tensor.hpp"

namespace geospark {

struct AffineIds {
    Tape::Id weight = -1;
    Tape::Id bias = -1;
};

/// affine - ReLU - affine, hidden width = output width
struct MlpIds {
    Tape::Id w1 = -1, b1 = -1, w2 = -1, b2 = -1;
};

/// Parameter nodes for one geometry-informed aggregation layer of width c.
/// Local branch: phi/psi/alpha projections, theta position encoder, omega
/// weight encoder. Global branch: independent query/key/value and encoders.
struct GiaLayerIds {
    AffineIds phi, psi, alpha;
    MlpIds theta, omega;
    AffineIds phi_global, psi_global, value_global;
    MlpIds theta_global, omega_global;
    AffineIds merge;  // xi
};

/// Registers store parameters on a tape (requires_grad). Memoizes by name so a
/// parameter appears on the tape once per forward pass.
class TapeBinder {
public:
    TapeBinder(Tape& tape, ParameterStore& store) : tape_(&tape), store_(&store) {}

    Tape::Id dense(const std::string& name, std::size_t rows, std::size_t cols);
    AffineIds affine(const std::string& prefix, std::size_t in, std::size_t out);
    MlpIds mlp(const std::string& prefix, std::size_t in, std::size_t hidden, std::size_t out);
    GiaLayerIds gia_layer(const std::string& prefix, std::size_t channels);

    Tape& tape() { return *tape_; }
    const std::map<std::string, Tape::Id>& bound() const { return bound_; }

    // Gradient of `loss` was computed on the tape; folds every bound
    // parameter's gradient into an AdamW update.
    void apply_adamw(const AdamWConfig& config, std::int64_t step);

private:
    Tape* tape_;
    ParameterStore* store_;
    std::map<std::string, Tape::Id> bound_;
};

/// k-NN reference sets for one stage; local rows always start with the point itself.
struct NeighborContext {
    std::size_t k_local = 0;
    std::size_t k_global = 0;
    std::vector<int> local_idx;   // n * k_local, row-major
    std::vector<int> local_rep;   // query index repeated k_local times
    std::vector<int> global_idx;  // n * k_global
    std::vector<int> global_rep;
};

NeighborContext build_neighbor_context(const std::vector<Vec3>& coords,
                                       const std::vector<Vec3>& sp_coords, std::size_t k_local,
                                       std::size_t k_global);

Tape::Id apply_mlp(Tape& tape, Tape::Id x, const MlpIds& mlp);

// Eq-style vector attention over the k_local neighborhood; per-channel
// softmax along the neighbor axis.
Tape::Id local_vector_attention(Tape& tape, Tape::Id feats, const std::vector<Vec3>& coords,
                                const NeighborContext& ctx, const GiaLayerIds& layer);

// Query from points, key/value from superpoints; k_global == 0 yields zeros.
Tape::Id partition_attention(Tape& tape, Tape::Id feats, const std::vector<Vec3>& coords,
                             Tape::Id sp_feats, const std::vector<Vec3>& sp_coords,
                             const NeighborContext& ctx, const GiaLayerIds& layer);

// xi applied to the sum of the two branches.
Tape::Id geometry_informed_aggregation(Tape& tape, Tape::Id feats,
                                       const std::vector<Vec3>& coords, Tape::Id sp_feats,
                                       const std::vector<Vec3>& sp_coords,
                                       const NeighborContext& ctx, const GiaLayerIds& layer);

}  // namespace geospark
