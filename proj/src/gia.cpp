#include "geospark/gia.hpp"

#include <algorithm>

#include "geospark/cloud.hpp"

namespace geospark {

Tape::Id TapeBinder::dense(const std::string& name, std::size_t rows, std::size_t cols) {
    auto it = bound_.find(name);
    if (it != bound_.end()) return it->second;
    Parameter& p = rows == 1 ? store_->zeros(name, rows, cols) : store_->dense(name, rows, cols);
    Tape::Id id = tape_->input(p.value, /*requires_grad=*/true);
    bound_.emplace(name, id);
    return id;
}

AffineIds TapeBinder::affine(const std::string& prefix, std::size_t in, std::size_t out) {
    return {dense(prefix + ".w", in, out), dense(prefix + ".b", 1, out)};
}

MlpIds TapeBinder::mlp(const std::string& prefix, std::size_t in, std::size_t hidden,
                       std::size_t out) {
    return {dense(prefix + ".w1", in, hidden), dense(prefix + ".b1", 1, hidden),
            dense(prefix + ".w2", hidden, out), dense(prefix + ".b2", 1, out)};
}

GiaLayerIds TapeBinder::gia_layer(const std::string& prefix, std::size_t c) {
    GiaLayerIds layer;
    layer.phi = affine(prefix + ".phi", c, c);
    layer.psi = affine(prefix + ".psi", c, c);
    layer.alpha = affine(prefix + ".alpha", c, c);
    layer.theta = mlp(prefix + ".theta", 3, c, c);
    layer.omega = mlp(prefix + ".omega", c, c, c);
    layer.phi_global = affine(prefix + ".phi_g", c, c);
    layer.psi_global = affine(prefix + ".psi_g", c, c);
    layer.value_global = affine(prefix + ".value_g", c, c);
    layer.theta_global = mlp(prefix + ".theta_g", 3, c, c);
    layer.omega_global = mlp(prefix + ".omega_g", c, c, c);
    layer.merge = affine(prefix + ".xi", c, c);
    return layer;
}

void TapeBinder::apply_adamw(const AdamWConfig& config, std::int64_t step) {
    for (const auto& [name, id] : bound_) {
        Parameter& p = store_->at(name);
        adamw_step(p, tape_->grad(id), config, step);
    }
}

NeighborContext build_neighbor_context(const std::vector<Vec3>& coords,
                                       const std::vector<Vec3>& sp_coords, std::size_t k_local,
                                       std::size_t k_global) {
    if (k_local < 1) throw ArgumentError("build_neighbor_context requires k_local >= 1");
    std::size_t n = coords.size();
    NeighborContext ctx;
    ctx.k_local = std::min(k_local, n);

    KnnIndex index(coords);
    ctx.local_idx.reserve(n * ctx.k_local);
    ctx.local_rep.reserve(n * ctx.k_local);
    std::vector<int> idx;
    std::vector<double> dist;
    for (std::size_t i = 0; i < n; ++i) {
        // self first, then the nearest k_local - 1 others
        index.query(coords[i], ctx.k_local + 1, idx, dist);
        std::size_t taken = 1;
        ctx.local_idx.push_back(static_cast<int>(i));
        for (int j : idx) {
            if (taken == ctx.k_local) break;
            if (j == static_cast<int>(i)) continue;
            ctx.local_idx.push_back(j);
            ++taken;
        }
        for (; taken < ctx.k_local; ++taken)
            ctx.local_idx.push_back(static_cast<int>(i));  // pad with self on tiny clouds
        for (std::size_t r = 0; r < ctx.k_local; ++r) ctx.local_rep.push_back(static_cast<int>(i));
    }

    if (k_global > 0) {
        if (sp_coords.empty())
            throw ArgumentError("build_neighbor_context: k_global > 0 with no superpoints");
        ctx.k_global = std::min(k_global, sp_coords.size());
        KnnIndex sp_index(sp_coords);
        for (std::size_t i = 0; i < n; ++i) {
            sp_index.query(coords[i], ctx.k_global, idx, dist);
            for (int j : idx) ctx.global_idx.push_back(j);
            for (std::size_t r = 0; r < ctx.k_global; ++r)
                ctx.global_rep.push_back(static_cast<int>(i));
        }
    }
    return ctx;
}

Tape::Id apply_mlp(Tape& tape, Tape::Id x, const MlpIds& mlp) {
    return tape.affine(tape.relu(tape.affine(x, mlp.w1, mlp.b1)), mlp.w2, mlp.b2);
}

namespace {

Tensor position_differences(const std::vector<Vec3>& query_coords,
                            const std::vector<int>& rep, const std::vector<Vec3>& ref_coords,
                            const std::vector<int>& idx) {
    Tensor diff(idx.size(), 3);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        Vec3 d = query_coords[rep[r]] - ref_coords[idx[r]];
        diff(r, 0) = d[0];
        diff(r, 1) = d[1];
        diff(r, 2) = d[2];
    }
    return diff;
}

}  // namespace

Tape::Id local_vector_attention(Tape& tape, Tape::Id feats, const std::vector<Vec3>& coords,
                                const NeighborContext& ctx, const GiaLayerIds& layer) {
    if (ctx.k_local == 0 || ctx.local_idx.empty())
        throw ArgumentError("local_vector_attention: empty neighbor context");
    Tape::Id pos = tape.input(position_differences(coords, ctx.local_rep, coords, ctx.local_idx));
    Tape::Id delta = apply_mlp(tape, pos, layer.theta);

    Tape::Id phi_all = tape.affine(feats, layer.phi.weight, layer.phi.bias);
    Tape::Id psi_all = tape.affine(feats, layer.psi.weight, layer.psi.bias);
    Tape::Id alpha_all = tape.affine(feats, layer.alpha.weight, layer.alpha.bias);

    Tape::Id phi_j = tape.gather_rows(phi_all, ctx.local_idx);
    Tape::Id psi_i = tape.gather_rows(psi_all, ctx.local_rep);
    Tape::Id weights = apply_mlp(tape, tape.add(tape.sub(phi_j, psi_i), delta), layer.omega);
    Tape::Id attn = tape.block_softmax(weights, ctx.k_local);

    Tape::Id values = tape.add(tape.gather_rows(alpha_all, ctx.local_idx), delta);
    return tape.block_sum(tape.mul(attn, values), ctx.k_local);
}

Tape::Id partition_attention(Tape& tape, Tape::Id feats, const std::vector<Vec3>& coords,
                             Tape::Id sp_feats, const std::vector<Vec3>& sp_coords,
                             const NeighborContext& ctx, const GiaLayerIds& layer) {
    std::size_t n = tape.value(feats).rows;
    std::size_t c = tape.value(feats).cols;
    if (ctx.k_global == 0) return tape.input(Tensor(n, c));
    if (sp_coords.empty())
        throw ArgumentError("partition_attention: k_global > 0 requires superpoints");

    Tape::Id pos =
        tape.input(position_differences(coords, ctx.global_rep, sp_coords, ctx.global_idx));
    Tape::Id delta = apply_mlp(tape, pos, layer.theta_global);

    Tape::Id query_all = tape.affine(feats, layer.phi_global.weight, layer.phi_global.bias);
    Tape::Id key_all = tape.affine(sp_feats, layer.psi_global.weight, layer.psi_global.bias);
    Tape::Id value_all = tape.affine(sp_feats, layer.value_global.weight, layer.value_global.bias);

    Tape::Id query_i = tape.gather_rows(query_all, ctx.global_rep);
    Tape::Id key_j = tape.gather_rows(key_all, ctx.global_idx);
    Tape::Id weights =
        apply_mlp(tape, tape.add(tape.sub(query_i, key_j), delta), layer.omega_global);
    Tape::Id attn = tape.block_softmax(weights, ctx.k_global);

    Tape::Id values = tape.add(tape.gather_rows(value_all, ctx.global_idx), delta);
    return tape.block_sum(tape.mul(attn, values), ctx.k_global);
}

Tape::Id geometry_informed_aggregation(Tape& tape, Tape::Id feats,
                                       const std::vector<Vec3>& coords, Tape::Id sp_feats,
                                       const std::vector<Vec3>& sp_coords,
                                       const NeighborContext& ctx, const GiaLayerIds& layer) {
    Tape::Id local = local_vector_attention(tape, feats, coords, ctx, layer);
    Tape::Id global = partition_attention(tape, feats, coords, sp_feats, sp_coords, ctx, layer);
    return tape.affine(tape.add(local, global), layer.merge.weight, layer.merge.bias);
}

}  // namespace geospark
