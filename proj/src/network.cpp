#include "geospark/network.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "geospark/geom_features.hpp"

namespace geospark {

namespace {

std::vector<std::size_t> parse_size_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

template <typename T>
std::string join_list(const std::vector<T>& v) {
    std::ostringstream out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ',';
        out << v[i];
    }
    return out.str();
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void NetworkConfig::validate() const {
    if (stage_dims.empty()) throw ArgumentError("config: stage_dims empty");
    if (stage_dims.size() != depths.size())
        throw ArgumentError("config: stage_dims/depths length mismatch");
    if (stage_dims.size() != gd_caps.size() + 1)
        throw ArgumentError("config: need len(gd_caps) == len(stage_dims) - 1");
    for (std::size_t d : stage_dims)
        if (d == 0) throw ArgumentError("config: stage dim must be positive");
    for (int d : depths)
        if (d < 1) throw ArgumentError("config: depth must be >= 1");
    for (double c : gd_caps)
        if (!(c > 0.0)) throw ArgumentError("config: gd cap must be positive");
    if (k_local < 1) throw ArgumentError("config: k_local must be >= 1");
    if (k_global < 0) throw ArgumentError("config: k_global must be >= 0");
    if (beta < 0.0) throw ArgumentError("config: beta must be nonnegative");
    if (!(lr > 0.0)) throw ArgumentError("config: lr must be positive");
    if (lambda < 0.0) throw ArgumentError("config: lambda must be nonnegative");
    if (num_classes < 1) throw ArgumentError("config: num_classes must be >= 1");
    if (sampling != "gd" && sampling != "fps" && sampling != "voxel")
        throw ArgumentError("config: sampling must be gd, fps or voxel");
    if (!(fps_ratio > 0.0 && fps_ratio <= 1.0))
        throw ArgumentError("config: fps_ratio must be in (0, 1]");
}

void NetworkConfig::set(const std::string& key, const std::string& value) {
    if (key == "stage_dims") stage_dims = parse_size_list(value);
    else if (key == "depths") depths = parse_int_list(value);
    else if (key == "gd_caps") gd_caps = parse_double_list(value);
    else if (key == "k_local") k_local = std::stoi(value);
    else if (key == "k_global") k_global = std::stoi(value);
    else if (key == "k_sp") k_sp = std::stoi(value);
    else if (key == "sp_dia_cap") sp_dia_cap = std::stod(value);
    else if (key == "lambda") lambda = std::stod(value);
    else if (key == "beta") beta = std::stod(value);
    else if (key == "lr") lr = std::stod(value);
    else if (key == "weight_decay") weight_decay = std::stod(value);
    else if (key == "epochs") epochs = std::stoi(value);
    else if (key == "batch") batch = std::stoi(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "num_classes") num_classes = std::stoi(value);
    else if (key == "k_adj") k_adj = std::stoi(value);
    else if (key == "k_geo") k_geo = std::stoi(value);
    else if (key == "sampling") sampling = value;
    else if (key == "fps_ratio") fps_ratio = std::stod(value);
    else throw ArgumentError("config: unknown key '" + key + "'");
}

std::string NetworkConfig::to_string() const {
    std::ostringstream out;
    out << "stage_dims = " << join_list(stage_dims) << "\n";
    out << "depths = " << join_list(depths) << "\n";
    out << "gd_caps = " << join_list(gd_caps) << "\n";
    out << "k_local = " << k_local << "\n";
    out << "k_global = " << k_global << "\n";
    out << "k_sp = " << k_sp << "\n";
    out << "sp_dia_cap = " << sp_dia_cap << "\n";
    out << "lambda = " << lambda << "\n";
    out << "beta = " << beta << "\n";
    out << "lr = " << lr << "\n";
    out << "weight_decay = " << weight_decay << "\n";
    out << "epochs = " << epochs << "\n";
    out << "batch = " << batch << "\n";
    out << "seed = " << seed << "\n";
    out << "num_classes = " << num_classes << "\n";
    out << "k_adj = " << k_adj << "\n";
    out << "k_geo = " << k_geo << "\n";
    out << "sampling = " << sampling << "\n";
    out << "fps_ratio = " << fps_ratio << "\n";
    return out.str();
}

NetworkConfig NetworkConfig::preset(const std::string& name) {
    NetworkConfig cfg;
    if (name == "s3dis") {
        cfg.lambda = 3.0;
        cfg.gd_caps = {0.10, 0.20, 0.40, 0.80};
        cfg.sp_dia_cap = 1.0;
    } else if (name == "scannet") {
        cfg.lambda = 2.0;
        cfg.gd_caps = {0.25, 0.50, 0.75, 1.00};
        cfg.sp_dia_cap = 3.0;
        cfg.lr = 0.005;
        cfg.weight_decay = 0.05;
    } else if (name == "toy") {
        cfg.stage_dims = {16, 32, 64};
        cfg.depths = {1, 1, 1};
        cfg.gd_caps = {0.35, 0.70};
        cfg.k_local = 8;
        cfg.k_global = 4;
        cfg.k_sp = 4;
        cfg.sp_dia_cap = 1.0;
        cfg.lambda = 0.5;
        cfg.epochs = 200;
    } else {
        throw ArgumentError("unknown config preset: " + name);
    }
    cfg.validate();
    return cfg;
}

namespace {

NetworkConfig parse_config_stream(std::istream& in, const std::string& where) {
    NetworkConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(where + ":" + std::to_string(line_no) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

}  // namespace

NetworkConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config: " + path);
    return parse_config_stream(in, path);
}

NetworkConfig config_from_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config_stream(in, "<config>");
}

SceneInput preprocess_scene(const PointCloud& cloud, const NetworkConfig& config) {
    config.validate();
    cloud.validate(cloud.has_labels() ? config.num_classes : -1);

    SceneInput input;
    input.cloud = cloud;
    std::size_t n = cloud.size();

    GeomFeatureSet geom = compute_geometric_features(
        cloud, std::min<std::size_t>(config.k_geo, n));

    input.point_features = Matrix(n, kPointInputDim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < kGeomFeatureCount; ++c)
            input.point_features(i, c) = geom.features(i, c);
        if (cloud.has_colors())
            for (int c = 0; c < 3; ++c) input.point_features(i, 4 + c) = cloud.colors[i][c];
        input.point_features(i, 7) = cloud.coords[i][2];
    }

    PartitionProblem problem;
    problem.graph = build_adjacency(cloud, std::min<std::size_t>(config.k_adj, n - 1));
    problem.features = geom.features;
    problem.lambda = config.lambda;
    PartitionResult raw = cut_pursuit(problem);
    input.partition = enforce_diameter_cap(raw, problem, cloud, config.sp_dia_cap);

    input.sp_coords = superpoint_coords(input.partition, cloud);
    input.sp_global_desc = superpoint_global_desc(input.partition, cloud);
    if (cloud.has_labels())
        input.soft_labels =
            soft_pseudo_labels(cloud.labels, input.partition, config.num_classes).w;
    return input;
}

GeoSparkNetwork::GeoSparkNetwork(const NetworkConfig& config, ParameterStore& store)
    : config_(config), store_(&store) {
    config_.validate();
}

namespace {

std::vector<int> fps_indices(const std::vector<Vec3>& coords, std::size_t count) {
    PointCloud tmp;
    tmp.coords = coords;
    return fps_sample(tmp, count, 0);
}

// 3-NN inverse-distance interpolation context from coarse to fine.
struct InterpContext {
    std::vector<int> idx;    // fine * k flat indices into coarse
    Tensor weights;          // (fine * k) x channels, rows sum to 1 per fine point
    std::size_t k = 0;
};

InterpContext build_interp(const std::vector<Vec3>& fine, const std::vector<Vec3>& coarse,
                           std::size_t channels) {
    InterpContext ctx;
    ctx.k = std::min<std::size_t>(3, coarse.size());
    KnnIndex index(coarse);
    ctx.idx.reserve(fine.size() * ctx.k);
    ctx.weights = Tensor(fine.size() * ctx.k, channels);
    std::vector<int> idx;
    std::vector<double> dist;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        index.query(fine[i], ctx.k, idx, dist);
        double sum = 0.0;
        std::vector<double> w(ctx.k);
        for (std::size_t j = 0; j < ctx.k; ++j) {
            w[j] = 1.0 / std::max(dist[j], 1e-12);
            sum += w[j];
        }
        for (std::size_t j = 0; j < ctx.k; ++j) {
            ctx.idx.push_back(idx[j]);
            for (std::size_t c = 0; c < channels; ++c)
                ctx.weights(i * ctx.k + j, c) = w[j] / sum;
        }
    }
    return ctx;
}

}  // namespace

ForwardOutput GeoSparkNetwork::forward(const SceneInput& scene, bool with_loss) {
    const NetworkConfig& cfg = config_;
    std::size_t stages = cfg.num_stages();
    std::size_t n = scene.cloud.size();
    if (n == 0) throw ArgumentError("forward: empty scene");
    if (scene.partition.component.size() != n)
        throw ArgumentError("forward: partition/cloud size mismatch");

    ForwardOutput out;
    Tape& tape = out.tape;
    TapeBinder bind(tape, *store_);

    Tape::Id point_input = tape.input(Tensor::from_matrix(scene.point_features));

    // ---- global branch: superpoint embedding + per-stage self-attention ----
    std::vector<Tape::Id> sp_feats_per_stage(stages, -1);
    std::vector<std::vector<Vec3>> sp_coords_per_stage(stages);
    bool global_on = cfg.use_global();
    if (global_on) {
        AffineIds t1 = bind.affine("sp_embed.t1", kPointInputDim, cfg.stage_dims[0]);
        AffineIds t2 =
            bind.affine("sp_embed.t2", cfg.stage_dims[0] + kGlobalDescDim, cfg.stage_dims[0]);
        Tape::Id g = embed_superpoints_on_tape(tape, point_input, scene.partition, t1.weight,
                                               t1.bias, t2.weight, t2.bias, scene.sp_global_desc);
        std::vector<Vec3> sp_coords = scene.sp_coords;
        for (std::size_t s = 0; s < stages; ++s) {
            std::size_t m = sp_coords.size();
            out.sp_counts.push_back(m);
            NeighborContext ctx = build_neighbor_context(
                sp_coords, {}, std::min<std::size_t>(cfg.k_sp, m), 0);
            GiaLayerIds layer =
                bind.gia_layer("global.s" + std::to_string(s), cfg.stage_dims[s]);
            g = tape.add(g, local_vector_attention(tape, g, sp_coords, ctx, layer));
            sp_feats_per_stage[s] = g;
            sp_coords_per_stage[s] = sp_coords;
            if (s == 0) {
                AffineIds head = bind.affine("sp_head", cfg.stage_dims[0], cfg.num_classes);
                out.sp_logits = tape.affine(g, head.weight, head.bias);
            }
            if (s + 1 < stages) {
                std::size_t next_m = (m + 1) / 2;  // ceil halving
                std::vector<int> keep = fps_indices(sp_coords, next_m);
                AffineIds proj = bind.affine("global.proj" + std::to_string(s),
                                             cfg.stage_dims[s], cfg.stage_dims[s + 1]);
                g = tape.affine(tape.gather_rows(g, keep), proj.weight, proj.bias);
                std::vector<Vec3> next_coords;
                next_coords.reserve(next_m);
                for (int i : keep) next_coords.push_back(sp_coords[i]);
                sp_coords = std::move(next_coords);
            }
        }
    }

    // ---- local branch encoder ----
    AffineIds embed = bind.affine("embed", kPointInputDim, cfg.stage_dims[0]);
    Tape::Id f = tape.relu(tape.affine(point_input, embed.weight, embed.bias));
    std::vector<Vec3> coords = scene.cloud.coords;
    std::vector<int> part_ids = scene.partition.component;

    std::vector<Tape::Id> skip(stages, -1);
    std::vector<std::vector<Vec3>> coords_per_stage(stages);

    for (std::size_t s = 0; s < stages; ++s) {
        NeighborContext ctx = build_neighbor_context(
            coords, global_on ? sp_coords_per_stage[s] : std::vector<Vec3>{},
            std::min<std::size_t>(cfg.k_local, coords.size()),
            global_on ? cfg.k_global : 0);
        for (int d = 0; d < cfg.depths[s]; ++d) {
            GiaLayerIds layer = bind.gia_layer(
                "enc.s" + std::to_string(s) + ".d" + std::to_string(d), cfg.stage_dims[s]);
            Tape::Id sp_in = global_on ? sp_feats_per_stage[s] : f;
            f = tape.add(f, geometry_informed_aggregation(
                                tape, f, coords, sp_in,
                                global_on ? sp_coords_per_stage[s] : std::vector<Vec3>{}, ctx,
                                layer));
        }
        skip[s] = f;
        coords_per_stage[s] = coords;

        if (s + 1 < stages) {
            AffineIds proj = bind.affine("enc.proj" + std::to_string(s), cfg.stage_dims[s],
                                         cfg.stage_dims[s + 1]);
            if (cfg.sampling == "fps") {
                std::size_t count = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::ceil(coords.size() * cfg.fps_ratio)));
                std::vector<int> keep = fps_indices(coords, count);
                f = tape.gather_rows(f, keep);
                std::vector<Vec3> next_coords;
                std::vector<int> next_parts;
                for (int i : keep) {
                    next_coords.push_back(coords[i]);
                    next_parts.push_back(part_ids[i]);
                }
                coords = std::move(next_coords);
                part_ids = std::move(next_parts);
            } else {
                DownsampleMap map =
                    cfg.sampling == "voxel"
                        ? voxel_downsample_map(coords, cfg.gd_caps[s])
                        : geometric_downsample_map(coords, part_ids, cfg.gd_caps[s]);
                AffineIds fuse = bind.affine("enc.fuse" + std::to_string(s), cfg.stage_dims[s],
                                             cfg.stage_dims[s]);
                f = fuse_features_on_tape(tape, f, map, fuse.weight, fuse.bias);
                coords = map.coarse_coords;
                part_ids = map.coarse_partition;
            }
            f = tape.relu(tape.affine(f, proj.weight, proj.bias));
        }
    }

    // ---- decoder: coarse-to-fine with skip connections ----
    for (std::size_t s = stages - 1; s > 0; --s) {
        const auto& fine = coords_per_stage[s - 1];
        const auto& coarse = coords_per_stage[s];
        InterpContext interp = build_interp(fine, coarse, cfg.stage_dims[s]);
        Tape::Id gathered = tape.gather_rows(f, interp.idx);
        Tape::Id weighted = tape.mul(gathered, tape.input(interp.weights));
        Tape::Id up = tape.block_sum(weighted, interp.k);
        AffineIds down_proj = bind.affine("dec.proj" + std::to_string(s), cfg.stage_dims[s],
                                          cfg.stage_dims[s - 1]);
        up = tape.affine(up, down_proj.weight, down_proj.bias);
        AffineIds mix = bind.affine("dec.mix" + std::to_string(s), cfg.stage_dims[s - 1],
                                    cfg.stage_dims[s - 1]);
        f = tape.relu(tape.affine(tape.add(up, skip[s - 1]), mix.weight, mix.bias));
    }

    AffineIds head = bind.affine("head", cfg.stage_dims[0], cfg.num_classes);
    out.point_logits = tape.affine(f, head.weight, head.bias);

    if (with_loss) {
        if (!scene.cloud.has_labels()) throw ArgumentError("forward: loss requires labels");
        Tensor onehot(n, cfg.num_classes);
        for (std::size_t i = 0; i < n; ++i) onehot(i, scene.cloud.labels[i]) = 1.0;
        Tape::Id point_ce = tape.cross_entropy(out.point_logits, tape.input(std::move(onehot)));
        if (global_on && cfg.beta > 0.0) {
            Tape::Id sp_ce = tape.cross_entropy(
                out.sp_logits, tape.input(Tensor::from_matrix(scene.soft_labels)));
            out.loss = tape.add(point_ce, tape.scale(sp_ce, cfg.beta));
        } else {
            out.loss = point_ce;
        }
    }

    out.param_ids = bind.bound();
    return out;
}

std::vector<int> GeoSparkNetwork::predict(const SceneInput& scene) {
    ForwardOutput out = forward(scene, false);
    const Tensor& logits = out.tape.value(out.point_logits);
    std::vector<int> pred(logits.rows);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        int best = 0;
        for (std::size_t c = 1; c < logits.cols; ++c)
            if (logits(i, c) > logits(i, best)) best = static_cast<int>(c);
        pred[i] = best;
    }
    return pred;
}

double GeoSparkNetwork::train_step(const SceneInput& scene) {
    ForwardOutput out = forward(scene, true);
    out.tape.backward(out.loss);
    AdamWConfig adam{config_.lr, config_.weight_decay, 0.9, 0.999, 1e-8};
    std::int64_t step = store_->next_step();
    for (const auto& [name, id] : out.param_ids)
        adamw_step(store_->at(name), out.tape.grad(id), adam, step);
    return out.tape.value(out.loss).scalar();
}

SegmentationMetrics evaluate_scenes(GeoSparkNetwork& network,
                                    const std::vector<SceneInput>& scenes) {
    ConfusionMatrix cm(network.config().num_classes);
    for (const SceneInput& scene : scenes) {
        std::vector<int> pred = network.predict(scene);
        cm.add_all(pred, scene.cloud.labels);
    }
    return cm.metrics();
}

TrainResult train_network(GeoSparkNetwork& network, const std::vector<SceneInput>& train_scenes,
                          const std::vector<SceneInput>& val_scenes, const std::string& out_dir,
                          bool resume) {
    if (train_scenes.empty()) throw ArgumentError("train: empty dataset");
    const NetworkConfig& cfg = network.config();
    std::filesystem::create_directories(out_dir);
    std::string last_path = out_dir + "/last.ckpt";
    std::string best_path = out_dir + "/best.ckpt";
    std::string metrics_path = out_dir + "/metrics.csv";

    int start_epoch = 0;
    TrainResult result;
    std::ofstream metrics_out;
    if (resume && std::filesystem::exists(last_path)) {
        auto extras = network.store().load(last_path);
        start_epoch = std::stoi(extras.at("epoch")) + 1;
        result.best_miou = std::stod(extras.at("best_miou"));
        result.best_epoch = std::stoi(extras.at("best_epoch"));
        metrics_out.open(metrics_path, std::ios::app);
    } else {
        metrics_out.open(metrics_path);
        metrics_out << "epoch,loss,mIoU,mAcc,OA\n";
    }

    for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        // stateless per-epoch shuffle keeps resume trajectories identical
        std::vector<int> order(train_scenes.size());
        std::iota(order.begin(), order.end(), 0);
        SplitMix64 shuffle_rng(cfg.seed * 0x9e3779b97f4a7c15ULL + epoch + 1);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double loss_sum = 0.0;
        for (int i : order) loss_sum += network.train_step(train_scenes[i]);
        double mean_loss = loss_sum / static_cast<double>(train_scenes.size());

        SegmentationMetrics metrics =
            val_scenes.empty() ? evaluate_scenes(network, train_scenes)
                               : evaluate_scenes(network, val_scenes);

        EpochLog log{epoch, mean_loss, metrics.miou, metrics.macc, metrics.oa};
        result.logs.push_back(log);
        metrics_out << epoch << ',' << mean_loss << ',' << metrics.miou << ',' << metrics.macc
                    << ',' << metrics.oa << '\n';
        metrics_out.flush();

        if (metrics.miou > result.best_miou || result.best_epoch < 0) {
            result.best_miou = metrics.miou;
            result.best_epoch = epoch;
            network.store().save(best_path, {{"epoch", std::to_string(epoch)},
                                             {"config", cfg.to_string()}});
        }
        network.store().save(last_path,
                             {{"epoch", std::to_string(epoch)},
                              {"best_miou", std::to_string(result.best_miou)},
                              {"best_epoch", std::to_string(result.best_epoch)},
                              {"config", cfg.to_string()}});
    }
    return result;
}

}  // namespace geospark
