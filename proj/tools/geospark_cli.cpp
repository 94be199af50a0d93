// geospark: command-line front end for the partition / downsample / train pipeline.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "geospark/cloud.hpp"
#include "geospark/downsample.hpp"
#include "geospark/geom_features.hpp"
#include "geospark/metrics.hpp"
#include "geospark/network.hpp"
#include "geospark/partition.hpp"
#include "geospark/superpoint.hpp"
#include "geospark/synthetic.hpp"

namespace fs = std::filesystem;
using namespace geospark;

namespace {

NetworkConfig resolve_config(const std::string& preset, const std::string& config_path,
                             const std::vector<std::string>& sets, std::uint64_t seed,
                             bool seed_given) {
    NetworkConfig cfg = NetworkConfig::preset(preset);
    if (!config_path.empty()) cfg = load_config(config_path);
    for (const std::string& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ArgumentError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed_given) cfg.seed = seed;
    cfg.validate();
    return cfg;
}

SceneInput preprocess_or_die(const std::string& path, const NetworkConfig& cfg) {
    PointCloud cloud = load_point_cloud(path, format_from_path(path));
    return preprocess_scene(cloud, cfg);
}

std::vector<std::string> list_clouds(const std::string& dir) {
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string ext = entry.path().extension().string();
        if (ext == ".xyz" || ext == ".ply") out.push_back(entry.path().string());
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) throw ArgumentError("no .xyz/.ply clouds in " + dir);
    return out;
}

// deterministic distinct-ish colors for component ids
Vec3 id_color(int id) {
    SplitMix64 rng(static_cast<std::uint64_t>(id) * 2654435761u + 12345);
    return {0.15 + 0.7 * rng.uniform(), 0.15 + 0.7 * rng.uniform(),
            0.15 + 0.7 * rng.uniform()};
}

Vec3 class_color(int label) {
    static const Vec3 palette[] = {
        {0.55, 0.55, 0.55}, {0.85, 0.75, 0.50}, {0.55, 0.35, 0.20},
        {0.80, 0.25, 0.20}, {0.20, 0.45, 0.80}, {0.30, 0.70, 0.35},
    };
    if (label >= 0 && label < 6) return palette[label];
    return id_color(label);
}

void write_components_csv(const std::string& path, const std::vector<int>& component) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path);
    out << "point_index,component_id\n";
    for (std::size_t i = 0; i < component.size(); ++i)
        out << i << ',' << component[i] << '\n';
}

int run_features(const std::string& input, const std::string& output, int k_geo) {
    PointCloud cloud = load_point_cloud(input, format_from_path(input));
    GeomFeatureSet set = compute_geometric_features(
        cloud, std::min<std::size_t>(k_geo, cloud.size()));
    std::ofstream out(output);
    if (!out) throw ArgumentError("cannot write " + output);
    out << "linearity,planarity,scattering,verticality\n";
    for (std::size_t i = 0; i < set.features.rows; ++i) {
        for (std::size_t c = 0; c < set.features.cols; ++c)
            out << (c ? "," : "") << set.features(i, c);
        out << '\n';
    }
    return 0;
}

int run_partition(const std::string& input, const std::string& output, const NetworkConfig& cfg,
                  const std::string& sp_csv, const std::string& ply_out) {
    PointCloud cloud = load_point_cloud(input, format_from_path(input));
    auto t0 = std::chrono::steady_clock::now();

    GeomFeatureSet geom = compute_geometric_features(
        cloud, std::min<std::size_t>(cfg.k_geo, cloud.size()));
    PartitionProblem problem;
    problem.graph = build_adjacency(cloud, std::min<std::size_t>(cfg.k_adj, cloud.size() - 1));
    problem.features = geom.features;
    problem.lambda = cfg.lambda;
    PartitionResult result = cut_pursuit(problem);
    result = enforce_diameter_cap(result, problem, cloud, cfg.sp_dia_cap);

    auto t1 = std::chrono::steady_clock::now();
    double secs = std::chrono::duration<double>(t1 - t0).count();

    write_components_csv(output, result.component);
    if (!sp_csv.empty()) {
        std::vector<Vec3> coords = superpoint_coords(result, cloud);
        Matrix desc = superpoint_global_desc(result, cloud);
        std::ofstream out(sp_csv);
        if (!out) throw ArgumentError("cannot write " + sp_csv);
        out << "component_id,x,y,z,diameter,fraction\n";
        for (std::size_t i = 0; i < coords.size(); ++i)
            out << i << ',' << coords[i][0] << ',' << coords[i][1] << ',' << coords[i][2] << ','
                << desc(i, 0) << ',' << desc(i, 1) << '\n';
    }
    if (!ply_out.empty()) {
        PointCloud colored = cloud;
        colored.colors.resize(cloud.size());
        colored.labels.clear();
        for (std::size_t i = 0; i < cloud.size(); ++i)
            colored.colors[i] = id_color(result.component[i]);
        save_point_cloud(colored, ply_out, CloudFormat::Ply);
    }
    std::cout << "components: " << result.num_components() << "\n"
              << "energy: " << result.energy << "\n"
              << "seconds: " << secs << "\n";
    return 0;
}

int run_downsample(const std::string& input, const std::string& method, double cap,
                   double ratio, const std::string& output, const std::string& parent_csv,
                   const NetworkConfig& cfg) {
    PointCloud cloud = load_point_cloud(input, format_from_path(input));
    DownsampleMap map;
    if (method == "fps") {
        std::size_t count = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(cloud.size() * ratio)));
        std::vector<int> keep = fps_sample(cloud, count, 0);
        map.group_of.assign(cloud.size(), -1);
        // FPS keeps points rather than fusing; groups are the kept points, and
        // every other point joins its nearest kept point for the parent map.
        std::vector<Vec3> kept_coords;
        for (int i : keep) kept_coords.push_back(cloud.coords[i]);
        KnnIndex index(kept_coords);
        map.parents.resize(keep.size());
        std::vector<int> idx;
        std::vector<double> dist;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            index.query(cloud.coords[i], 1, idx, dist);
            map.group_of[i] = idx[0];
            map.parents[idx[0]].push_back(static_cast<int>(i));
        }
        map.coarse_coords = kept_coords;
        map.coarse_partition.assign(keep.size(), -1);
    } else if (method == "voxel") {
        map = voxel_downsample_map(cloud.coords, cap);
    } else if (method == "gd") {
        GeomFeatureSet geom = compute_geometric_features(
            cloud, std::min<std::size_t>(cfg.k_geo, cloud.size()));
        PartitionProblem problem;
        problem.graph =
            build_adjacency(cloud, std::min<std::size_t>(cfg.k_adj, cloud.size() - 1));
        problem.features = geom.features;
        problem.lambda = cfg.lambda;
        PartitionResult part = cut_pursuit(problem);
        part = enforce_diameter_cap(part, problem, cloud, cfg.sp_dia_cap);
        map = geometric_downsample_map(cloud.coords, part.component, cap);
    } else {
        throw ArgumentError("unknown downsample method: " + method);
    }

    PointCloud coarse;
    coarse.coords = map.coarse_coords;
    save_point_cloud(coarse, output, format_from_path(output));
    if (!parent_csv.empty()) {
        std::ofstream out(parent_csv);
        if (!out) throw ArgumentError("cannot write " + parent_csv);
        out << "point_index,group_id\n";
        for (std::size_t i = 0; i < map.group_of.size(); ++i)
            out << i << ',' << map.group_of[i] << '\n';
    }
    std::cout << "input_points: " << cloud.size() << "\n"
              << "output_points: " << map.output_count() << "\n";
    return 0;
}

int run_gen(const std::string& spec_path, const std::string& out_dir, int count,
            std::uint64_t seed, bool seed_given) {
    SceneSpec spec = spec_path.empty() ? SceneSpec{} : load_scene_spec(spec_path);
    if (seed_given) spec.seed = seed;
    fs::create_directories(out_dir);
    std::ofstream inv(out_dir + "/inventory.csv");
    if (!inv) throw ArgumentError("cannot write inventory.csv in " + out_dir);
    inv << "scene,object_id,label,class,point_count,dx,dy,dz\n";
    for (int i = 0; i < count; ++i) {
        SceneSpec s = spec;
        s.seed = spec.seed + static_cast<std::uint64_t>(i);
        Scene scene = generate_scene(s);
        std::ostringstream name;
        name << "scene_" << std::setw(4) << std::setfill('0') << i << ".xyz";
        save_point_cloud(scene.cloud, out_dir + "/" + name.str(), CloudFormat::AsciiXyz);
        for (const ObjectRecord& rec : scene.inventory) {
            Vec3 d = rec.bbox.max - rec.bbox.min;
            inv << name.str() << ',' << rec.object_id << ',' << rec.label << ','
                << scene_class_name(rec.label) << ',' << rec.point_count << ',' << d[0] << ','
                << d[1] << ',' << d[2] << '\n';
        }
    }
    std::cout << "scenes: " << count << "\n";
    return 0;
}

int run_train(const std::string& data_dir, const std::string& out_dir, const NetworkConfig& cfg,
              double val_fraction, bool resume) {
    std::vector<std::string> files = list_clouds(data_dir);
    std::size_t val_count = static_cast<std::size_t>(std::lround(files.size() * val_fraction));
    if (val_count >= files.size()) val_count = files.size() - 1;
    std::vector<SceneInput> train_scenes, val_scenes;
    for (std::size_t i = 0; i < files.size(); ++i) {
        SceneInput scene = preprocess_or_die(files[i], cfg);
        if (!scene.cloud.has_labels())
            throw ArgumentError("training cloud lacks labels: " + files[i]);
        (i + val_count < files.size() ? train_scenes : val_scenes).push_back(std::move(scene));
    }
    ParameterStore store(cfg.seed);
    GeoSparkNetwork network(cfg, store);
    TrainResult result = train_network(network, train_scenes, val_scenes, out_dir, resume);
    std::cout << "best_miou: " << result.best_miou << "\n"
              << "best_epoch: " << result.best_epoch << "\n";
    return 0;
}

int run_eval(const std::string& data_dir, const std::string& ckpt) {
    ParameterStore store;
    auto extras = store.load(ckpt);
    NetworkConfig cfg = config_from_string(extras.at("config"));
    GeoSparkNetwork network(cfg, store);
    std::vector<SceneInput> scenes;
    for (const std::string& file : list_clouds(data_dir)) {
        SceneInput scene = preprocess_or_die(file, cfg);
        if (!scene.cloud.has_labels())
            throw ArgumentError("evaluation cloud lacks labels: " + file);
        scenes.push_back(std::move(scene));
    }
    SegmentationMetrics metrics = evaluate_scenes(network, scenes);
    std::cout << "mIoU: " << metrics.miou << "\n"
              << "mAcc: " << metrics.macc << "\n"
              << "OA: " << metrics.oa << "\n";
    return 0;
}

int run_export(const std::string& input, const std::string& output, const std::string& color_by,
               const std::string& ckpt, const NetworkConfig& cfg) {
    PointCloud cloud = load_point_cloud(input, format_from_path(input));
    PointCloud colored = cloud;
    colored.colors.resize(cloud.size());
    if (color_by == "component") {
        GeomFeatureSet geom = compute_geometric_features(
            cloud, std::min<std::size_t>(cfg.k_geo, cloud.size()));
        PartitionProblem problem;
        problem.graph =
            build_adjacency(cloud, std::min<std::size_t>(cfg.k_adj, cloud.size() - 1));
        problem.features = geom.features;
        problem.lambda = cfg.lambda;
        PartitionResult part = cut_pursuit(problem);
        part = enforce_diameter_cap(part, problem, cloud, cfg.sp_dia_cap);
        for (std::size_t i = 0; i < cloud.size(); ++i)
            colored.colors[i] = id_color(part.component[i]);
        colored.labels.clear();
    } else if (color_by == "prediction") {
        if (ckpt.empty()) throw ArgumentError("--color-by prediction requires --ckpt");
        ParameterStore store;
        auto extras = store.load(ckpt);
        NetworkConfig net_cfg = config_from_string(extras.at("config"));
        GeoSparkNetwork network(net_cfg, store);
        SceneInput scene = preprocess_scene(cloud, net_cfg);
        std::vector<int> pred = network.predict(scene);
        for (std::size_t i = 0; i < cloud.size(); ++i)
            colored.colors[i] = class_color(pred[i]);
        colored.labels = pred;
    } else {
        throw ArgumentError("--color-by must be component or prediction");
    }
    save_point_cloud(colored, output, CloudFormat::Ply);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GeoSpark point cloud segmentation pipeline"};
    app.require_subcommand(1);

    std::string input, output, config_path, preset = "s3dis";
    std::vector<std::string> sets;
    std::uint64_t seed = 1;
    bool seed_given = false;

    auto add_config_flags = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key=value config file");
        cmd->add_option("--preset", preset, "config preset: toy, s3dis, scannet")
            ->check(CLI::IsMember({"toy", "s3dis", "scannet"}));
        cmd->add_option("--set", sets, "override, repeatable: --set key=value");
        cmd->add_option("--seed", seed, "random seed")->each([&](const std::string&) {
            seed_given = true;
        });
    };

    // features
    int k_geo = 10;
    auto* features = app.add_subcommand("features", "per-point geometric features to CSV");
    features->add_option("--input", input)->required();
    features->add_option("--output", output)->required();
    features->add_option("--k-geo", k_geo);

    // partition
    std::string sp_csv, ply_out;
    auto* partition = app.add_subcommand("partition", "geometric partition to CSV");
    partition->add_option("--input", input)->required();
    partition->add_option("--output", output)->required();
    partition->add_option("--emit-superpoints", sp_csv, "superpoint coordinates CSV");
    partition->add_option("--ply", ply_out, "color-by-component PLY");
    add_config_flags(partition);

    // downsample
    std::string method = "gd", parent_csv;
    double cap = 0.2, ratio = 0.25;
    auto* downsample = app.add_subcommand("downsample", "coarsen a cloud");
    downsample->add_option("--input", input)->required();
    downsample->add_option("--output", output)->required();
    downsample->add_option("--method", method)->check(CLI::IsMember({"gd", "fps", "voxel"}));
    downsample->add_option("--cap", cap, "target diameter / voxel cell (m)");
    downsample->add_option("--ratio", ratio, "FPS keep ratio");
    downsample->add_option("--parent-map", parent_csv, "point_index,group_id CSV");
    add_config_flags(downsample);

    // gen
    std::string spec_path, out_dir;
    int count = 1;
    auto* gen = app.add_subcommand("gen", "generate labeled synthetic scenes");
    gen->add_option("--spec", spec_path, "scene spec (flat key=value)");
    gen->add_option("--out", out_dir)->required();
    gen->add_option("--count", count, "number of scenes");
    gen->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });

    // train
    std::string data_dir;
    double val_fraction = 0.2;
    bool resume = false;
    auto* train = app.add_subcommand("train", "train on a directory of labeled clouds");
    train->add_option("--data", data_dir)->required();
    train->add_option("--out", out_dir)->required();
    train->add_option("--val-fraction", val_fraction);
    train->add_flag("--resume", resume, "continue from last.ckpt");
    add_config_flags(train);

    // eval
    std::string ckpt;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    eval->add_option("--data", data_dir)->required();
    eval->add_option("--ckpt", ckpt)->required();

    // export
    std::string color_by = "component";
    auto* exp = app.add_subcommand("export", "write a colored PLY");
    exp->add_option("--input", input)->required();
    exp->add_option("--output", output)->required();
    exp->add_option("--color-by", color_by)
        ->check(CLI::IsMember({"component", "prediction"}));
    exp->add_option("--ckpt", ckpt, "checkpoint for prediction coloring");
    add_config_flags(exp);

    CLI11_PARSE(app, argc, argv);

    try {
        NetworkConfig cfg = resolve_config(preset, config_path, sets, seed, seed_given);
        if (features->parsed()) return run_features(input, output, k_geo);
        if (partition->parsed()) return run_partition(input, output, cfg, sp_csv, ply_out);
        if (downsample->parsed())
            return run_downsample(input, method, cap, ratio, output, parent_csv, cfg);
        if (gen->parsed()) return run_gen(spec_path, out_dir, count, seed, seed_given);
        if (train->parsed()) return run_train(data_dir, out_dir, cfg, val_fraction, resume);
        if (eval->parsed()) return run_eval(data_dir, ckpt);
        if (exp->parsed()) return run_export(input, output, color_by, ckpt, cfg);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
