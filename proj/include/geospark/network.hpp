#pragma once

#include <map>
#include <string>
#include <vector>

#include "geospark/cloud.hpp"
#include "geospark/common.hpp"
#include "geospark/downsample.hpp"
#include "geospark/gia.hpp"
#include "geospark/metrics.hpp"
#include "geospark/partition.hpp"
#include "geospark/superpoint.hpp"
#include "geospark/tensor.hpp"

namespace geospark {

struct NetworkConfig {
    std::vector<std::size_t> stage_dims{32, 64, 128, 256, 512};
    std::vector<int> depths{1, 2, 2, 6, 2};
    int k_local = 16;
    int k_global = 8;
    int k_sp = 8;                                     // global-branch self-attention neighbors
    std::vector<double> gd_caps{0.10, 0.20, 0.40, 0.80};  // m, one per stage transition
    double sp_dia_cap = 1.0;                          // m, max superpoint diameter
    double lambda = 3.0;                              // partition regularization strength
    double beta = 0.1;                                // superpoint loss weight
    double lr = 0.004;
    double weight_decay = 0.02;
    int epochs = 200;
    int batch = 1;
    std::uint64_t seed = 1;
    int num_classes = 6;
    int k_adj = 10;
    int k_geo = 10;
    std::string sampling = "gd";  // gd | fps | voxel
    double fps_ratio = 0.25;

    void validate() const;
    std::size_t num_stages() const { return stage_dims.size(); }
    bool use_global() const { return k_global > 0; }

    // throws ArgumentError on unknown key or unparsable value
    void set(const std::string& key, const std::string& value);
    std::string to_string() const;

    static NetworkConfig preset(const std::string& name);  // toy | s3dis | scannet
};

NetworkConfig load_config(const std::string& path);
NetworkConfig config_from_string(const std::string& text);

/// Everything the network needs for one scene, computed once.
struct SceneInput {
    PointCloud cloud;
    Matrix point_features;   // n x 8: geometric(4) + rgb(3) + height(1)
    PartitionResult partition;
    std::vector<Vec3> sp_coords;
    Matrix sp_global_desc;   // m x 2
    Matrix soft_labels;      // m x L when labels present, else empty
};

SceneInput preprocess_scene(const PointCloud& cloud, const NetworkConfig& config);

inline constexpr std::size_t kPointInputDim = 8;

struct ForwardOutput {
    Tape tape;
    Tape::Id point_logits = -1;
    Tape::Id sp_logits = -1;   // -1 when the global branch is off
    Tape::Id loss = -1;        // -1 when built without loss
    std::map<std::string, Tape::Id> param_ids;
    std::vector<std::size_t> sp_counts;  // superpoints per stage (global branch)
};

/// Two-branch encoder-decoder with geometry-informed aggregation and
/// partition-guided downsampling. Parameters live in the store and are
/// created lazily on the first forward pass.
class GeoSparkNetwork {
public:
    GeoSparkNetwork(const NetworkConfig& config, ParameterStore& store);

    ForwardOutput forward(const SceneInput& scene, bool with_loss);
    std::vector<int> predict(const SceneInput& scene);

    // One AdamW step on a single scene; returns the loss value.
    double train_step(const SceneInput& scene);

    const NetworkConfig& config() const { return config_; }
    ParameterStore& store() { return *store_; }

private:
    NetworkConfig config_;
    ParameterStore* store_;
};

struct EpochLog {
    int epoch = 0;
    double loss = 0.0;
    double miou = 0.0;
    double macc = 0.0;
    double oa = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> logs;
    double best_miou = 0.0;
    int best_epoch = -1;
};

/// Deterministic training loop. Writes metrics.csv plus best.ckpt/last.ckpt
/// into out_dir; resumes from last.ckpt when resume is true and the file exists.
TrainResult train_network(GeoSparkNetwork& network, const std::vector<SceneInput>& train_scenes,
                          const std::vector<SceneInput>& val_scenes, const std::string& out_dir,
                          bool resume = false);

SegmentationMetrics evaluate_scenes(GeoSparkNetwork& network,
                                    const std::vector<SceneInput>& scenes);

}  // namespace geospark
