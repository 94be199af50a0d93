#include "geospark/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace geospark {

void PointCloud::validate(int num_classes) const {
    if (coords.empty()) throw ArgumentError("point cloud must contain at least one point");
    for (const Vec3& p : coords) {
        for (double v : p) {
            if (!std::isfinite(v)) throw ArgumentError("non-finite coordinate in point cloud");
        }
    }
    if (!colors.empty() && colors.size() != coords.size())
        throw ArgumentError("colors size mismatch");
    if (!labels.empty()) {
        if (labels.size() != coords.size()) throw ArgumentError("labels size mismatch");
        for (int l : labels) {
            if (l < 0 || (num_classes >= 0 && l >= num_classes))
                throw ArgumentError("label out of range");
        }
    }
}

CloudFormat format_from_path(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".ply") == 0)
        return CloudFormat::Ply;
    return CloudFormat::AsciiXyz;
}

namespace {

PointCloud load_ascii(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    PointCloud cloud;
    std::string line;
    std::size_t line_no = 0;
    int fields_expected = -1;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        if (vals.empty()) continue;
        if (fields_expected < 0) {
            if (vals.size() != 3 && vals.size() != 4 && vals.size() != 6 && vals.size() != 7)
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": expected 3, 4, 6 or 7 fields, got " +
                                 std::to_string(vals.size()));
            fields_expected = static_cast<int>(vals.size());
        } else if (static_cast<int>(vals.size()) != fields_expected) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(fields_expected) + " fields, got " +
                             std::to_string(vals.size()));
        }
        for (int i = 0; i < 3; ++i) {
            if (!std::isfinite(vals[i]))
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": non-finite coordinate");
        }
        cloud.coords.push_back({vals[0], vals[1], vals[2]});
        if (fields_expected >= 6) cloud.colors.push_back({vals[3], vals[4], vals[5]});
        if (fields_expected == 4) cloud.labels.push_back(static_cast<int>(vals[3]));
        if (fields_expected == 7) cloud.labels.push_back(static_cast<int>(vals[6]));
    }
    if (cloud.coords.empty()) throw ParseError(path + ": no points");
    return cloud;
}

void save_ascii(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path);
    out.precision(17);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << cloud.coords[i][0] << ' ' << cloud.coords[i][1] << ' ' << cloud.coords[i][2];
        if (cloud.has_colors())
            out << ' ' << cloud.colors[i][0] << ' ' << cloud.colors[i][1] << ' '
                << cloud.colors[i][2];
        if (cloud.has_labels()) out << ' ' << cloud.labels[i];
        out << '\n';
    }
}

// PLY subset: binary little-endian 1.0, float32 x/y/z, uchar red/green/blue,
// int32 label (both optional).
void save_ply(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << cloud.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    if (cloud.has_colors())
        out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (cloud.has_labels()) out << "property int label\n";
    out << "end_header\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        float xyz[3] = {static_cast<float>(cloud.coords[i][0]),
                        static_cast<float>(cloud.coords[i][1]),
                        static_cast<float>(cloud.coords[i][2])};
        out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
        if (cloud.has_colors()) {
            unsigned char rgb[3];
            for (int c = 0; c < 3; ++c) {
                double v = std::clamp(cloud.colors[i][c], 0.0, 1.0);
                rgb[c] = static_cast<unsigned char>(std::lround(v * 255.0));
            }
            out.write(reinterpret_cast<const char*>(rgb), 3);
        }
        if (cloud.has_labels()) {
            std::int32_t l = cloud.labels[i];
            out.write(reinterpret_cast<const char*>(&l), sizeof(l));
        }
    }
}

PointCloud load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "ply") throw ParseError(path + ": not a PLY file");
    std::size_t count = 0;
    bool has_rgb = false, has_label = false, header_done = false;
    std::vector<std::string> props;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt != "binary_little_endian")
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": unsupported PLY format " + fmt);
        } else if (tok == "element") {
            std::string name;
            ss >> name >> count;
            if (name != "vertex")
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": unsupported element " + name);
        } else if (tok == "property") {
            std::string type, name;
            ss >> type >> name;
            props.push_back(name);
        } else if (tok == "end_header") {
            header_done = true;
            break;
        } else if (tok == "comment" || tok == "obj_info") {
            continue;
        } else {
            throw ParseError(path + ":" + std::to_string(line_no) + ": unexpected token " + tok);
        }
    }
    if (!header_done) throw ParseError(path + ": missing end_header");
    std::vector<std::string> expect = {"x", "y", "z"};
    if (props.size() >= 6 && props[3] == "red") {
        has_rgb = true;
        expect.insert(expect.end(), {"red", "green", "blue"});
    }
    if (!props.empty() && props.back() == "label") {
        has_label = true;
        expect.push_back("label");
    }
    if (props != expect) throw ParseError(path + ": unsupported property layout");
    PointCloud cloud;
    cloud.coords.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        float xyz[3];
        in.read(reinterpret_cast<char*>(xyz), sizeof(xyz));
        if (!in) throw ParseError(path + ": truncated vertex data at element " + std::to_string(i));
        cloud.coords.push_back({xyz[0], xyz[1], xyz[2]});
        if (has_rgb) {
            unsigned char rgb[3];
            in.read(reinterpret_cast<char*>(rgb), 3);
            if (!in) throw ParseError(path + ": truncated vertex data at element " + std::to_string(i));
            cloud.colors.push_back({rgb[0] / 255.0, rgb[1] / 255.0, rgb[2] / 255.0});
        }
        if (has_label) {
            std::int32_t l;
            in.read(reinterpret_cast<char*>(&l), sizeof(l));
            if (!in) throw ParseError(path + ": truncated vertex data at element " + std::to_string(i));
            cloud.labels.push_back(l);
        }
    }
    cloud.validate();
    return cloud;
}

}  // namespace

PointCloud load_point_cloud(const std::string& path, CloudFormat format) {
    PointCloud cloud =
        format == CloudFormat::Ply ? load_ply(path) : load_ascii(path);
    cloud.validate();
    return cloud;
}

void save_point_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format) {
    if (format == CloudFormat::Ply)
        save_ply(cloud, path);
    else
        save_ascii(cloud, path);
}

KnnIndex::KnnIndex(const std::vector<Vec3>& points) : points_(points) {
    if (points_.empty()) throw ArgumentError("KnnIndex requires at least one point");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(points_.size() / 8 + 1);
    root_ = build(0, static_cast<int>(points_.size()), 0);
}

int KnnIndex::build(int begin, int end, int depth) {
    Node node;
    constexpr int kLeafSize = 16;
    if (end - begin <= kLeafSize) {
        node.begin = begin;
        node.end = end;
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }
    int axis = depth % 3;
    int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    node.axis = axis;
    node.split = points_[order_[mid]][axis];
    int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    int left = build(begin, mid, depth + 1);
    int right = build(mid, end, depth + 1);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

void KnnIndex::query(const Vec3& p, std::size_t k,
                     std::vector<int>& indices, std::vector<double>& distances) const {
    if (k == 0) throw ArgumentError("knn query requires k >= 1");
    k = std::min(k, points_.size());

    // max-heap of (dist2, idx) keeping the current k best
    std::vector<std::pair<double, int>> heap;
    heap.reserve(k + 1);
    auto cmp = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;  // larger index is "worse" on ties
    };

    auto consider = [&](int idx) {
        double d2 = squared_norm(points_[idx] - p);
        std::pair<double, int> cand{d2, idx};
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end(), cmp);
        } else if (cmp(cand, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), cmp);
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end(), cmp);
        }
    };

    // iterative traversal, near child first
    std::vector<int> stack{root_};
    while (!stack.empty()) {
        int ni = stack.back();
        stack.pop_back();
        const Node& node = nodes_[ni];
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) consider(order_[i]);
            continue;
        }
        double diff = p[node.axis] - node.split;
        int near = diff < 0 ? node.left : node.right;
        int far = diff < 0 ? node.right : node.left;
        if (heap.size() < k || diff * diff <= heap.front().first) stack.push_back(far);
        stack.push_back(near);
    }

    std::sort(heap.begin(), heap.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    indices.resize(heap.size());
    distances.resize(heap.size());
    for (std::size_t i = 0; i < heap.size(); ++i) {
        indices[i] = heap[i].second;
        distances[i] = std::sqrt(heap[i].first);
    }
}

std::pair<std::vector<int>, std::vector<double>> KnnIndex::query(const Vec3& p,
                                                                 std::size_t k) const {
    std::vector<int> idx;
    std::vector<double> dist;
    query(p, k, idx, dist);
    return {std::move(idx), std::move(dist)};
}

AdjacencyGraph build_adjacency(const PointCloud& cloud, std::size_t k_adj) {
    std::size_t n = cloud.size();
    if (n < 2) throw ArgumentError("build_adjacency requires at least 2 points");
    if (k_adj == 0 || k_adj >= n) throw ArgumentError("build_adjacency requires 1 <= k_adj < n");

    KnnIndex index(cloud.coords);
    std::vector<std::pair<int, int>> edges;
    edges.reserve(n * k_adj);
    std::vector<int> idx;
    std::vector<double> dist;
    for (std::size_t i = 0; i < n; ++i) {
        index.query(cloud.coords[i], k_adj + 1, idx, dist);
        for (std::size_t j = 0; j < idx.size(); ++j) {
            int other = idx[j];
            if (other == static_cast<int>(i)) continue;
            int a = std::min<int>(i, other), b = std::max<int>(i, other);
            edges.emplace_back(a, b);
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    AdjacencyGraph graph;
    graph.num_vertices = n;
    graph.edges = std::move(edges);
    graph.weights.resize(graph.edges.size());

    std::vector<double> lengths(graph.edges.size());
    double total = 0.0;
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        auto [a, b] = graph.edges[e];
        lengths[e] = std::sqrt(squared_norm(cloud.coords[a] - cloud.coords[b]));
        total += lengths[e];
    }
    double mean_len = total / static_cast<double>(graph.edges.size());
    constexpr double kEps = 1e-9;
    for (std::size_t e = 0; e < graph.edges.size(); ++e)
        graph.weights[e] = mean_len / std::max(lengths[e], kEps);
    return graph;
}

std::vector<int> fps_sample(const PointCloud& cloud, std::size_t count, int seed_index) {
    std::size_t n = cloud.size();
    if (count == 0 || count > n) throw ArgumentError("fps_sample requires 1 <= count <= n");
    if (seed_index < 0 || seed_index >= static_cast<int>(n))
        throw ArgumentError("fps_sample seed_index out of range");

    std::vector<int> selected;
    selected.reserve(count);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    int current = seed_index;
    selected.push_back(current);
    while (selected.size() < count) {
        int best = -1;
        double best_d2 = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = squared_norm(cloud.coords[i] - cloud.coords[current]);
            if (d2 < min_d2[i]) min_d2[i] = d2;
            if (min_d2[i] > best_d2) {
                best_d2 = min_d2[i];
                best = static_cast<int>(i);
            }
        }
        current = best;
        selected.push_back(current);
        min_d2[current] = -1.0;  // never re-selected
    }
    return selected;
}

std::vector<VoxelKey> voxel_keys(const std::vector<Vec3>& coords, double cell,
                                 const Vec3& origin) {
    if (!(cell > 0.0)) throw ArgumentError("voxel cell size must be positive");
    std::vector<VoxelKey> keys(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) {
        keys[i] = {static_cast<std::int64_t>(std::floor((coords[i][0] - origin[0]) / cell)),
                   static_cast<std::int64_t>(std::floor((coords[i][1] - origin[1]) / cell)),
                   static_cast<std::int64_t>(std::floor((coords[i][2] - origin[2]) / cell))};
    }
    return keys;
}

Bbox bounding_box(const std::vector<Vec3>& coords, const std::vector<int>& subset) {
    if (coords.empty()) throw ArgumentError("bounding_box of empty set");
    Bbox box;
    auto init = [&](const Vec3& p) { box.min = box.max = p; };
    auto extend = [&](const Vec3& p) {
        for (int c = 0; c < 3; ++c) {
            box.min[c] = std::min(box.min[c], p[c]);
            box.max[c] = std::max(box.max[c], p[c]);
        }
    };
    if (subset.empty()) {
        init(coords[0]);
        for (const Vec3& p : coords) extend(p);
    } else {
        init(coords[subset[0]]);
        for (int i : subset) extend(coords[i]);
    }
    return box;
}

}  // namespace geospark
