// Python bindings for the GeoSpark core: scene generation, geometric
// features, partitioning, sampling, and metrics. Arrays cross the boundary
// as NumPy; everything heavy stays in C++.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "geospark/cloud.hpp"
#include "geospark/geom_features.hpp"
#include "geospark/metrics.hpp"
#include "geospark/network.hpp"
#include "geospark/partition.hpp"
#include "geospark/synthetic.hpp"

namespace py = pybind11;
using namespace geospark;

namespace {

std::vector<Vec3> coords_from_array(const py::array_t<double, py::array::c_style |
                                                                  py::array::forcecast>& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 3)
        throw py::value_error("coords must have shape (n, 3)");
    std::vector<Vec3> out(static_cast<std::size_t>(arr.shape(0)));
    auto view = arr.unchecked<2>();
    for (py::ssize_t i = 0; i < arr.shape(0); ++i)
        out[i] = {view(i, 0), view(i, 1), view(i, 2)};
    return out;
}

py::array_t<double> array_from_coords(const std::vector<Vec3>& coords) {
    py::array_t<double> arr({coords.size(), static_cast<std::size_t>(3)});
    auto view = arr.mutable_unchecked<2>();
    for (std::size_t i = 0; i < coords.size(); ++i)
        for (std::size_t c = 0; c < 3; ++c) view(i, c) = coords[i][c];
    return arr;
}

py::array_t<double> array_from_matrix(const Matrix& m) {
    py::array_t<double> arr({m.rows, m.cols});
    auto view = arr.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t c = 0; c < m.cols; ++c) view(i, c) = m(i, c);
    return arr;
}

Matrix matrix_from_array(const py::array_t<double, py::array::c_style |
                                                       py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw py::value_error("expected a 2-D array");
    Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    auto view = arr.unchecked<2>();
    for (py::ssize_t i = 0; i < arr.shape(0); ++i)
        for (py::ssize_t c = 0; c < arr.shape(1); ++c) m(i, c) = view(i, c);
    return m;
}

}  // namespace

PYBIND11_MODULE(_geospark, m) {
    m.doc() = "point cloud semantic segmentation via geometric partitions";

    m.def(
        "generate_scene",
        [](std::uint64_t seed, double density, double room_x, double room_y) {
            SceneSpec spec;
            spec.seed = seed;
            spec.density = density;
            spec.room_x = room_x;
            spec.room_y = room_y;
            Scene scene = generate_scene(spec);
            py::dict out;
            out["coords"] = array_from_coords(scene.cloud.coords);
            out["colors"] = array_from_coords(scene.cloud.colors);
            out["labels"] = py::array_t<int>(scene.cloud.labels.size(),
                                             scene.cloud.labels.data());
            out["object_ids"] = py::array_t<int>(scene.cloud.object_ids.size(),
                                                 scene.cloud.object_ids.data());
            return out;
        },
        py::arg("seed") = 1, py::arg("density") = 12.0, py::arg("room_x") = 4.0,
        py::arg("room_y") = 4.0,
        "Generate a labeled synthetic indoor scene; returns a dict of arrays.");

    m.def(
        "geometric_features",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& coords,
           int k) {
            PointCloud cloud;
            cloud.coords = coords_from_array(coords);
            return array_from_matrix(compute_geometric_features(cloud, k).features);
        },
        py::arg("coords"), py::arg("k") = 10,
        "Per-point (linearity, planarity, scattering, verticality), shape (n, 4).");

    m.def(
        "partition",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& coords,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& features,
           int k_adj, double lam) {
            PointCloud cloud;
            cloud.coords = coords_from_array(coords);
            PartitionProblem problem;
            problem.graph = build_adjacency(cloud, k_adj);
            problem.features = matrix_from_array(features);
            problem.lambda = lam;
            PartitionResult r = cut_pursuit(problem);
            return py::make_tuple(
                py::array_t<int>(r.component.size(), r.component.data()), r.energy);
        },
        py::arg("coords"), py::arg("features"), py::arg("k_adj") = 10,
        py::arg("lam") = 3.0,
        "Piecewise-constant partition; returns (component ids, energy).");

    m.def(
        "fps",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& coords,
           std::size_t count, int seed_index) {
            PointCloud cloud;
            cloud.coords = coords_from_array(coords);
            std::vector<int> keep = fps_sample(cloud, count, seed_index);
            return py::array_t<int>(keep.size(), keep.data());
        },
        py::arg("coords"), py::arg("count"), py::arg("seed_index") = 0,
        "Farthest point sampling; returns selected indices in pick order.");

    m.def(
        "evaluate",
        [](const std::vector<int>& predicted, const std::vector<int>& truth,
           int num_classes) {
            SegmentationMetrics r = evaluate_metrics(predicted, truth, num_classes);
            py::dict out;
            out["miou"] = r.miou;
            out["macc"] = r.macc;
            out["oa"] = r.oa;
            return out;
        },
        py::arg("predicted"), py::arg("truth"), py::arg("num_classes"),
        "Segmentation metrics: mean IoU, mean class accuracy, overall accuracy.");

    m.def(
        "config_preset",
        [](const std::string& name) { return NetworkConfig::preset(name).to_string(); },
        py::arg("name"), "Flat key=value dump of a named config preset.");

    m.attr("num_scene_classes") = kNumSceneClasses;
}
