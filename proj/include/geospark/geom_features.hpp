#pragma once

#include "geospark/cloud.hpp"
#include "geospark/common.hpp"

namespace geospark {

/// Per-point handcrafted geometric features from k-NN covariance eigenanalysis.
/// Columns: linearity, planarity, scattering, verticality — all in [0, 1].
struct GeomFeatureSet {
    Matrix features;       // n x 4
    std::size_t k_geo = 0;
};

inline constexpr std::size_t kGeomFeatureCount = 4;

GeomFeatureSet compute_geometric_features(const PointCloud& cloud, std::size_t k_geo);

/// Eigen-decomposition of a symmetric 3x3 matrix, eigenvalues sorted
/// descending. `vectors` are unit eigenvectors matching `values`.
struct SymEigen3 {
    std::array<double, 3> values{};
    std::array<Vec3, 3> vectors{};
};

SymEigen3 sym_eigen3(const std::array<std::array<double, 3>, 3>& m);

}  // namespace geospark
