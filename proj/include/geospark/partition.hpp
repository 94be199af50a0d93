#pragma once

#include <vector>

#include "geospark/cloud.hpp"
#include "geospark/common.hpp"

namespace geospark {

/// Piecewise-constant fitting problem on a weighted graph: squared fidelity
/// to per-point features plus a weighted cut-count penalty.
struct PartitionProblem {
    AdjacencyGraph graph;
    Matrix features;  // n x c
    double lambda = 0.0;
};

struct PartitionResult {
    std::vector<int> component;  // dense ids in [0, m)
    Matrix values;               // m x c component means
    double energy = 0.0;

    std::size_t num_components() const { return values.rows; }
};

struct CutPursuitOptions {
    int max_iter = 10;
    int kmeans_sweeps = 5;
    // alternations between centroid re-estimation and the binary min cut
    int split_refine = 5;
    // components at or below this size use the exact farthest-pair seed;
    // larger ones use a deterministic two-sweep approximation
    std::size_t exact_seed_limit = 512;
};

struct CutPursuitTrace {
    std::vector<double> energies;  // energy after each accepted iteration
};

double partition_energy(const PartitionProblem& problem, const std::vector<int>& component,
                        const Matrix& values);

PartitionResult cut_pursuit(const PartitionProblem& problem,
                            const CutPursuitOptions& options = {},
                            CutPursuitTrace* trace = nullptr);

/// Exhaustive minimum over all assignments whose blocks are graph-connected.
/// Refuses n > 10.
PartitionResult brute_force_partition(const PartitionProblem& problem);

/// Re-splits every component whose bbox diagonal exceeds max_dia using a
/// voxel grid (cell = max_dia / sqrt(3), origin at the component bbox
/// minimum), then separates any disconnected cell groups. Values and energy
/// are recomputed against the problem.
PartitionResult enforce_diameter_cap(const PartitionResult& result,
                                     const PartitionProblem& problem, const PointCloud& cloud,
                                     double max_dia);

/// Dense re-index of an arbitrary assignment plus component means and energy.
PartitionResult make_partition_result(const PartitionProblem& problem,
                                      std::vector<int> assignment);

// Per-vertex neighbor lists (CSR) for a graph; shared by solver and checks.
struct CsrGraph {
    std::vector<int> offsets;
    std::vector<int> neighbors;
    std::vector<int> edge_ids;  // parallel to neighbors, index into graph.edges
};

CsrGraph build_csr(const AdjacencyGraph& graph);

// True if every component of the assignment is connected in the graph.
bool components_connected(const AdjacencyGraph& graph, const std::vector<int>& component);

}  // namespace geospark
