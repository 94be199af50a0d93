#pragma once

#include <vector>

#include "geospark/common.hpp"

namespace geospark {

struct Arc {
    int from = 0;
    int to = 0;
    double capacity = 0.0;
};

struct MaxFlowResult {
    double flow = 0.0;
    std::vector<char> source_side;  // 1 if the node sits on the source side of the min cut
};

/// Dinic's algorithm. Capacities must be finite and nonnegative;
/// the cut labels come from residual reachability after the last phase.
MaxFlowResult max_flow_min_cut(int nodes, const std::vector<Arc>& arcs, int source, int sink);

/// Reusable flow network for repeated solves without reallocating.
class FlowNetwork {
public:
    void reset(int nodes);
    void add_arc(int from, int to, double capacity);
    // Adds capacity in both directions (Potts pairwise term).
    void add_bidirectional(int a, int b, double capacity);
    MaxFlowResult solve(int source, int sink);
    int num_nodes() const { return static_cast<int>(head_.size()); }

private:
    struct Edge {
        int to;
        int next;
        double cap;
    };
    std::vector<Edge> edges_;
    std::vector<int> head_;
    std::vector<int> level_;
    std::vector<int> iter_;

    bool bfs(int source, int sink);
    double dfs(int v, int sink, double limit);
};

}  // namespace geospark
