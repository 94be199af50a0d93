#include "geospark/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geospark {

void FlowNetwork::reset(int nodes) {
    edges_.clear();
    head_.assign(nodes, -1);
    level_.assign(nodes, -1);
    iter_.assign(nodes, -1);
}

void FlowNetwork::add_arc(int from, int to, double capacity) {
    if (capacity < 0.0 || !std::isfinite(capacity))
        throw ArgumentError("arc capacity must be finite and nonnegative");
    if (from < 0 || from >= num_nodes() || to < 0 || to >= num_nodes())
        throw ArgumentError("arc endpoint out of range");
    edges_.push_back({to, head_[from], capacity});
    head_[from] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({from, head_[to], 0.0});
    head_[to] = static_cast<int>(edges_.size()) - 1;
}

void FlowNetwork::add_bidirectional(int a, int b, double capacity) {
    if (capacity < 0.0 || !std::isfinite(capacity))
        throw ArgumentError("arc capacity must be finite and nonnegative");
    if (a < 0 || a >= num_nodes() || b < 0 || b >= num_nodes())
        throw ArgumentError("arc endpoint out of range");
    edges_.push_back({b, head_[a], capacity});
    head_[a] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({a, head_[b], capacity});
    head_[b] = static_cast<int>(edges_.size()) - 1;
}

bool FlowNetwork::bfs(int source, int sink) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<int> queue;
    queue.reserve(head_.size());
    queue.push_back(source);
    level_[source] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        int v = queue[qi];
        for (int e = head_[v]; e >= 0; e = edges_[e].next) {
            if (edges_[e].cap > 1e-12 && level_[edges_[e].to] < 0) {
                level_[edges_[e].to] = level_[v] + 1;
                queue.push_back(edges_[e].to);
            }
        }
    }
    return level_[sink] >= 0;
}

double FlowNetwork::dfs(int v, int sink, double limit) {
    if (v == sink) return limit;
    for (int& e = iter_[v]; e >= 0; e = edges_[e].next) {
        Edge& edge = edges_[e];
        if (edge.cap > 1e-12 && level_[edge.to] == level_[v] + 1) {
            double pushed = dfs(edge.to, sink, std::min(limit, edge.cap));
            if (pushed > 0.0) {
                edge.cap -= pushed;
                edges_[e ^ 1].cap += pushed;
                return pushed;
            }
        }
    }
    return 0.0;
}

MaxFlowResult FlowNetwork::solve(int source, int sink) {
    if (source == sink) throw ArgumentError("max flow requires source != sink");
    MaxFlowResult result;
    while (bfs(source, sink)) {
        iter_ = head_;
        while (true) {
            double pushed = dfs(source, sink, std::numeric_limits<double>::infinity());
            if (pushed <= 0.0) break;
            result.flow += pushed;
        }
    }
    // residual reachability from the source defines the cut
    result.source_side.assign(head_.size(), 0);
    std::vector<int> queue{source};
    result.source_side[source] = 1;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        int v = queue[qi];
        for (int e = head_[v]; e >= 0; e = edges_[e].next) {
            if (edges_[e].cap > 1e-12 && !result.source_side[edges_[e].to]) {
                result.source_side[edges_[e].to] = 1;
                queue.push_back(edges_[e].to);
            }
        }
    }
    return result;
}

MaxFlowResult max_flow_min_cut(int nodes, const std::vector<Arc>& arcs, int source, int sink) {
    if (source == sink) throw ArgumentError("max flow requires source != sink");
    if (source < 0 || source >= nodes || sink < 0 || sink >= nodes)
        throw ArgumentError("source/sink out of range");
    FlowNetwork net;
    net.reset(nodes);
    for (const Arc& a : arcs) net.add_arc(a.from, a.to, a.capacity);
    return net.solve(source, sink);
}

}  // namespace geospark
