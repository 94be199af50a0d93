#include "geospark/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "geospark/maxflow.hpp"

namespace geospark {

namespace {

double sq_dist_row(const Matrix& a, std::size_t ra, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols; ++c) {
        double d = a(ra, c) - b[c];
        s += d * d;
    }
    return s;
}

double sq_dist_rows(const Matrix& a, std::size_t ra, std::size_t rb) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols; ++c) {
        double d = a(ra, c) - a(rb, c);
        s += d * d;
    }
    return s;
}

}  // namespace

CsrGraph build_csr(const AdjacencyGraph& graph) {
    CsrGraph csr;
    csr.offsets.assign(graph.num_vertices + 1, 0);
    for (auto [a, b] : graph.edges) {
        ++csr.offsets[a + 1];
        ++csr.offsets[b + 1];
    }
    for (std::size_t i = 1; i < csr.offsets.size(); ++i) csr.offsets[i] += csr.offsets[i - 1];
    csr.neighbors.resize(graph.edges.size() * 2);
    csr.edge_ids.resize(graph.edges.size() * 2);
    std::vector<int> cursor(csr.offsets.begin(), csr.offsets.end() - 1);
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        auto [a, b] = graph.edges[e];
        csr.neighbors[cursor[a]] = b;
        csr.edge_ids[cursor[a]++] = static_cast<int>(e);
        csr.neighbors[cursor[b]] = a;
        csr.edge_ids[cursor[b]++] = static_cast<int>(e);
    }
    return csr;
}

bool components_connected(const AdjacencyGraph& graph, const std::vector<int>& component) {
    CsrGraph csr = build_csr(graph);
    std::size_t n = component.size();
    std::vector<char> visited(n, 0);
    std::vector<char> comp_seen;
    std::vector<int> queue;
    for (std::size_t start = 0; start < n; ++start) {
        if (visited[start]) continue;
        int cid = component[start];
        if (cid >= static_cast<int>(comp_seen.size())) comp_seen.resize(cid + 1, 0);
        if (comp_seen[cid]) return false;  // second connected piece of the same id
        comp_seen[cid] = 1;
        queue.assign(1, static_cast<int>(start));
        visited[start] = 1;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            int v = queue[qi];
            for (int o = csr.offsets[v]; o < csr.offsets[v + 1]; ++o) {
                int u = csr.neighbors[o];
                if (!visited[u] && component[u] == cid) {
                    visited[u] = 1;
                    queue.push_back(u);
                }
            }
        }
    }
    return true;
}

double partition_energy(const PartitionProblem& problem, const std::vector<int>& component,
                        const Matrix& values) {
    std::size_t n = problem.features.rows;
    if (component.size() != n) throw ArgumentError("component size mismatch");
    if (values.cols != problem.features.cols) throw ArgumentError("values column mismatch");
    for (int c : component) {
        if (c < 0 || c >= static_cast<int>(values.rows))
            throw ArgumentError("component id out of range of values");
    }
    double fidelity = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < values.cols; ++c) {
            double d = values(component[i], c) - problem.features(i, c);
            fidelity += d * d;
        }
    }
    double cut = 0.0;
    for (std::size_t e = 0; e < problem.graph.edges.size(); ++e) {
        auto [a, b] = problem.graph.edges[e];
        if (component[a] != component[b]) cut += problem.graph.weights[e];
    }
    return fidelity + problem.lambda * cut;
}

PartitionResult make_partition_result(const PartitionProblem& problem,
                                      std::vector<int> assignment) {
    std::size_t n = assignment.size();
    std::vector<int> remap;
    std::unordered_map<int, int> seen;
    for (int& c : assignment) {
        auto it = seen.find(c);
        if (it == seen.end()) {
            int id = static_cast<int>(seen.size());
            seen.emplace(c, id);
            c = id;
        } else {
            c = it->second;
        }
    }
    std::size_t m = seen.size();
    PartitionResult result;
    result.component = std::move(assignment);
    result.values = Matrix(m, problem.features.cols);
    std::vector<double> counts(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        counts[result.component[i]] += 1.0;
        for (std::size_t c = 0; c < problem.features.cols; ++c)
            result.values(result.component[i], c) += problem.features(i, c);
    }
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t c = 0; c < problem.features.cols; ++c) result.values(j, c) /= counts[j];
    result.energy = partition_energy(problem, result.component, result.values);
    return result;
}

namespace {

// 2-means seed + refinement inside one component; returns the two centroids.
// Empty second cluster means the component is feature-constant.
bool two_means(const Matrix& features, const std::vector<int>& members,
               const CutPursuitOptions& options, std::vector<double>& c0,
               std::vector<double>& c1) {
    std::size_t cdim = features.cols;
    int a = members[0], b = members[0];
    if (members.size() <= options.exact_seed_limit) {
        double best = -1.0;
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                double d = sq_dist_rows(features, members[i], members[j]);
                if (d > best) {
                    best = d;
                    a = members[i];
                    b = members[j];
                }
            }
        }
        if (best <= 0.0) return false;
    } else {
        // two-sweep approximation: farthest from mean, then farthest from that
        std::vector<double> mean(cdim, 0.0);
        for (int i : members)
            for (std::size_t c = 0; c < cdim; ++c) mean[c] += features(i, c);
        for (double& v : mean) v /= static_cast<double>(members.size());
        double best = -1.0;
        for (int i : members) {
            double d = sq_dist_row(features, i, mean);
            if (d > best) {
                best = d;
                a = i;
            }
        }
        best = -1.0;
        for (int i : members) {
            double d = sq_dist_rows(features, i, a);
            if (d > best) {
                best = d;
                b = i;
            }
        }
        if (sq_dist_rows(features, a, b) <= 0.0) return false;
    }

    c0.assign(cdim, 0.0);
    c1.assign(cdim, 0.0);
    for (std::size_t c = 0; c < cdim; ++c) {
        c0[c] = features(a, c);
        c1[c] = features(b, c);
    }
    std::vector<char> label(members.size(), 0);
    for (int sweep = 0; sweep < options.kmeans_sweeps; ++sweep) {
        for (std::size_t i = 0; i < members.size(); ++i) {
            double d0 = sq_dist_row(features, members[i], c0);
            double d1 = sq_dist_row(features, members[i], c1);
            label[i] = d1 < d0 ? 1 : 0;
        }
        std::vector<double> s0(cdim, 0.0), s1(cdim, 0.0);
        double n0 = 0.0, n1 = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i) {
            auto& s = label[i] ? s1 : s0;
            (label[i] ? n1 : n0) += 1.0;
            for (std::size_t c = 0; c < cdim; ++c) s[c] += features(members[i], c);
        }
        if (n0 == 0.0 || n1 == 0.0) break;
        for (std::size_t c = 0; c < cdim; ++c) {
            c0[c] = s0[c] / n0;
            c1[c] = s1[c] / n1;
        }
    }
    return true;
}

}  // namespace

PartitionResult cut_pursuit(const PartitionProblem& problem, const CutPursuitOptions& options,
                            CutPursuitTrace* trace) {
    std::size_t n = problem.features.rows;
    if (problem.graph.num_vertices != n) throw ArgumentError("graph/features size mismatch");
    if (problem.lambda < 0.0) throw ArgumentError("lambda must be nonnegative");

    if (problem.lambda == 0.0) {
        // fidelity alone: every vertex its own component
        std::vector<int> assignment(n);
        std::iota(assignment.begin(), assignment.end(), 0);
        PartitionResult r = make_partition_result(problem, std::move(assignment));
        if (trace) trace->energies.push_back(r.energy);
        return r;
    }

    CsrGraph csr = build_csr(problem.graph);

    // initial components = connected components of the graph
    std::vector<int> comp(n, -1);
    int num_comp = 0;
    {
        std::vector<int> queue;
        for (std::size_t start = 0; start < n; ++start) {
            if (comp[start] >= 0) continue;
            comp[start] = num_comp;
            queue.assign(1, static_cast<int>(start));
            for (std::size_t qi = 0; qi < queue.size(); ++qi) {
                int v = queue[qi];
                for (int o = csr.offsets[v]; o < csr.offsets[v + 1]; ++o) {
                    int u = csr.neighbors[o];
                    if (comp[u] < 0) {
                        comp[u] = num_comp;
                        queue.push_back(u);
                    }
                }
            }
            ++num_comp;
        }
    }

    std::size_t cdim = problem.features.cols;
    FlowNetwork net;
    std::vector<int> local_id(n, -1);
    std::vector<double> c0, c1;

    std::vector<double> energies_buf;
    auto record_energy = [&]() {
        if (!trace) return;
        PartitionResult snapshot = make_partition_result(problem, comp);
        energies_buf.push_back(snapshot.energy);
    };

    auto densify = [&]() {
        std::vector<int> remap(num_comp, -1);
        int next = 0;
        for (int& c : comp) {
            if (remap[c] < 0) remap[c] = next++;
            c = remap[c];
        }
        num_comp = next;
    };

    // split sweep: try to cut every component in two; returns true on any split
    auto split_sweep = [&]() {
        std::vector<std::vector<int>> members(num_comp);
        for (std::size_t i = 0; i < n; ++i) members[comp[i]].push_back(static_cast<int>(i));

        bool any_split = false;
        int next_id = num_comp;
        for (int cid = 0; cid < num_comp; ++cid) {
            auto& mem = members[cid];
            if (mem.size() < 2) continue;

            int m = static_cast<int>(mem.size());
            for (int i = 0; i < m; ++i) local_id[mem[i]] = i;
            std::vector<char> side(m, 0);

            if (m <= 10) {
                // small component: enumerate every binary labeling exactly.
                // minimize -|s0|^2/n0 - |s1|^2/n1 + lambda * cut(mask)
                std::vector<std::pair<std::pair<int, int>, double>> intra;
                for (int i = 0; i < m; ++i) {
                    int v = mem[i];
                    for (int o = csr.offsets[v]; o < csr.offsets[v + 1]; ++o) {
                        int u = csr.neighbors[o];
                        if (comp[u] == cid && u > v)
                            intra.push_back(
                                {{i, local_id[u]}, problem.graph.weights[csr.edge_ids[o]]});
                    }
                }
                double best_obj = 0.0;
                unsigned best_mask = 0;
                std::vector<double> s0(cdim), s1(cdim);
                for (unsigned mask = 1; mask < (1u << (m - 1)); ++mask) {
                    std::fill(s0.begin(), s0.end(), 0.0);
                    std::fill(s1.begin(), s1.end(), 0.0);
                    double n0 = 0.0, n1 = 0.0;
                    for (int i = 0; i < m; ++i) {
                        bool one = i > 0 && (mask >> (i - 1)) & 1u;
                        auto& s = one ? s1 : s0;
                        (one ? n1 : n0) += 1.0;
                        for (std::size_t c = 0; c < cdim; ++c) s[c] += problem.features(mem[i], c);
                    }
                    double obj = 0.0;
                    for (std::size_t c = 0; c < cdim; ++c)
                        obj -= s0[c] * s0[c] / n0 + s1[c] * s1[c] / n1;
                    for (auto& [pr, w] : intra) {
                        bool a = pr.first > 0 && (mask >> (pr.first - 1)) & 1u;
                        bool b = pr.second > 0 && (mask >> (pr.second - 1)) & 1u;
                        if (a != b) obj += problem.lambda * w;
                    }
                    // reference: keeping the component whole costs -|S|^2/m
                    std::vector<double> total(cdim, 0.0);
                    for (std::size_t c = 0; c < cdim; ++c) total[c] = s0[c] + s1[c];
                    double whole = 0.0;
                    for (std::size_t c = 0; c < cdim; ++c) whole -= total[c] * total[c] / m;
                    if (obj - whole < best_obj - 1e-15) {
                        best_obj = obj - whole;
                        best_mask = mask;
                    }
                }
                if (best_mask == 0) {
                    for (int i = 0; i < m; ++i) local_id[mem[i]] = -1;
                    continue;
                }
                for (int i = 1; i < m; ++i) side[i] = (best_mask >> (i - 1)) & 1u;
            } else {
                if (!two_means(problem.features, mem, options, c0, c1)) {
                    for (int i = 0; i < m; ++i) local_id[mem[i]] = -1;
                    continue;
                }

                // binary labeling by min cut: source side = cluster 0
                auto solve_cut = [&]() {
                    net.reset(m + 2);
                    int source = m, sink = m + 1;
                    for (int i = 0; i < m; ++i) {
                        net.add_arc(source, i, sq_dist_row(problem.features, mem[i], c1));
                        net.add_arc(i, sink, sq_dist_row(problem.features, mem[i], c0));
                    }
                    for (int i = 0; i < m; ++i) {
                        int v = mem[i];
                        for (int o = csr.offsets[v]; o < csr.offsets[v + 1]; ++o) {
                            int u = csr.neighbors[o];
                            if (comp[u] == cid && u > v)
                                net.add_bidirectional(i, local_id[u],
                                                      problem.lambda *
                                                          problem.graph.weights[csr.edge_ids[o]]);
                        }
                    }
                    return net.solve(source, sink);
                };

                MaxFlowResult cut = solve_cut();
                for (int i = 0; i < m; ++i) side[i] = static_cast<char>(cut.source_side[i]);
                // alternate centroid re-estimation with the cut until the labeling
                // settles; each alternation costs a full max-flow solve, so very
                // large components take the initial cut as-is (merges clean up)
                int refines = m > 20000 ? 0 : options.split_refine;
                for (int refine = 0; refine < refines; ++refine) {
                    std::vector<double> s0(cdim, 0.0), s1(cdim, 0.0);
                    double n0 = 0.0, n1 = 0.0;
                    for (int i = 0; i < m; ++i) {
                        auto& s = side[i] ? s0 : s1;  // source side carries cluster 0
                        (side[i] ? n0 : n1) += 1.0;
                        for (std::size_t c = 0; c < cdim; ++c) s[c] += problem.features(mem[i], c);
                    }
                    if (n0 == 0.0 || n1 == 0.0) break;
                    for (std::size_t c = 0; c < cdim; ++c) {
                        c0[c] = s0[c] / n0;
                        c1[c] = s1[c] / n1;
                    }
                    cut = solve_cut();
                    bool same = true;
                    for (int i = 0; i < m; ++i)
                        if (static_cast<char>(cut.source_side[i]) != side[i]) {
                            side[i] = static_cast<char>(cut.source_side[i]);
                            same = false;
                        }
                    if (same) break;
                }
            }

            // split into connected subcomponents per binary label
            std::vector<int> sub(m, -1);
            int num_sub = 0;
            std::vector<int> queue;
            for (int s = 0; s < m; ++s) {
                if (sub[s] >= 0) continue;
                sub[s] = num_sub;
                queue.assign(1, s);
                for (std::size_t qi = 0; qi < queue.size(); ++qi) {
                    int li = queue[qi];
                    int v = mem[li];
                    for (int o = csr.offsets[v]; o < csr.offsets[v + 1]; ++o) {
                        int u = csr.neighbors[o];
                        if (comp[u] != cid) continue;
                        int lu = local_id[u];
                        if (sub[lu] < 0 && side[lu] == side[li]) {
                            sub[lu] = num_sub;
                            queue.push_back(lu);
                        }
                    }
                }
                ++num_sub;
            }
            if (num_sub < 2) {
                for (int i = 0; i < m; ++i) local_id[mem[i]] = -1;
                continue;
            }

            // energy delta restricted to this component
            std::vector<std::vector<double>> sums(num_sub, std::vector<double>(cdim, 0.0));
            std::vector<double> counts(num_sub, 0.0);
            std::vector<double> old_mean(cdim, 0.0);
            for (int i = 0; i < m; ++i) {
                counts[sub[i]] += 1.0;
                for (std::size_t c = 0; c < cdim; ++c) {
                    sums[sub[i]][c] += problem.features(mem[i], c);
                    old_mean[c] += problem.features(mem[i], c);
                }
            }
            for (double& v : old_mean) v /= static_cast<double>(m);
            double old_fid = 0.0, new_fid = 0.0;
            for (int i = 0; i < m; ++i) {
                old_fid += sq_dist_row(problem.features, mem[i], old_mean);
                for (std::size_t c = 0; c < cdim; ++c) {
                    double d = problem.features(mem[i], c) - sums[sub[i]][c] / counts[sub[i]];
                    new_fid += d * d;
                }
            }
            double cut_add = 0.0;
            for (int i = 0; i < m; ++i) {
                int v = mem[i];
                for (int o = csr.offsets[v]; o < csr.offsets[v + 1]; ++o) {
                    int u = csr.neighbors[o];
                    if (comp[u] == cid && u > v && sub[i] != sub[local_id[u]])
                        cut_add += problem.graph.weights[csr.edge_ids[o]];
                }
            }
            double delta = new_fid + problem.lambda * cut_add - old_fid;
            if (delta < -1e-12) {
                any_split = true;
                for (int i = 0; i < m; ++i)
                    if (sub[i] > 0) comp[mem[i]] = next_id + sub[i] - 1;
                next_id += num_sub - 1;
            }
            for (int i = 0; i < m; ++i) local_id[mem[i]] = -1;
        }
        num_comp = next_id;
        return any_split;
    };

    // backward step: merge adjacent components whenever that lowers the energy.
    // Each pass merges a conflict-free set of negative-delta pairs, best first.
    auto merge_passes = [&]() {
        bool merged_any = false;
        // each pass merges at least a constant fraction of mergeable pairs, so
        // 64 passes suffice even when starting from singletons
        for (int pass = 0; pass < 64; ++pass) {
            densify();
            std::vector<double> cnt(num_comp, 0.0), sumsq(num_comp, 0.0);
            Matrix sum(num_comp, cdim);
            for (std::size_t i = 0; i < n; ++i) {
                int cid = comp[i];
                cnt[cid] += 1.0;
                for (std::size_t c = 0; c < cdim; ++c) {
                    double f = problem.features(i, c);
                    sum(cid, c) += f;
                    sumsq[cid] += f * f;
                }
            }
            auto fidelity = [&](double count, const std::vector<double>& s, double ssq) {
                double s2 = 0.0;
                for (double v : s) s2 += v * v;
                return ssq - s2 / count;
            };
            // aggregate cut weight per adjacent component pair (sorted key run)
            std::vector<std::pair<long long, double>> pair_weight;
            pair_weight.reserve(problem.graph.edges.size());
            for (std::size_t e = 0; e < problem.graph.edges.size(); ++e) {
                auto [a, b] = problem.graph.edges[e];
                int ca = comp[a], cb = comp[b];
                if (ca == cb) continue;
                long long key = static_cast<long long>(std::min(ca, cb)) *
                                    static_cast<long long>(num_comp) +
                                std::max(ca, cb);
                pair_weight.push_back({key, problem.graph.weights[e]});
            }
            std::sort(pair_weight.begin(), pair_weight.end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; });
            std::size_t out = 0;
            for (std::size_t e = 0; e < pair_weight.size(); ++e) {
                if (out > 0 && pair_weight[out - 1].first == pair_weight[e].first)
                    pair_weight[out - 1].second += pair_weight[e].second;
                else
                    pair_weight[out++] = pair_weight[e];
            }
            pair_weight.resize(out);
            struct Candidate {
                double delta;
                int a, b;
            };
            std::vector<Candidate> candidates;
            std::vector<double> buf(cdim);
            for (auto [key, w] : pair_weight) {
                int a = static_cast<int>(key / num_comp);
                int b = static_cast<int>(key % num_comp);
                double fa = 0.0, fb = 0.0;
                for (std::size_t c = 0; c < cdim; ++c) buf[c] = sum(a, c);
                fa = fidelity(cnt[a], buf, sumsq[a]);
                for (std::size_t c = 0; c < cdim; ++c) {
                    fb += sum(b, c) * sum(b, c);
                    buf[c] += sum(b, c);
                }
                fb = sumsq[b] - fb / cnt[b];
                double fab = fidelity(cnt[a] + cnt[b], buf, sumsq[a] + sumsq[b]);
                double delta = fab - fa - fb - problem.lambda * w;
                if (delta < -1e-12) candidates.push_back({delta, a, b});
            }
            if (candidates.empty()) break;
            std::sort(candidates.begin(), candidates.end(),
                      [](const Candidate& x, const Candidate& y) { return x.delta < y.delta; });
            std::vector<int> target(num_comp, -1);
            std::vector<char> used(num_comp, 0);
            bool merged = false;
            for (const Candidate& cand : candidates) {
                if (used[cand.a] || used[cand.b]) continue;
                used[cand.a] = used[cand.b] = 1;
                target[cand.b] = cand.a;
                merged = true;
            }
            if (!merged) break;
            for (std::size_t i = 0; i < n; ++i)
                if (target[comp[i]] >= 0) comp[i] = target[comp[i]];
            merged_any = true;
        }
        densify();
        return merged_any;
    };

    auto optimize = [&]() {
        energies_buf.clear();
        record_energy();
        for (int round = 0; round < options.max_iter; ++round) {
            for (int iter = 0; iter < options.max_iter; ++iter) {
                if (!split_sweep()) break;
                record_energy();
            }
            if (!merge_passes()) break;  // splits converged and nothing merged back
            record_energy();
        }
    };

    // top-down: refine the connected components by alternating splits and merges
    optimize();
    PartitionResult top_down = make_partition_result(problem, comp);
    std::vector<double> top_down_energies = std::move(energies_buf);
    energies_buf.clear();

    // bottom-up: grow from singletons; escapes the local minima of pure
    // splitting when small components are optimal (small lambda). The extra
    // pass is skipped for large inputs where it costs another full optimize
    // run and the merge phase of the top-down pass already covers it.
    if (n > 20000) {
        if (trace) trace->energies = std::move(top_down_energies);
        return top_down;
    }
    std::iota(comp.begin(), comp.end(), 0);
    num_comp = static_cast<int>(n);
    optimize();
    PartitionResult bottom_up = make_partition_result(problem, comp);

    if (top_down.energy <= bottom_up.energy) {
        if (trace) trace->energies = std::move(top_down_energies);
        return top_down;
    }
    if (trace) trace->energies = std::move(energies_buf);
    return bottom_up;
}

PartitionResult brute_force_partition(const PartitionProblem& problem) {
    std::size_t n = problem.features.rows;
    if (n > 10) throw ArgumentError("brute_force_partition refuses n > 10");
    if (problem.graph.num_vertices != n) throw ArgumentError("graph/features size mismatch");

    std::vector<int> assignment(n, 0);
    std::vector<int> best_assignment;
    double best_energy = std::numeric_limits<double>::infinity();

    // enumerate set partitions via restricted growth strings
    auto evaluate = [&]() {
        int m = *std::max_element(assignment.begin(), assignment.end()) + 1;
        // connectivity check of each block
        std::vector<int> probe = assignment;
        if (!components_connected(problem.graph, probe)) return;
        PartitionResult cand = make_partition_result(problem, probe);
        if (cand.energy < best_energy) {
            best_energy = cand.energy;
            best_assignment = assignment;
        }
        (void)m;
    };

    auto recurse = [&](auto&& self, std::size_t i, int max_used) -> void {
        if (i == n) {
            evaluate();
            return;
        }
        for (int c = 0; c <= max_used + 1 && c < static_cast<int>(n); ++c) {
            assignment[i] = c;
            self(self, i + 1, std::max(max_used, c));
        }
    };
    recurse(recurse, 1, 0);  // assignment[0] fixed to 0

    return make_partition_result(problem, std::move(best_assignment));
}

PartitionResult enforce_diameter_cap(const PartitionResult& result,
                                     const PartitionProblem& problem, const PointCloud& cloud,
                                     double max_dia) {
    if (!(max_dia > 0.0)) throw ArgumentError("max_dia must be positive");
    std::size_t n = result.component.size();
    if (cloud.size() != n) throw ArgumentError("cloud/result size mismatch");

    std::size_t m = result.num_components();
    std::vector<std::vector<int>> members(m);
    for (std::size_t i = 0; i < n; ++i) members[result.component[i]].push_back(static_cast<int>(i));

    CsrGraph csr = build_csr(problem.graph);
    std::vector<int> assignment(n, -1);
    int next = 0;
    double cell = max_dia / std::sqrt(3.0);
    std::vector<int> queue;
    std::vector<int> group(n, -1);  // fine group within the current component
    for (std::size_t j = 0; j < m; ++j) {
        Bbox box = bounding_box(cloud.coords, members[j]);
        if (box.diagonal() <= max_dia) {
            for (int i : members[j]) group[i] = 0;
        } else {
            std::vector<Vec3> sub_coords;
            sub_coords.reserve(members[j].size());
            for (int i : members[j]) sub_coords.push_back(cloud.coords[i]);
            auto keys = voxel_keys(sub_coords, cell, box.min);
            std::unordered_map<VoxelKey, int, VoxelKeyHash> cells;
            for (std::size_t k = 0; k < keys.size(); ++k) {
                auto [it, inserted] = cells.try_emplace(keys[k], static_cast<int>(cells.size()));
                group[members[j][k]] = it->second;
            }
        }
        // separate disconnected pieces within each fine group
        for (int i : members[j]) {
            if (assignment[i] >= 0) continue;
            int id = next++;
            assignment[i] = id;
            queue.assign(1, i);
            for (std::size_t qi = 0; qi < queue.size(); ++qi) {
                int v = queue[qi];
                for (int o = csr.offsets[v]; o < csr.offsets[v + 1]; ++o) {
                    int u = csr.neighbors[o];
                    if (assignment[u] < 0 && group[u] == group[v] &&
                        result.component[u] == result.component[v]) {
                        assignment[u] = id;
                        queue.push_back(u);
                    }
                }
            }
        }
    }
    return make_partition_result(problem, std::move(assignment));
}

}  // namespace geospark
