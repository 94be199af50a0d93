#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "geospark/common.hpp"

namespace geospark {

/// Dense 2-D real array (scalars are 1x1).
struct Tensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
    std::size_t size() const { return v.size(); }
    double scalar() const { return v.at(0); }

    static Tensor from_matrix(const Matrix& m) {
        Tensor t(m.rows, m.cols);
        t.v = m.data;
        return t;
    }
};

/// Recorded computation: ops are appended eagerly (values computed on add)
/// and replayed in reverse for gradients. Shapes are validated at build time.
class Tape {
public:
    using Id = int;

    Id input(Tensor value, bool requires_grad = false);

    Id affine(Id x, Id weight, Id bias);  // y = x * W + 1 * b^T, W: c_in x c_out, b: 1 x c_out
    Id relu(Id x);
    Id add(Id a, Id b);
    Id sub(Id a, Id b);
    Id mul(Id a, Id b);  // Hadamard
    Id scale(Id x, double factor);
    Id concat_cols(Id a, Id b);
    Id gather_rows(Id x, std::vector<int> idx);
    // softmax along groups of `group` consecutive rows, independently per column
    Id block_softmax(Id x, std::size_t group);
    // sum of each consecutive `group` rows
    Id block_sum(Id x, std::size_t group);
    Id segment_max(Id x, std::vector<int> seg, std::size_t num_segments);
    Id segment_mean(Id x, std::vector<int> seg, std::size_t num_segments);
    Id sum_all(Id x);
    Id mean_all(Id x);
    // mean over rows of -sum_c target * log softmax(logits); scalar output
    Id cross_entropy(Id logits, Id target);

    const Tensor& value(Id id) const { return nodes_.at(id).value; }
    // For perturb-and-recompute workflows (finite differences); only leaf
    // (Input) values should be written.
    Tensor& mutable_value(Id id) { return nodes_.at(id).value; }
    bool requires_grad(Id id) const { return nodes_.at(id).requires_grad; }
    std::size_t num_nodes() const { return nodes_.size(); }

    // Reverse-topological accumulation from a scalar loss node.
    void backward(Id loss);
    const Tensor& grad(Id id) const;

    // Re-evaluates every node in recorded order from the stored leaf values.
    void recompute();

private:
    enum class Op {
        Input, Affine, Relu, Add, Sub, Mul, Scale, ConcatCols, GatherRows,
        BlockSoftmax, BlockSum, SegmentMax, SegmentMean, SumAll, MeanAll, CrossEntropy
    };

    struct Node {
        Op op;
        std::array<Id, 3> in{-1, -1, -1};
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        // op-specific payload
        std::vector<int> indices;   // gather / segment ids / saved argmax rows
        std::size_t group = 0;      // block ops, segment count
        double factor = 0.0;        // scale
        Tensor saved;               // cross-entropy softmax cache
    };

    Id push(Node node);
    void eval(Node& node);
    void backprop(Node& node);

    std::vector<Node> nodes_;
};

/// Trainable tensor plus AdamW state.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor moment1;
    Tensor moment2;
};

struct AdamWConfig {
    double lr = 0.004;
    double weight_decay = 0.02;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One decoupled-weight-decay Adam update; step is 1-based.
void adamw_step(Parameter& param, const Tensor& grad, const AdamWConfig& config,
                std::int64_t step);

/// Named parameters with a shared seeded PRNG and a global step counter.
class ParameterStore {
public:
    explicit ParameterStore(std::uint64_t seed = 1) : rng_(seed) {}

    // Creates on first use (uniform +-sqrt(6/(fan_in+fan_out)) weights, zero bias
    // when rows == 1); later calls return the existing parameter and check shape.
    Parameter& dense(const std::string& name, std::size_t rows, std::size_t cols);
    Parameter& zeros(const std::string& name, std::size_t rows, std::size_t cols);

    bool contains(const std::string& name) const { return params_.count(name) > 0; }
    Parameter& at(const std::string& name);
    std::map<std::string, Parameter>& all() { return params_; }
    const std::map<std::string, Parameter>& all() const { return params_; }

    std::int64_t step_count() const { return step_; }
    void set_step_count(std::int64_t s) { step_ = s; }
    std::int64_t next_step() { return ++step_; }

    SplitMix64& rng() { return rng_; }

    // Versioned little-endian binary: parameters with optimizer state, the
    // step counter, the PRNG state, and free-form string extras.
    void save(const std::string& path, const std::map<std::string, std::string>& extras = {}) const;
    std::map<std::string, std::string> load(const std::string& path);

private:
    std::map<std::string, Parameter> params_;
    SplitMix64 rng_;
    std::int64_t step_ = 0;
};

}  // namespace geospark
