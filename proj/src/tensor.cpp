#include "geospark/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace geospark {

namespace {

void check(bool cond, const char* op, const char* what) {
    if (!cond) throw ArgumentError(std::string(op) + ": " + what);
}

}  // namespace

Tape::Id Tape::push(Node node) {
    eval(node);
    nodes_.push_back(std::move(node));
    return static_cast<Id>(nodes_.size()) - 1;
}

Tape::Id Tape::input(Tensor value, bool requires_grad) {
    Node node;
    node.op = Op::Input;
    node.value = std::move(value);
    node.requires_grad = requires_grad;
    nodes_.push_back(std::move(node));
    return static_cast<Id>(nodes_.size()) - 1;
}

Tape::Id Tape::affine(Id x, Id weight, Id bias) {
    Node node;
    node.op = Op::Affine;
    node.in = {x, weight, bias};
    return push(std::move(node));
}

Tape::Id Tape::relu(Id x) {
    Node node;
    node.op = Op::Relu;
    node.in[0] = x;
    return push(std::move(node));
}

Tape::Id Tape::add(Id a, Id b) {
    Node node;
    node.op = Op::Add;
    node.in = {a, b, -1};
    return push(std::move(node));
}

Tape::Id Tape::sub(Id a, Id b) {
    Node node;
    node.op = Op::Sub;
    node.in = {a, b, -1};
    return push(std::move(node));
}

Tape::Id Tape::mul(Id a, Id b) {
    Node node;
    node.op = Op::Mul;
    node.in = {a, b, -1};
    return push(std::move(node));
}

Tape::Id Tape::scale(Id x, double factor) {
    Node node;
    node.op = Op::Scale;
    node.in[0] = x;
    node.factor = factor;
    return push(std::move(node));
}

Tape::Id Tape::concat_cols(Id a, Id b) {
    Node node;
    node.op = Op::ConcatCols;
    node.in = {a, b, -1};
    return push(std::move(node));
}

Tape::Id Tape::gather_rows(Id x, std::vector<int> idx) {
    Node node;
    node.op = Op::GatherRows;
    node.in[0] = x;
    node.indices = std::move(idx);
    return push(std::move(node));
}

Tape::Id Tape::block_softmax(Id x, std::size_t group) {
    Node node;
    node.op = Op::BlockSoftmax;
    node.in[0] = x;
    node.group = group;
    return push(std::move(node));
}

Tape::Id Tape::block_sum(Id x, std::size_t group) {
    Node node;
    node.op = Op::BlockSum;
    node.in[0] = x;
    node.group = group;
    return push(std::move(node));
}

Tape::Id Tape::segment_max(Id x, std::vector<int> seg, std::size_t num_segments) {
    Node node;
    node.op = Op::SegmentMax;
    node.in[0] = x;
    node.indices = std::move(seg);
    node.group = num_segments;
    return push(std::move(node));
}

Tape::Id Tape::segment_mean(Id x, std::vector<int> seg, std::size_t num_segments) {
    Node node;
    node.op = Op::SegmentMean;
    node.in[0] = x;
    node.indices = std::move(seg);
    node.group = num_segments;
    return push(std::move(node));
}

Tape::Id Tape::sum_all(Id x) {
    Node node;
    node.op = Op::SumAll;
    node.in[0] = x;
    return push(std::move(node));
}

Tape::Id Tape::mean_all(Id x) {
    Node node;
    node.op = Op::MeanAll;
    node.in[0] = x;
    return push(std::move(node));
}

Tape::Id Tape::cross_entropy(Id logits, Id target) {
    Node node;
    node.op = Op::CrossEntropy;
    node.in = {logits, target, -1};
    return push(std::move(node));
}

void Tape::eval(Node& node) {
    auto in = [&](int slot) -> const Tensor& { return nodes_.at(node.in[slot]).value; };
    auto any_grad = [&]() {
        for (Id id : node.in)
            if (id >= 0 && nodes_[id].requires_grad) return true;
        return false;
    };
    if (node.op != Op::Input) node.requires_grad = any_grad();

    switch (node.op) {
        case Op::Input:
            break;
        case Op::Affine: {
            const Tensor& x = in(0);
            const Tensor& w = in(1);
            const Tensor& b = in(2);
            check(x.cols == w.rows, "affine", "input/weight shape mismatch");
            check(b.rows == 1 && b.cols == w.cols, "affine", "bias shape mismatch");
            Tensor y(x.rows, w.cols);
            for (std::size_t i = 0; i < x.rows; ++i) {
                for (std::size_t k = 0; k < x.cols; ++k) {
                    double xv = x(i, k);
                    if (xv == 0.0) continue;
                    const double* wr = &w.v[k * w.cols];
                    double* yr = &y.v[i * y.cols];
                    for (std::size_t j = 0; j < w.cols; ++j) yr[j] += xv * wr[j];
                }
                for (std::size_t j = 0; j < w.cols; ++j) y(i, j) += b(0, j);
            }
            node.value = std::move(y);
            break;
        }
        case Op::Relu: {
            node.value = in(0);
            for (double& v : node.value.v) v = std::max(v, 0.0);
            break;
        }
        case Op::Add:
        case Op::Sub:
        case Op::Mul: {
            const Tensor& a = in(0);
            const Tensor& b = in(1);
            check(a.rows == b.rows && a.cols == b.cols, "elementwise", "shape mismatch");
            node.value = a;
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (node.op == Op::Add) node.value.v[i] += b.v[i];
                else if (node.op == Op::Sub) node.value.v[i] -= b.v[i];
                else node.value.v[i] *= b.v[i];
            }
            break;
        }
        case Op::Scale: {
            node.value = in(0);
            for (double& v : node.value.v) v *= node.factor;
            break;
        }
        case Op::ConcatCols: {
            const Tensor& a = in(0);
            const Tensor& b = in(1);
            check(a.rows == b.rows, "concat", "row count mismatch");
            Tensor y(a.rows, a.cols + b.cols);
            for (std::size_t i = 0; i < a.rows; ++i) {
                for (std::size_t c = 0; c < a.cols; ++c) y(i, c) = a(i, c);
                for (std::size_t c = 0; c < b.cols; ++c) y(i, a.cols + c) = b(i, c);
            }
            node.value = std::move(y);
            break;
        }
        case Op::GatherRows: {
            const Tensor& x = in(0);
            Tensor y(node.indices.size(), x.cols);
            for (std::size_t r = 0; r < node.indices.size(); ++r) {
                int src = node.indices[r];
                check(src >= 0 && src < static_cast<int>(x.rows), "gather", "index out of range");
                std::copy_n(&x.v[src * x.cols], x.cols, &y.v[r * y.cols]);
            }
            node.value = std::move(y);
            break;
        }
        case Op::BlockSoftmax: {
            const Tensor& x = in(0);
            check(node.group > 0 && x.rows % node.group == 0, "block_softmax",
                  "rows not divisible by group size");
            Tensor y(x.rows, x.cols);
            std::size_t blocks = x.rows / node.group;
            for (std::size_t b = 0; b < blocks; ++b) {
                for (std::size_t c = 0; c < x.cols; ++c) {
                    double mx = -std::numeric_limits<double>::infinity();
                    for (std::size_t r = 0; r < node.group; ++r)
                        mx = std::max(mx, x(b * node.group + r, c));
                    double sum = 0.0;
                    for (std::size_t r = 0; r < node.group; ++r) {
                        double e = std::exp(x(b * node.group + r, c) - mx);
                        y(b * node.group + r, c) = e;
                        sum += e;
                    }
                    for (std::size_t r = 0; r < node.group; ++r) y(b * node.group + r, c) /= sum;
                }
            }
            node.value = std::move(y);
            break;
        }
        case Op::BlockSum: {
            const Tensor& x = in(0);
            check(node.group > 0 && x.rows % node.group == 0, "block_sum",
                  "rows not divisible by group size");
            Tensor y(x.rows / node.group, x.cols);
            for (std::size_t r = 0; r < x.rows; ++r)
                for (std::size_t c = 0; c < x.cols; ++c) y(r / node.group, c) += x(r, c);
            node.value = std::move(y);
            break;
        }
        case Op::SegmentMax: {
            const Tensor& x = in(0);
            check(node.indices.size() == x.rows, "segment_max", "segment vector size mismatch");
            Tensor y(node.group, x.cols, -std::numeric_limits<double>::infinity());
            std::vector<int> argmax(node.group * x.cols, -1);
            for (std::size_t r = 0; r < x.rows; ++r) {
                int s = node.indices[r];
                check(s >= 0 && s < static_cast<int>(node.group), "segment_max",
                      "segment id out of range");
                for (std::size_t c = 0; c < x.cols; ++c) {
                    if (x(r, c) > y(s, c)) {  // strict: ties keep the lowest row
                        y(s, c) = x(r, c);
                        argmax[s * x.cols + c] = static_cast<int>(r);
                    }
                }
            }
            for (double& v : y.v)
                if (v == -std::numeric_limits<double>::infinity()) v = 0.0;  // empty segment
            node.saved = Tensor();  // argmax kept separately after the segment ids
            node.indices.insert(node.indices.end(), argmax.begin(), argmax.end());
            node.value = std::move(y);
            break;
        }
        case Op::SegmentMean: {
            const Tensor& x = in(0);
            check(node.indices.size() == x.rows, "segment_mean", "segment vector size mismatch");
            Tensor y(node.group, x.cols);
            std::vector<double> counts(node.group, 0.0);
            for (std::size_t r = 0; r < x.rows; ++r) {
                int s = node.indices[r];
                check(s >= 0 && s < static_cast<int>(node.group), "segment_mean",
                      "segment id out of range");
                counts[s] += 1.0;
                for (std::size_t c = 0; c < x.cols; ++c) y(s, c) += x(r, c);
            }
            for (std::size_t s = 0; s < node.group; ++s)
                if (counts[s] > 0.0)
                    for (std::size_t c = 0; c < x.cols; ++c) y(s, c) /= counts[s];
            node.value = std::move(y);
            break;
        }
        case Op::SumAll:
        case Op::MeanAll: {
            const Tensor& x = in(0);
            double s = 0.0;
            for (double v : x.v) s += v;
            if (node.op == Op::MeanAll) s /= static_cast<double>(x.size());
            node.value = Tensor(1, 1, s);
            break;
        }
        case Op::CrossEntropy: {
            const Tensor& logits = in(0);
            const Tensor& target = in(1);
            check(logits.rows == target.rows && logits.cols == target.cols, "cross_entropy",
                  "logits/target shape mismatch");
            check(logits.rows > 0, "cross_entropy", "empty input");
            Tensor soft(logits.rows, logits.cols);
            double total = 0.0;
            for (std::size_t r = 0; r < logits.rows; ++r) {
                double mx = -std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < logits.cols; ++c) mx = std::max(mx, logits(r, c));
                double sum = 0.0;
                for (std::size_t c = 0; c < logits.cols; ++c) {
                    soft(r, c) = std::exp(logits(r, c) - mx);
                    sum += soft(r, c);
                }
                double logsum = std::log(sum) + mx;
                for (std::size_t c = 0; c < logits.cols; ++c) {
                    soft(r, c) /= sum;
                    total -= target(r, c) * (logits(r, c) - logsum);
                }
            }
            node.saved = std::move(soft);
            node.value = Tensor(1, 1, total / static_cast<double>(logits.rows));
            break;
        }
    }
}

void Tape::backward(Id loss) {
    Node& top = nodes_.at(loss);
    if (top.value.rows != 1 || top.value.cols != 1)
        throw ArgumentError("backward: loss must be scalar");
    for (Node& node : nodes_) {
        if (node.requires_grad)
            node.grad = Tensor(node.value.rows, node.value.cols);
        else
            node.grad = Tensor();
    }
    if (!top.requires_grad) return;
    top.grad(0, 0) = 1.0;
    for (Id id = loss; id >= 0; --id) {
        Node& node = nodes_[id];
        if (!node.requires_grad || node.op == Op::Input) continue;
        backprop(node);
    }
}

void Tape::backprop(Node& node) {
    auto gin = [&](int slot) -> Tensor* {
        Node& src = nodes_[node.in[slot]];
        return src.requires_grad ? &src.grad : nullptr;
    };
    auto vin = [&](int slot) -> const Tensor& { return nodes_[node.in[slot]].value; };
    const Tensor& dy = node.grad;

    switch (node.op) {
        case Op::Input:
            break;
        case Op::Affine: {
            const Tensor& x = vin(0);
            const Tensor& w = vin(1);
            if (Tensor* dx = gin(0)) {
                for (std::size_t i = 0; i < x.rows; ++i)
                    for (std::size_t j = 0; j < w.cols; ++j) {
                        double g = dy(i, j);
                        if (g == 0.0) continue;
                        for (std::size_t k = 0; k < x.cols; ++k) (*dx)(i, k) += g * w(k, j);
                    }
            }
            if (Tensor* dw = gin(1)) {
                for (std::size_t i = 0; i < x.rows; ++i)
                    for (std::size_t k = 0; k < x.cols; ++k) {
                        double xv = x(i, k);
                        if (xv == 0.0) continue;
                        for (std::size_t j = 0; j < w.cols; ++j) (*dw)(k, j) += xv * dy(i, j);
                    }
            }
            if (Tensor* db = gin(2)) {
                for (std::size_t i = 0; i < x.rows; ++i)
                    for (std::size_t j = 0; j < w.cols; ++j) (*db)(0, j) += dy(i, j);
            }
            break;
        }
        case Op::Relu: {
            if (Tensor* dx = gin(0)) {
                const Tensor& x = vin(0);
                for (std::size_t i = 0; i < x.size(); ++i)
                    if (x.v[i] > 0.0) dx->v[i] += dy.v[i];
            }
            break;
        }
        case Op::Add: {
            if (Tensor* da = gin(0))
                for (std::size_t i = 0; i < dy.size(); ++i) da->v[i] += dy.v[i];
            if (Tensor* db = gin(1))
                for (std::size_t i = 0; i < dy.size(); ++i) db->v[i] += dy.v[i];
            break;
        }
        case Op::Sub: {
            if (Tensor* da = gin(0))
                for (std::size_t i = 0; i < dy.size(); ++i) da->v[i] += dy.v[i];
            if (Tensor* db = gin(1))
                for (std::size_t i = 0; i < dy.size(); ++i) db->v[i] -= dy.v[i];
            break;
        }
        case Op::Mul: {
            const Tensor& a = vin(0);
            const Tensor& b = vin(1);
            if (Tensor* da = gin(0))
                for (std::size_t i = 0; i < dy.size(); ++i) da->v[i] += dy.v[i] * b.v[i];
            if (Tensor* db = gin(1))
                for (std::size_t i = 0; i < dy.size(); ++i) db->v[i] += dy.v[i] * a.v[i];
            break;
        }
        case Op::Scale: {
            if (Tensor* dx = gin(0))
                for (std::size_t i = 0; i < dy.size(); ++i) dx->v[i] += node.factor * dy.v[i];
            break;
        }
        case Op::ConcatCols: {
            const Tensor& a = vin(0);
            if (Tensor* da = gin(0)) {
                for (std::size_t i = 0; i < a.rows; ++i)
                    for (std::size_t c = 0; c < a.cols; ++c) (*da)(i, c) += dy(i, c);
            }
            if (Tensor* db = gin(1)) {
                for (std::size_t i = 0; i < db->rows; ++i)
                    for (std::size_t c = 0; c < db->cols; ++c) (*db)(i, c) += dy(i, a.cols + c);
            }
            break;
        }
        case Op::GatherRows: {
            if (Tensor* dx = gin(0)) {
                for (std::size_t r = 0; r < node.indices.size(); ++r) {
                    int src = node.indices[r];
                    for (std::size_t c = 0; c < dy.cols; ++c) (*dx)(src, c) += dy(r, c);
                }
            }
            break;
        }
        case Op::BlockSoftmax: {
            if (Tensor* dx = gin(0)) {
                const Tensor& y = node.value;
                std::size_t blocks = y.rows / node.group;
                for (std::size_t b = 0; b < blocks; ++b) {
                    for (std::size_t c = 0; c < y.cols; ++c) {
                        double inner = 0.0;
                        for (std::size_t r = 0; r < node.group; ++r)
                            inner += dy(b * node.group + r, c) * y(b * node.group + r, c);
                        for (std::size_t r = 0; r < node.group; ++r)
                            (*dx)(b * node.group + r, c) +=
                                y(b * node.group + r, c) * (dy(b * node.group + r, c) - inner);
                    }
                }
            }
            break;
        }
        case Op::BlockSum: {
            if (Tensor* dx = gin(0)) {
                for (std::size_t r = 0; r < dx->rows; ++r)
                    for (std::size_t c = 0; c < dx->cols; ++c)
                        (*dx)(r, c) += dy(r / node.group, c);
            }
            break;
        }
        case Op::SegmentMax: {
            if (Tensor* dx = gin(0)) {
                std::size_t cols = node.value.cols;
                const int* argmax = node.indices.data() + dx->rows;  // after the segment ids
                for (std::size_t s = 0; s < node.group; ++s)
                    for (std::size_t c = 0; c < cols; ++c) {
                        int r = argmax[s * cols + c];
                        if (r >= 0) (*dx)(r, c) += dy(s, c);
                    }
            }
            break;
        }
        case Op::SegmentMean: {
            if (Tensor* dx = gin(0)) {
                std::vector<double> counts(node.group, 0.0);
                for (std::size_t r = 0; r < dx->rows; ++r) counts[node.indices[r]] += 1.0;
                for (std::size_t r = 0; r < dx->rows; ++r) {
                    int s = node.indices[r];
                    for (std::size_t c = 0; c < dx->cols; ++c)
                        (*dx)(r, c) += dy(s, c) / counts[s];
                }
            }
            break;
        }
        case Op::SumAll: {
            if (Tensor* dx = gin(0))
                for (double& v : dx->v) v += dy.scalar();
            break;
        }
        case Op::MeanAll: {
            if (Tensor* dx = gin(0)) {
                double g = dy.scalar() / static_cast<double>(dx->size());
                for (double& v : dx->v) v += g;
            }
            break;
        }
        case Op::CrossEntropy: {
            const Tensor& target = vin(1);
            const Tensor& soft = node.saved;
            double g = dy.scalar() / static_cast<double>(soft.rows);
            if (Tensor* dl = gin(0)) {
                for (std::size_t r = 0; r < soft.rows; ++r) {
                    double tsum = 0.0;
                    for (std::size_t c = 0; c < soft.cols; ++c) tsum += target(r, c);
                    for (std::size_t c = 0; c < soft.cols; ++c)
                        (*dl)(r, c) += g * (tsum * soft(r, c) - target(r, c));
                }
            }
            if (Tensor* dt = gin(1)) {
                for (std::size_t r = 0; r < soft.rows; ++r)
                    for (std::size_t c = 0; c < soft.cols; ++c)
                        (*dt)(r, c) -= g * std::log(std::max(soft(r, c), 1e-300));
            }
            break;
        }
    }
}

const Tensor& Tape::grad(Id id) const {
    const Node& node = nodes_.at(id);
    if (!node.requires_grad) throw ArgumentError("grad: node does not require gradients");
    return node.grad;
}

void Tape::recompute() {
    for (Node& node : nodes_) {
        if (node.op == Op::Input) continue;
        // segment_max appends argmax payload on eval; strip it before replay
        if (node.op == Op::SegmentMax) node.indices.resize(node.in[0] >= 0
                ? nodes_[node.in[0]].value.rows : 0);
        eval(node);
    }
}

void adamw_step(Parameter& param, const Tensor& grad, const AdamWConfig& config,
                std::int64_t step) {
    if (!(config.lr > 0.0)) throw ArgumentError("adamw_step: lr must be positive");
    if (step < 1) throw ArgumentError("adamw_step: step must be >= 1");
    if (grad.rows != param.value.rows || grad.cols != param.value.cols)
        throw ArgumentError("adamw_step: gradient shape mismatch");
    if (param.moment1.size() != param.value.size()) {
        param.moment1 = Tensor(param.value.rows, param.value.cols);
        param.moment2 = Tensor(param.value.rows, param.value.cols);
    }
    double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
    double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < param.value.size(); ++i) {
        // decoupled decay first, applied directly to the weights
        param.value.v[i] -= config.lr * config.weight_decay * param.value.v[i];
        double g = grad.v[i];
        param.moment1.v[i] = config.beta1 * param.moment1.v[i] + (1.0 - config.beta1) * g;
        param.moment2.v[i] = config.beta2 * param.moment2.v[i] + (1.0 - config.beta2) * g * g;
        double mhat = param.moment1.v[i] / bc1;
        double vhat = param.moment2.v[i] / bc2;
        param.value.v[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
}

Parameter& ParameterStore::dense(const std::string& name, std::size_t rows, std::size_t cols) {
    auto it = params_.find(name);
    if (it != params_.end()) {
        if (it->second.value.rows != rows || it->second.value.cols != cols)
            throw ArgumentError("parameter shape mismatch: " + name);
        return it->second;
    }
    Parameter p;
    p.name = name;
    p.value = Tensor(rows, cols);
    double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : p.value.v) v = rng_.uniform(-bound, bound);
    return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ParameterStore::zeros(const std::string& name, std::size_t rows, std::size_t cols) {
    auto it = params_.find(name);
    if (it != params_.end()) {
        if (it->second.value.rows != rows || it->second.value.cols != cols)
            throw ArgumentError("parameter shape mismatch: " + name);
        return it->second;
    }
    Parameter p;
    p.name = name;
    p.value = Tensor(rows, cols);
    return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ParameterStore::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ArgumentError("unknown parameter: " + name);
    return it->second;
}

namespace {

constexpr char kMagic[4] = {'G', 'S', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw ParseError("checkpoint: truncated file");
    return v;
}

void write_string(std::ofstream& out, const std::string& s) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
    auto len = read_pod<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw ParseError("checkpoint: truncated string");
    return s;
}

void write_tensor(std::ofstream& out, const Tensor& t) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(t.rows));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(t.cols));
    out.write(reinterpret_cast<const char*>(t.v.data()),
              static_cast<std::streamsize>(t.v.size() * sizeof(double)));
}

Tensor read_tensor(std::ifstream& in) {
    auto rows = read_pod<std::uint32_t>(in);
    auto cols = read_pod<std::uint32_t>(in);
    Tensor t(rows, cols);
    in.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
    if (!in) throw ParseError("checkpoint: truncated tensor");
    return t;
}

}  // namespace

void ParameterStore::save(const std::string& path,
                          const std::map<std::string, std::string>& extras) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    write_pod<std::uint32_t>(out, kVersion);
    write_pod<std::uint64_t>(out, rng_.state);
    write_pod<std::int64_t>(out, step_);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(extras.size()));
    for (const auto& [k, v] : extras) {
        write_string(out, k);
        write_string(out, v);
    }
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params_.size()));
    for (const auto& [name, p] : params_) {
        write_string(out, name);
        write_tensor(out, p.value);
        write_tensor(out, p.moment1);
        write_tensor(out, p.moment2);
    }
}

std::map<std::string, std::string> ParameterStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError("checkpoint: bad magic");
    auto version = read_pod<std::uint32_t>(in);
    if (version != kVersion) throw ParseError("checkpoint: unsupported version");
    rng_.state = read_pod<std::uint64_t>(in);
    step_ = read_pod<std::int64_t>(in);
    std::map<std::string, std::string> extras;
    auto num_extras = read_pod<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < num_extras; ++i) {
        std::string k = read_string(in);
        extras[k] = read_string(in);
    }
    params_.clear();
    auto count = read_pod<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        Parameter p;
        p.name = read_string(in);
        p.value = read_tensor(in);
        p.moment1 = read_tensor(in);
        p.moment2 = read_tensor(in);
        params_.emplace(p.name, std::move(p));
    }
    return extras;
}

}  // namespace geospark
