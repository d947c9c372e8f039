#include "vbnet/ad/value.hpp"

#include <sstream>
#include <unordered_set>

#include "vbnet/errors.hpp"

namespace vbnet::ad {

std::size_t numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

std::string to_string(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
    if (data.size() != numel(shape)) {
        throw ShapeError("Tensor: " + std::to_string(data.size()) + " values for shape " +
                         ad::to_string(shape));
    }
}

Value::Value(Tensor t, bool requires_grad) : node_(std::make_shared<Node>()) {
    node_->value = std::move(t);
    node_->requires_grad = requires_grad;
}

Value Value::matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
    return Value(Tensor({rows, cols}, std::move(data)));
}

Value Value::scalar(double v, bool requires_grad) {
    return Value(Tensor({1}, std::vector<double>{v}), requires_grad);
}

Value Value::from_op(Tensor t, std::vector<Value> parents, std::function<void(Node&)> backward) {
    Value out(std::move(t), false);
    for (const Value& p : parents) {
        if (p.requires_grad()) out.node_->requires_grad = true;
    }
    if (out.node_->requires_grad) {
        out.node_->parents.reserve(parents.size());
        for (Value& p : parents) out.node_->parents.push_back(std::move(p.node_));
        out.node_->backward = std::move(backward);
    }
    return out;
}

std::span<const double> Value::grad() const {
    if (node_->grad.size() != node_->value.size()) node_->grad.assign(node_->value.size(), 0.0);
    return node_->grad;
}

double Value::item() const {
    if (size() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape()));
    return node_->value.data[0];
}

void Value::zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

void Value::backward() const {
    if (size() != 1) throw ShapeError("backward() needs a scalar, got " + to_string(shape()));
    if (!node_->requires_grad) return;

    // iterative post-order DFS
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
    seen.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            Node* p = n->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }
    node_->ensure_grad()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward && n->grad.size() == n->value.size()) n->backward(*n);
    }
}

namespace {
thread_local BranchTrace* g_trace = nullptr;
}

BranchTrace::BranchTrace() : prev_(g_trace) { g_trace = this; }
BranchTrace::~BranchTrace() { g_trace = prev_; }

bool BranchTrace::active() { return g_trace != nullptr; }

void BranchTrace::record(std::uint64_t branch) {
    if (!g_trace) return;
    g_trace->hash_ ^= branch + 0x9e3779b97f4a7c15ull + (g_trace->hash_ << 6) + (g_trace->hash_ >> 2);
}

}  // namespace vbnet::ad
