#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vbnet::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& s);
std::string to_string(const Shape& s);

/// Dense row-major array of doubles.
struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s, double fill = 0.0) : shape(std::move(s)), data(numel(shape), fill) {}
    Tensor(Shape s, std::vector<double> values);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }
};

struct Node {
    Tensor value;
    std::vector<double> grad;  ///< empty until something flows into this node
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;
    bool requires_grad = false;

    std::vector<double>& ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
        return grad;
    }
};

/// Handle to a node of the reverse-mode graph. Copies share the node.
class Value {
public:
    Value() = default;
    explicit Value(Tensor t, bool requires_grad = false);

    static Value constant(Tensor t) { return Value(std::move(t), false); }
    static Value parameter(Tensor t) { return Value(std::move(t), true); }
    /// [rows, cols] constant from row-major data.
    static Value matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    static Value scalar(double v, bool requires_grad = false);

    /// Interior node produced by an op. `backward` reads the node's grad and
    /// accumulates into the parents' grads.
    static Value from_op(Tensor t, std::vector<Value> parents, std::function<void(Node&)> backward);

    bool defined() const { return node_ != nullptr; }
    bool requires_grad() const { return node_->requires_grad; }
    const Tensor& tensor() const { return node_->value; }
    const Shape& shape() const { return node_->value.shape; }
    std::size_t size() const { return node_->value.size(); }
    std::span<const double> data() const { return node_->value.data; }
    /// Mutable storage; only meaningful on leaves.
    std::span<double> mutable_data() { return node_->value.data; }
    /// Gradient of the last backward pass, zeros if nothing reached this node.
    std::span<const double> grad() const;
    double item() const;

    void zero_grad();
    /// Back-propagates from this scalar node; each reachable node is visited once
    /// in reverse topological order.
    void backward() const;

    Node* node() const { return node_.get(); }
    const std::shared_ptr<Node>& shared() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

/// Records the branch taken by every non-smooth primitive (relu, clamp,
/// max-pool) while alive on the current thread. Two evaluations with equal
/// digests followed identical smooth pieces.
class BranchTrace {
public:
    BranchTrace();
    ~BranchTrace();
    BranchTrace(const BranchTrace&) = delete;
    BranchTrace& operator=(const BranchTrace&) = delete;

    std::uint64_t digest() const { return hash_; }
    static bool active();
    static void record(std::uint64_t branch);

private:
    std::uint64_t hash_ = 1469598103934665603ull;
    BranchTrace* prev_ = nullptr;
};

}  // namespace vbnet::ad
