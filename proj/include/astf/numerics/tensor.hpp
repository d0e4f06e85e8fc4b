#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace astf {

using Shape = std::vector<std::size_t>;
using Rng = std::mt19937_64;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct Node;

struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    bool requires_grad = false;
    std::shared_ptr<TensorImpl> grad;
    std::shared_ptr<Node> grad_fn;
};

// Dense row-major tensor of doubles with an optional autograd history.
//
// Tensor is a handle: copies share storage and history, exactly like the
// parameters of a module share storage with the optimizer that updates them.
// Operations never mutate their inputs; they return fresh tensors. A tensor
// created by an operation while grad mode is on and any input requires grad
// records a Node that backward() later walks.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> values);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, double value);
    static Tensor ones(Shape shape) { return full(std::move(shape), 1.0); }
    static Tensor scalar(double value) { return Tensor(Shape{}, {value}); }
    static Tensor randn(Shape shape, Rng& rng, double stddev = 1.0);
    static Tensor uniform(Shape shape, Rng& rng, double lo, double hi);
    // Row vector / matrix literals, mostly for tests.
    static Tensor vector(std::initializer_list<double> values);
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

    bool defined() const noexcept { return impl_ != nullptr; }
    const Shape& shape() const;
    std::size_t ndim() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t numel() const;

    std::span<const double> values() const;
    // Writable view of the storage. Used by optimizers and finite-difference
    // checks on leaves; writing into a tensor that is part of a live graph
    // invalidates the recorded backward pass.
    std::span<double> mutable_values();
    double item() const;
    double at(std::initializer_list<std::size_t> index) const;

    bool requires_grad() const;
    Tensor& set_requires_grad(bool on = true);
    bool is_leaf() const;

    // Accumulated gradient of a leaf after backward(); undefined if none.
    Tensor grad() const;
    void zero_grad();

    // Same values, no history. Storage is copied.
    Tensor detach() const;
    Tensor clone() const { return detach(); }

    const TensorImpl* id() const noexcept { return impl_.get(); }
    const std::shared_ptr<TensorImpl>& impl() const noexcept { return impl_; }
    explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<TensorImpl> impl_;
};

}  // namespace astf
