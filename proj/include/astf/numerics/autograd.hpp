#pragma once

#include <functional>
#include <span>
#include <vector>

#include "astf/numerics/tensor.hpp"

namespace astf {

// Backward rule of one recorded operation: given the operation's output and
// the gradient flowing into it, return one gradient per input (an undefined
// tensor where the input needs none). Rules are written with ordinary tensor
// operations so that they are themselves differentiable when the graph is
// rebuilt during backward (create_graph), which R1 needs.
using BackwardFn = std::function<std::vector<Tensor>(const Tensor& out, const Tensor& grad_out)>;

struct Node {
    const char* name;
    std::vector<Tensor> inputs;
    BackwardFn backward;
};

class GradMode {
public:
    static bool enabled() noexcept;
    static void set_enabled(bool on) noexcept;
};

class NoGradGuard {
public:
    NoGradGuard() : previous_(GradMode::enabled()) { GradMode::set_enabled(false); }
    ~NoGradGuard() { GradMode::set_enabled(previous_); }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

// Builds the op output and, when recording, attaches its Node.
Tensor make_result(const char* name, Shape shape, std::vector<double> data,
                   std::vector<Tensor> inputs, BackwardFn backward);

// Accumulates d(loss)/d(leaf) into every reachable leaf that requires grad.
// The loss must hold exactly one element.
void backward(const Tensor& loss);

// Returns d(output)/d(inputs) without touching leaf .grad. With create_graph
// the returned gradients carry history and can be differentiated again.
std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> inputs,
                         bool create_graph = false);

}  // namespace astf
