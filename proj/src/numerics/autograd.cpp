#include "astf/numerics/autograd.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "astf/error.hpp"
#include "astf/numerics/ops.hpp"

namespace astf {

namespace {
thread_local bool g_grad_enabled = true;

struct Traversal {
    std::vector<Tensor> order;   // nodes with a grad_fn, post-order
    std::vector<Tensor> leaves;  // leaves requiring grad, discovery order
};

// Iterative post-order DFS so that deep graphs cannot overflow the stack.
Traversal topo_sort(const Tensor& root) {
    Traversal t;
    std::unordered_set<const TensorImpl*> seen;
    struct Frame {
        Tensor tensor;
        std::size_t next_input;
    };
    std::vector<Frame> stack;
    if (root.impl()->grad_fn) {
        stack.push_back({root, 0});
        seen.insert(root.id());
    } else if (root.requires_grad()) {
        t.leaves.push_back(root);
    }
    while (!stack.empty()) {
        Frame& top = stack.back();
        const auto& inputs = top.tensor.impl()->grad_fn->inputs;
        if (top.next_input < inputs.size()) {
            const Tensor& in = inputs[top.next_input++];
            if (!in.requires_grad() || seen.count(in.id())) continue;
            seen.insert(in.id());
            if (in.impl()->grad_fn) {
                stack.push_back({in, 0});
            } else {
                t.leaves.push_back(in);
            }
        } else {
            t.order.push_back(top.tensor);
            stack.pop_back();
        }
    }
    return t;
}

using GradMap = std::unordered_map<const TensorImpl*, Tensor>;

GradMap propagate(const Traversal& t, const Tensor& root,
                  const std::unordered_set<const TensorImpl*>& keep = {}) {
    GradMap grads;
    grads[root.id()] = Tensor::ones(root.shape());
    for (auto it = t.order.rbegin(); it != t.order.rend(); ++it) {
        const Tensor& out = *it;
        auto found = grads.find(out.id());
        if (found == grads.end()) continue;
        Tensor g = found->second;
        const Node& node = *out.impl()->grad_fn;
        std::vector<Tensor> in_grads = node.backward(out, g);
        if (in_grads.size() != node.inputs.size()) {
            throw ContractError(std::string("backward of ") + node.name +
                                " returned the wrong number of gradients");
        }
        for (std::size_t i = 0; i < in_grads.size(); ++i) {
            const Tensor& in = node.inputs[i];
            Tensor& gi = in_grads[i];
            if (!in.requires_grad() || !gi.defined()) continue;
            if (gi.shape() != in.shape()) {
                throw DimensionError(std::string("backward of ") + node.name + " produced " +
                                     shape_str(gi.shape()) + " for input " +
                                     shape_str(in.shape()));
            }
            auto slot = grads.find(in.id());
            if (slot == grads.end()) {
                grads.emplace(in.id(), gi);
            } else {
                slot->second = add(slot->second, gi);
            }
        }
        // Interior gradients are no longer needed once consumed.
        if (out.id() != root.id() && !keep.count(out.id())) grads.erase(out.id());
    }
    return grads;
}

}  // namespace

bool GradMode::enabled() noexcept { return g_grad_enabled; }
void GradMode::set_enabled(bool on) noexcept { g_grad_enabled = on; }

Tensor make_result(const char* name, Shape shape, std::vector<double> data,
                   std::vector<Tensor> inputs, BackwardFn backward) {
    Tensor out(std::move(shape), std::move(data));
    if (!GradMode::enabled()) return out;
    bool any = std::any_of(inputs.begin(), inputs.end(),
                           [](const Tensor& t) { return t.requires_grad(); });
    if (!any) return out;
    out.impl()->requires_grad = true;
    out.impl()->grad_fn =
        std::make_shared<Node>(Node{name, std::move(inputs), std::move(backward)});
    return out;
}

void backward(const Tensor& loss) {
    if (!loss.defined()) throw ContractError("backward on undefined tensor");
    if (loss.numel() != 1) {
        throw ContractError("backward needs a scalar loss, got " + shape_str(loss.shape()));
    }
    if (!loss.requires_grad()) return;
    NoGradGuard guard;
    Traversal t = topo_sort(loss);
    GradMap grads = propagate(t, loss);
    for (const Tensor& leaf : t.leaves) {
        auto found = grads.find(leaf.id());
        if (found == grads.end()) continue;
        auto& impl = *leaf.impl();
        if (!impl.grad) {
            impl.grad = std::make_shared<TensorImpl>();
            impl.grad->shape = impl.shape;
            auto src = found->second.values();
            impl.grad->data.assign(src.begin(), src.end());
        } else {
            auto src = found->second.values();
            for (std::size_t i = 0; i < src.size(); ++i) impl.grad->data[i] += src[i];
        }
    }
}

std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> inputs, bool create_graph) {
    if (!output.defined()) throw ContractError("grad of undefined tensor");
    if (output.numel() != 1) {
        throw ContractError("grad needs a scalar output, got " + shape_str(output.shape()));
    }
    std::vector<Tensor> result;
    result.reserve(inputs.size());
    if (!output.requires_grad()) {
        for (const Tensor& in : inputs) result.push_back(Tensor::zeros(in.shape()));
        return result;
    }
    bool previous = GradMode::enabled();
    GradMode::set_enabled(create_graph);
    Traversal t = topo_sort(output);
    std::unordered_set<const TensorImpl*> keep;
    for (const Tensor& in : inputs) keep.insert(in.id());
    GradMap grads;
    try {
        grads = propagate(t, output, keep);
    } catch (...) {
        GradMode::set_enabled(previous);
        throw;
    }
    GradMode::set_enabled(previous);
    for (const Tensor& in : inputs) {
        auto found = grads.find(in.id());
        if (found == grads.end()) {
            result.push_back(Tensor::zeros(in.shape()));
        } else {
            result.push_back(create_graph ? found->second : found->second.detach());
        }
    }
    return result;
}

}  // namespace astf
