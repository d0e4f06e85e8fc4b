#pragma once

#include <cstdint>
#include <vector>

#include "astf/numerics/nn.hpp"

namespace astf {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double eps = 1e-8;
};

class Adam {
public:
    Adam(nn::ParamSet params, AdamOptions options);

    // Applies one update from the gradients currently held by the parameters.
    // Parameters without a gradient are left untouched.
    void step();
    void zero_grad() { params_.zero_grad(); }

    const nn::ParamSet& params() const noexcept { return params_; }
    const AdamOptions& options() const noexcept { return options_; }

    // Moment estimates and per-parameter step counts, exposed for checkpoints.
    std::vector<Tensor>& first_moments() noexcept { return m_; }
    std::vector<Tensor>& second_moments() noexcept { return v_; }
    std::vector<std::uint64_t>& steps() noexcept { return t_; }
    const std::vector<Tensor>& first_moments() const noexcept { return m_; }
    const std::vector<Tensor>& second_moments() const noexcept { return v_; }
    const std::vector<std::uint64_t>& steps() const noexcept { return t_; }

private:
    nn::ParamSet params_;
    AdamOptions options_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::vector<std::uint64_t> t_;
};

// Rescales all gradients so that their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(const nn::ParamSet& params, double max_norm);

}  // namespace astf
