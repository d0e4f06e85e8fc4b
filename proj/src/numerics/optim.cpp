#include "astf/numerics/optim.hpp"

#include <cmath>

namespace astf {

Adam::Adam(nn::ParamSet params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
    for (const auto& [name, p] : params_.entries()) {
        m_.push_back(Tensor::zeros(p.shape()));
        v_.push_back(Tensor::zeros(p.shape()));
        t_.push_back(0);
    }
}

void Adam::step() {
    const auto& entries = params_.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        Tensor p = entries[i].second;
        Tensor g = p.grad();
        if (!g.defined()) continue;
        ++t_[i];
        double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_[i]));
        double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_[i]));
        auto w = p.mutable_values();
        auto m = m_[i].mutable_values();
        auto v = v_[i].mutable_values();
        auto gv = g.values();
        for (std::size_t k = 0; k < w.size(); ++k) {
            m[k] = options_.beta1 * m[k] + (1.0 - options_.beta1) * gv[k];
            v[k] = options_.beta2 * v[k] + (1.0 - options_.beta2) * gv[k] * gv[k];
            double mhat = m[k] / bc1;
            double vhat = v[k] / bc2;
            w[k] -= options_.lr * mhat / (std::sqrt(vhat) + options_.eps);
        }
    }
}

double clip_grad_norm(const nn::ParamSet& params, double max_norm) {
    double sq = 0.0;
    for (const auto& [name, p] : params.entries()) {
        Tensor g = p.grad();
        if (!g.defined()) continue;
        for (double x : g.values()) sq += x * x;
    }
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        double scale = max_norm / norm;
        for (const auto& [name, p] : params.entries()) {
            Tensor g = p.grad();
            if (!g.defined()) continue;
            for (double& x : g.mutable_values()) x *= scale;
        }
    }
    return norm;
}

}  // namespace astf
