#include "astf/attn/hos_attn.hpp"

#include <cmath>

#include "astf/error.hpp"
#include "astf/numerics/ops.hpp"

namespace astf::attn {

namespace {

Tensor xavier(std::size_t in, std::size_t out, std::uint64_t seed, const std::string& name) {
    Rng rng = nn::param_rng(seed, name);
    double a = std::sqrt(6.0 / static_cast<double>(in + out));
    return Tensor::uniform({in, out}, rng, -a, a).set_requires_grad();
}

}  // namespace

StatCrossAttention::StatCrossAttention(std::size_t hidden, const std::string& name, std::uint64_t seed)
    : hidden_(hidden),
      q_(1, hidden, name + ".q", seed),
      k_(1, hidden, name + ".k", seed),
      v_(1, hidden, name + ".v", seed),
      out_(hidden, 1, name + ".out", seed, nn::Linear::Init::Zero) {}

StatCrossAttention::Result StatCrossAttention::attend(const Tensor& s_q, const Tensor& s_k,
                                                      const Tensor& s_v) const {
    if (s_q.shape() != s_k.shape() || s_q.shape() != s_v.shape() || s_q.ndim() != 2 || s_q.dim(0) != 1)
        throw DimensionError("statistics cross-attention: group shapes " + shape_str(s_q.shape()) + ", " +
                             shape_str(s_k.shape()) + ", " + shape_str(s_v.shape()) + " must all be [1 x d]");
    // channels become tokens: [d x 1] -> [d x hidden]
    Tensor tq = q_.forward(transpose(s_q));
    Tensor tk = k_.forward(transpose(s_k));
    Tensor tv = v_.forward(transpose(s_v));
    Tensor scores = mul(matmul(tq, tk, false, true), 1.0 / std::sqrt(static_cast<double>(hidden_)));
    Result r;
    r.weights = softmax(scores, 1);
    r.context = matmul(r.weights, tv);
    r.output = transpose(out_.forward(r.context));
    return r;
}

Tensor StatCrossAttention::forward(const std::array<Tensor, 3>& group) const {
    return attend(group[0], group[1], group[2]).output;
}

void StatCrossAttention::collect(nn::ParamSet& params) const {
    q_.collect(params);
    k_.collect(params);
    v_.collect(params);
    out_.collect(params);
}

GateSelfAttention::GateSelfAttention(std::size_t width, std::vector<Stat> stats, std::size_t heads,
                                     const std::string& name, std::uint64_t seed)
    : name_(name), width_(width), heads_(heads), stats_(std::move(stats)) {
    if (stats_.size() > 4) throw ContractError("gate self-attention: at most four statistics");
    std::size_t aug = width * (1 + stats_.size());
    wq_ = xavier(aug, width, seed, name + ".wq");
    wk_ = xavier(aug, width, seed, name + ".wk");
    wv_ = xavier(aug, aug, seed, name + ".wv");
    wo_ = xavier(aug, aug, seed, name + ".wo");
}

Tensor GateSelfAttention::augment(const Tensor& q, const RefinedStats& refined, const FrameMask& mask) const {
    if (q.ndim() != 2 || q.dim(1) != width_ || q.dim(0) != mask.size())
        throw DimensionError("gate self-attention: Q " + shape_str(q.shape()) + " does not match width " +
                             std::to_string(width_) + " and mask length " + std::to_string(mask.size()));
    Tensor m = mask.column();
    std::vector<Tensor> parts{q};
    for (Stat s : stats_) {
        const Tensor& r = refined[s];
        if (!r.defined() || r.shape() != Shape{1, width_})
            throw DimensionError(std::string("gate self-attention: refined ") + stats::stat_name(s) +
                                 " must be [1 x " + std::to_string(width_) + "]");
        parts.push_back(mul(broadcast_to(r, q.shape()), m));
    }
    return concat(parts, 1);
}

Tensor GateSelfAttention::forward(const Tensor& q, const RefinedStats& refined, const FrameMask& mask,
                                  std::vector<Tensor>* weights) const {
    Tensor aug = augment(q, refined, mask);
    Tensor attended = nn::attention(matmul(aug, wq_), matmul(aug, wk_), matmul(aug, wv_), mask.key_bias(), heads_,
                                    weights);
    // only the first `width` output columns survive; the statistic columns are discarded
    Tensor f_c = matmul(attended, slice(wo_, 1, 0, width_));
    return mul(f_c, mask.column());
}

void GateSelfAttention::collect(nn::ParamSet& params) const {
    params.add(name_ + ".wq", wq_);
    params.add(name_ + ".wk", wk_);
    params.add(name_ + ".wv", wv_);
    params.add(name_ + ".wo", wo_);
}

Tensor cosine_gate(const Tensor& q, const Tensor& k, double eps) {
    if (q.shape() != k.shape())
        throw DimensionError("cosine_gate: " + shape_str(q.shape()) + " vs " + shape_str(k.shape()));
    Tensor dot = sum(mul(q, k));
    Tensor nq = sqrt(clamp_min(sum(square(q)), eps * eps));
    Tensor nk = sqrt(clamp_min(sum(square(k)), eps * eps));
    Tensor cos = div(dot, mul(nq, nk));
    return clamp(mul(add(cos, 1.0), 0.5), 0.0, 1.0);
}

Tensor gate_residual(const Tensor& f_c, const Tensor& q, const Tensor& gate) {
    if (f_c.shape() != q.shape())
        throw DimensionError("gate_residual: " + shape_str(f_c.shape()) + " vs " + shape_str(q.shape()));
    if (gate.numel() != 1) throw DimensionError("gate_residual: gate must be a scalar");
    Tensor g = reshape(gate, {});
    return add(mul(f_c, g), mul(q, sub(Tensor::scalar(1.0), g)));
}

Tensor gate_residual(const Tensor& f_c, const Tensor& q, double gate) {
    if (!(gate >= 0.0 && gate <= 1.0)) throw ContractError("gate_residual: gate must lie in [0, 1]");
    return gate_residual(f_c, q, Tensor::scalar(gate));
}

HosAttn::HosAttn(const HosConfig& config, const std::string& name, std::uint64_t seed) : config_(config) {
    auto enabled = config.flags.enabled();
    for (Stat s : enabled)
        cross_[static_cast<std::size_t>(s)].emplace(config.stat_hidden,
                                                    name + ".cross." + stats::stat_name(s), seed);
    gate_attn_ = GateSelfAttention(config.width, enabled, config.heads, name + ".gate", seed);
    ffn_ = nn::FeedForward(config.width, config.ffn_hidden, config.latent, name + ".ffn", seed);
}

const StatCrossAttention* HosAttn::cross(Stat s) const {
    const auto& c = cross_[static_cast<std::size_t>(s)];
    return c ? &*c : nullptr;
}

HosOutput HosAttn::forward(const Tensor& q, const Tensor& k, const stats::StatGroups& groups, const FrameMask& q_mask,
                           std::optional<double> forced_gate) const {
    HosOutput out;
    RefinedStats refined;
    for (Stat s : config_.flags.enabled()) refined[s] = cross(s)->forward(groups.group(s));
    out.f_c = gate_attn_.forward(q, refined, q_mask);
    out.gate = forced_gate ? Tensor::scalar(*forced_gate) : cosine_gate(q, k);
    if (forced_gate && !(*forced_gate >= 0.0 && *forced_gate <= 1.0))
        throw ContractError("forced gate must lie in [0, 1]");
    out.f_o = gate_residual(out.f_c, q, out.gate);
    out.e_t = mul(ffn_.forward(out.f_o), q_mask.column());
    out.refined = std::move(refined);
    return out;
}

void HosAttn::collect(nn::ParamSet& params) const {
    for (const auto& c : cross_)
        if (c) c->collect(params);
    gate_attn_.collect(params);
    ffn_.collect(params);
}

}  // namespace astf::attn
